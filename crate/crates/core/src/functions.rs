//! Evaluable scalar fields on R^n, radial weight profiles on (0, inf), and
//! the built-in catalogs both are drawn from in tests and CLI configs.

use crate::error::{Error, Result};
use crate::geometry::{AnisotropySpec, Ellipsoid, SphereGrid};
use crate::polar;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Quadrature guidance: indicators force panel splitting at the support
/// boundary, piecewise fields are split at their recorded discontinuities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    Smooth,
    Piecewise,
    Indicator,
}

/// Signed function whose zero crossing marks a discontinuity surface.
pub type BoundaryFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// An evaluable function on R^n with the metadata quadrature needs: an
/// effective support radius (the rho-ball outside which |f| < 1e-14), a
/// smoothness hint, and the discontinuity surfaces.
#[derive(Clone)]
pub struct ScalarField {
    eval: EvalFn,
    pub dim: usize,
    pub support_radius: f64,
    pub hint: Smoothness,
    pub singular_at_origin: bool,
    pub boundaries: Vec<BoundaryFn>,
    pub label: String,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("support_radius", &self.support_radius)
            .field("hint", &self.hint)
            .finish()
    }
}

/// Effective support cutoff: |f| below this counts as zero.
pub const SUPPORT_EPS: f64 = 1e-14;

impl ScalarField {
    pub fn new(
        dim: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        support_radius: f64,
        hint: Smoothness,
        label: impl Into<String>,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            dim,
            support_radius,
            hint,
            singular_at_origin: false,
            boundaries: Vec::new(),
            label: label.into(),
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let support = if c.abs() < SUPPORT_EPS { 0.0 } else { f64::INFINITY };
        Self::new(dim, move |_| c, support, Smoothness::Smooth, format!("const({c})"))
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(dim, 0.0)
    }

    /// chi_{E(center, r)}.
    pub fn indicator_ellipsoid(
        spec: &AnisotropySpec,
        center: Vec<f64>,
        radius: f64,
    ) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::invalid("indicator radius must be positive"));
        }
        if center.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: center.len(),
            });
        }
        let support = if center.iter().all(|c| *c == 0.0) {
            radius
        } else {
            spec.k_quasi() * (spec.rho(&center)? + radius)
        };
        let s = spec.clone();
        let c = center.clone();
        let mut out = Self::new(
            spec.dim(),
            move |x| {
                if s.contains(&c, radius, x) {
                    1.0
                } else {
                    0.0
                }
            },
            support,
            Smoothness::Indicator,
            format!("indicator-ellipsoid(c={center:?}, r={radius})"),
        );
        let s2 = spec.clone();
        let c2 = center;
        out.boundaries.push(Arc::new(move |x: &[f64]| {
            let mut f = 0.0;
            for i in 0..x.len() {
                let d = x[i] - c2[i];
                f += d * d / radius.powf(2.0 * s2.alpha()[i]);
            }
            f - 1.0
        }));
        Ok(out)
    }

    /// exp(-rho(x)^2); effectively supported in a rho-ball of radius
    /// sqrt(ln(1/eps)).
    pub fn gauss_rho(spec: &AnisotropySpec) -> Self {
        let s = spec.clone();
        Self::new(
            spec.dim(),
            move |x| {
                let r = s.rho_unchecked(x);
                (-r * r).exp()
            },
            (-SUPPORT_EPS.ln()).sqrt(),
            Smoothness::Smooth,
            "gauss-rho",
        )
    }

    /// rho(x)^a restricted to E(0, radius).
    pub fn power_rho_truncated(spec: &AnisotropySpec, exponent: f64, radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::invalid("truncation radius must be positive"));
        }
        let s = spec.clone();
        let mut out = Self::new(
            spec.dim(),
            move |x| {
                if !s.contains(&vec![0.0; s.dim()], radius, x) {
                    return 0.0;
                }
                let r = s.rho_unchecked(x);
                if r == 0.0 {
                    if exponent > 0.0 {
                        0.0
                    } else if exponent == 0.0 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    r.powf(exponent)
                }
            },
            radius,
            Smoothness::Piecewise,
            format!("power-rho-truncated(a={exponent}, R={radius})"),
        );
        out.singular_at_origin = exponent < 0.0;
        let s2 = spec.clone();
        out.boundaries.push(Arc::new(move |x: &[f64]| {
            let mut f = 0.0;
            for i in 0..x.len() {
                f += x[i] * x[i] / radius.powf(2.0 * s2.alpha()[i]);
            }
            f - 1.0
        }));
        Ok(out)
    }

    /// ln(rho(x)); the standard unbounded mean-oscillation exemplar.
    pub fn log_rho(spec: &AnisotropySpec) -> Self {
        let s = spec.clone();
        let mut out = Self::new(
            spec.dim(),
            move |x| {
                let r = s.rho_unchecked(x);
                if r == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    r.ln()
                }
            },
            f64::INFINITY,
            Smoothness::Smooth,
            "log-rho",
        );
        out.singular_at_origin = true;
        out
    }

    /// rho(x)^(gamma * lambda); unbounded growth used by Campanato checks.
    pub fn power_campanato(spec: &AnisotropySpec, lambda: f64) -> Self {
        let s = spec.clone();
        let e = s.gamma() * lambda;
        Self::new(
            spec.dim(),
            move |x| s.rho_unchecked(x).powf(e),
            f64::INFINITY,
            Smoothness::Smooth,
            format!("power-campanato(lambda={lambda})"),
        )
    }

    /// Pointwise scaling.
    pub fn scale(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |x| c * inner(x)),
            dim: self.dim,
            support_radius: if c == 0.0 { 0.0 } else { self.support_radius },
            hint: self.hint,
            singular_at_origin: self.singular_at_origin,
            boundaries: self.boundaries.clone(),
            label: format!("{c}*{}", self.label),
        }
    }

    /// Pointwise sum; support and discontinuities are unioned.
    pub fn add(&self, other: &Self) -> Self {
        let a = self.eval.clone();
        let b = other.eval.clone();
        let hint = match (self.hint, other.hint) {
            (Smoothness::Smooth, Smoothness::Smooth) => Smoothness::Smooth,
            (Smoothness::Indicator, Smoothness::Indicator) => Smoothness::Indicator,
            _ => Smoothness::Piecewise,
        };
        let mut boundaries = self.boundaries.clone();
        boundaries.extend(other.boundaries.iter().cloned());
        Self {
            eval: Arc::new(move |x| a(x) + b(x)),
            dim: self.dim,
            support_radius: self.support_radius.max(other.support_radius),
            hint,
            singular_at_origin: self.singular_at_origin || other.singular_at_origin,
            boundaries,
            label: format!("{}+{}", self.label, other.label),
        }
    }

    /// Pointwise product; the support shrinks to the smaller factor.
    pub fn product(&self, other: &Self) -> Self {
        let a = self.eval.clone();
        let b = other.eval.clone();
        let mut boundaries = self.boundaries.clone();
        boundaries.extend(other.boundaries.iter().cloned());
        Self {
            eval: Arc::new(move |x| a(x) * b(x)),
            dim: self.dim,
            support_radius: self.support_radius.min(other.support_radius),
            hint: if self.hint == Smoothness::Smooth && other.hint == Smoothness::Smooth {
                Smoothness::Smooth
            } else {
                Smoothness::Piecewise
            },
            singular_at_origin: self.singular_at_origin || other.singular_at_origin,
            boundaries,
            label: format!("{}*{}", self.label, other.label),
        }
    }

    pub fn affine(terms: &[(f64, ScalarField)]) -> Result<Self> {
        let mut it = terms.iter();
        let first = it
            .next()
            .ok_or_else(|| Error::invalid("affine combination needs at least one term"))?;
        let mut acc = first.1.scale(first.0);
        for (c, f) in it {
            acc = acc.add(&f.scale(*c));
        }
        Ok(acc)
    }
}

/// Catalog identifier for fields, as used in CLI JSON configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params")]
pub enum FieldId {
    #[serde(rename = "indicator-ellipsoid")]
    IndicatorEllipsoid {
        #[serde(default)]
        center: Option<Vec<f64>>,
        radius: f64,
    },
    #[serde(rename = "gauss-rho")]
    GaussRho,
    #[serde(rename = "power-rho-truncated")]
    PowerRhoTruncated { exponent: f64, radius: f64 },
    #[serde(rename = "log-rho")]
    LogRho,
    #[serde(rename = "power-campanato")]
    PowerCampanato { lambda: f64 },
    #[serde(rename = "zero")]
    Zero,
    #[serde(rename = "combo")]
    Combo { terms: Vec<(f64, FieldId)> },
}

/// Instantiate a catalog field against a spec.
pub fn builtin_field(spec: &AnisotropySpec, id: &FieldId) -> Result<ScalarField> {
    match id {
        FieldId::IndicatorEllipsoid { center, radius } => {
            let c = center.clone().unwrap_or_else(|| vec![0.0; spec.dim()]);
            ScalarField::indicator_ellipsoid(spec, c, *radius)
        }
        FieldId::GaussRho => Ok(ScalarField::gauss_rho(spec)),
        FieldId::PowerRhoTruncated { exponent, radius } => {
            ScalarField::power_rho_truncated(spec, *exponent, *radius)
        }
        FieldId::LogRho => Ok(ScalarField::log_rho(spec)),
        FieldId::PowerCampanato { lambda } => Ok(ScalarField::power_campanato(spec, *lambda)),
        FieldId::Zero => Ok(ScalarField::zero(spec.dim())),
        FieldId::Combo { terms } => {
            let built: Result<Vec<(f64, ScalarField)>> = terms
                .iter()
                .map(|(c, id)| Ok((*c, builtin_field(spec, id)?)))
                .collect();
            ScalarField::affine(&built?)
        }
    }
}

/// Parse a field from a name and a JSON params object (CLI entry point).
pub fn builtin_field_by_name(
    spec: &AnisotropySpec,
    name: &str,
    params: &serde_json::Value,
) -> Result<ScalarField> {
    let id: FieldId = serde_json::from_value(tagged(name, params))
        .map_err(|e| Error::invalid(format!("unknown field '{name}': {e}")))?;
    builtin_field(spec, &id)
}

/// Adjacently tagged JSON with the params key dropped when empty, so unit
/// catalog entries parse from a bare name.
fn tagged(name: &str, params: &serde_json::Value) -> serde_json::Value {
    let empty = params.is_null() || params.as_object().map(|m| m.is_empty()).unwrap_or(false);
    if empty {
        serde_json::json!({ "name": name })
    } else {
        serde_json::json!({ "name": name, "params": params })
    }
}

/// Monotonicity hint for radial profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monotonicity {
    Nondecreasing,
    Nonincreasing,
    Unknown,
}

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A weight profile on (0, inf) with values in (0, inf]; +inf encodes the
/// reciprocal-indicator convention of profiles that vanish on a set.
#[derive(Clone)]
pub struct RadialProfile {
    eval: RadialFn,
    pub monotonicity: Monotonicity,
    pub allows_infinite: bool,
    /// Radii where the profile jumps or switches branch; integrators split
    /// panels here.
    pub breakpoints: Vec<f64>,
    pub label: String,
}

impl std::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialProfile")
            .field("label", &self.label)
            .field("monotonicity", &self.monotonicity)
            .finish()
    }
}

impl RadialProfile {
    pub fn new(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        monotonicity: Monotonicity,
        label: impl Into<String>,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            monotonicity,
            allows_infinite: false,
            breakpoints: Vec::new(),
            label: label.into(),
        }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.eval)(r)
    }

    /// r^a.
    pub fn power(a: f64) -> Self {
        let mono = if a >= 0.0 {
            Monotonicity::Nondecreasing
        } else {
            Monotonicity::Nonincreasing
        };
        Self::new(move |r| r.powf(a), mono, format!("power({a})"))
    }

    /// The Morrey weight r^((lambda - gamma)/p).
    pub fn morrey(lambda: f64, p: f64, gamma: f64) -> Result<Self> {
        if p < 1.0 {
            return Err(Error::invalid("p must be >= 1"));
        }
        Ok(Self::power((lambda - gamma) / p))
    }

    /// Reciprocal of chi_(1,inf)(r) r^(gamma/p - beta): +inf on (0, 1],
    /// r^(beta - gamma/p) beyond. Requires 0 < beta < gamma/p.
    pub fn remark_phi1(beta: f64, p: f64, gamma: f64) -> Result<Self> {
        check_remark_beta(beta, p, gamma)?;
        let e = beta - gamma / p;
        let mut out = Self::new(
            move |r| if r <= 1.0 { f64::INFINITY } else { r.powf(e) },
            Monotonicity::Nonincreasing,
            format!("remark-phi1(beta={beta}, p={p}, gamma={gamma})"),
        );
        out.allows_infinite = true;
        out.breakpoints.push(1.0);
        Ok(out)
    }

    /// r^(-gamma/p) (1 + r^beta). Requires 0 < beta < gamma/p.
    pub fn remark_phi2(beta: f64, p: f64, gamma: f64) -> Result<Self> {
        check_remark_beta(beta, p, gamma)?;
        let e = gamma / p;
        Ok(Self::new(
            move |r| r.powf(-e) * (1.0 + r.powf(beta)),
            Monotonicity::Nonincreasing,
            format!("remark-phi2(beta={beta}, p={p}, gamma={gamma})"),
        ))
    }

    /// chi_(lo, hi); used as the Hardy weight omega.
    pub fn indicator(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo) {
            return Err(Error::invalid("indicator interval must satisfy 0 <= lo < hi"));
        }
        let mut out = Self::new(
            move |r| if r > lo && r < hi { 1.0 } else { 0.0 },
            Monotonicity::Unknown,
            format!("indicator({lo}, {hi})"),
        );
        if lo > 0.0 {
            out.breakpoints.push(lo);
        }
        if hi.is_finite() {
            out.breakpoints.push(hi);
        }
        Ok(out)
    }

    /// r^a chi_(cut, inf).
    pub fn power_tail(a: f64, cut: f64) -> Result<Self> {
        if cut < 0.0 {
            return Err(Error::invalid("cut must be nonnegative"));
        }
        let mut out = Self::new(
            move |r| if r > cut { r.powf(a) } else { 0.0 },
            Monotonicity::Unknown,
            format!("power-tail(a={a}, cut={cut})"),
        );
        if cut > 0.0 {
            out.breakpoints.push(cut);
        }
        Ok(out)
    }

    /// 1/phi with the conventions 1/inf = 0 and 1/0 = inf.
    pub fn reciprocal(&self) -> Self {
        let inner = self.eval.clone();
        let mono = match self.monotonicity {
            Monotonicity::Nondecreasing => Monotonicity::Nonincreasing,
            Monotonicity::Nonincreasing => Monotonicity::Nondecreasing,
            Monotonicity::Unknown => Monotonicity::Unknown,
        };
        Self {
            eval: Arc::new(move |r| {
                let v = inner(r);
                if v == 0.0 {
                    f64::INFINITY
                } else if v.is_infinite() {
                    0.0
                } else {
                    1.0 / v
                }
            }),
            monotonicity: mono,
            allows_infinite: true,
            breakpoints: self.breakpoints.clone(),
            label: format!("1/({})", self.label),
        }
    }

    /// phi(r) * r^e.
    pub fn times_power(&self, e: f64) -> Self {
        let inner = self.eval.clone();
        let mono = match (self.monotonicity, e) {
            (m, 0.0) => m,
            (Monotonicity::Nondecreasing, e) if e > 0.0 => Monotonicity::Nondecreasing,
            (Monotonicity::Nonincreasing, e) if e < 0.0 => Monotonicity::Nonincreasing,
            _ => Monotonicity::Unknown,
        };
        Self {
            eval: Arc::new(move |r| inner(r) * r.powf(e)),
            monotonicity: mono,
            allows_infinite: self.allows_infinite,
            breakpoints: self.breakpoints.clone(),
            label: format!("({})*r^{e}", self.label),
        }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c <= 0.0 {
            return Err(Error::invalid("profile scale must be positive"));
        }
        let inner = self.eval.clone();
        Ok(Self {
            eval: Arc::new(move |r| c * inner(r)),
            monotonicity: self.monotonicity,
            allows_infinite: self.allows_infinite,
            breakpoints: self.breakpoints.clone(),
            label: format!("{c}*({})", self.label),
        })
    }
}

fn check_remark_beta(beta: f64, p: f64, gamma: f64) -> Result<()> {
    if p < 1.0 || gamma <= 0.0 {
        return Err(Error::invalid("need p >= 1 and gamma > 0"));
    }
    if !(beta > 0.0 && beta < gamma / p) {
        return Err(Error::invalid(format!(
            "beta must lie in (0, gamma/p) = (0, {}), got {beta}",
            gamma / p
        )));
    }
    Ok(())
}

/// Catalog identifier for profiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params")]
pub enum ProfileId {
    #[serde(rename = "power")]
    Power { exponent: f64 },
    #[serde(rename = "morrey")]
    Morrey { lambda: f64, p: f64, gamma: f64 },
    #[serde(rename = "remark-phi1")]
    RemarkPhi1 { beta: f64, p: f64, gamma: f64 },
    #[serde(rename = "remark-phi2")]
    RemarkPhi2 { beta: f64, p: f64, gamma: f64 },
    #[serde(rename = "indicator")]
    Indicator { lo: f64, hi: f64 },
    #[serde(rename = "power-tail")]
    PowerTail { exponent: f64, cut: f64 },
}

pub fn builtin_profile(id: &ProfileId) -> Result<RadialProfile> {
    match id {
        ProfileId::Power { exponent } => Ok(RadialProfile::power(*exponent)),
        ProfileId::Morrey { lambda, p, gamma } => RadialProfile::morrey(*lambda, *p, *gamma),
        ProfileId::RemarkPhi1 { beta, p, gamma } => RadialProfile::remark_phi1(*beta, *p, *gamma),
        ProfileId::RemarkPhi2 { beta, p, gamma } => RadialProfile::remark_phi2(*beta, *p, *gamma),
        ProfileId::Indicator { lo, hi } => RadialProfile::indicator(*lo, *hi),
        ProfileId::PowerTail { exponent, cut } => RadialProfile::power_tail(*exponent, *cut),
    }
}

pub fn builtin_profile_by_name(name: &str, params: &serde_json::Value) -> Result<RadialProfile> {
    let id: ProfileId = serde_json::from_value(tagged(name, params))
        .map_err(|e| Error::invalid(format!("unknown profile '{name}': {e}")))?;
    builtin_profile(&id)
}

/// Quadrature average of `f` over an ellipsoid.
pub fn mean_on_ellipsoid(
    spec: &AnisotropySpec,
    f: &ScalarField,
    e: &Ellipsoid,
    grid: &SphereGrid,
) -> Result<f64> {
    let total = polar::integrate_over_ellipsoid(spec, &e.center, e.radius, f, grid)?;
    if !total.is_finite() {
        return Err(Error::eval(format!(
            "non-finite integral of {} over ellipsoid",
            f.label
        )));
    }
    let measure = spec.unit_volume()? * e.radius.powf(spec.gamma());
    Ok(total / measure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p0() -> AnisotropySpec {
        AnisotropySpec::parabolic(2).unwrap()
    }

    #[test]
    fn field_catalog_examples() {
        let spec = p0();
        let ind = builtin_field(
            &spec,
            &FieldId::IndicatorEllipsoid {
                center: None,
                radius: 1.0,
            },
        )
        .unwrap();
        assert_eq!(ind.support_radius, 1.0);
        assert_eq!(ind.eval(&[0.5, 0.0]), 1.0);
        assert_eq!(ind.eval(&[2.0, 0.0]), 0.0);

        let gauss = builtin_field(&spec, &FieldId::GaussRho).unwrap();
        // rho = 1 on the first axis
        assert_relative_eq!(gauss.eval(&[1.0, 0.0]), (-1.0f64).exp(), max_relative = 1e-12);

        let log = builtin_field(&spec, &FieldId::LogRho).unwrap();
        assert!(log.eval(&[1.0, 0.0]).abs() < 1e-12);

        assert!(builtin_field_by_name(&spec, "no-such-field", &serde_json::json!({})).is_err());
    }

    #[test]
    fn profile_catalog_examples() {
        let pw = builtin_profile(&ProfileId::Power { exponent: -1.0 }).unwrap();
        assert_relative_eq!(pw.eval(2.0), 0.5);

        let phi2 = RadialProfile::remark_phi2(0.5, 2.0, 3.0).unwrap();
        assert_relative_eq!(phi2.eval(1.0), 2.0, max_relative = 1e-14);

        let phi1 = RadialProfile::remark_phi1(0.5, 2.0, 3.0).unwrap();
        assert!(phi1.eval(0.5).is_infinite());
        assert_relative_eq!(phi1.eval(4.0), 4.0f64.powf(-1.0), max_relative = 1e-14);

        // beta outside (0, gamma/p) is rejected
        assert!(RadialProfile::remark_phi1(2.0, 2.0, 3.0).is_err());
        assert!(RadialProfile::remark_phi2(0.0, 2.0, 3.0).is_err());
    }

    #[test]
    fn mean_examples() {
        let spec = p0();
        let grid = SphereGrid::for_spec(&spec, 256).unwrap();
        let e2 = Ellipsoid::centered(2, 2.0).unwrap();

        let c = ScalarField::constant(2, 3.5);
        assert_relative_eq!(
            mean_on_ellipsoid(&spec, &c, &e2, &grid).unwrap(),
            3.5,
            max_relative = 1e-13
        );

        let ind = ScalarField::indicator_ellipsoid(&spec, vec![0.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(
            mean_on_ellipsoid(&spec, &ind, &e2, &grid).unwrap(),
            0.125,
            max_relative = 1e-9
        );

        let odd = ScalarField::new(2, |x| x[0], 1.0, Smoothness::Smooth, "x1");
        let e1 = Ellipsoid::centered(2, 1.0).unwrap();
        assert!(mean_on_ellipsoid(&spec, &odd, &e1, &grid).unwrap().abs() < 1e-12);
    }

    #[test]
    fn support_radius_honored() {
        let spec = p0();
        let grid = SphereGrid::for_spec(&spec, 128).unwrap();
        let ind = ScalarField::indicator_ellipsoid(&spec, vec![0.0, 0.0], 1.0).unwrap();
        let inside =
            polar::integrate_over_ellipsoid(&spec, &[0.0, 0.0], 1.0, &ind, &grid).unwrap();
        let beyond =
            polar::integrate_over_ellipsoid(&spec, &[0.0, 0.0], 5.0, &ind, &grid).unwrap();
        assert_relative_eq!(inside, beyond, max_relative = 1e-12);
    }

    #[test]
    fn mean_linear_in_f() {
        let spec = p0();
        let grid = SphereGrid::for_spec(&spec, 128).unwrap();
        let e = Ellipsoid::centered(2, 1.5).unwrap();
        let g = ScalarField::gauss_rho(&spec);
        let ind = ScalarField::indicator_ellipsoid(&spec, vec![0.0, 0.0], 1.0).unwrap();
        let combo = ScalarField::affine(&[(2.0, g.clone()), (-0.5, ind.clone())]).unwrap();
        let m = mean_on_ellipsoid(&spec, &combo, &e, &grid).unwrap();
        let mg = mean_on_ellipsoid(&spec, &g, &e, &grid).unwrap();
        let mi = mean_on_ellipsoid(&spec, &ind, &e, &grid).unwrap();
        assert_relative_eq!(m, 2.0 * mg - 0.5 * mi, max_relative = 1e-10);
    }
}
