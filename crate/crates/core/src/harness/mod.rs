//! Turns the boundedness statements into quantitative checks over the
//! built-in catalogs: local norm estimates for the singular operator and
//! its commutator, the weak-type variant, the mean-oscillation growth
//! lemma, whole-space operator norm ratios, the weight-pair conditions,
//! and the Hardy best-constant machinery, each reported as ratio tables
//! against calibration-frozen caps.

pub mod calibration;
pub mod io;
pub mod suites;

use crate::error::{Error, Result};
use crate::functions::{builtin_field, FieldId, ScalarField};
use crate::geometry::{AnisotropySpec, Ellipsoid};
use crate::kernels::{builtin_kernel, KernelId, RoughKernel};
use crate::operators::{self, QuadratureScheme};
use crate::polar::{collect_samples, Orientation, SampleRequest};
use crate::quad::{log_grid, NeumaierSum};
use crate::spaces::{self, NormScheme};
use crate::SphereGrid;
use serde::{Deserialize, Serialize};

/// Which exponent branch of the estimates a case runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// s' <= p: the plain kernel exponent.
    SPrimeLeP,
    /// p < s: the gamma/s-shifted exponents.
    PLtS,
}

mod ext_f64 {
    //! f64 (de)serialization that survives infinities as strings.
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else if *v < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Num(v) => v,
            Repr::Str(s) => match s.as_str() {
                "inf" => f64::INFINITY,
                "-inf" => f64::NEG_INFINITY,
                _ => f64::NAN,
            },
        })
    }
}

/// One theorem-check configuration over the catalogs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationCase {
    pub id: String,
    pub spec: AnisotropySpec,
    pub kernel: KernelId,
    pub f: FieldId,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub b: Option<FieldId>,
    pub x0: Vec<f64>,
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p2: Option<f64>,
    /// Declared sphere integrability of the kernel.
    #[serde(with = "ext_f64")]
    pub s: f64,
    pub lambda: f64,
    pub r_grid: Vec<f64>,
    pub scheme: QuadratureScheme,
    /// Window of the Campanato norm of the symbol.
    pub norm_window: (f64, f64),
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub branch: Option<Branch>,
}

impl VerificationCase {
    pub fn resolve_branch(&self) -> Result<Branch> {
        if let Some(b) = self.branch {
            return Ok(b);
        }
        let s_prime = if self.s.is_infinite() {
            1.0
        } else {
            self.s / (self.s - 1.0)
        };
        if s_prime <= self.p {
            Ok(Branch::SPrimeLeP)
        } else if self.p < self.s {
            Ok(Branch::PLtS)
        } else {
            Err(Error::invalid(format!(
                "case {}: neither s' <= p nor p < s holds (s = {}, p = {})",
                self.id, self.s, self.p
            )))
        }
    }

    fn validate_commutator(&self) -> Result<(f64, f64)> {
        let (p1, p2) = match (self.p1, self.p2) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::invalid(format!(
                    "case {}: commutator cases need p1 and p2",
                    self.id
                )))
            }
        };
        if (1.0 / self.p - 1.0 / p1 - 1.0 / p2).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "case {}: 1/p = 1/p1 + 1/p2 violated",
                self.id
            )));
        }
        Ok((p1, p2))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioRow {
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Per-case outcome: both sides on the shared r grid, the worst and median
/// ratio, and the pass flag against a frozen cap.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioReport {
    pub case_id: String,
    pub rows: Vec<RatioRow>,
    pub max_ratio: f64,
    pub median_ratio: f64,
    /// max_ratio / median_ratio; 1 when everything vanished.
    pub stability: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cap: Option<f64>,
    pub pass: bool,
    /// Set when a principal value failed to converge somewhere; the case is
    /// then not counted as failed.
    pub inconclusive: bool,
    pub k_used: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub branch: Option<Branch>,
}

impl RatioReport {
    fn assemble(
        case_id: &str,
        rows: Vec<RatioRow>,
        cap: Option<f64>,
        inconclusive: bool,
        k_used: f64,
        branch: Option<Branch>,
    ) -> Self {
        let mut ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let max_ratio = ratios.last().copied().unwrap_or(0.0);
        let median_ratio = if ratios.is_empty() {
            0.0
        } else {
            ratios[ratios.len() / 2]
        };
        let stability = if max_ratio == 0.0 {
            1.0
        } else if median_ratio > 0.0 {
            max_ratio / median_ratio
        } else {
            f64::INFINITY
        };
        let pass = !inconclusive && cap.map(|c| max_ratio <= c).unwrap_or(true);
        Self {
            case_id: case_id.to_string(),
            rows,
            max_ratio,
            median_ratio,
            stability,
            cap,
            pass,
            inconclusive,
            k_used,
            branch,
        }
    }
}

/// Norms of f over the ellipsoids E(x0, t) on a dense t ladder, with
/// saturation beyond the support horizon; log-log interpolated.
struct NormTable {
    ts: Vec<f64>,
    norms: Vec<f64>,
    saturation: f64,
    horizon: f64,
}

impl NormTable {
    fn build(
        spec: &AnisotropySpec,
        f: &ScalarField,
        x0: &[f64],
        p: f64,
        t_lo: f64,
        sphere_nodes: usize,
    ) -> Result<Self> {
        let horizon = spec.k_quasi() * (spec.rho_unchecked(x0) + f.support_radius.min(1e6)) + 1e-9;
        let grid = SphereGrid::for_spec(spec, sphere_nodes)?;
        let mut bounds = vec![0.0];
        bounds.extend(log_grid(t_lo.min(horizon / 2.0), horizon, 40));
        let mut req = SampleRequest::for_field(spec, x0, &bounds, &grid, Orientation::FromCenter, f);
        req.gl_points = 4;
        let samples = collect_samples(&req, |_| 1.0, |y| f.eval(y))?;
        let prefix = samples.prefix_sums(|n| n.weight * n.value.abs().powf(p));
        let ts: Vec<f64> = samples.bounds[1..].to_vec();
        let norms: Vec<f64> = prefix.iter().map(|v| v.max(0.0).powf(1.0 / p)).collect();
        let saturation = *norms.last().unwrap();
        Ok(Self {
            ts,
            norms,
            saturation,
            horizon,
        })
    }

    fn query(&self, t: f64) -> f64 {
        if t >= self.horizon {
            return self.saturation;
        }
        if t <= self.ts[0] {
            // small-ball decay: pessimistic power extrapolation from the
            // first two table entries
            if self.norms[0] <= 0.0 || self.norms[1] <= 0.0 {
                return 0.0;
            }
            let slope = (self.norms[1] / self.norms[0]).ln() / (self.ts[1] / self.ts[0]).ln();
            return self.norms[0] * (t / self.ts[0]).powf(slope.max(0.0));
        }
        let idx = self.ts.partition_point(|&u| u <= t).min(self.ts.len() - 1);
        let (t0, t1) = (self.ts[idx - 1], self.ts[idx]);
        let (n0, n1) = (self.norms[idx - 1], self.norms[idx]);
        if n0 <= 0.0 || n1 <= 0.0 {
            let w = (t - t0) / (t1 - t0);
            return n0 + w * (n1 - n0);
        }
        let w = (t / t0).ln() / (t1 / t0).ln();
        (n0.ln() + w * (n1.ln() - n0.ln())).exp()
    }
}

/// Closed-form tail of int_T^inf (1 + ln(t/r))^{opt} t^(-a-1) dt.
fn saturated_tail(t_horizon: f64, a: f64, log_anchor: Option<f64>) -> f64 {
    if a <= 0.0 {
        return f64::INFINITY;
    }
    let base = t_horizon.powf(-a) / a;
    match log_anchor {
        None => base,
        Some(r) => base * (1.0 + (t_horizon / r).ln() + 1.0 / a),
    }
}

/// RHS tail integral int_{2kr}^inf w(t) ||f||_{L_p(E(x0,t))} dt with
/// w(t) = (1 + ln(t/r))^{opt} t^(exponent - 1), via the norm table plus the
/// exact saturated tail.
fn rhs_tail_integral(
    table: &NormTable,
    start: f64,
    exponent: f64,
    log_anchor: Option<f64>,
) -> f64 {
    let a = -exponent;
    if start >= table.horizon {
        return table.saturation * saturated_tail(start, a, log_anchor);
    }
    let grid = log_grid(start, table.horizon, 60);
    let mut acc = NeumaierSum::new();
    let weight = |t: f64| {
        let lw = match log_anchor {
            None => 1.0,
            Some(r) => 1.0 + (t / r).ln(),
        };
        lw * t.powf(exponent) * table.query(t)
    };
    for w in grid.windows(2) {
        // trapezoid in ln t of t * integrand(t)
        let (ta, tb) = (w[0], w[1]);
        acc.add(0.5 * (weight(ta) + weight(tb)) * (tb / ta).ln());
    }
    acc.add(table.saturation * saturated_tail(table.horizon, a, log_anchor));
    acc.total()
}

struct BuiltCase {
    kernel: RoughKernel,
    f: ScalarField,
    b: Option<ScalarField>,
}

fn build_case(case: &VerificationCase) -> Result<BuiltCase> {
    let kernel = builtin_kernel(&case.spec, &case.kernel)?;
    if !kernel.cancellation_checked() {
        return Err(Error::precondition(format!(
            "case {}: kernel '{}' is not cancellation-projected",
            case.id, case.kernel.0
        )));
    }
    let f = builtin_field(&case.spec, &case.f)?;
    let b = match &case.b {
        Some(id) => Some(builtin_field(&case.spec, id)?),
        None => None,
    };
    Ok(BuiltCase { kernel, f, b })
}

/// Sample an operator over the nested ellipsoids E(x0, r_j) and return the
/// per-radius L_p norms (or the raw weighted samples for weak norms).
/// The radial segment boundaries are exactly the case radii, so each norm
/// is an exact panel integral of the sampled values.
struct OperatorSamples {
    nodes_per_r: Vec<Vec<(f64, f64)>>,
    converged: bool,
}

fn operator_samples(
    case: &VerificationCase,
    mut op: impl FnMut(&[f64]) -> Result<(f64, bool)>,
) -> Result<OperatorSamples> {
    let spec = &case.spec;
    let grid = SphereGrid::for_spec(spec, 12)?;
    let mut bounds = vec![0.0];
    bounds.extend_from_slice(&case.r_grid);
    let mut req = SampleRequest::new(spec, &case.x0, &bounds, &grid, Orientation::FromCenter);
    req.gl_points = 3;
    req.head_panels = 5;
    let mut converged = true;
    let mut failure: Option<Error> = None;
    let samples = collect_samples(&req, |_| 1.0, |y| match op(y) {
        Ok((v, conv)) => {
            converged &= conv;
            v
        }
        Err(e) => {
            failure = Some(e);
            0.0
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let mut nodes_per_r = Vec::with_capacity(case.r_grid.len());
    for j in 0..samples.segments() {
        nodes_per_r.push(
            samples
                .nodes_up_to(j)
                .iter()
                .map(|n| (n.value, n.weight))
                .collect(),
        );
    }
    Ok(OperatorSamples {
        nodes_per_r,
        converged,
    })
}

fn lp_from_samples(nodes: &[(f64, f64)], p: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    for (v, w) in nodes {
        acc.add(w * v.abs().powf(p));
    }
    acc.total().max(0.0).powf(1.0 / p)
}

/// Local estimate of the singular operator: on every ellipsoid E(x0, r) the
/// L_p norm of T f is compared to the kernel-exponent tail integral of the
/// data norms.
pub fn verify_local_estimate(case: &VerificationCase, cap: Option<f64>) -> Result<RatioReport> {
    let built = build_case(case)?;
    let branch = case.resolve_branch()?;
    let spec = &case.spec;
    let gamma = spec.gamma();
    let p = case.p;
    let k = spec.k_quasi();

    let samples = operator_samples(case, |y| {
        let r = operators::singular_pv(&built.kernel, &built.f, y, &case.scheme)?;
        Ok((r.value, r.pv_converged))
    })?;
    let table = NormTable::build(
        spec,
        &built.f,
        &case.x0,
        p,
        2.0 * k * case.r_grid[0] * 0.5,
        case.scheme.sphere_nodes,
    )?;

    let mut rows = Vec::with_capacity(case.r_grid.len());
    for (j, &r) in case.r_grid.iter().enumerate() {
        let lhs = lp_from_samples(&samples.nodes_per_r[j], p);
        let (prefactor, exponent) = match branch {
            Branch::SPrimeLeP => (r.powf(gamma / p), -gamma / p - 1.0),
            Branch::PLtS => (
                r.powf(gamma / p - gamma / case.s),
                gamma / case.s - gamma / p - 1.0,
            ),
        };
        let rhs = prefactor * rhs_tail_integral(&table, 2.0 * k * r, exponent + 1.0, None);
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        rows.push(RatioRow { r, lhs, rhs, ratio });
    }
    Ok(RatioReport::assemble(
        &case.id,
        rows,
        cap,
        !samples.converged,
        k,
        Some(branch),
    ))
}

/// Weak-type variant at p = 1: the weak norm of T f against the
/// gamma-exponent tail of L_1 data norms.
pub fn verify_weak_type(case: &VerificationCase, cap: Option<f64>) -> Result<RatioReport> {
    if (case.p - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("weak-type cases require p = 1"));
    }
    let built = build_case(case)?;
    let spec = &case.spec;
    let gamma = spec.gamma();
    let k = spec.k_quasi();

    let samples = operator_samples(case, |y| {
        let r = operators::singular_pv(&built.kernel, &built.f, y, &case.scheme)?;
        Ok((r.value, r.pv_converged))
    })?;
    let table = NormTable::build(
        spec,
        &built.f,
        &case.x0,
        1.0,
        2.0 * k * case.r_grid[0] * 0.5,
        case.scheme.sphere_nodes,
    )?;

    let mut rows = Vec::with_capacity(case.r_grid.len());
    for (j, &r) in case.r_grid.iter().enumerate() {
        let pairs: Vec<(f64, f64)> = samples.nodes_per_r[j]
            .iter()
            .map(|(v, w)| (v.abs(), *w))
            .collect();
        let lhs = spaces::weak_from_samples(&pairs, 1.0);
        let rhs = r.powf(gamma) * rhs_tail_integral(&table, 2.0 * k * r, -gamma, None);
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        rows.push(RatioRow { r, lhs, rhs, ratio });
    }
    Ok(RatioReport::assemble(
        &case.id,
        rows,
        cap,
        !samples.converged,
        k,
        None,
    ))
}

/// Commutator estimate: the L_p norm of [b, T] f against the log-weighted
/// tail integral scaled by the Campanato norm of the symbol.
pub fn verify_commutator_estimate(
    case: &VerificationCase,
    cap: Option<f64>,
) -> Result<RatioReport> {
    let built = build_case(case)?;
    let (p1, p2) = case.validate_commutator()?;
    let b = built
        .b
        .as_ref()
        .ok_or_else(|| Error::invalid(format!("case {}: commutator needs a symbol", case.id)))?;
    let branch = if case.branch.is_some() {
        case.branch.unwrap()
    } else {
        let s_prime = if case.s.is_infinite() {
            1.0
        } else {
            case.s / (case.s - 1.0)
        };
        if s_prime <= case.p {
            Branch::SPrimeLeP
        } else if p1 < case.s {
            Branch::PLtS
        } else {
            return Err(Error::invalid(format!(
                "case {}: neither s' <= p nor p1 < s holds",
                case.id
            )));
        }
    };
    let spec = &case.spec;
    let gamma = spec.gamma();
    let p = case.p;
    let k = spec.k_quasi();
    let lambda = case.lambda;

    let mut norm_scheme = NormScheme::with_window(case.norm_window.0, case.norm_window.1);
    norm_scheme.nodes_per_decade = 10;
    norm_scheme.sphere_nodes = 64;
    let b_norm = spaces::local_campanato_norm(spec, b, p2, lambda, &case.x0, &norm_scheme)?.value;

    let samples = operator_samples(case, |y| {
        let r = operators::commutator_singular(b, &built.kernel, &built.f, y, &case.scheme)?;
        Ok((r.value, r.pv_converged))
    })?;
    let table = NormTable::build(
        spec,
        &built.f,
        &case.x0,
        p1,
        2.0 * k * case.r_grid[0] * 0.5,
        case.scheme.sphere_nodes,
    )?;

    let mut rows = Vec::with_capacity(case.r_grid.len());
    for (j, &r) in case.r_grid.iter().enumerate() {
        let lhs = lp_from_samples(&samples.nodes_per_r[j], p);
        let (prefactor, exponent) = match branch {
            Branch::SPrimeLeP => (r.powf(gamma / p), gamma * lambda - gamma / p1 - 1.0),
            Branch::PLtS => (
                r.powf(gamma / p - gamma / case.s),
                gamma * lambda - gamma / p1 + gamma / case.s - 1.0,
            ),
        };
        let rhs =
            b_norm * prefactor * rhs_tail_integral(&table, 2.0 * k * r, exponent + 1.0, Some(r));
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        rows.push(RatioRow { r, lhs, rhs, ratio });
    }
    Ok(RatioReport::assemble(
        &case.id,
        rows,
        cap,
        !samples.converged,
        k,
        Some(branch),
    ))
}

/// One (r1, r2) row of the oscillation-growth check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lemma4Row {
    pub r1: f64,
    pub r2: f64,
    pub lhs_a: f64,
    pub lhs_b: f64,
    pub lhs_c: f64,
    pub quotient_a: f64,
    pub quotient_b: f64,
    pub quotient_c: f64,
    /// lhs_b / ln(r1/r2): flat when the ellipsoid means grow
    /// logarithmically.
    pub log_slope_b: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lemma4Report {
    pub rows: Vec<Lemma4Row>,
    pub b_norm: f64,
    /// Fitted constants: the max quotient per part (a), (b), (c).
    pub fitted_c: [f64; 3],
    /// Fitted constants on the 10x widened pair set.
    pub fitted_c_wide: [f64; 3],
    /// max/min of the (b) log-slope across rows.
    pub slope_spread: f64,
    pub pass: bool,
}

/// Oscillation growth of a symbol across radius pairs: the three bounded
/// quantities and their envelopes, with the fitted constants required to be
/// stable under a ten-fold widening of the pair set.
pub fn verify_lemma4(
    spec: &AnisotropySpec,
    b_id: &FieldId,
    p: f64,
    lambda: f64,
    r_pairs: &[(f64, f64)],
    norm_window: (f64, f64),
) -> Result<Lemma4Report> {
    let b = builtin_field(spec, b_id)?;
    let gamma = spec.gamma();
    if !(0.0..1.0 / gamma).contains(&lambda) {
        return Err(Error::invalid("lambda must lie in [0, 1/gamma)"));
    }
    for &(r1, r2) in r_pairs {
        if !(r1 >= r2 && r2 > 0.0) {
            return Err(Error::invalid("pairs must satisfy r1 >= r2 > 0"));
        }
    }
    let mut norm_scheme = NormScheme::with_window(norm_window.0, norm_window.1);
    norm_scheme.nodes_per_decade = 10;
    let origin = vec![0.0; spec.dim()];
    let b_norm = spaces::local_campanato_norm(spec, &b, p, lambda, &origin, &norm_scheme)?.value;

    let rows = lemma4_rows(spec, &b, p, lambda, r_pairs, b_norm)?;
    let wide_pairs: Vec<(f64, f64)> = r_pairs
        .iter()
        .flat_map(|&(r1, r2)| [(r1 * 10.0, r2 * 10.0), (r1 / 10.0, r2 / 10.0)])
        .collect();
    let rows_wide = lemma4_rows(spec, &b, p, lambda, &wide_pairs, b_norm)?;

    let fit = |rows: &[Lemma4Row]| -> [f64; 3] {
        let mut c = [0.0f64; 3];
        for row in rows {
            c[0] = c[0].max(row.quotient_a);
            c[1] = c[1].max(row.quotient_b);
            c[2] = c[2].max(row.quotient_c);
        }
        c
    };
    let fitted_c = fit(&rows);
    let fitted_c_wide = fit(&rows_wide);

    let slopes: Vec<f64> = rows
        .iter()
        .filter(|r| r.r1 > r.r2 * (1.0 + 1e-9))
        .map(|r| r.log_slope_b)
        .collect();
    let slope_spread = if slopes.is_empty() {
        1.0
    } else {
        let max = slopes.iter().cloned().fold(f64::MIN, f64::max);
        let min = slopes.iter().cloned().fold(f64::MAX, f64::min);
        if min > 0.0 {
            max / min
        } else {
            f64::INFINITY
        }
    };
    let stable = (0..3).all(|i| {
        let (a, b) = (fitted_c[i], fitted_c_wide[i]);
        if a == 0.0 && b == 0.0 {
            true
        } else {
            b <= a * 1.2 && a <= b * 1.2
        }
    });
    let pass = stable && slope_spread <= 1.2;
    Ok(Lemma4Report {
        rows,
        b_norm,
        fitted_c,
        fitted_c_wide,
        slope_spread,
        pass,
    })
}

fn lemma4_rows(
    spec: &AnisotropySpec,
    b: &ScalarField,
    p: f64,
    lambda: f64,
    r_pairs: &[(f64, f64)],
    b_norm: f64,
) -> Result<Vec<Lemma4Row>> {
    let gamma = spec.gamma();
    let grid = SphereGrid::for_spec(spec, 128)?;
    let origin = vec![0.0; spec.dim()];
    let upsilon = spec.unit_volume()?;
    let mean_at = |r: f64| -> Result<f64> {
        crate::functions::mean_on_ellipsoid(
            spec,
            b,
            &Ellipsoid::new(origin.clone(), r)?,
            &grid,
        )
    };
    let osc_p = |r: f64, c: f64| -> Result<f64> {
        let shifted = ScalarField::new(
            spec.dim(),
            {
                let b = b.clone();
                move |y: &[f64]| (b.eval(y) - c).abs().powf(p)
            },
            f64::INFINITY,
            b.hint,
            "osc",
        );
        let mut withb = shifted;
        withb.boundaries = b.boundaries.clone();
        withb.singular_at_origin = b.singular_at_origin;
        crate::polar::integrate_over_ellipsoid(spec, &origin, r, &withb, &grid)
    };
    let mut rows = Vec::with_capacity(r_pairs.len());
    for &(r1, r2) in r_pairs {
        let m1 = mean_at(r1)?;
        let m2 = mean_at(r2)?;
        let e1 = upsilon * r1.powf(gamma);
        let log_factor = 1.0 + (r1 / r2).ln();
        let lhs_a = (osc_p(r1, m2)? / e1.powf(1.0 + lambda * p)).powf(1.0 / p);
        let lhs_b = (m1 - m2).abs();
        let lhs_c = osc_p(r1, m1)?.powf(1.0 / p);
        let env_a = log_factor * b_norm;
        let env_b = log_factor * e1.powf(lambda) * b_norm;
        let env_c = log_factor * r1.powf(gamma / p + gamma * lambda) * b_norm;
        let log_slope_b = if r1 > r2 * (1.0 + 1e-12) {
            lhs_b / (r1 / r2).ln()
        } else {
            0.0
        };
        rows.push(Lemma4Row {
            r1,
            r2,
            lhs_a,
            lhs_b,
            lhs_c,
            quotient_a: if env_a > 0.0 { lhs_a / env_a } else { 0.0 },
            quotient_b: if env_b > 0.0 { lhs_b / env_b } else { 0.0 },
            quotient_c: if env_c > 0.0 { lhs_c / env_c } else { 0.0 },
            log_slope_b,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LpBoundRow {
    pub field: String,
    pub norm_f: f64,
    pub norm_tf: f64,
    pub ratio_t: f64,
    pub norm_mf: f64,
    pub ratio_m: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LpBoundReport {
    pub rows: Vec<LpBoundRow>,
    pub max_ratio_t: f64,
    pub max_ratio_m: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cap_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cap_m: Option<f64>,
    pub pass: bool,
}

/// Whole-space operator norm ratios ||T f||_p / ||f||_p and
/// ||M f||_p / ||f||_p over the catalog.
pub fn verify_lp_bound(
    spec: &AnisotropySpec,
    kernel_id: &KernelId,
    p: f64,
    fields: &[(String, FieldId)],
    scheme: &QuadratureScheme,
    caps: Option<(f64, f64)>,
) -> Result<LpBoundReport> {
    let kernel = builtin_kernel(spec, kernel_id)?;
    if !kernel.cancellation_checked() {
        return Err(Error::precondition(
            "lp-bound kernel must be cancellation-projected",
        ));
    }
    let norm_scheme = NormScheme::default();
    let mut rows = Vec::with_capacity(fields.len());
    for (label, fid) in fields {
        let f = builtin_field(spec, fid)?;
        let norm_f = spaces::lp_norm(spec, &f, p, &spaces::Region::WholeSpace, &norm_scheme)?;
        if norm_f == 0.0 {
            continue;
        }
        let r_big = spec.k_quasi() * 8.0 * f.support_radius.max(1.0).min(100.0);
        let region = Ellipsoid::centered(spec.dim(), r_big)?;
        let tf_nodes = spaces::samples_on_ellipsoid(spec, &region, 24, 4, 24, |y| {
            Ok(operators::singular_pv(&kernel, &f, y, scheme)?.value)
        })?;
        let mut acc = NeumaierSum::new();
        for n in &tf_nodes {
            acc.add(n.weight * n.value.abs().powf(p));
        }
        let norm_tf = acc.total().max(0.0).powf(1.0 / p);
        let mf_nodes = spaces::samples_on_ellipsoid(spec, &region, 24, 4, 24, |y| {
            Ok(operators::maximal(&kernel, &f, y, scheme)?.value)
        })?;
        let mut acc = NeumaierSum::new();
        for n in &mf_nodes {
            acc.add(n.weight * n.value.abs().powf(p));
        }
        let norm_mf = acc.total().max(0.0).powf(1.0 / p);
        if !(norm_tf.is_finite() && norm_mf.is_finite()) {
            return Err(Error::eval(format!(
                "divergent whole-space operator norm for field {label}"
            )));
        }
        rows.push(LpBoundRow {
            field: label.clone(),
            norm_f,
            norm_tf,
            ratio_t: norm_tf / norm_f,
            norm_mf,
            ratio_m: norm_mf / norm_f,
        });
    }
    let max_ratio_t = rows.iter().map(|r| r.ratio_t).fold(0.0, f64::max);
    let max_ratio_m = rows.iter().map(|r| r.ratio_m).fold(0.0, f64::max);
    let pass = match caps {
        Some((ct, cm)) => max_ratio_t <= ct && max_ratio_m <= cm,
        None => max_ratio_t.is_finite() && max_ratio_m.is_finite(),
    };
    Ok(LpBoundReport {
        rows,
        max_ratio_t,
        max_ratio_m,
        cap_t: caps.map(|c| c.0),
        cap_m: caps.map(|c| c.1),
        pass,
    })
}
