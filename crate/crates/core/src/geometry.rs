//! Anisotropic dilation geometry: the quasi-distance defined through the
//! level-set equation of `F(x, t) = sum_i x_i^2 / t^(2 a_i)`, ellipsoids,
//! polar coordinates and their measure constants.
//!
//! The distance of a point is the unique `t > 0` with `F(x, t) = 1`,
//! obtained by bracketing and bisection followed by Newton polishing.
//! `F(x, .)` is strictly decreasing and convex in `t`, so both stages are
//! unconditionally safe.

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, NeumaierSum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Specialized evaluation of t^(2a) for the common integer exponents.
#[derive(Clone, Copy, Debug, PartialEq)]
enum PowKind {
    /// a = 1: t^2
    Square,
    /// a = 2: t^4
    Fourth,
    General(f64),
}

impl PowKind {
    fn classify(alpha: f64) -> Self {
        if alpha == 1.0 {
            PowKind::Square
        } else if alpha == 2.0 {
            PowKind::Fourth
        } else {
            PowKind::General(2.0 * alpha)
        }
    }

    #[inline]
    fn eval(self, t: f64) -> f64 {
        match self {
            PowKind::Square => t * t,
            PowKind::Fourth => {
                let s = t * t;
                s * s
            }
            PowKind::General(e) => t.powf(e),
        }
    }
}

/// The exponent vector of the diagonal dilation group together with the
/// derived homogeneous dimension and the quasi-triangle constant.
#[derive(Clone, Debug)]
pub struct AnisotropySpec {
    alpha: Vec<f64>,
    gamma: f64,
    k_quasi: f64,
    pows: Vec<PowKind>,
}

/// Serialized form: `{"alpha": [...], "k": optional}`.
#[derive(Serialize, Deserialize)]
struct SpecRepr {
    alpha: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
}

impl Serialize for AnisotropySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpecRepr {
            alpha: self.alpha.clone(),
            k: Some(self.k_quasi),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AnisotropySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SpecRepr::deserialize(d)?;
        let spec = match repr.k {
            Some(k) => AnisotropySpec::with_k(repr.alpha, k),
            None => AnisotropySpec::new(repr.alpha),
        };
        spec.map_err(serde::de::Error::custom)
    }
}

impl PartialEq for AnisotropySpec {
    fn eq(&self, other: &Self) -> bool {
        self.alpha == other.alpha && self.k_quasi == other.k_quasi
    }
}

/// Default sampling effort for the quasi-triangle constant estimate.
const K_ESTIMATE_TRIALS: usize = 20_000;
const K_ESTIMATE_SEED: u64 = 0xA11CE;
/// Safety factor applied on top of the sampled estimate.
const K_SAFETY: f64 = 1.05;

impl AnisotropySpec {
    /// Build a spec from the exponent vector; the quasi-triangle constant is
    /// estimated by sampling and inflated by a 1.05 safety factor.
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        let mut spec = Self::unchecked(alpha)?;
        let k_hat = spec.estimate_k(K_ESTIMATE_TRIALS, K_ESTIMATE_SEED);
        spec.k_quasi = (k_hat * K_SAFETY).max(1.0);
        Ok(spec)
    }

    /// Build a spec with a user-supplied quasi-triangle constant.
    pub fn with_k(alpha: Vec<f64>, k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 1.0) {
            return Err(Error::invalid(format!("k_quasi must be >= 1, got {k}")));
        }
        let mut spec = Self::unchecked(alpha)?;
        spec.k_quasi = k;
        Ok(spec)
    }

    fn unchecked(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::invalid("dimension must be at least 2"));
        }
        for a in &alpha {
            if !a.is_finite() || *a < 1.0 {
                return Err(Error::invalid(format!("exponents must be >= 1, got {a}")));
            }
        }
        if alpha.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("exponents must be nondecreasing"));
        }
        let gamma = alpha.iter().sum();
        let pows = alpha.iter().map(|&a| PowKind::classify(a)).collect();
        Ok(Self {
            alpha,
            gamma,
            k_quasi: 1.0,
            pows,
        })
    }

    /// Standard parabolic spec diag[1, ..., 1, 2] in dimension `n`.
    pub fn parabolic(n: usize) -> Result<Self> {
        let mut alpha = vec![1.0; n];
        if let Some(last) = alpha.last_mut() {
            *last = 2.0;
        }
        Self::new(alpha)
    }

    /// Isotropic (Euclidean) spec in dimension `n`.
    pub fn isotropic(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Homogeneous dimension: the exponent sum.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k_quasi(&self) -> f64 {
        self.k_quasi
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite coordinate"));
        }
        Ok(())
    }

    /// F(x, t) and its t-derivative, specialized per exponent.
    #[inline]
    fn f_and_deriv(&self, x: &[f64], t: f64) -> (f64, f64) {
        let mut f = 0.0;
        let mut g = 0.0;
        for (xi, (&a, p)) in x.iter().zip(self.alpha.iter().zip(self.pows.iter())) {
            let term = xi * xi / p.eval(t);
            f += term;
            g += a * term;
        }
        (f, -2.0 * g / t)
    }

    #[inline]
    fn f_only(&self, x: &[f64], t: f64) -> f64 {
        let mut f = 0.0;
        for (xi, p) in x.iter().zip(self.pows.iter()) {
            f += xi * xi / p.eval(t);
        }
        f
    }

    /// The quasi-distance: 0 at the origin, otherwise the unique root of
    /// F(x, t) = 1, solved to relative accuracy ~1e-14.
    pub fn rho(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.rho_unchecked(x))
    }

    /// Root solve without argument validation; used by inner loops.
    #[inline]
    pub(crate) fn rho_unchecked(&self, x: &[f64]) -> f64 {
        // m = max_i |x_i|^(1/a_i) brackets the root: F(x, m) >= 1 and
        // F(x, m * n^(1/(2 a_1))) <= 1.
        let mut m = 0.0f64;
        for (xi, &a) in x.iter().zip(self.alpha.iter()) {
            if *xi != 0.0 {
                let c = xi.abs();
                let v = if a == 1.0 {
                    c
                } else if a == 2.0 {
                    c.sqrt()
                } else {
                    c.powf(1.0 / a)
                };
                if v > m {
                    m = v;
                }
            }
        }
        if m == 0.0 || m < 1e-300 {
            return 0.0;
        }
        let lo = m * (1.0 - 1e-12);
        let mut hi = m * (self.dim() as f64).powf(0.5 / self.alpha[0]);
        if self.f_only(x, hi) > 1.0 {
            hi *= 1.0 + 1e-12;
        }
        // F - 1 is convex and decreasing in t, so Newton started at the
        // upper bracket descends monotonically onto the root.
        let mut t = hi;
        for _ in 0..40 {
            let (f, d) = self.f_and_deriv(x, t);
            let step = (f - 1.0) / d;
            let next = (t - step).max(lo);
            if (next - t).abs() <= 1e-15 * t {
                t = next;
                break;
            }
            t = next;
        }
        t
    }

    /// Closed form of the standard parabolic distance as displayed for
    /// diag[1, ..., 1, 2]; a different normalization from `rho` (it solves
    /// F with the last coordinate halved), kept as a cross-check only.
    pub fn rho_paper_p0(x: &[f64]) -> Result<f64> {
        if x.len() < 2 {
            return Err(Error::invalid("dimension must be at least 2"));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite coordinate"));
        }
        let (head, tail) = x.split_at(x.len() - 1);
        let xp2: f64 = head.iter().map(|c| c * c).sum();
        let xn = tail[0];
        Ok((0.5 * (xp2 + (xp2 * xp2 + xn * xn).sqrt())).sqrt())
    }

    /// Apply the dilation A_t = diag[t^a_1, ..., t^a_n].
    pub fn dilate(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::invalid(format!("dilation parameter must be positive, got {t}")));
        }
        let mut out = x.to_vec();
        self.dilate_in_place(t, &mut out);
        Ok(out)
    }

    #[inline]
    pub(crate) fn dilate_in_place(&self, t: f64, x: &mut [f64]) {
        for (xi, &a) in x.iter_mut().zip(self.alpha.iter()) {
            let s = if a == 1.0 {
                t
            } else if a == 2.0 {
                t * t
            } else {
                t.powf(a)
            };
            *xi *= s;
        }
    }

    /// Write x - A_rho(w) into `out`; the workhorse of polar integration.
    #[inline]
    pub(crate) fn offset_point(&self, x: &[f64], rho: f64, w: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            let a = self.alpha[i];
            let s = if a == 1.0 {
                rho
            } else if a == 2.0 {
                rho * rho
            } else {
                rho.powf(a)
            };
            out[i] = x[i] - s * w[i];
        }
    }

    /// Write x + A_rho(w) into `out`.
    #[inline]
    pub(crate) fn offset_point_neg(&self, x: &[f64], rho: f64, w: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            let a = self.alpha[i];
            let s = if a == 1.0 {
                rho
            } else if a == 2.0 {
                rho * rho
            } else {
                rho.powf(a)
            };
            out[i] = x[i] + s * w[i];
        }
    }

    /// Split x != 0 into (rho(x), direction); the direction lies on the
    /// Euclidean unit sphere because F(x, rho(x)) = |A_{1/rho} x|^2 = 1.
    pub fn polar_decompose(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_point(x)?;
        let r = self.rho_unchecked(x);
        if r == 0.0 {
            return Err(Error::domain("origin has no polar direction"));
        }
        let mut dir = x.to_vec();
        self.dilate_in_place(1.0 / r, &mut dir);
        Ok((r, dir))
    }

    /// Inverse of `polar_decompose`: A_rho applied to a unit direction.
    pub fn polar_compose(&self, rho: f64, dir: &[f64]) -> Result<Vec<f64>> {
        if rho < 0.0 {
            return Err(Error::invalid("radius must be nonnegative"));
        }
        if rho == 0.0 {
            return Ok(vec![0.0; self.dim()]);
        }
        self.dilate(rho, dir)
    }

    /// J(w) = sum_i a_i w_i^2 for w on the Euclidean unit sphere; the angular
    /// density of the polar volume element. Lies in [a_1, a_n].
    pub fn jacobian(&self, dir: &[f64]) -> Result<f64> {
        self.check_point(dir)?;
        let norm2: f64 = dir.iter().map(|c| c * c).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "direction must be a unit vector, |.|^2 = {norm2}"
            )));
        }
        Ok(self.jacobian_unchecked(dir))
    }

    #[inline]
    pub(crate) fn jacobian_unchecked(&self, dir: &[f64]) -> f64 {
        let mut j = 0.0;
        for (d, &a) in dir.iter().zip(self.alpha.iter()) {
            j += a * d * d;
        }
        j
    }

    /// Volume of the unit ellipsoid: (1/gamma) * integral of J over the
    /// sphere, by the module quadrature. |E(x, r)| = unit_volume * r^gamma.
    pub fn unit_volume(&self) -> Result<f64> {
        let grid = SphereGrid::for_spec(self, 0)?;
        let mut acc = NeumaierSum::new();
        for node in &grid.nodes {
            acc.add(node.weight * self.jacobian_unchecked(&node.dir));
        }
        Ok(acc.total() / self.gamma)
    }

    /// Lebesgue measure of any ellipsoid of radius `r`.
    pub fn ellipsoid_volume(&self, r: f64) -> Result<f64> {
        Ok(self.unit_volume()? * r.powf(self.gamma))
    }

    /// Membership test y in E(center, r) without root finding:
    /// rho(y - center) < r iff F(y - center, r) < 1.
    #[inline]
    pub fn contains(&self, center: &[f64], r: f64, y: &[f64]) -> bool {
        let mut f = 0.0;
        for i in 0..y.len() {
            let d = y[i] - center[i];
            f += d * d / self.pows[i].eval(r);
            if f >= 1.0 {
                return false;
            }
        }
        f < 1.0
    }

    /// Sampled estimate of the quasi-triangle constant: the sup over random
    /// triples of rho(x-y) / (rho(x-z) + rho(y-z)). A degenerate triple
    /// (z = y) is always included, so the estimate is >= 1. Deterministic
    /// for a fixed seed.
    pub fn estimate_k(&self, trials: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim();
        let mut best = 0.0f64;
        let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let scale = 10f64.powf(rng.random_range(-2.0..2.0));
            (0..n)
                .map(|_| scale * (rng.random::<f64>() * 2.0 - 1.0))
                .collect()
        };
        let mut diff = vec![0.0; n];
        for trial in 0..trials.max(1) {
            let x = sample(&mut rng);
            let y = sample(&mut rng);
            let z = if trial == 0 { y.clone() } else { sample(&mut rng) };
            for i in 0..n {
                diff[i] = x[i] - y[i];
            }
            let dxy = self.rho_unchecked(&diff);
            for i in 0..n {
                diff[i] = x[i] - z[i];
            }
            let dxz = self.rho_unchecked(&diff);
            for i in 0..n {
                diff[i] = y[i] - z[i];
            }
            let dyz = self.rho_unchecked(&diff);
            let denom = dxz + dyz;
            if denom > 0.0 && dxy > 0.0 {
                best = best.max(dxy / denom);
            }
        }
        best
    }

    /// Total surface measure of the quadrature sphere (2*pi or 4*pi).
    pub fn sphere_measure(&self) -> Result<f64> {
        match self.dim() {
            2 => Ok(2.0 * std::f64::consts::PI),
            3 => Ok(4.0 * std::f64::consts::PI),
            n => Err(Error::UnsupportedDimension(n)),
        }
    }
}

/// A rho-ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ellipsoid {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!("radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn centered(n: usize, radius: f64) -> Result<Self> {
        Self::new(vec![0.0; n], radius)
    }
}

/// One quadrature node on the Euclidean unit sphere.
#[derive(Clone, Debug)]
pub struct SphereNode {
    pub dir: Vec<f64>,
    pub weight: f64,
}

/// Quadrature grid on S^(n-1) with the raw surface measure.
///
/// n = 2: uniform angles (trapezoid rule, spectrally accurate for smooth
/// periodic integrands). n = 3: Gauss-Legendre in the polar cosine times a
/// uniform azimuth grid.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    pub nodes: Vec<SphereNode>,
    pub dim: usize,
}

pub const DEFAULT_SPHERE_NODES_2D: usize = 512;
pub const DEFAULT_SPHERE_NODES_3D: usize = 64 * 128;

impl SphereGrid {
    /// Build a grid for the spec's dimension; `nodes = 0` selects defaults
    /// (512 angles in 2-d, 64 x 128 in 3-d).
    pub fn for_spec(spec: &AnisotropySpec, nodes: usize) -> Result<Self> {
        Self::new(spec.dim(), nodes)
    }

    pub fn new(dim: usize, nodes: usize) -> Result<Self> {
        match dim {
            2 => {
                let n = if nodes == 0 { DEFAULT_SPHERE_NODES_2D } else { nodes.max(4) };
                let w = 2.0 * std::f64::consts::PI / n as f64;
                let nodes = (0..n)
                    .map(|j| {
                        let th = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                        SphereNode {
                            dir: vec![th.cos(), th.sin()],
                            weight: w,
                        }
                    })
                    .collect();
                Ok(Self { nodes, dim })
            }
            3 => {
                let (npolar, nazi) = if nodes == 0 {
                    (64, 128)
                } else {
                    let np = (((nodes / 2) as f64).sqrt().round() as usize).max(4);
                    (np, 2 * np)
                };
                let gl = gauss_legendre(npolar);
                let wazi = 2.0 * std::f64::consts::PI / nazi as f64;
                let mut out = Vec::with_capacity(npolar * nazi);
                for &(u, wu) in &gl {
                    let s = (1.0 - u * u).max(0.0).sqrt();
                    for j in 0..nazi {
                        let th = 2.0 * std::f64::consts::PI * j as f64 / nazi as f64;
                        out.push(SphereNode {
                            dir: vec![s * th.cos(), s * th.sin(), u],
                            weight: wu * wazi,
                        });
                    }
                }
                Ok(Self { nodes: out, dim })
            }
            n => Err(Error::UnsupportedDimension(n)),
        }
    }

    /// Integrate a function of the direction against the surface measure.
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        let mut acc = NeumaierSum::new();
        for node in &self.nodes {
            acc.add(node.weight * f(&node.dir));
        }
        acc.total()
    }
}
