//! Rough kernels: functions on the Euclidean unit sphere extended to R^n \ {0}
//! by degree-zero homogeneity under the anisotropic dilations. The module
//! enforces and tests the J-weighted cancellation and computes sphere
//! integrability norms.

use crate::error::{Error, Result};
use crate::geometry::{AnisotropySpec, SphereGrid};
use crate::quad::NeumaierSum;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

type SphereFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Residual threshold below which the cancellation condition counts as
/// satisfied.
pub const CANCELLATION_TOL: f64 = 1e-12;

/// A kernel on the sphere together with its anisotropy spec, declared
/// integrability exponent, and cancellation status.
#[derive(Clone)]
pub struct RoughKernel {
    spec: AnisotropySpec,
    sphere_fn: SphereFn,
    /// Declared s with Omega in L_s of the sphere, in (1, inf].
    pub s_exponent: f64,
    /// J-weighted sphere integral from the last cancellation check or
    /// projection; `None` until checked.
    residual: Option<f64>,
    pub label: String,
}

impl std::fmt::Debug for RoughKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RoughKernel")
            .field("label", &self.label)
            .field("s_exponent", &self.s_exponent)
            .field("residual", &self.residual)
            .finish()
    }
}

/// Default sphere quadrature resolution used by kernel checks.
fn check_grid(spec: &AnisotropySpec) -> Result<SphereGrid> {
    SphereGrid::for_spec(spec, 0)
}

impl RoughKernel {
    pub fn new(
        spec: &AnisotropySpec,
        sphere_fn: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        s_exponent: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(s_exponent > 1.0) {
            return Err(Error::invalid("integrability exponent must be > 1"));
        }
        Ok(Self {
            spec: spec.clone(),
            sphere_fn: Arc::new(sphere_fn),
            s_exponent,
            residual: None,
            label: label.into(),
        })
    }

    pub fn spec(&self) -> &AnisotropySpec {
        &self.spec
    }

    /// Value on the sphere.
    #[inline]
    pub fn on_sphere(&self, dir: &[f64]) -> f64 {
        (self.sphere_fn)(dir)
    }

    /// Degree-zero homogeneous extension: the value at the polar direction
    /// of x. Errors at the origin.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let (_, dir) = self.spec.polar_decompose(x)?;
        Ok(self.on_sphere(&dir))
    }

    /// Whether the kernel carries a verified cancellation certificate.
    pub fn cancellation_checked(&self) -> bool {
        matches!(self.residual, Some(r) if r.abs() <= CANCELLATION_TOL)
    }

    pub fn stored_residual(&self) -> Option<f64> {
        self.residual
    }

    /// The J-weighted sphere integral of the kernel, by module quadrature.
    pub fn cancellation_residual(&self) -> Result<f64> {
        let grid = check_grid(&self.spec)?;
        let mut acc = NeumaierSum::new();
        for node in &grid.nodes {
            acc.add(
                node.weight * self.spec.jacobian_unchecked(&node.dir) * self.on_sphere(&node.dir),
            );
        }
        Ok(acc.total())
    }

    /// Record the current residual on the kernel.
    pub fn check_cancellation(&mut self) -> Result<f64> {
        let r = self.cancellation_residual()?;
        self.residual = Some(r);
        Ok(r)
    }

    /// Subtract the J-weighted mean so the cancellation condition holds;
    /// idempotent up to quadrature roundoff.
    pub fn project_to_cancellation(&self) -> Result<RoughKernel> {
        let grid = check_grid(&self.spec)?;
        let mut num = NeumaierSum::new();
        let mut den = NeumaierSum::new();
        for node in &grid.nodes {
            let j = self.spec.jacobian_unchecked(&node.dir);
            num.add(node.weight * j * self.on_sphere(&node.dir));
            den.add(node.weight * j);
        }
        let c = num.total() / den.total();
        let inner = self.sphere_fn.clone();
        let mut out = RoughKernel {
            spec: self.spec.clone(),
            sphere_fn: Arc::new(move |w: &[f64]| inner(w) - c),
            s_exponent: self.s_exponent,
            residual: None,
            label: if self.label.ends_with("-projected") {
                self.label.clone()
            } else {
                format!("{}-projected", self.label)
            },
        };
        out.check_cancellation()?;
        Ok(out)
    }

    /// L_s norm on the sphere with the raw surface measure; `s = inf` is the
    /// max over the quadrature grid (a grid essential sup).
    pub fn sphere_s_norm(&self, s: f64) -> Result<f64> {
        if !(s > 1.0) {
            return Err(Error::invalid("s must lie in (1, inf]"));
        }
        let grid = check_grid(&self.spec)?;
        if s.is_infinite() {
            let mut m = 0.0f64;
            for node in &grid.nodes {
                let v = self.on_sphere(&node.dir).abs();
                if !v.is_finite() {
                    return Err(Error::eval("non-finite kernel sample"));
                }
                m = m.max(v);
            }
            return Ok(m);
        }
        let mut acc = NeumaierSum::new();
        for node in &grid.nodes {
            let v = self.on_sphere(&node.dir).abs();
            if !v.is_finite() {
                return Err(Error::eval("non-finite kernel sample"));
            }
            acc.add(node.weight * v.powf(s));
        }
        Ok(acc.total().powf(1.0 / s))
    }
}

/// Catalog identifier; `<base>-projected` applies the cancellation
/// projection to the base kernel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KernelId(pub String);

impl From<&str> for KernelId {
    fn from(s: &str) -> Self {
        KernelId(s.to_string())
    }
}

/// The ten base catalog kernels.
pub const KERNEL_CATALOG: [&str; 10] = [
    "const", "cos1", "sin1", "cos2", "abs1", "harmonic2", "harmonic3", "sign4", "sign8", "mix1",
];

/// Instantiate a catalog kernel for a spec. Base families span odd/even and
/// smooth/rough; the sign families are piecewise +-1 on angular sectors.
pub fn builtin_kernel(spec: &AnisotropySpec, id: &KernelId) -> Result<RoughKernel> {
    let name = id.0.as_str();
    if let Some(base) = name.strip_suffix("-projected") {
        return builtin_kernel(spec, &KernelId(base.to_string()))?.project_to_cancellation();
    }
    let n = spec.dim();
    let kernel = match name {
        "const" => RoughKernel::new(spec, |_| 1.0, f64::INFINITY, "const")?,
        // first coordinate: cos(theta) in 2-d
        "cos1" => RoughKernel::new(spec, |w: &[f64]| w[0], f64::INFINITY, "cos1")?,
        // last coordinate: sin(theta) in 2-d
        "sin1" => RoughKernel::new(
            spec,
            move |w: &[f64]| w[n - 1],
            f64::INFINITY,
            "sin1",
        )?,
        "cos2" => RoughKernel::new(spec, |w: &[f64]| w[0] * w[0], f64::INFINITY, "cos2")?,
        "abs1" => RoughKernel::new(spec, |w: &[f64]| w[0].abs(), f64::INFINITY, "abs1")?,
        // cos(2 theta) in 2-d; the degree-2 harmonic w1^2 - w2^2 generally
        "harmonic2" => RoughKernel::new(
            spec,
            |w: &[f64]| w[0] * w[0] - w[1] * w[1],
            f64::INFINITY,
            "harmonic2",
        )?,
        // sin(3 theta) in 2-d via the triple-angle form; odd in the last
        // coordinate in any dimension
        "harmonic3" => RoughKernel::new(
            spec,
            move |w: &[f64]| {
                let s = w[n - 1];
                s * (3.0 - 4.0 * s * s)
            },
            f64::INFINITY,
            "harmonic3",
        )?,
        // alternating +-1 on quadrants (octants in 3-d)
        "sign4" => RoughKernel::new(
            spec,
            |w: &[f64]| {
                let p: f64 = w[0] * w[1];
                if p >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            },
            4.0,
            "sign4",
        )?,
        // alternating +-1 on eight sectors
        "sign8" => match n {
            2 => RoughKernel::new(
                spec,
                |w: &[f64]| {
                    let th = w[1].atan2(w[0]).rem_euclid(2.0 * std::f64::consts::PI);
                    let sector = (th / (std::f64::consts::PI / 4.0)).floor() as i64;
                    if sector % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                },
                4.0,
                "sign8",
            )?,
            _ => RoughKernel::new(
                spec,
                |w: &[f64]| {
                    let p: f64 = w.iter().product();
                    if p >= 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                },
                4.0,
                "sign8",
            )?,
        },
        "mix1" => RoughKernel::new(spec, |w: &[f64]| 0.5 + w[0], f64::INFINITY, "mix1")?,
        other => return Err(Error::invalid(format!("unknown kernel id '{other}'"))),
    };
    Ok(kernel)
}
