//! The rough-kernel operators: ellipsoid-average maximal operator, the
//! principal-value singular integral, their symbol commutators, the
//! Marcinkiewicz square function and its commutator, and the pointwise
//! majorant that dominates all of them off the support of the data.
//!
//! Evaluation is direction-first in polar coordinates: each sphere
//! direction carries a radial Gauss-Legendre ladder whose panel boundaries
//! are aligned with the operator's own radii (truncation shells, the
//! maximal-function t grid), so shell sums and prefix sums are exact panel
//! integrals. Principal values shrink the inner radius geometrically and
//! stop when shell increments fall under the tolerance, with a Richardson
//! tail estimate from the final increment ratio.
//!
//! When the evaluation point sits well outside the support of the data the
//! integrand is regular and the support would subtend a tiny angle as seen
//! from x, so the integral is computed in polar coordinates around the
//! support instead; there the kernel factor is smooth and the data is
//! resolved exactly.

use crate::error::{Error, Result};
use crate::functions::{BoundaryFn, ScalarField};
use crate::geometry::{AnisotropySpec, SphereGrid};
use crate::kernels::RoughKernel;
use crate::polar::{collect_samples, Orientation, SampleRequest};
use crate::quad::{log_grid, NeumaierSum};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Radial/angular resolutions and the principal-value protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureScheme {
    pub radial_nodes_per_decade: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub sphere_nodes: usize,
    /// Geometric shrink factor of the inner truncation radius.
    pub pv_ratio: f64,
    pub pv_max_halvings: usize,
    pub pv_tolerance: f64,
    pub gl_points: usize,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self {
            radial_nodes_per_decade: 40,
            rho_min: 1e-3,
            rho_max: 1e6,
            sphere_nodes: 256,
            pv_ratio: 0.5,
            pv_max_halvings: 20,
            pv_tolerance: 1e-6,
            gl_points: 4,
        }
    }
}

impl QuadratureScheme {
    /// Cheaper resolutions for harness sweeps.
    pub fn lean() -> Self {
        Self {
            radial_nodes_per_decade: 16,
            rho_min: 1e-3,
            rho_max: 1e4,
            sphere_nodes: 64,
            pv_max_halvings: 12,
            pv_tolerance: 1e-5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_min > 0.0 && self.rho_min < self.rho_max) {
            return Err(Error::invalid("need 0 < rho_min < rho_max"));
        }
        if self.radial_nodes_per_decade < 4 || self.sphere_nodes < 4 || self.gl_points < 2 {
            return Err(Error::invalid("node counts too small"));
        }
        if !(self.pv_ratio > 0.0 && self.pv_ratio < 1.0) {
            return Err(Error::invalid("pv_ratio must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn sphere_grid(&self, spec: &AnisotropySpec) -> Result<SphereGrid> {
        SphereGrid::for_spec(spec, self.sphere_nodes)
    }
}

/// Value together with a crude error estimate and PV diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorResult {
    pub value: f64,
    pub est_error: f64,
    pub pv_converged: bool,
    pub diagnostics: BTreeMap<String, f64>,
}

impl OperatorResult {
    fn plain(value: f64) -> Self {
        Self {
            value,
            est_error: 0.0,
            pv_converged: true,
            diagnostics: BTreeMap::new(),
        }
    }
}

fn check_inputs(kernel: &RoughKernel, f: &ScalarField, x: &[f64]) -> Result<()> {
    let spec = kernel.spec();
    if f.dim != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: f.dim,
        });
    }
    if x.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: x.len(),
        });
    }
    Ok(())
}

/// J-weighted mean of the kernel over the given quadrature grid. The
/// cancellation condition holds in the continuum for projected kernels, but
/// rough (discontinuous) kernels keep an O(1/N) residual on a finite grid;
/// subtracting the grid mean realizes the cancellation at quadrature level,
/// which the shrinking principal-value shells rely on.
fn grid_mean(kernel: &RoughKernel, grid: &SphereGrid) -> f64 {
    let spec = kernel.spec();
    let mut num = NeumaierSum::new();
    let mut den = NeumaierSum::new();
    for node in &grid.nodes {
        let j = spec.jacobian_unchecked(&node.dir);
        num.add(node.weight * j * kernel.on_sphere(&node.dir));
        den.add(node.weight * j);
    }
    num.total() / den.total()
}

/// Outer truncation radius: every y in the effective support of f satisfies
/// rho(x - y) <= k (rho(x) + support_radius).
fn outer_radius(
    spec: &AnisotropySpec,
    x: &[f64],
    f: &ScalarField,
    scheme: &QuadratureScheme,
) -> (f64, bool) {
    if f.support_radius.is_finite() {
        let r = spec.k_quasi() * (spec.rho_unchecked(x) + f.support_radius);
        (r.min(scheme.rho_max).max(scheme.rho_min * 4.0), false)
    } else {
        (scheme.rho_max, true)
    }
}

/// If x lies comfortably outside the effective support of f, return lower
/// and upper bounds of rho(x - y) over the support.
fn far_from_support(spec: &AnisotropySpec, x: &[f64], f: &ScalarField) -> Option<(f64, f64)> {
    if !f.support_radius.is_finite() || f.support_radius <= 0.0 {
        return None;
    }
    let rx = spec.rho_unchecked(x);
    let k = spec.k_quasi();
    let dist_lb = rx / k - f.support_radius;
    if dist_lb > 0.5 * f.support_radius {
        Some((dist_lb, k * (rx + f.support_radius)))
    } else {
        None
    }
}

/// Kernel x symbol x power-of-rho integrand evaluated at y, all factors in
/// the difference variable z = x - y.
struct DiffIntegrand<'a> {
    spec: &'a AnisotropySpec,
    kernel: &'a RoughKernel,
    x: &'a [f64],
    rho_power: f64,
    absolute: bool,
    symbol: Option<(f64, &'a ScalarField)>,
}

impl DiffIntegrand<'_> {
    fn eval(&self, y: &[f64], f_val: f64) -> f64 {
        let n = y.len();
        let mut z = vec![0.0; n];
        for i in 0..n {
            z[i] = self.x[i] - y[i];
        }
        let r = self.spec.rho_unchecked(&z);
        if r == 0.0 {
            return 0.0;
        }
        self.spec.dilate_in_place(1.0 / r, &mut z);
        let mut om = self.kernel.on_sphere(&z);
        if self.absolute {
            om = om.abs();
        }
        let mut v = om * r.powf(self.rho_power) * f_val;
        if let Some((bx, b)) = self.symbol {
            let d = bx - b.eval(y);
            v *= if self.absolute { d.abs() } else { d };
        }
        v
    }
}

/// Regular integral of Omega(x-y) rho(x-y)^rho_power [b(x)-b(y)] f(y) over
/// the support of f, in polar coordinates around the origin (the support
/// is an origin-centered rho-ball by construction).
fn support_centered_integral(
    kernel: &RoughKernel,
    f: &ScalarField,
    x: &[f64],
    scheme: &QuadratureScheme,
    rho_power: f64,
    absolute: bool,
    symbol: Option<(f64, &ScalarField)>,
    extra_boundary: Option<&BoundaryFn>,
) -> Result<f64> {
    let spec = kernel.spec();
    let rf = f.support_radius;
    let grid = scheme.sphere_grid(spec)?;
    let bounds = [
        0.0,
        rf / 16.0,
        rf / 8.0,
        rf / 4.0,
        rf / 2.0,
        rf * 0.75,
        rf,
    ];
    let mut boundaries: Vec<BoundaryFn> = f.boundaries.clone();
    if let Some((_, b)) = symbol {
        boundaries.extend(b.boundaries.iter().cloned());
    }
    if let Some(bf) = extra_boundary {
        boundaries.push(bf.clone());
    }
    let origin = vec![0.0; spec.dim()];
    let mut req = SampleRequest::new(spec, &origin, &bounds, &grid, Orientation::FromCenter);
    req.boundaries = &boundaries;
    req.singular_at_origin =
        f.singular_at_origin || symbol.map(|(_, b)| b.singular_at_origin).unwrap_or(false);
    req.gl_points = scheme.gl_points.max(6);
    let integrand = DiffIntegrand {
        spec,
        kernel,
        x,
        rho_power,
        absolute,
        symbol,
    };
    let gate = extra_boundary;
    let samples = collect_samples(&req, |_| 1.0, |y| {
        let fv = f.eval(y);
        if fv == 0.0 {
            return 0.0;
        }
        if let Some(bf) = gate {
            if bf(y) > 0.0 {
                return 0.0;
            }
        }
        integrand.eval(y, fv)
    })?;
    let mut acc = NeumaierSum::new();
    for n in &samples.nodes {
        acc.add(n.weight * n.value);
    }
    Ok(acc.total())
}

/// The grid-sup maximal operator: the largest ellipsoid average of
/// |Omega(x - .)| |f| over a log grid of radii. A lower bound of the true
/// sup by construction.
pub fn maximal(
    kernel: &RoughKernel,
    f: &ScalarField,
    x: &[f64],
    scheme: &QuadratureScheme,
) -> Result<OperatorResult> {
    check_inputs(kernel, f, x)?;
    maximal_weighted(kernel, f, None, x, scheme)
}

/// Maximal commutator: ellipsoid averages weighted by |b(x) - b(y)|.
pub fn maximal_commutator(
    b: &ScalarField,
    kernel: &RoughKernel,
    f: &ScalarField,
    x: &[f64],
    scheme: &QuadratureScheme,
) -> Result<OperatorResult> {
    check_inputs(kernel, f, x)?;
    let bx = b.eval(x);
    if !bx.is_finite() {
        return Err(Error::eval("symbol not finite at the evaluation point"));
    }
    maximal_weighted(kernel, f, Some((bx, b)), x, scheme)
}

fn maximal_weighted(
    kernel: &RoughKernel,
    f: &ScalarField,
    symbol: Option<(f64, &ScalarField)>,
    x: &[f64],
    scheme: &QuadratureScheme,
) -> Result<OperatorResult> {
    scheme.validate()?;
    let spec = kernel.spec();
    let t_hi = if f.support_radius.is_finite() {
        (spec.k_quasi() * (spec.rho_unchecked(x) + f.support_radius) + 1.0).min(scheme.rho_max)
    } else {
        scheme.rho_max
    };
    let grid = scheme.sphere_grid(spec)?;
    let mut bounds = vec![0.0];
    bounds.extend(log_grid(scheme.rho_min, t_hi, scheme.radial_nodes_per_decade));
    let mut boundaries: Vec<BoundaryFn> = f.boundaries.clone();
    if let Some((_, b)) = symbol {
        boundaries.extend(b.boundaries.iter().cloned());
    }
    let mut req = SampleRequest::new(spec, x, &bounds, &grid, Orientation::Difference);
    req.boundaries = &boundaries;
    req.singular_at_origin =
        f.singular_at_origin || symbol.map(|(_, b)| b.singular_at_origin).unwrap_or(false);
    req.gl_points = scheme.gl_points;
    let samples = collect_samples(
        &req,
        |w| kernel.on_sphere(w).abs(),
        |y| match symbol {
            None => f.eval(y).abs(),
            Some((bx, b)) => (bx - b.eval(y)).abs() * f.eval(y).abs(),
        },
    )?;
    // Normalize by the quadrature measure of the unit ellipsoid so that the
    // average of f = 1 against a unit kernel is exactly 1.
    let mut jmass = NeumaierSum::new();
    for node in &grid.nodes {
        jmass.add(node.weight * spec.jacobian_unchecked(&node.dir));
    }
    let upsilon_q = jmass.total() / spec.gamma();
    let prefix = samples.prefix_sums(|n| n.weight * n.value);
    let mut best = 0.0f64;
    let mut best_t = samples.bounds[1];
    for (j, total) in prefix.iter().enumerate() {
        let t = samples.bounds[j + 1];
        let avg = total / (upsilon_q * t.powf(spec.gamma()));
        if avg > best {
            best = avg;
            best_t = t;
        }
    }
    let mut out = OperatorResult::plain(best);
    out.diagnostics.insert("argsup_t".into(), best_t);
    out.diagnostics
        .insert("t_grid_nodes".into(), prefix.len() as f64);
    Ok(out)
}

/// Principal-value singular integral with kernel Omega(x-y) / rho(x-y)^gamma.
/// Requires a cancellation certificate on the kernel.
pub fn singular_pv(
    kernel: &RoughKernel,
    f: &ScalarField,
    x: &[f64],
    scheme: &QuadratureScheme,
) -> Result<OperatorResult> {
    check_inputs(kernel, f, x)?;
    pv_weighted(kernel, f, None, x, scheme)
}

/// Commutator [b, T]: the PV integral with the extra (b(x) - b(y)) factor.
pub fn commutator_singular(
    b: &ScalarField,
    kernel: &RoughKernel,
    f: &ScalarField,
    x: &[f64],
    scheme: &QuadratureScheme,
) -> Result<OperatorResult> {
    check_inputs(kernel, f, x)?;
    let bx = b.eval(x);
    if !bx.is_finite() {
        return Err(Error::eval("symbol not finite at the evaluation point"));
    }
    pv_weighted(kernel, f, Some((bx, b)), x, scheme)
}

/// The algebraic identity route b(x) T f(x) - T(b f)(x); a cross-check of
/// the integral-form commutator.
pub fn commutator_singular_identity(
    b: &ScalarField,
    kernel: &RoughKernel,
    f: &ScalarField,
    x: &[f64],
    scheme: &QuadratureScheme,
) -> Result<OperatorResult> {
    let bx = b.eval(x);
    if !bx.is_finite() {
        return Err(Error::eval("symbol not finite at the evaluation point"));
    }
    let tf = singular_pv(kernel, f, x, scheme)?;
    let bf = f.product(b);
    let tbf = singular_pv(kernel, &bf, x, scheme)?;
    let mut out = OperatorResult {
        value: bx * tf.value - tbf.value,
        est_error: bx.abs() * tf.est_error + tbf.est_error,
        pv_converged: tf.pv_converged && tbf.pv_converged,
        diagnostics: BTreeMap::new(),
    };
    out.diagnostics.insert("t_f".into(), tf.value);
    out.diagnostics.insert("t_bf".into(), tbf.value);
    Ok(out)
}

/// Shared PV engine.
fn pv_weighted(
    kernel: &RoughKernel,
    f: &ScalarField,
    symbol: Option<(f64, &ScalarField)>,
    x: &[f64],
    scheme: &QuadratureScheme,
) -> Result<OperatorResult> {
    scheme.validate()?;
    if !kernel.cancellation_checked() {
        return Err(Error::precondition(format!(
            "kernel '{}' lacks a cancellation certificate; project it first",
            kernel.label
        )));
    }
    let spec = kernel.spec();
    let gamma = spec.gamma();

    // Off-support: a regular integral, best resolved around the support.
    if far_from_support(spec, x, f).is_some() {
        let value =
            support_centered_integral(kernel, f, x, scheme, -gamma, false, symbol, None)?;
        let mut out = OperatorResult::plain(value);
        out.diagnostics.insert("far_field_route".into(), 1.0);
        return Ok(out);
    }

    let (r_out, truncated) = outer_radius(spec, x, f, scheme);
    let grid = scheme.sphere_grid(spec)?;

    // Shell boundaries: eps_J < ... < eps_1 < eps_0 <= log grid up to r_out.
    let eps0 = scheme.rho_min.min(r_out * 0.25);
    let halvings = scheme.pv_max_halvings;
    let mut bounds = Vec::with_capacity(halvings + 64);
    for j in (1..=halvings).rev() {
        bounds.push(eps0 * scheme.pv_ratio.powi(j as i32));
    }
    bounds.extend(log_grid(eps0, r_out, scheme.radial_nodes_per_decade));

    let mut boundaries: Vec<BoundaryFn> = f.boundaries.clone();
    if let Some((_, b)) = symbol {
        boundaries.extend(b.boundaries.iter().cloned());
    }
    let mut req = SampleRequest::new(spec, x, &bounds, &grid, Orientation::Difference);
    req.boundaries = &boundaries;
    req.singular_at_origin =
        f.singular_at_origin || symbol.map(|(_, b)| b.singular_at_origin).unwrap_or(false);
    req.gl_points = scheme.gl_points;
    let c_grid = grid_mean(kernel, &grid);
    let samples = collect_samples(
        &req,
        |w| kernel.on_sphere(w) - c_grid,
        |y| match symbol {
            None => f.eval(y),
            Some((bx, b)) => (bx - b.eval(y)) * f.eval(y),
        },
    )?;
    let per_seg = samples.segment_sums(|n| n.weight * n.value * n.rho.powf(-gamma));

    // Main part from eps_0 outward.
    let mut acc = NeumaierSum::new();
    for v in per_seg.iter().skip(halvings) {
        acc.add(*v);
    }
    let mut diagnostics = BTreeMap::new();
    // Shell increments, walking inward from eps_0.
    let mut increments = Vec::with_capacity(halvings);
    let mut converged = false;
    for j in 0..halvings {
        let d = per_seg[halvings - 1 - j];
        acc.add(d);
        increments.push(d);
        diagnostics.insert(format!("pv_increment_{j:02}"), d);
        if d.abs() < scheme.pv_tolerance {
            converged = true;
            break;
        }
    }
    // Richardson tail from the final increment ratio.
    let mut extrap = 0.0;
    if increments.len() >= 2 {
        let dk = increments[increments.len() - 1];
        let dk1 = increments[increments.len() - 2];
        if dk1.abs() > 0.0 && dk.abs() > 0.0 {
            let q = (dk / dk1).clamp(-0.9, 0.9);
            extrap = dk * q / (1.0 - q);
            acc.add(extrap);
        }
    }
    let tail = if truncated {
        per_seg[per_seg.len() - 1].abs()
    } else {
        0.0
    };
    let value = acc.total();
    diagnostics.insert("pv_shells_used".into(), increments.len() as f64);
    diagnostics.insert("outer_radius".into(), r_out);
    Ok(OperatorResult {
        value,
        est_error: extrap.abs() + tail,
        pv_converged: converged,
        diagnostics,
    })
}

/// Marcinkiewicz square function: the L^2(dt/t^3) norm of the truncated
/// averages F_t = int_{rho(x-y) <= t} Omega / rho^(gamma-1) f.
pub fn marcinkiewicz(
    kernel: &RoughKernel,
    f: &ScalarField,
    x: &[f64],
    scheme: &QuadratureScheme,
) -> Result<OperatorResult> {
    check_inputs(kernel, f, x)?;
    marcinkiewicz_weighted(kernel, f, None, x, scheme)
}

/// Commutator of the square function: the same accumulation with the
/// (b(x) - b(y)) factor inside F_t.
pub fn marcinkiewicz_commutator(
    b: &ScalarField,
    kernel: &RoughKernel,
    f: &ScalarField,
    x: &[f64],
    scheme: &QuadratureScheme,
) -> Result<OperatorResult> {
    check_inputs(kernel, f, x)?;
    let bx = b.eval(x);
    if !bx.is_finite() {
        return Err(Error::eval("symbol not finite at the evaluation point"));
    }
    marcinkiewicz_weighted(kernel, f, Some((bx, b)), x, scheme)
}

fn marcinkiewicz_weighted(
    kernel: &RoughKernel,
    f: &ScalarField,
    symbol: Option<(f64, &ScalarField)>,
    x: &[f64],
    scheme: &QuadratureScheme,
) -> Result<OperatorResult> {
    scheme.validate()?;
    if !kernel.cancellation_checked() {
        return Err(Error::precondition(format!(
            "kernel '{}' lacks a cancellation certificate; project it first",
            kernel.label
        )));
    }
    let spec = kernel.spec();
    let gamma = spec.gamma();

    if let Some((dist_lb, dist_ub)) = far_from_support(spec, x, f) {
        return marcinkiewicz_far(kernel, f, symbol, x, scheme, dist_lb, dist_ub);
    }

    let (t_max, truncated) = outer_radius(spec, x, f, scheme);
    let t_lo = scheme.rho_min.min(t_max * 1e-3);
    let grid = scheme.sphere_grid(spec)?;
    let mut bounds = vec![0.0];
    bounds.extend(log_grid(t_lo, t_max, scheme.radial_nodes_per_decade));
    let mut boundaries: Vec<BoundaryFn> = f.boundaries.clone();
    if let Some((_, b)) = symbol {
        boundaries.extend(b.boundaries.iter().cloned());
    }
    let mut req = SampleRequest::new(spec, x, &bounds, &grid, Orientation::Difference);
    req.boundaries = &boundaries;
    req.singular_at_origin =
        f.singular_at_origin || symbol.map(|(_, b)| b.singular_at_origin).unwrap_or(false);
    req.gl_points = scheme.gl_points;
    let c_grid = grid_mean(kernel, &grid);
    let samples = collect_samples(
        &req,
        |w| kernel.on_sphere(w) - c_grid,
        |y| match symbol {
            None => f.eval(y),
            Some((bx, b)) => (bx - b.eval(y)) * f.eval(y),
        },
    )?;
    // Each shell integral is computed once; F at the grid radii by prefix.
    let f_at = samples.prefix_sums(|n| n.weight * n.value * n.rho.powf(1.0 - gamma));

    // mu^2 = int F_t^2 dt / t^3, trapezoid in ln t over [t_lo, t_max].
    let mut mu2 = NeumaierSum::new();
    for j in 0..f_at.len() - 1 {
        let (ta, tb) = (samples.bounds[j + 1], samples.bounds[j + 2]);
        let (fa, fb) = (f_at[j], f_at[j + 1]);
        let ga = fa * fa / (ta * ta);
        let gb = fb * fb / (tb * tb);
        mu2.add(0.5 * (gb + ga) * (tb / ta).ln());
    }
    // Exact tail: F is constant beyond the support horizon.
    let f_inf = *f_at.last().unwrap();
    if !truncated {
        mu2.add(f_inf * f_inf / (2.0 * t_max * t_max));
    }
    // Head below t_lo, using the quadratic vanishing F ~ c t^2 forced by
    // cancellation; counted into the value and fully into the error bar.
    let f_lo = f_at[0];
    let head = f_lo * f_lo / (2.0 * t_lo * t_lo);
    mu2.add(head);
    let value = mu2.total().max(0.0).sqrt();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("f_at_horizon".into(), f_inf);
    diagnostics.insert("head_mass".into(), head);
    let est_error = if value > 0.0 { head / value } else { 0.0 };
    Ok(OperatorResult {
        value,
        est_error,
        pv_converged: true,
        diagnostics,
    })
}

/// Off-support square function: each truncated average F_t is a regular
/// support-centered integral gated by rho(x - y) <= t.
fn marcinkiewicz_far(
    kernel: &RoughKernel,
    f: &ScalarField,
    symbol: Option<(f64, &ScalarField)>,
    x: &[f64],
    scheme: &QuadratureScheme,
    dist_lb: f64,
    dist_ub: f64,
) -> Result<OperatorResult> {
    let spec = kernel.spec();
    let gamma = spec.gamma();
    let t_grid = log_grid(
        dist_lb * 0.9,
        dist_ub,
        scheme.radial_nodes_per_decade.max(20),
    );
    let mut f_at = Vec::with_capacity(t_grid.len());
    for &t in &t_grid {
        let spec2 = spec.clone();
        let x2 = x.to_vec();
        let gate: BoundaryFn = Arc::new(move |y: &[f64]| {
            let mut s = 0.0;
            for i in 0..y.len() {
                let d = x2[i] - y[i];
                s += d * d / t.powf(2.0 * spec2.alpha()[i]);
            }
            s - 1.0
        });
        f_at.push(support_centered_integral(
            kernel,
            f,
            x,
            scheme,
            1.0 - gamma,
            false,
            symbol,
            Some(&gate),
        )?);
    }
    let mut mu2 = NeumaierSum::new();
    for j in 0..f_at.len() - 1 {
        let (ta, tb) = (t_grid[j], t_grid[j + 1]);
        let (fa, fb) = (f_at[j], f_at[j + 1]);
        mu2.add(0.5 * (fa * fa / (ta * ta) + fb * fb / (tb * tb)) * (tb / ta).ln());
    }
    let f_inf = *f_at.last().unwrap();
    mu2.add(f_inf * f_inf / (2.0 * dist_ub * dist_ub));
    let value = mu2.total().max(0.0).sqrt();
    let mut out = OperatorResult::plain(value);
    out.diagnostics.insert("far_field_route".into(), 1.0);
    out.diagnostics.insert("f_at_horizon".into(), f_inf);
    Ok(out)
}

/// The size majorant c0 * int |Omega(x-y)| rho(x-y)^(-gamma) |f(y)| dy,
/// a regular integral when x lies outside the effective support of f.
pub fn e1_majorant(
    kernel: &RoughKernel,
    f: &ScalarField,
    x: &[f64],
    scheme: &QuadratureScheme,
    c0: f64,
) -> Result<f64> {
    check_inputs(kernel, f, x)?;
    scheme.validate()?;
    let spec = kernel.spec();
    let rx = spec.rho_unchecked(x);
    if !f.support_radius.is_finite() || rx <= f.support_radius {
        return Err(Error::precondition(
            "majorant requires the point outside the effective support of f",
        ));
    }
    if f.support_radius <= 0.0 {
        return Ok(0.0);
    }
    let gamma = spec.gamma();
    let value = support_centered_integral(kernel, f, x, scheme, -gamma, true, None, None)?;
    Ok(c0 * value)
}
