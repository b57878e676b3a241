//! Shared oracles for the integration suites. These deliberately avoid the
//! library's polar sampling: the 2-D oracle is plain nested adaptive
//! Simpson in Cartesian coordinates, and the maximal oracle is a dense
//! Cartesian cell sum.

use anisoharm::functions::ScalarField;
use anisoharm::geometry::AnisotropySpec;
use anisoharm::kernels::RoughKernel;

/// One-dimensional adaptive Simpson.
#[allow(dead_code)]
fn simpson(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(
        f: &mut dyn FnMut(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        // keep the per-panel tolerance; halving it over-refines smooth
        // integrands by orders of magnitude
        rec(f, a, fa, m, fm, lm, flm, left, tol, depth - 1)
            + rec(f, m, fm, b, fb, rm, frm, right, tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, fa, b, fb, m, fm, whole, tol, 20)
}

/// Nested adaptive Simpson of `g(y1, y2)` over the region between the
/// curves `y2_lo(y1)` and `y2_hi(y1)` for `y1` in [a, b].
#[allow(dead_code)]
pub fn adaptive_2d(
    g: &dyn Fn(f64, f64) -> f64,
    a: f64,
    b: f64,
    y2_lo: &dyn Fn(f64) -> f64,
    y2_hi: &dyn Fn(f64) -> f64,
    tol: f64,
) -> f64 {
    let mut outer = |y1: f64| {
        let (lo, hi) = (y2_lo(y1), y2_hi(y1));
        if hi <= lo {
            return 0.0;
        }
        let mut inner = |y2: f64| g(y1, y2);
        simpson(&mut inner, lo, hi, tol)
    };
    simpson(&mut outer, a, b, tol)
}

/// Cartesian oracle of the off-support singular integral
/// int_{E(0,1)} Omega(x-y) rho(x-y)^(-gamma) f(y) dy on the parabolic
/// plane, where the support of f is the unit disk.
#[allow(dead_code)]
pub fn singular_offsupport_oracle(
    spec: &AnisotropySpec,
    kernel: &RoughKernel,
    f: &ScalarField,
    x: &[f64],
    tol: f64,
) -> f64 {
    let gamma = spec.gamma();
    let g = |y1: f64, y2: f64| -> f64 {
        let y = [y1, y2];
        let fv = f.eval(&y);
        if fv == 0.0 {
            return 0.0;
        }
        let z = [x[0] - y1, x[1] - y2];
        let r = spec.rho(&z).unwrap();
        let (_, dir) = spec.polar_decompose(&z).unwrap();
        kernel.on_sphere(&dir) * r.powf(-gamma) * fv
    };
    // E(0,1) for diag[1,2] is the Euclidean unit disk
    adaptive_2d(
        &g,
        -1.0,
        1.0,
        &|y1| -(1.0 - y1 * y1).max(0.0).sqrt(),
        &|y1| (1.0 - y1 * y1).max(0.0).sqrt(),
        tol,
    )
}

/// Dense Cartesian cell-sum oracle of the ellipsoid average
/// |E(x,t)|^-1 int_{E(x,t)} |Omega(x-y)| |b(x)-b(y)|^{opt} |f(y)| dy,
/// maximized over a dense t grid.
#[allow(dead_code)]
pub fn maximal_oracle(
    spec: &AnisotropySpec,
    kernel: &RoughKernel,
    f: &ScalarField,
    b: Option<&ScalarField>,
    x: &[f64],
    t_grid: &[f64],
    cells: usize,
) -> f64 {
    let upsilon = spec.unit_volume().unwrap();
    let gamma = spec.gamma();
    let bx = b.map(|b| b.eval(x)).unwrap_or(0.0);
    let mut best = 0.0f64;
    for &t in t_grid {
        // bounding box of E(x, t)
        let half: Vec<f64> = spec.alpha().iter().map(|&a| t.powf(a)).collect();
        let (nx, ny) = (cells, cells);
        let mut sum = 0.0;
        let cell_area = (2.0 * half[0] / nx as f64) * (2.0 * half[1] / ny as f64);
        for i in 0..nx {
            let y1 = x[0] - half[0] + (i as f64 + 0.5) * 2.0 * half[0] / nx as f64;
            for j in 0..ny {
                let y2 = x[1] - half[1] + (j as f64 + 0.5) * 2.0 * half[1] / ny as f64;
                let y = [y1, y2];
                if !spec.contains(x, t, &y) {
                    continue;
                }
                let fv = f.eval(&y).abs();
                if fv == 0.0 {
                    continue;
                }
                let z = [x[0] - y1, x[1] - y2];
                if z[0] == 0.0 && z[1] == 0.0 {
                    continue;
                }
                let (_, dir) = spec.polar_decompose(&z).unwrap();
                let mut v = kernel.on_sphere(&dir).abs() * fv;
                if let Some(b) = b {
                    v *= (bx - b.eval(&y)).abs();
                }
                sum += v;
            }
        }
        let avg = sum * cell_area / (upsilon * t.powf(gamma));
        best = best.max(avg);
    }
    best
}
