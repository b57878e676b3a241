//! One-dimensional quadrature building blocks shared by the geometry,
//! operator and norm modules: Gauss-Legendre panels, log-spaced grids,
//! discontinuity bracketing and compensated summation.

use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence and cached per order.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    static CACHE: Lazy<Mutex<HashMap<usize, Vec<(f64, f64)>>>> =
        Lazy::new(|| Mutex::new(HashMap::new()));
    if let Some(v) = CACHE.lock().unwrap().get(&n) {
        return v.clone();
    }
    let v = compute_gauss_legendre(n);
    CACHE.lock().unwrap().insert(n, v.clone());
    v
}

fn compute_gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
        if x.abs() > 1e-14 {
            out.push((-x, w));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrate `f` over [a, b] with a single Gauss-Legendre panel.
pub fn gl_panel(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, pts: usize) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = NeumaierSum::new();
    for &(x, w) in &gauss_legendre(pts) {
        acc.add(w * f(mid + half * x));
    }
    acc.total() * half
}

/// Composite Gauss-Legendre over `panels` equal subintervals of [a, b].
pub fn gl_composite(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, panels: usize, pts: usize) -> f64 {
    let mut acc = NeumaierSum::new();
    let h = (b - a) / panels as f64;
    for j in 0..panels {
        acc.add(gl_panel(f, a + j as f64 * h, a + (j + 1) as f64 * h, pts));
    }
    acc.total()
}

/// Logarithmically spaced grid from `lo` to `hi` (inclusive) with
/// `per_decade` nodes per decade; always contains both endpoints.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && per_decade >= 1);
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        out.push(lo * 10f64.powf(decades * j as f64 / n as f64));
    }
    out[0] = lo;
    *out.last_mut().unwrap() = hi;
    out
}

/// Bisect a sign change of `f` inside [a, b] down to relative width `tol`.
/// Assumes `f(a)` and `f(b)` have opposite signs.
pub fn bisect_sign_change(f: &mut dyn FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() <= tol * b.abs().max(1e-300) {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if (fa <= 0.0) == (fm <= 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Locate sign changes of `f` over [a, b] by probing `probes` interior points
/// and bisecting each bracketed change. Returns sorted crossing locations.
pub fn locate_sign_changes(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    probes: usize,
) -> Vec<f64> {
    let mut xs = Vec::with_capacity(probes + 2);
    for j in 0..=(probes + 1) {
        xs.push(a + (b - a) * j as f64 / (probes + 1) as f64);
    }
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for j in 0..xs.len() - 1 {
        if (vals[j] <= 0.0) != (vals[j + 1] <= 0.0) {
            out.push(bisect_sign_change(f, xs[j], xs[j + 1], 1e-13));
        }
    }
    out
}

/// Neumaier compensated summation; deterministic for a fixed add order.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        // degree 2n-1 exactness
        let v = gl_panel(&mut |x| x.powi(7) + 3.0 * x * x, -1.0, 1.0, 4);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gl_high_order_smooth() {
        let v = gl_composite(&mut |x| x.exp(), 0.0, 1.0, 4, 8);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-2, 1e2, 10);
        assert_eq!(g[0], 1e-2);
        assert_eq!(*g.last().unwrap(), 1e2);
        assert_eq!(g.len(), 41);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sign_change_location() {
        let roots = locate_sign_changes(&mut |x| (x - 0.3) * (x - 0.7), 0.0, 1.0, 16);
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - 0.3).abs() < 1e-10);
        assert!((roots[1] - 0.7).abs() < 1e-10);
    }

    #[test]
    fn neumaier_compensates() {
        let mut s = NeumaierSum::new();
        s.add(1e16);
        s.add(1.0);
        s.add(-1e16);
        assert_eq!(s.total(), 1.0);
    }
}
