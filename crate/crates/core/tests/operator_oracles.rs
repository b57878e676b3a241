//! Brute-force and refinement oracles for the operator module, independent
//! of the polar sampling path where the checked quantity allows it.

mod common;

use anisoharm::functions::ScalarField;
use anisoharm::geometry::AnisotropySpec;
use anisoharm::kernels::builtin_kernel;
use anisoharm::operators::{self, QuadratureScheme};
use anisoharm::quad::log_grid;

fn p0() -> AnisotropySpec {
    AnisotropySpec::parabolic(2).unwrap()
}

#[test]
fn maximal_matches_dense_grid_oracle() {
    let spec = p0();
    let scheme = QuadratureScheme::default();
    let kernel = builtin_kernel(&spec, &"const".into()).unwrap();
    let f = ScalarField::indicator_ellipsoid(&spec, vec![0.0, 0.0], 1.0).unwrap();
    let x = [2.0, 0.0];
    let got = operators::maximal(&kernel, &f, &x, &scheme).unwrap().value;
    assert!(got > 0.0 && got < 1.0);
    let t_grid = log_grid(0.3, 5.0, 40);
    let oracle = common::maximal_oracle(&spec, &kernel, &f, None, &x, &t_grid, 600);
    let rel = (got - oracle).abs() / oracle;
    assert!(rel < 0.02, "maximal {got} vs oracle {oracle} (rel {rel:.3})");
}

#[test]
fn maximal_commutator_matches_dense_grid_oracle() {
    let spec = p0();
    let scheme = QuadratureScheme::default();
    let kernel = builtin_kernel(&spec, &"const".into()).unwrap();
    let f = ScalarField::indicator_ellipsoid(&spec, vec![0.0, 0.0], 1.0).unwrap();
    let b = ScalarField::log_rho(&spec);
    // the log symbol diverges at the origin itself; evaluate just off it
    let x = [0.05, 0.0];
    let got = operators::maximal_commutator(&b, &kernel, &f, &x, &scheme)
        .unwrap()
        .value;
    assert!(got > 0.0);
    let t_grid = log_grid(0.05, 3.0, 30);
    let oracle = common::maximal_oracle(&spec, &kernel, &f, Some(&b), &x, &t_grid, 600);
    let rel = (got - oracle).abs() / oracle;
    assert!(rel < 0.02, "commutator {got} vs oracle {oracle} (rel {rel:.3})");
}

#[test]
fn singular_is_linear_in_f() {
    let spec = p0();
    let scheme = QuadratureScheme::default();
    let kernel = builtin_kernel(&spec, &"cos2-projected".into()).unwrap();
    let f = ScalarField::indicator_ellipsoid(&spec, vec![0.0, 0.0], 1.0).unwrap();
    let g = ScalarField::gauss_rho(&spec);
    let sum = f.add(&g);
    for x in [[0.3, 0.4], [1.5, -0.6]] {
        let tf = operators::singular_pv(&kernel, &f, &x, &scheme).unwrap();
        let tg = operators::singular_pv(&kernel, &g, &x, &scheme).unwrap();
        let tsum = operators::singular_pv(&kernel, &sum, &x, &scheme).unwrap();
        let err = (tsum.value - tf.value - tg.value).abs();
        let budget = tf.est_error + tg.est_error + tsum.est_error + 2e-4;
        assert!(
            err <= budget,
            "linearity violated at {x:?}: {err} > {budget}"
        );
        // sublinearity surrogate
        assert!(
            tsum.value.abs() <= tf.value.abs() + tg.value.abs() + 2.0 * budget,
            "sublinearity surrogate violated"
        );
    }
}

#[test]
fn commutator_identity_at_example_point() {
    let spec = p0();
    let scheme = QuadratureScheme::default();
    let kernel = builtin_kernel(&spec, &"cos2-projected".into()).unwrap();
    let f = ScalarField::indicator_ellipsoid(&spec, vec![0.0, 0.0], 1.0).unwrap();
    let b = ScalarField::log_rho(&spec);
    let x = [3.0, 0.0];
    let direct = operators::commutator_singular(&b, &kernel, &f, &x, &scheme).unwrap();
    let identity = operators::commutator_singular_identity(&b, &kernel, &f, &x, &scheme).unwrap();
    let rel = (direct.value - identity.value).abs() / identity.value.abs();
    assert!(rel < 1e-4, "integral {} vs identity {}", direct.value, identity.value);
}

#[test]
fn marcinkiewicz_stable_under_refinement() {
    let spec = p0();
    let kernel = builtin_kernel(&spec, &"cos2-projected".into()).unwrap();
    let f = ScalarField::indicator_ellipsoid(&spec, vec![0.0, 0.0], 1.0).unwrap();
    let b = ScalarField::log_rho(&spec);
    let x = [2.0, 0.0];
    let coarse = QuadratureScheme::default();
    let fine = QuadratureScheme {
        radial_nodes_per_decade: 80,
        sphere_nodes: 512,
        ..QuadratureScheme::default()
    };
    let mu_c = operators::marcinkiewicz_commutator(&b, &kernel, &f, &x, &coarse)
        .unwrap()
        .value;
    let mu_f = operators::marcinkiewicz_commutator(&b, &kernel, &f, &x, &fine)
        .unwrap()
        .value;
    assert!(mu_c > 0.0 && mu_c.is_finite());
    let rel = (mu_c - mu_f).abs() / mu_f;
    assert!(rel < 0.02, "coarse {mu_c} vs fine {mu_f} (rel {rel:.4})");
}

#[test]
fn e1_dominates_singular_on_random_configs() {
    use rand::Rng;
    use rand::SeedableRng;
    let spec = p0();
    let scheme = QuadratureScheme::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let kernels = ["cos2-projected", "cos1-projected", "sign4-projected"];
    let f = ScalarField::indicator_ellipsoid(&spec, vec![0.0, 0.0], 1.0).unwrap();
    let mut checked = 0;
    while checked < 30 {
        let x = [
            (rng.random::<f64>() * 2.0 - 1.0) * 8.0,
            (rng.random::<f64>() * 2.0 - 1.0) * 16.0,
        ];
        let r = spec.rho(&x).unwrap();
        if !(1.8..8.0).contains(&r) {
            continue;
        }
        let kernel = builtin_kernel(&spec, &kernels[checked % 3].into()).unwrap();
        let t = operators::singular_pv(&kernel, &f, &x, &scheme).unwrap();
        let maj = operators::e1_majorant(&kernel, &f, &x, &scheme, 1.0).unwrap();
        assert!(
            t.value.abs() <= maj + t.est_error + 1e-12,
            "domination failed at {x:?}: |{}| > {maj}",
            t.value
        );
        checked += 1;
    }
}
