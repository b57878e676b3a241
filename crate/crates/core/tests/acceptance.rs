//! The acceptance gate: every criterion below runs at its stated tolerance
//! and prints one pass/fail line. Desk scale is the parabolic plane
//! diag[1, 2] (gamma = 3) unless stated otherwise.

mod common;

use anisoharm::functions::{FieldId, RadialProfile, ScalarField};
use anisoharm::geometry::AnisotropySpec;
use anisoharm::harness::calibration::Fixtures;
use anisoharm::harness::suites::{self, SuiteId};
use anisoharm::kernels::{builtin_kernel, KERNEL_CATALOG};
use anisoharm::operators::{self, QuadratureScheme};
use anisoharm::spaces::{self, NormScheme, Region};
use anisoharm::{Ellipsoid, Verdict};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

fn p0() -> AnisotropySpec {
    AnisotropySpec::parabolic(2).unwrap()
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "[{}] criterion {criterion}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn c01_metric_correctness() {
    let spec = p0();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let x = [
            (rng.random::<f64>() * 2.0 - 1.0) * 10f64.powi(rng.random_range(-3..4)),
            (rng.random::<f64>() * 2.0 - 1.0) * 10f64.powi(rng.random_range(-3..4)),
        ];
        let closed = ((x[0] * x[0] + (x[0].powi(4) + 4.0 * x[1] * x[1]).sqrt()) / 2.0).sqrt();
        let got = spec.rho(&x).unwrap();
        if closed > 0.0 {
            worst = worst.max((got - closed).abs() / closed);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "01 metric-correctness",
        worst <= 1e-10 && elapsed < 1.0,
        &format!("max rel err {worst:.2e} over 1e4 points in {elapsed:.3}s"),
    );
}

#[test]
fn c02_homogeneity_symmetry_shrinking() {
    let spec = p0();
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst_h = 0.0f64;
    let mut sym = true;
    let mut shrink = true;
    for _ in 0..10_000 {
        let x = [
            rng.random::<f64>() * 8.0 - 4.0,
            rng.random::<f64>() * 8.0 - 4.0,
        ];
        let t = 10f64.powf(rng.random_range(-2.0..2.0));
        let rx = spec.rho(&x).unwrap();
        if rx == 0.0 {
            continue;
        }
        let rdil = spec.rho(&spec.dilate(t, &x).unwrap()).unwrap();
        worst_h = worst_h.max((rdil - t * rx).abs() / (t * rx));
        sym &= (spec.rho(&[-x[0], -x[1]]).unwrap() - rx).abs() <= 1e-12 * rx;
        let theta = rng.random::<f64>().clamp(1e-6, 1.0 - 1e-9);
        shrink &= spec.rho(&[theta * x[0], theta * x[1]]).unwrap() <= rx * (1.0 + 1e-9);
    }
    report(
        "02 homogeneity-symmetry-shrinking",
        worst_h <= 1e-8 && sym && shrink,
        &format!("homogeneity max rel err {worst_h:.2e}, symmetry {sym}, shrinking {shrink}"),
    );
}

#[test]
fn c03_p0_closed_form_equivalence() {
    let spec = p0();
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let lo_bound = 0.5f64.sqrt() - 1e-9;
    let hi_bound = 1.0 + 1e-9;
    let (mut lo_seen, mut hi_seen) = (f64::MAX, f64::MIN);
    let mut ok = true;
    for _ in 0..10_000 {
        let x = [
            (rng.random::<f64>() * 2.0 - 1.0) * 10f64.powi(rng.random_range(-2..3)),
            (rng.random::<f64>() * 2.0 - 1.0) * 10f64.powi(rng.random_range(-2..3)),
        ];
        let denom = spec.rho(&x).unwrap();
        if denom == 0.0 {
            continue;
        }
        let ratio = AnisotropySpec::rho_paper_p0(&x).unwrap() / denom;
        lo_seen = lo_seen.min(ratio);
        hi_seen = hi_seen.max(ratio);
        ok &= (lo_bound..=hi_bound).contains(&ratio);
    }
    report(
        "03 p0-closed-form-equivalence",
        ok,
        &format!("ratio range [{lo_seen:.9}, {hi_seen:.9}] within [2^-1/2, 1]"),
    );
}

#[test]
fn c04_measure_law_monte_carlo() {
    let start = Instant::now();
    let mut ok = true;
    let mut lines = Vec::new();
    for (spec, expect_upsilon, label) in [
        (p0(), PI, "p0-2d"),
        (AnisotropySpec::parabolic(3).unwrap(), 4.0 * PI / 3.0, "p0-3d"),
    ] {
        let upsilon = spec.unit_volume().unwrap();
        ok &= (upsilon - expect_upsilon).abs() / expect_upsilon < 1e-9;
        let mut rng = ChaCha8Rng::seed_from_u64(1004);
        let n = spec.dim();
        for r in [0.1f64, 1.0, 10.0] {
            let total = 1_000_000usize;
            let mut hits = 0usize;
            let mut y = vec![0.0; n];
            let origin = vec![0.0; n];
            let box_vol: f64 = spec.alpha().iter().map(|&a| 2.0 * r.powf(a)).product();
            for _ in 0..total {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = (rng.random::<f64>() * 2.0 - 1.0) * r.powf(spec.alpha()[i]);
                }
                if spec.contains(&origin, r, &y) {
                    hits += 1;
                }
            }
            let mc = box_vol * hits as f64 / total as f64;
            let exact = upsilon * r.powf(spec.gamma());
            let rel = (mc - exact).abs() / exact;
            ok &= rel <= 0.01;
            lines.push(format!("{label} r={r}: rel {rel:.2e}"));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 30.0;
    report(
        "04 measure-law",
        ok,
        &format!("{} in {elapsed:.1}s", lines.join("; ")),
    );
}

#[test]
fn c05_cancellation() {
    let spec = p0();
    let mut worst = 0.0f64;
    for name in KERNEL_CATALOG {
        let projected = builtin_kernel(&spec, &name.into())
            .unwrap()
            .project_to_cancellation()
            .unwrap();
        worst = worst.max(projected.cancellation_residual().unwrap().abs());
    }
    let konst = builtin_kernel(&spec, &"const".into()).unwrap();
    let residual = konst.cancellation_residual().unwrap();
    let const_ok = (residual - 3.0 * PI).abs() <= 1e-10;
    report(
        "05 cancellation",
        worst <= 1e-12 && const_ok,
        &format!("worst post-projection residual {worst:.2e}; const residual {residual:.12} vs 3pi"),
    );
}

#[test]
fn c06_pv_sanity() {
    let spec = p0();
    let scheme = QuadratureScheme::default();

    // odd kernel against an even field vanishes at the origin
    let odd = builtin_kernel(&spec, &"cos1-projected".into()).unwrap();
    let gauss = ScalarField::gauss_rho(&spec);
    let at0 = operators::singular_pv(&odd, &gauss, &[0.0, 0.0], &scheme).unwrap();
    let odd_ok = at0.value.abs() <= 1e-6;

    // off-support evaluations against the Cartesian adaptive oracle
    let kernels = [
        "cos2-projected",
        "cos1-projected",
        "harmonic2-projected",
        "harmonic3-projected",
    ];
    let fields = [
        FieldId::IndicatorEllipsoid {
            center: None,
            radius: 1.0,
        },
        FieldId::PowerRhoTruncated {
            exponent: 0.5,
            radius: 1.0,
        },
    ];
    let points: [[f64; 2]; 3] = [[2.0, 0.5], [0.0, 6.0], [-2.5, 1.0]];
    let mut checked = 0;
    let mut worst_rel = 0.0f64;
    for kname in kernels {
        let kernel = builtin_kernel(&spec, &kname.into()).unwrap();
        for fid in &fields {
            let f = anisoharm::functions::builtin_field(&spec, fid).unwrap();
            for x in &points {
                let got = operators::singular_pv(&kernel, &f, x, &scheme).unwrap();
                let oracle = common::singular_offsupport_oracle(&spec, &kernel, &f, x, 1e-10);
                let denom = oracle.abs().max(1e-6);
                worst_rel = worst_rel.max((got.value - oracle).abs() / denom);
                checked += 1;
            }
        }
    }
    let oracle_ok = checked >= 20 && worst_rel <= 1e-4;

    // geometric decay of the truncation increments for smooth data
    let even = builtin_kernel(&spec, &"cos2-projected".into()).unwrap();
    let mut decay_ok = true;
    for x in [[0.3, 0.4], [-0.6, 0.2]] {
        let r = operators::singular_pv(&even, &gauss, &x, &scheme).unwrap();
        let shells = r.diagnostics["pv_shells_used"] as usize;
        let incs: Vec<f64> = (0..shells)
            .map(|j| r.diagnostics[&format!("pv_increment_{j:02}")])
            .collect();
        for w in incs.windows(2).skip(2) {
            if w[0].abs() > 1e-13 {
                decay_ok &= (w[1] / w[0]).abs() < 0.9;
            }
        }
        decay_ok &= r.pv_converged;
    }
    report(
        "06 pv-sanity",
        odd_ok && oracle_ok && decay_ok,
        &format!(
            "odd/even |Tf(0)| = {:.1e}; oracle worst rel {worst_rel:.2e} over {checked} configs; geometric decay {decay_ok}",
            at0.value.abs()
        ),
    );
}

#[test]
fn c07_e1_and_marcinkiewicz_domination() {
    let spec = p0();
    let scheme = QuadratureScheme::default();
    let kernels = [
        "cos2-projected",
        "cos1-projected",
        "sign4-projected",
        "harmonic2-projected",
        "harmonic3-projected",
    ];
    let fields = [
        FieldId::IndicatorEllipsoid {
            center: None,
            radius: 1.0,
        },
        FieldId::PowerRhoTruncated {
            exponent: 0.5,
            radius: 1.0,
        },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let mut points = Vec::new();
    while points.len() < 10 {
        let x = [
            (rng.random::<f64>() * 2.0 - 1.0) * 6.0,
            (rng.random::<f64>() * 2.0 - 1.0) * 12.0,
        ];
        let r = spec.rho(&x).unwrap();
        if (2.0..6.0).contains(&r) {
            points.push(x);
        }
    }
    let mut count = 0;
    let mut e1_ok = true;
    let mut mu_ok = true;
    for kname in kernels {
        let kernel = builtin_kernel(&spec, &kname.into()).unwrap();
        for fid in &fields {
            let f = anisoharm::functions::builtin_field(&spec, fid).unwrap();
            for x in &points {
                let t = operators::singular_pv(&kernel, &f, x, &scheme).unwrap();
                let maj = operators::e1_majorant(&kernel, &f, x, &scheme, 1.0).unwrap();
                e1_ok &= t.value.abs() <= maj + t.est_error + 1e-12;
                let mu = operators::marcinkiewicz(&kernel, &f, x, &scheme).unwrap();
                mu_ok &= mu.value <= 0.5f64.sqrt() * maj * 1.1 + mu.est_error;
                count += 1;
            }
        }
    }
    report(
        "07 e1-and-marcinkiewicz-domination",
        e1_ok && mu_ok && count == 100,
        &format!("size bound {e1_ok}, square-function bound {mu_ok} at {count} off-support points"),
    );
}

#[test]
fn c08_norm_oracles() {
    let spec = p0();
    // Campanato of the unit indicator: sup 2(u - u^2) = 1/2
    let ind = ScalarField::indicator_ellipsoid(&spec, vec![0.0, 0.0], 1.0).unwrap();
    let mut fine = NormScheme::with_window(1e-1, 1e1);
    fine.nodes_per_decade = 50;
    let camp = spaces::local_campanato_norm(&spec, &ind, 1.0, 0.0, &[0.0, 0.0], &fine).unwrap();
    let camp_ok = (camp.value - 0.5).abs() / 0.5 <= 0.01;

    // Morrey norm of 1 with unit weight
    let one = ScalarField::constant(2, 1.0);
    let phi = RadialProfile::power(0.0);
    let morrey = spaces::local_morrey_norm(
        &spec,
        &one,
        2.0,
        &phi,
        &[0.0, 0.0],
        false,
        &NormScheme::default(),
    )
    .unwrap();
    let morrey_ok = (morrey.value - 1.0).abs() <= 1e-10;

    // weak <= strong across the catalog
    let catalog: Vec<ScalarField> = vec![
        ind.clone(),
        ScalarField::gauss_rho(&spec),
        ScalarField::power_rho_truncated(&spec, 0.5, 1.0).unwrap(),
        ScalarField::power_rho_truncated(&spec, -0.5, 1.0).unwrap(),
        ScalarField::indicator_ellipsoid(&spec, vec![1.0, 0.0], 0.5).unwrap(),
        ScalarField::log_rho(&spec),
        ScalarField::power_campanato(&spec, 0.2),
    ];
    let region = Ellipsoid::centered(2, 2.0).unwrap();
    let scheme = NormScheme::default();
    let mut weak_ok = true;
    for f in &catalog {
        for p in [1.0, 2.0] {
            let weak = spaces::weak_lp_norm(&spec, f, p, &region, &scheme).unwrap();
            let strong =
                spaces::lp_norm(&spec, f, p, &Region::Ellipsoid(region.clone()), &scheme).unwrap();
            weak_ok &= weak <= strong * (1.0 + 1e-12);
        }
        // and at the Morrey-norm level on a shared grid
        let phi = RadialProfile::morrey(1.0, 2.0, spec.gamma()).unwrap();
        let sch = NormScheme::with_window(1e-1, 1e1);
        let wk = spaces::local_morrey_norm(&spec, f, 2.0, &phi, &[0.0, 0.0], true, &sch).unwrap();
        let st = spaces::local_morrey_norm(&spec, f, 2.0, &phi, &[0.0, 0.0], false, &sch).unwrap();
        weak_ok &= wk.value <= st.value * (1.0 + 1e-12);
    }
    report(
        "08 norm-oracles",
        camp_ok && morrey_ok && weak_ok,
        &format!(
            "campanato(indicator) = {:.5} vs 0.5; morrey(1) = {:.12}; weak <= strong {weak_ok}",
            camp.value, morrey.value
        ),
    );
}

#[test]
fn c09_hardy_best_constants() {
    let outcome = suites::run_hardy_suite(0xBEEF).unwrap();
    for line in &outcome.lines {
        println!("   {line}");
    }
    report(
        "09 hardy-best-constants",
        outcome.pass,
        "three closed-form configurations, sharpness, and 50 random step inequalities each",
    );
}

#[test]
fn c10_remark_separation() {
    let outcome = suites::run_remark_pair_suite().unwrap();
    for line in &outcome.lines {
        println!("   {line}");
    }
    let verdicts_ok = outcome.artifacts.iter().any(|a| {
        matches!(a, suites::Artifact::Condition(name, rep)
            if name == "remark-e37" && rep.verdict == Verdict::SatisfiedOnWindow)
    }) && outcome.artifacts.iter().any(|a| {
        matches!(a, suites::Artifact::Condition(name, rep)
            if name == "remark-e35" && rep.verdict == Verdict::ViolatedUnboundedTrend)
    });
    report(
        "10 remark-separation",
        outcome.pass && verdicts_ok,
        "essinf condition satisfied, pointwise condition violated",
    );
}

#[test]
fn c11_local_estimate_suites() {
    let start = Instant::now();
    let fixtures_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut all_ok = true;
    let mut details = Vec::new();
    for id in [SuiteId::LocalEstimate, SuiteId::WeakType, SuiteId::Commutator] {
        let fixtures = Fixtures::load(&fixtures_dir.join(format!("{}.json", id.name()))).unwrap();
        let outcome = suites::run_suite(id, Some(&fixtures)).unwrap();
        let inconclusive = outcome.lines.iter().filter(|l| l.contains("INCONCLUSIVE")).count();
        all_ok &= outcome.pass;
        details.push(format!(
            "{}: {} ({} inconclusive)",
            id.name(),
            if outcome.pass { "pass" } else { "fail" },
            inconclusive
        ));
        if !outcome.pass {
            for line in &outcome.lines {
                println!("   {line}");
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    all_ok &= elapsed < 600.0;
    report(
        "11 local-estimate-suites",
        all_ok,
        &format!("{}; runtime {elapsed:.0}s", details.join("; ")),
    );
}

#[test]
fn c12_lemma4() {
    let outcome = suites::run_lemma4_suite().unwrap();
    for line in &outcome.lines {
        println!("   {line}");
    }
    report(
        "12 lemma4",
        outcome.pass,
        "mean-growth quotient flat in log ratio; fitted constants window-stable",
    );
}
