//! Acceptance suite: one test per criterion, each printing a verdict line
//! (run with `cargo test --test acceptance -- --nocapture` to see them all).
//!
//! Two sub-checks are reported as documented failures rather than forced
//! green: the energy-rate identity in its gain-only form (the rate needs the
//! dispersive-flux term; without it the residual has an O(1) floor and the
//! lossless energy visibly breathes), and the fourth-order fit on the
//! {4e-3, 2e-3, 1e-3} ladder (those errors sit at the H¹ rounding floor of
//! ~1e-13, so the fit measures noise). The tests assert the measured reality
//! behind each verdict; the constructive counterparts pass at full strength.

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dmnls_core::fiber::FiberParams;
use dmnls_core::grid::{
    gaussian_profile, h1_distance, h1_norm, l2_norm, ComplexField, SpatialGrid,
};
use dmnls_core::harness::{
    fit_log_slope, lipschitz_probe, sweep_epsilon, verify_suite, SweepConfig, VerifyConfig,
};
use dmnls_core::io::{
    read_snapshot, write_diagnostics_csv, write_snapshot, write_sweep_csv,
};
use dmnls_core::nonlinear::{kernel_identity_check, Execution, KernelCheckOptions};
use dmnls_core::propagator::{dispersive_decay_probe, free_propagate, linear_propagate};
use dmnls_core::quadrature::QuadratureRule;
use dmnls_core::solver::{
    energy_rate_report, solve_averaged, solve_full, solve_transformed,
    solve_transformed_cross_checked, SolveConfig,
};
use dmnls_core::Error;

const LENGTH: f64 = 16.0 * std::f64::consts::PI;

fn grid512() -> Arc<SpatialGrid> {
    SpatialGrid::new(512, LENGTH).unwrap()
}

fn unit_gaussian(g: &Arc<SpatialGrid>) -> ComplexField {
    gaussian_profile(g, 1.0, 1.0, 0.0, 0.0).unwrap()
}

fn verdict(name: &str, detail: &str, pass: bool) {
    println!(
        "criterion {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn verdict_documented(name: &str, detail: &str) {
    println!("criterion {name}: FAIL [documented model defect, see notes] ({detail})");
}

#[test]
fn criterion_1_averaging_rate() {
    let start = Instant::now();
    let g = grid512();
    let v0 = unit_gaussian(&g);
    let eps_list = [0.1, 0.05, 0.025, 0.0125];
    for gamma in [0.0, 0.2] {
        let cfg = SweepConfig::new(gamma, 0.5, 1.0).unwrap();
        let result = sweep_epsilon(&v0, &cfg, &eps_list).unwrap();
        let ok = (0.8..=1.15).contains(&result.slope);
        verdict(
            "1 averaging rate",
            &format!("gamma={gamma}: slope={:.4}, errors={:?}", result.slope, result.errors),
            ok,
        );
        assert!(ok, "slope {} outside [0.8, 1.15] for gamma={gamma}", result.slope);
        // soft monotonicity: at most one inversion, and only near the floor
        let floor = 2.0 * result.errors.last().unwrap();
        let inversions = result
            .errors
            .windows(2)
            .filter(|w| w[1] > w[0] && w[1] > floor)
            .count();
        assert_eq!(inversions, 0, "errors not monotone: {:?}", result.errors);
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict("1 runtime", &format!("{elapsed:.1}s <= 120s"), elapsed <= 120.0);
    assert!(elapsed <= 120.0);
}

#[test]
fn criterion_2_mass_conservation() {
    let g = grid512();
    let u0 = unit_gaussian(&g);
    let params = FiberParams::new(0.1, 0.2, 0.5).unwrap();
    // 1e4 Strang steps at 20 per half-cell
    let horizon = 1e4 * params.eps / 20.0;
    let cfg = SolveConfig::new(horizon, 20, 1e-3).unwrap().with_stride(2500);
    let tr = solve_full(&u0, &params, &cfg).unwrap();
    let m0 = tr.diagnostics()[0].mass;
    let drift_full = tr
        .diagnostics()
        .iter()
        .map(|d| (d.mass - m0).abs() / m0)
        .fold(0.0, f64::max);
    verdict(
        "2 mass (full solver, 1e4 steps)",
        &format!("relative drift {drift_full:.3e} <= 1e-12"),
        drift_full <= 1e-12,
    );
    assert!(drift_full <= 1e-12, "drift {drift_full:e}");

    let cfg = SolveConfig::new(1.0, 1, 1e-3).unwrap().with_stride(200);
    let tr = solve_averaged(&u0, 0.2, 0.5, &cfg).unwrap();
    let m0 = tr.diagnostics()[0].mass;
    let drift_avg = tr
        .diagnostics()
        .iter()
        .map(|d| (d.mass - m0).abs() / m0)
        .fold(0.0, f64::max);
    verdict(
        "2 mass (averaged solver, M=1)",
        &format!("relative drift {drift_avg:.3e} <= 1e-8"),
        drift_avg <= 1e-8,
    );
    assert!(drift_avg <= 1e-8, "averaged drift {drift_avg:e}");
}

#[test]
fn criterion_3_kernel_identity() {
    let g = grid512();
    let v = unit_gaussian(&g);
    let gamma = 0.2;
    let params = FiberParams::new(0.1, gamma, 0.5).unwrap();
    let rule = QuadratureRule::gauss_legendre(32).unwrap();
    let report = kernel_identity_check(
        &v,
        &params,
        &rule,
        KernelCheckOptions { tol: 1e-8, gain_scale: 1.0 },
        Execution::default(),
    )
    .unwrap();
    verdict(
        "3 kernel identity",
        &format!("H1 discrepancy {:.3e} <= 1e-8", report.discrepancy),
        report.pass,
    );
    assert!(report.pass, "discrepancy {:e}", report.discrepancy);

    let broken = kernel_identity_check(
        &v,
        &params,
        &rule,
        KernelCheckOptions { tol: 1e-8, gain_scale: (2.0 * gamma).exp() },
        Execution::default(),
    )
    .unwrap();
    verdict(
        "3 kernel identity negative control",
        &format!("wrong amplifier convention discrepancy {:.3e} > 1e-2", broken.discrepancy),
        broken.discrepancy > 1e-2,
    );
    assert!(broken.discrepancy > 1e-2);
}

#[test]
fn criterion_4_transform_equivalence() {
    let g = grid512();
    let u0 = unit_gaussian(&g);
    let params = FiberParams::new(0.05, 0.2, 0.5).unwrap();
    // full path at 160 steps per half-cell, RK4 path at dt = 1e-3,
    // shared snapshots every 0.02
    let cfg = SolveConfig::new(1.0, 160, 1e-3).unwrap().with_stride(64);
    let tol = 5e-7f64.max(10.0 * 1e-3f64.powi(2));
    let (_, gap) = solve_transformed_cross_checked(&u0, &params, &cfg).unwrap();
    verdict(
        "4 transform equivalence",
        &format!("sup-H1 path gap {gap:.3e} <= {tol:.1e}"),
        gap <= tol,
    );
    assert!(gap <= tol);
}

#[test]
fn criterion_5_energy_rate() {
    let g = grid512();
    let u0 = unit_gaussian(&g);
    let params = FiberParams::new(0.1, 0.2, 0.5).unwrap();
    let cfg = SolveConfig::new(0.5, 200, 1e-3).unwrap();
    let fine = solve_transformed(&u0, &params, &cfg).unwrap();
    let coarse = energy_rate_report(&fine.subsample(4), &params).unwrap();
    let fine_r = energy_rate_report(&fine.subsample(2), &params).unwrap();

    // with the dispersive-flux term the identity closes at second order
    let ratio_flux = coarse.residual_with_flux / fine_r.residual_with_flux;
    let ok = (3.5..=4.5).contains(&ratio_flux);
    verdict(
        "5 energy rate (flux-inclusive identity)",
        &format!(
            "halving ratio {ratio_flux:.3} in [3.5, 4.5], residuals {:.3e} -> {:.3e}",
            coarse.residual_with_flux, fine_r.residual_with_flux
        ),
        ok,
    );
    assert!(ok, "flux-identity ratio {ratio_flux}");

    // as stated (gain term only) the residual does not converge: it carries
    // the O(1) dispersive flux, so the halving ratio pins near 1
    let ratio_gain = coarse.residual_gain_only / fine_r.residual_gain_only;
    verdict_documented(
        "5 energy rate (gain-only form, as stated)",
        &format!(
            "halving ratio {ratio_gain:.3} not in [3.5, 4.5]; residual floor {:.3e}",
            fine_r.residual_gain_only
        ),
    );
    assert!(
        !(3.5..=4.5).contains(&ratio_gain),
        "gain-only ratio unexpectedly in window: {ratio_gain}"
    );
    assert!(
        fine_r.residual_gain_only > 0.1,
        "gain-only residual floor vanished: {:e}",
        fine_r.residual_gain_only
    );

    // lossless case: the instantaneous-map energy breathes with the map
    // (conservation to 1e-7 as stated is impossible for this functional)...
    let lossless = FiberParams::new(0.1, 0.0, 0.5).unwrap();
    let cfg = SolveConfig::new(1.0, 20, 1e-3).unwrap().with_stride(2);
    let tr = solve_transformed(&u0, &lossless, &cfg).unwrap();
    let e0 = tr.diagnostics()[0].energy;
    let swing = tr
        .diagnostics()
        .iter()
        .map(|d| (d.energy - e0).abs())
        .fold(0.0, f64::max);
    verdict_documented(
        "5 lossless energy conservation (as stated)",
        &format!("max |E - E0| = {swing:.3e} > 1e-7: the quartic term breathes with the map"),
    );
    assert!(swing > 1e-2, "expected O(0.1) breathing, got {swing:e}");

    // ...while the autonomous invariant of the averaged flow is conserved
    let cfg = SolveConfig::new(1.0, 1, 1e-3).unwrap().with_stride(100);
    let tra = solve_averaged(&u0, 0.0, 0.5, &cfg).unwrap();
    let h0 = tra.diagnostics()[0].energy;
    let drift = tra
        .diagnostics()
        .iter()
        .map(|d| (d.energy - h0).abs())
        .fold(0.0, f64::max);
    verdict(
        "5 lossless conservation (averaged invariant)",
        &format!("max drift {drift:.3e} <= 1e-7"),
        drift <= 1e-7,
    );
    assert!(drift <= 1e-7);
}

#[test]
fn criterion_6_dispersive_decay() {
    let g = grid512();
    let f = unit_gaussian(&g);
    let params = FiberParams::new(1.0, 0.0, 0.5).unwrap();
    let ratio = dispersive_decay_probe(&f, 0.1, 0.9, &params).unwrap();
    verdict(
        "6 dispersive decay",
        &format!("ratio {ratio:.4} <= 1.02 with the exact constant"),
        ratio <= 1.02,
    );
    assert!(ratio <= 1.02);

    let resonant = FiberParams::new(1.0, 0.0, 1.0).unwrap();
    let err = dispersive_decay_probe(&f, 1.2, 1.8, &resonant);
    let ok = matches!(err, Err(Error::VanishingDispersion { .. }));
    verdict("6 resonant case raises the documented error", &format!("{err:?}"), ok);
    assert!(ok);
}

#[test]
fn criterion_7_self_convergence() {
    let g = grid512();
    let u0 = unit_gaussian(&g);
    let params = FiberParams::new(0.1, 0.2, 0.5).unwrap();

    // splitting order on steps-per-half-cell {5, 10, 20} vs a 160 reference
    let reference = {
        let cfg = SolveConfig::new(1.0, 160, 1e-3).unwrap().with_stride(1 << 20);
        solve_full(&u0, &params, &cfg).unwrap().last_field().unwrap().clone()
    };
    let mut errs = Vec::new();
    let mut dts = Vec::new();
    for spc in [5usize, 10, 20] {
        let cfg = SolveConfig::new(1.0, spc, 1e-3).unwrap().with_stride(1 << 20);
        let tr = solve_full(&u0, &params, &cfg).unwrap();
        errs.push(h1_distance(tr.last_field().unwrap(), &reference));
        dts.push(params.eps / spc as f64);
    }
    let (slope, _) = fit_log_slope(&dts, &errs);
    let ok = (1.9..=2.1).contains(&slope);
    verdict(
        "7 splitting self-convergence",
        &format!("slope {slope:.3} in [1.9, 2.1], errors {errs:?}"),
        ok,
    );
    assert!(ok, "splitting slope {slope}");

    // fourth-order fit: the stated {4e-3, 2e-3, 1e-3} ladder lies at the
    // rounding floor; the {2e-2, 1e-2, 5e-3} ladder measures the real order
    let reference = {
        let cfg = SolveConfig::new(1.0, 1, 1.25e-3).unwrap().with_stride(1 << 20);
        solve_averaged(&u0, 0.2, 0.5, &cfg).unwrap().last_field().unwrap().clone()
    };
    let run = |dt: f64| {
        let cfg = SolveConfig::new(1.0, 1, dt).unwrap().with_stride(1 << 20);
        let tr = solve_averaged(&u0, 0.2, 0.5, &cfg).unwrap();
        h1_distance(tr.last_field().unwrap(), &reference)
    };
    let dts_stated = [4e-3, 2e-3, 1e-3];
    let errs_stated: Vec<f64> = dts_stated.iter().map(|&dt| run(dt)).collect();
    let (slope_stated, _) = fit_log_slope(&dts_stated, &errs_stated);
    let stated_ok = (3.8..=4.2).contains(&slope_stated);
    if stated_ok {
        verdict(
            "7 rk4 self-convergence (stated ladder)",
            &format!("slope {slope_stated:.3}, errors {errs_stated:?}"),
            true,
        );
    } else {
        verdict_documented(
            "7 rk4 self-convergence (stated ladder)",
            &format!(
                "slope {slope_stated:.3} not in [3.8, 4.2]: errors {errs_stated:?} sit at the rounding floor"
            ),
        );
        assert!(
            errs_stated.iter().all(|&e| e <= 2e-11),
            "floor regime expected, got {errs_stated:?}"
        );
    }
    let dts_wide = [2e-2, 1e-2, 5e-3];
    let errs_wide: Vec<f64> = dts_wide.iter().map(|&dt| run(dt)).collect();
    let (slope_wide, _) = fit_log_slope(&dts_wide, &errs_wide);
    let ok = (3.8..=4.2).contains(&slope_wide);
    verdict(
        "7 rk4 self-convergence (resolvable ladder)",
        &format!("slope {slope_wide:.3} in [3.8, 4.2], errors {errs_wide:?}"),
        ok,
    );
    assert!(ok, "rk4 slope {slope_wide}");
}

#[test]
fn criterion_8_lipschitz() {
    let g = grid512();
    let v0 = unit_gaussian(&g);
    let cfg = SweepConfig::new(0.2, 0.5, 1.0).unwrap();
    let bump = gaussian_profile(&g, 1.0, 0.7, 2.0, 0.0).unwrap();
    let rows = lipschitz_probe(&v0, 0.1, &cfg, &[1e-2, 1e-3, 1e-4], &bump).unwrap();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let last = ratios[ratios.len() - 1];
    let prev = ratios[ratios.len() - 2];
    let stable = (last - prev).abs() / prev <= 0.2;
    let no_growth = last <= ratios[0] * 1.2;
    verdict(
        "8 Lipschitz dependence",
        &format!("ratios {ratios:?}: last two within 20%, no growth as delta -> 0"),
        stable && no_growth,
    );
    assert!(stable, "ratios {ratios:?}");
    assert!(no_growth, "ratios grew: {ratios:?}");
}

#[test]
fn criterion_9_unitarity_and_laws() {
    let g = grid512();
    let params = FiberParams::new(0.3, 0.1, 0.6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        // random smooth field from a damped spectrum
        let spec: Vec<Complex64> = g
            .frequencies()
            .iter()
            .map(|&xi| {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                    * (-xi * xi / 8.0).exp()
            })
            .collect();
        let f = dmnls_core::grid::dft_inverse(
            &dmnls_core::grid::SpectralField::new(g.clone(), spec).unwrap(),
        );
        let (l2_0, h1_0) = (l2_norm(&f), h1_norm(&f));
        let t = rng.random::<f64>() * 4.0 - 2.0;
        let s = rng.random::<f64>() * 4.0 - 2.0;
        let ft = free_propagate(&f, t);
        worst = worst.max((l2_norm(&ft) - l2_0).abs() / l2_0);
        worst = worst.max((h1_norm(&ft) - h1_0).abs() / h1_0);
        let uf = linear_propagate(&f, s, s + 0.7, &params);
        worst = worst.max((l2_norm(&uf) - l2_0).abs() / l2_0);
        worst = worst.max((h1_norm(&uf) - h1_0).abs() / h1_0);
        let comp = h1_distance(
            &free_propagate(&free_propagate(&f, s), t),
            &free_propagate(&f, s + t),
        ) / h1_0;
        worst = worst.max(comp);
        let coc = h1_distance(
            &linear_propagate(&linear_propagate(&f, s, s + 0.7, &params), s + 0.7, s + 1.9, &params),
            &linear_propagate(&f, s, s + 1.9, &params),
        ) / h1_0;
        worst = worst.max(coc);
    }
    verdict(
        "9 unitarity and composition laws",
        &format!("worst relative deviation {worst:.3e} <= 1e-12 over 100 random fields"),
        worst <= 1e-12,
    );
    assert!(worst <= 1e-12);
}

#[test]
fn criterion_10_determinism_and_io() {
    let dir = std::env::temp_dir().join(format!("dmnls-accept-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let g = grid512();
    let v0 = unit_gaussian(&g);

    // identical configurations produce bitwise-identical outputs
    let mut cfg = SweepConfig::new(0.2, 0.5, 0.25).unwrap();
    cfg.dt = 2.5e-3;
    cfg.snapshot_intervals = 10;
    let eps = [0.1, 0.05, 0.025];
    let r1 = sweep_epsilon(&v0, &cfg, &eps).unwrap();
    let r2 = sweep_epsilon(&v0, &cfg, &eps).unwrap();
    let (p1, p2) = (dir.join("sweep1.csv"), dir.join("sweep2.csv"));
    write_sweep_csv(&p1, &r1).unwrap();
    write_sweep_csv(&p2, &r2).unwrap();
    let identical_sweep = std::fs::read(&p1).unwrap() == std::fs::read(&p2).unwrap();

    let params = FiberParams::new(0.1, 0.2, 0.5).unwrap();
    let sc = SolveConfig::new(0.5, 20, 1e-3).unwrap().with_stride(20);
    let t1 = solve_full(&v0, &params, &sc).unwrap();
    let t2 = solve_full(&v0, &params, &sc).unwrap();
    let (d1, d2) = (dir.join("diag1.csv"), dir.join("diag2.csv"));
    write_diagnostics_csv(&d1, &t1).unwrap();
    write_diagnostics_csv(&d2, &t2).unwrap();
    let (s1, s2) = (dir.join("final1.snap"), dir.join("final2.snap"));
    write_snapshot(&s1, t1.last_field().unwrap(), *t1.times().last().unwrap()).unwrap();
    write_snapshot(&s2, t2.last_field().unwrap(), *t2.times().last().unwrap()).unwrap();
    let identical_run = std::fs::read(&d1).unwrap() == std::fs::read(&d2).unwrap()
        && std::fs::read(&s1).unwrap() == std::fs::read(&s2).unwrap();
    verdict(
        "10 determinism",
        "repeated runs byte-identical (sweep CSV, diagnostics CSV, snapshot)",
        identical_sweep && identical_run,
    );
    assert!(identical_sweep && identical_run);

    // snapshot round-trip is bitwise-exact
    let (back, _) = read_snapshot(&s1).unwrap();
    let bitwise = back
        .values()
        .iter()
        .zip(t1.last_field().unwrap().values())
        .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    verdict("10 snapshot round-trip", "bitwise-exact", bitwise);
    assert!(bitwise);

    // the verification suite passes on defaults, quickly
    let start = Instant::now();
    let report = verify_suite(&VerifyConfig::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mut names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
    let total = names.len();
    names.sort();
    names.dedup();
    let unique = names.len() == total;
    verdict(
        "10 verify suite",
        &format!(
            "all {} checks pass, each registered once, in {elapsed:.1}s <= 60s",
            total
        ),
        report.all_pass() && unique && elapsed <= 60.0,
    );
    for c in report.checks.iter().filter(|c| !c.pass) {
        println!("  failing: {} = {:e} (tol {:e})", c.name, c.value, c.tolerance);
    }
    assert!(report.all_pass());
    assert!(unique);
    assert!(elapsed <= 60.0, "verify took {elapsed}s");
}

#[test]
fn perturbed_sweep_slope_stays_first_order() {
    let g = grid512();
    let v0 = unit_gaussian(&g);
    let cfg = SweepConfig::new(0.2, 0.5, 1.0).unwrap();
    let bump = gaussian_profile(&g, 1.0, 0.7, 2.0, 0.0).unwrap();
    let result =
        dmnls_core::harness::perturbed_sweep(&v0, &cfg, &[0.1, 0.05, 0.025, 0.0125], &bump, 1.0)
            .unwrap();
    println!(
        "perturbed sweep: slope {:.4}, errors {:?}",
        result.slope, result.errors
    );
    assert!(
        (0.8..=1.15).contains(&result.slope),
        "perturbed slope {} outside window",
        result.slope
    );
    assert!(!result.hypothesis_violating);
}

#[test]
fn broken_gain_hook_fails_only_the_kernel_check() {
    let cfg = VerifyConfig {
        kernel_gain_scale: (2.0f64 * 0.2).exp(),
        ..VerifyConfig::default()
    };
    let report = verify_suite(&cfg).unwrap();
    for c in &report.checks {
        if c.name == "kernel_identity_lossy" {
            assert!(!c.pass, "negative control did not trip: {:e}", c.value);
            assert!(c.value > 1e-2);
        } else {
            assert!(c.pass, "unrelated check failed under the hook: {} = {:e}", c.name, c.value);
        }
    }
}

#[test]
fn verify_flags_under_resolved_grid() {
    // at n = 64 the continuum-referenced closed-form checks blow past their
    // tolerances (spectral truncation ~e^{-8}); lattice-intrinsic identities
    // like self-convergence survive, so these are the resolution diagnostics
    let cfg = VerifyConfig { n: 64, ..VerifyConfig::default() };
    let report = verify_suite(&cfg).unwrap();
    assert!(!report.all_pass(), "expected failures at n = 64");
    let failing: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    println!("n=64 failing checks: {failing:?}");
    assert!(
        failing.contains(&"gaussian_spectrum_closed_form")
            || failing.contains(&"free_gaussian_closed_form"),
        "expected a continuum-referenced check to fail, got {failing:?}"
    );
}
