mod common;

use std::f64::consts::PI;

use bose2d::idealgas::{gibbs_tail_number, ThermoPoint};
use bose2d::paramsweep::{
    default_params, default_params_with, nelder_mead, optimize_params, sweep_sigma, write_csv,
    write_json_lines, NelderMeadOptions, ScalingConstants, SweepOptions,
};
use bose2d::scattering::RadialPotential;
use bose2d::trialbound::assemble_bound;

#[test]
fn unit_constant_example() {
    let t = ThermoPoint::from_sigma(50.0, 1.0, 1.0).unwrap();
    let p = default_params_with(50.0, 1.0, t.a, t.beta, &ScalingConstants::unit()).unwrap();
    assert!(common::rel(p.r, 50f64.powf(-3.5)) < 1e-14);
    assert!(common::rel(p.ell, 125_000.0) < 1e-14);
    assert_eq!((p.b, p.r0), (50.0, 50.0));
    assert!(2.0 * p.b + p.r0 < p.ell);
    assert!((p.n_g / p.n - 0.3113).abs() < 5e-5);
    assert_eq!(p.k, 0.5);
}

#[test]
fn gibbs_tail_negligible_at_defaults() {
    let t = ThermoPoint::from_sigma(50.0, 1.0, 1.0).unwrap();
    let p = default_params(50.0, t.rho, t.a, t.beta).unwrap();
    let tail = gibbs_tail_number(p.n_cut, t.beta, p.mu, p.k, p.n_g).unwrap();
    assert!(tail < 1e-10);
    assert!(p.a_mult >= 1.0 && p.a_mult.log2().fract() == 0.0);
}

#[test]
fn invariant_violation_names_inequality() {
    let t = ThermoPoint::from_sigma(12.0, 1.0, 1.0).unwrap();
    let c = ScalingConstants {
        ell: 0.001,
        ..ScalingConstants::default()
    };
    let e = default_params_with(12.0, 1.0, t.a, t.beta, &c).unwrap_err();
    assert!(e.to_string().contains("2b + R₀ < ℓ"), "{e}");
}

#[test]
fn sweep_rows_decrease_in_sigma() {
    let v = RadialPotential::hard_disk(1.0).unwrap();
    let sigmas = [25.0, 50.0, 100.0, 200.0];
    let report = sweep_sigma(&sigmas, &[1.0, 10.0], &v, &SweepOptions::default()).unwrap();
    assert_eq!(report.rows.len(), 8);
    assert!(report.failures.is_empty());
    for br in [1.0, 10.0] {
        let ne: Vec<f64> = report
            .rows
            .iter()
            .filter(|r| r.beta_rho == br)
            .map(|r| r.normalized_excess)
            .collect();
        assert!(ne.windows(2).all(|w| w[1] < w[0]), "{ne:?}");
        assert!(ne.iter().all(|&x| x > 1.0));
    }
    let fit = report.fit.unwrap();
    assert!(fit.c_envelope <= 50.0 && fit.c_least_squares <= fit.c_envelope);
}

#[test]
fn sweep_records_failures_and_continues() {
    let v = RadialPotential::hard_disk(1.0).unwrap();
    let report = sweep_sigma(&[30.0], &[1.0, -1.0], &v, &SweepOptions::default()).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.failures.len(), 1);
    assert!(sweep_sigma(&[5.0], &[1.0], &v, &SweepOptions::default()).is_err());
}

#[test]
fn rescaled_potentials_agree() {
    // the sweep rescales v to scattering length a, so the radius is irrelevant
    let a = sweep_sigma(&[40.0], &[1.0], &RadialPotential::hard_disk(1.0).unwrap(), &SweepOptions::default()).unwrap();
    let b = sweep_sigma(&[40.0], &[1.0], &RadialPotential::hard_disk(3.0).unwrap(), &SweepOptions::default()).unwrap();
    assert!(common::rel(a.rows[0].bound_total, b.rows[0].bound_total) < 1e-12);
}

#[test]
fn regime_coefficients() {
    let v = RadialPotential::hard_disk(1.0).unwrap();
    for sigma in [25.0f64, 100.0] {
        let hot = 0.01 * sigma.ln() / (4.0 * PI);
        let cold = 1e3 * sigma.ln() / (4.0 * PI);
        let report = sweep_sigma(&[sigma], &[hot, cold], &v, &SweepOptions::default()).unwrap();
        assert_eq!(report.rows[0].target_coefficient, 2.0);
        assert!((report.rows[1].target_coefficient - 1.0).abs() <= 2e-3);
        assert!(report.rows.iter().all(|r| r.normalized_excess > 1.0));
    }
}

#[test]
fn optimizer_never_worse() {
    let v = RadialPotential::hard_disk(1.0).unwrap();
    for (sigma, br) in [(50.0, 1.0), (25.0, 10.0)] {
        let t = ThermoPoint::from_sigma(sigma, br, 1.0).unwrap();
        let v = v.scaled(t.a).unwrap();
        let start = default_params(sigma, t.rho, t.a, t.beta).unwrap();
        let base = assemble_bound(&t, &start, &v).unwrap().total;
        let opt = optimize_params(&t, &v, &start, Some(1)).unwrap();
        assert!(opt.total <= base);
        assert_eq!(opt.start_total, base);
        let again = optimize_params(&t, &v, &start, Some(1)).unwrap();
        assert_eq!(opt, again);
        let check = assemble_bound(&t, &opt.params, &v).unwrap().total;
        assert!(common::rel(check, opt.total) < 1e-12);
    }
}

#[test]
fn nelder_mead_quadratic_minimum() {
    let r = nelder_mead(|x| Some(2.0 * (x[0] + 1.5).powi(2) - 4.0), &[3.0], &[1.0], NelderMeadOptions::default());
    assert!((r.x[0] + 1.5).abs() < 1e-6);
    let r = nelder_mead(
        |x| Some((x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2)),
        &[0.0, 0.0],
        &[0.5, 0.5],
        NelderMeadOptions::default(),
    );
    assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] + 2.0).abs() < 1e-6);
}

#[test]
fn writers_are_deterministic() {
    let v = RadialPotential::hard_disk(1.0).unwrap();
    let report = sweep_sigma(&[20.0, 40.0], &[1.0], &v, &SweepOptions::default()).unwrap();
    let mut csv = Vec::new();
    write_csv(&report, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("sigma,beta_rho,bound_total,ideal_ref,normalized_excess,ell,"));
    let first = text.lines().nth(1).unwrap();
    assert_eq!(first.split(',').count(), header.split(',').count());
    assert!(first.starts_with("2.0000000000000000e1,"));

    let mut json = Vec::new();
    write_json_lines(&report, &mut json).unwrap();
    let lines: Vec<serde_json::Value> = String::from_utf8(json)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["sigma"], 20.0);
    assert!(lines[2]["fit"]["c_envelope"].is_number());
}
