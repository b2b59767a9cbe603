mod common;

use std::f64::consts::PI;

use bose2d::lattice::{lattice_sum, sandwich, sandwich_width, RadialFn};
use common::{brute_lattice, rel, tanh_sinh_half_line};

#[test]
fn gaussian_matches_direct_sum() {
    let f = RadialFn::new(|t: f64| (-t).exp());
    let oracle = brute_lattice(|t| (-t).exp(), 2.0 * PI, 10);
    let s = sandwich(&f, 2.0 * PI).unwrap();
    assert!(rel(s.lattice_sum, oracle) < 1e-14);
    assert!((s.lattice_sum - 3.14224).abs() < 1e-5);
    assert!(s.lower_bound <= s.lattice_sum && s.lattice_sum <= s.upper_bound);
}

#[test]
fn bounds_match_radial_oracle() {
    let (beta, mu) = (1.0, -0.1);
    let f = RadialFn::bose_occupation(beta, mu);
    let occ = |t: f64| 1.0 / (beta * (t - mu)).exp_m1();
    let area = tanh_sinh_half_line(|r| r * occ(r * r), 0.0);
    let line = tanh_sinh_half_line(|r| occ(r * r), 0.0);
    for ell in [5.0, 10.0, 20.0] {
        let s = sandwich(&f, ell).unwrap();
        let lower = ell * ell / (2.0 * PI) * area - 2.0 * ell / PI * line;
        let upper = ell * ell / (2.0 * PI) * area + 2.0 * ell / PI * line + occ(0.0);
        assert!((s.lower_bound - lower).abs() < 1e-9 * upper);
        assert!(rel(s.upper_bound, upper) < 1e-10);
        assert!(s.holds());
        let oracle = brute_lattice(occ, ell, 400);
        assert!(rel(s.lattice_sum, oracle) < 1e-12);
    }
}

fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[test]
fn gap_shrinks_like_inverse_ell() {
    let f = RadialFn::bose_occupation(1.0, -0.1);
    let small = [5.0, 10.0, 20.0, 40.0];
    let res: Vec<_> = small.iter().map(|&l| sandwich(&f, l).unwrap()).collect();
    let gaps: Vec<f64> = res.iter().map(|s| s.relative_gap()).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    let widths: Vec<f64> = res.iter().map(|s| s.relative_width()).collect();
    let slope = log_slope(&small, &widths);
    assert!((-1.2..=-0.8).contains(&slope), "{slope}");
    // once the zero mode no longer dominates the sum, the gap relative to
    // the sum follows the same rate
    let large = [20.0, 40.0, 80.0, 160.0];
    let gaps: Vec<f64> = large.iter().map(|&l| sandwich(&f, l).unwrap().relative_gap()).collect();
    let slope = log_slope(&large, &gaps);
    assert!((-1.2..=-0.8).contains(&slope), "{slope}");
}

#[test]
fn sandwich_holds_for_assorted_decays() {
    let fns: Vec<RadialFn> = vec![
        RadialFn::new(|t: f64| (-0.3 * t).exp()),
        RadialFn::new(|t: f64| 1.0 / (1.0 + t).powi(3)),
        RadialFn::new(|t: f64| 1.0 / (1.0 + t * t).powi(2)),
        RadialFn::bose_occupation(2.0, -0.5),
    ];
    for f in &fns {
        for ell in [1.0, 3.0, 8.0, 25.0] {
            let s = sandwich(f, ell).unwrap();
            assert!(s.holds(), "ell={ell}: {s:?}");
            assert!(s.warnings.is_empty());
        }
    }
}

#[test]
fn width_identity() {
    let f = RadialFn::new(|t: f64| 1.0 / (1.0 + t).powi(3));
    for ell in [2.0, 7.0, 30.0] {
        let s = sandwich(&f, ell).unwrap();
        let w = sandwich_width(&f, ell).unwrap();
        assert!(((s.upper_bound - s.lower_bound) - w).abs() <= 1e-10 * w);
    }
}

#[test]
fn rejects_bad_ell() {
    let f = RadialFn::new(|t: f64| (-t).exp());
    assert!(sandwich(&f, 0.0).is_err());
    assert!(sandwich(&f, f64::INFINITY).is_err());
    assert!(lattice_sum(&f, 1.0).is_ok());
}
