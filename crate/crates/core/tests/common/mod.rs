//! Reference implementations used only by the tests. None of them call into
//! the library's numerical routines.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Tanh-sinh quadrature on `[a, b]`; tolerates integrable endpoint
/// singularities because nodes never touch the endpoints.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mut h = 1.0;
    let mut prev = f64::NAN;
    let node_sum = |h: f64, odd_only: bool| -> f64 {
        let mut s = 0.0;
        let mut k = if odd_only { 1 } else { 0 };
        loop {
            let t = k as f64 * h;
            let u = 0.5 * PI * t.sinh();
            let e = (-2.0 * u).exp();
            let delta = 2.0 * e / (1.0 + e);
            let w = half * 0.5 * PI * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
            let left = a + half * delta;
            let right = b - half * delta;
            if w < 1e-300 || left <= a || right >= b {
                break;
            }
            if k == 0 {
                s += w * f(0.5 * (a + b));
            } else {
                s += w * (f(left) + f(right));
            }
            k += if odd_only { 2 } else { 1 };
        }
        s
    };
    let mut sum = node_sum(h, false);
    let mut value = h * sum;
    for _ in 0..12 {
        h *= 0.5;
        sum += node_sum(h, true);
        value = h * sum;
        if (value - prev).abs() <= 1e-15 * value.abs() {
            break;
        }
        prev = value;
    }
    value
}

/// `∫_a^∞ f` via `x = a + s/(1-s)`.
pub fn tanh_sinh_half_line<F: Fn(f64) -> f64>(f: F, a: f64) -> f64 {
    tanh_sinh(
        |s| {
            let one_m = 1.0 - s;
            f(a + s / one_m) / (one_m * one_m)
        },
        0.0,
        1.0,
    )
}

/// Modified Bessel function `I_n(x)` from its power series.
pub fn bessel_i(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= half * half / (k * (k + n as f64));
        sum += term;
        if term < 1e-18 * sum {
            return sum;
        }
    }
}

/// Scattering length of the soft disk `V₀ 1(r < r₀)`:
/// `a = r₀ exp(-I₀(κr₀)/(κr₀ I₁(κr₀)))`, `κ² = V₀/2`.
pub fn soft_disk_length(r0: f64, v0: f64) -> f64 {
    let z = (0.5 * v0).sqrt() * r0;
    r0 * (-bessel_i(0, z) / (z * bessel_i(1, z))).exp()
}

/// `Σ_{|n_i| ≤ cut} f((2π/ℓ)² |n|²)`.
pub fn brute_lattice<F: Fn(f64) -> f64>(f: F, ell: f64, cut: i64) -> f64 {
    let k2 = (2.0 * PI / ell).powi(2);
    let mut s = 0.0;
    for a in -cut..=cut {
        for b in -cut..=cut {
            s += f(k2 * (a * a + b * b) as f64);
        }
    }
    s
}

/// RK4 integration of `g'' = (r²v/2) g` in `s = ln r` for a potential given
/// by constant pieces `(r_hi, value)` starting at the origin, then `v = 0`
/// up to `r_max`. Returns `a_R = R exp(-g/(r g'))` at `R = r_max`.
pub fn rk4_scattering_length(pieces: &[(f64, f64)], r_max: f64, steps_per_piece: usize) -> f64 {
    let kappa2 = 0.5 * pieces[0].1;
    let r_start = 1e-6 * pieces[0].0;
    let z2 = kappa2 * r_start * r_start;
    // I₀ series at small argument
    let mut g = 1.0 + z2 / 4.0 + z2 * z2 / 64.0;
    let mut h = z2 / 2.0 + z2 * z2 / 16.0;
    let mut lo = r_start;
    for &(r_hi, value) in pieces {
        let (s0, s1) = (lo.ln(), r_hi.ln());
        let ds = (s1 - s0) / steps_per_piece as f64;
        for i in 0..steps_per_piece {
            let s = s0 + i as f64 * ds;
            let q = |s: f64| 0.5 * (2.0 * s).exp() * value;
            let (k1g, k1h) = (h, q(s) * g);
            let (k2g, k2h) = (h + 0.5 * ds * k1h, q(s + 0.5 * ds) * (g + 0.5 * ds * k1g));
            let (k3g, k3h) = (h + 0.5 * ds * k2h, q(s + 0.5 * ds) * (g + 0.5 * ds * k2g));
            let (k4g, k4h) = (h + ds * k3h, q(s + ds) * (g + ds * k3g));
            g += ds / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
            h += ds / 6.0 * (k1h + 2.0 * k2h + 2.0 * k3h + k4h);
        }
        lo = r_hi;
    }
    // free region: g linear in s
    let g_r = g + h * (r_max / lo).ln();
    r_max * (-g_r / h).exp()
}

/// `2π ∫_{r_min}^∞ c r^{-p} ln²(r/a) r dr` in closed form.
pub fn power_tail_integral(c: f64, p: f64, r_min: f64, a: f64) -> f64 {
    let m = p - 2.0;
    let l = (r_min / a).ln();
    2.0 * PI * c * r_min.powf(-m) * (l * l / m + 2.0 * l / (m * m) + 2.0 / (m * m * m))
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

use bose2d::idealgas::ThermoPoint;
use bose2d::paramsweep::{default_params_with, ScalingConstants};
use bose2d::trialbound::{assemble_with_tails, TailIntegrals, TrialParameters};
use rand::Rng;

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// A random admissible parameter point (one whose bound is not vacuous): σ, βρ and the scaling prefactors
/// are drawn at random, tail integrals uniformly in `[0, 10)`.
pub fn random_point<R: Rng>(rng: &mut R) -> (ThermoPoint, TrialParameters, TailIntegrals) {
    loop {
        let sigma = log_uniform(rng, 10.0, 300.0);
        let beta_rho = log_uniform(rng, 1e-2, 1e2);
        let rho = log_uniform(rng, 0.1, 10.0);
        let c = ScalingConstants {
            r: log_uniform(rng, 1.0, 100.0),
            ell: log_uniform(rng, 5e-3, 1.0),
            b: log_uniform(rng, 0.05, 1.0),
            r0: log_uniform(rng, 0.05, 1.0),
        };
        let Ok(t) = ThermoPoint::from_sigma(sigma, beta_rho, rho) else {
            continue;
        };
        let Ok(p) = default_params_with(sigma, rho, t.a, t.beta, &c) else {
            continue;
        };
        let tails = TailIntegrals {
            at_r: rng.gen_range(0.0..10.0),
            at_r0: rng.gen_range(0.0..10.0),
        };
        if assemble_with_tails(&t, &p, tails).is_ok() {
            return (t, p, tails);
        }
    }
}
