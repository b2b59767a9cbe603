//! Bose sums over the momentum lattice `(2π/ℓ̃)ℤ²` of a periodic box.
//!
//! Two evaluation routes share a common contract:
//!
//! * [`Method::Shells`] sums square shells `max(|n₁|,|n₂|) = k` directly and
//!   stops once a shell contributes less than `1e-16` of the running sum.
//! * [`Method::Theta`] expands each occupation in a geometric series,
//!   `1/(e^y - 1) = Σ_j e^{-jy}`, which factorises the lattice sum into
//!   squares of the Jacobi theta function `θ(s) = Σ_m e^{-s m²}`. The zero
//!   mode is split off and summed in closed form; `θ` is evaluated from
//!   whichever of its direct or Poisson-dual series converges faster. The
//!   remaining `j`-series is truncated with a rigorous tail bound.
//!
//! The shell route costs `O(ℓ̃²/β)` lattice points; the theta route costs
//! `O(1/(β|μ| + β(2π/ℓ̃)²))` series terms, which keeps boxes with `ℓ̃ ≫ β^{1/2}`
//! tractable.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const REL_STOP: f64 = 1e-16;
const MAX_SHELLS: usize = 1_000_000;
const MAX_THETA_TERMS: usize = 200_000_000;

/// Which sum is being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// `Σ_p 1/(e^{β(p²-μ)} - 1)`
    Density,
    /// `-Σ_p ln(1 - e^{-β(p²-μ)})`
    LogPartition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Auto,
    Shells,
    Theta,
}

/// Dimensionless inputs: `x = β|μ|` and `c = β(2π/ℓ̃)²`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LatticeArgs {
    pub x: f64,
    pub c: f64,
}

fn mode_value(obs: Observable, y: f64) -> f64 {
    match obs {
        Observable::Density => 1.0 / y.exp_m1(),
        Observable::LogPartition if y > std::f64::consts::LN_2 => -(-(-y).exp()).ln_1p(),
        Observable::LogPartition => -(-(-y).exp_m1()).ln(),
    }
}

pub(crate) fn sum(obs: Observable, args: LatticeArgs, method: Method) -> Result<f64> {
    let method = match method {
        Method::Auto => {
            // ~ number of lattice points with β p² ≲ 40
            let points = 160.0 / args.c;
            if points < 2.0e5 {
                Method::Shells
            } else {
                Method::Theta
            }
        }
        m => m,
    };
    match method {
        Method::Shells => shells(obs, args),
        _ => theta_route(obs, args),
    }
}

fn shells(obs: Observable, LatticeArgs { x, c }: LatticeArgs) -> Result<f64> {
    let mut total = mode_value(obs, x);
    for k in 1..=MAX_SHELLS as i64 {
        let mut shell = 0.0;
        // Points with max(|n1|,|n2|) = k: the two horizontal edges and the
        // two vertical edges without their corners.
        for m in -k..=k {
            let n2 = (k * k + m * m) as f64;
            shell += 2.0 * mode_value(obs, x + c * n2);
        }
        for m in -(k - 1)..=(k - 1) {
            let n2 = (k * k + m * m) as f64;
            shell += 2.0 * mode_value(obs, x + c * n2);
        }
        total += shell;
        if shell <= REL_STOP * total {
            return Ok(total);
        }
    }
    Err(Error::convergence(
        "lattice_sum",
        format!("shell truncation did not stabilise within {MAX_SHELLS} shells"),
    ))
}

/// `θ(s)² - 1` with `θ(s) = Σ_{m∈ℤ} e^{-s m²}`, accurate for all `s > 0`.
pub(crate) fn theta_sq_minus_one(s: f64) -> f64 {
    if s >= 2.0 {
        let mut e = 0.0;
        let mut m = 1.0f64;
        loop {
            let t = (-s * m * m).exp();
            e += t;
            if t <= 1e-20 * e {
                break;
            }
            m += 1.0;
        }
        4.0 * e * (1.0 + e)
    } else {
        let mut dual = 0.0;
        let mut k = 1.0f64;
        loop {
            let t = (-PI * PI * k * k / s).exp();
            dual += t;
            if t <= 1e-20 * (1.0 + dual) {
                break;
            }
            k += 1.0;
        }
        let theta = (PI / s).sqrt() * (1.0 + 2.0 * dual);
        theta * theta - 1.0
    }
}

fn theta_route(obs: Observable, LatticeArgs { x, c }: LatticeArgs) -> Result<f64> {
    let zero_mode = mode_value(obs, x);
    let one_minus_ex = -(-x).exp_m1();
    let xc = x + c;
    let one_minus_exc = -(-xc).exp_m1();
    let mut rest = 0.0;
    let mut j = 1usize;
    loop {
        let jf = j as f64;
        let th = theta_sq_minus_one(jf * c);
        let weight = match obs {
            Observable::Density => 1.0,
            Observable::LogPartition => 1.0 / jf,
        };
        rest += weight * (-jf * x).exp() * th;

        // Tail over j' > j. θ is decreasing, and
        // E(s) = Σ_{m≥1} e^{-s m²} ≤ e^{-s}/(1 - e^{-s}).
        let total = zero_mode + rest;
        let geo = (-(jf + 1.0) * x).exp() / one_minus_ex;
        let bound_theta = th * geo;
        let kk = 1.0 / (-(-jf * c).exp_m1());
        let bound_decay = 4.0 * kk * (1.0 + kk) * (-(jf + 1.0) * xc).exp() / one_minus_exc;
        if bound_theta.min(bound_decay) <= REL_STOP * total {
            return Ok(total);
        }
        j += 1;
        if j > MAX_THETA_TERMS {
            return Err(Error::convergence(
                "lattice_sum",
                format!("theta series did not converge (x = {x:e}, c = {c:e})"),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(obs: Observable, x: f64, c: f64, cut: i64) -> f64 {
        let mut s = 0.0;
        for n1 in -cut..=cut {
            for n2 in -cut..=cut {
                s += mode_value(obs, x + c * (n1 * n1 + n2 * n2) as f64);
            }
        }
        s
    }

    #[test]
    fn theta_sq_is_continuous_across_switch() {
        let a = theta_sq_minus_one(2.0 - 1e-12);
        let b = theta_sq_minus_one(2.0 + 1e-12);
        assert!(((a - b) / a).abs() < 1e-11);
    }

    #[test]
    fn routes_agree_with_brute_force() {
        for &(x, c) in &[(0.1, 0.3948), (0.5, 0.05), (2.0, 1.3), (1e-3, 0.01), (0.02, 4e-3)] {
            for obs in [Observable::Density, Observable::LogPartition] {
                let b = brute(obs, x, c, 400);
                let s = shells(obs, LatticeArgs { x, c }).unwrap();
                let t = theta_route(obs, LatticeArgs { x, c }).unwrap();
                assert!(((s - b) / b).abs() < 1e-13, "{obs:?} x={x} c={c}: {s} vs {b}");
                assert!(((t - b) / b).abs() < 1e-12, "{obs:?} x={x} c={c}: {t} vs {b}");
            }
        }
    }

    #[test]
    fn theta_route_handles_large_boxes() {
        // c ~ 6e-13 corresponds to ℓ̃ ~ 8e6 at β = 1.
        let c = 4.0 * PI * PI / 6.4e13;
        let x = 0.005;
        let n = theta_route(Observable::Density, LatticeArgs { x, c }).unwrap();
        // leading Poisson term (π/c)·(-ln(1 - e^{-x}))
        let lead = PI / c * (-(-(-x).exp_m1()).ln());
        assert!(((n - lead) / lead).abs() < 1e-8);
    }
}
