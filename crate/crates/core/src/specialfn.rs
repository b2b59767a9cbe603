//! Dilogarithm on `[0, 1]` and the two-dimensional Bose log-integral.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;

pub const PI2_OVER_6: f64 = PI * PI / 6.0;

/// Value of `Li₂(x)` together with a bound on the truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilogResult {
    pub value: f64,
    pub est_error: f64,
}

/// Power series `Σ x^k / k²` for `0 ≤ x ≤ 1/2`, with its tail bound.
fn dilog_series(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (0.0, 0.0);
    }
    let mut sum = 0.0;
    let mut xk = 1.0;
    let mut k = 1u32;
    loop {
        xk *= x;
        let kf = k as f64;
        sum += xk / (kf * kf);
        let next = kf + 1.0;
        let tail = xk * x / (next * next * (1.0 - x));
        if tail <= 1e-18 * sum || k > 200 {
            return (sum, tail);
        }
        k += 1;
    }
}

/// `Li₂(x) = -∫₀ˣ ln(1-t)/t dt` for `x ∈ [0, 1]`.
///
/// Series for `x ≤ 1/2`, reflection `Li₂(x) = π²/6 - ln x ln(1-x) - Li₂(1-x)`
/// above.
pub fn dilog(x: f64) -> Result<DilogResult> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("dilog", format!("argument {x} outside [0, 1]")));
    }
    if x == 1.0 {
        return Ok(DilogResult {
            value: PI2_OVER_6,
            est_error: f64::EPSILON * PI2_OVER_6,
        });
    }
    let (value, tail) = if x <= 0.5 {
        dilog_series(x)
    } else {
        let (refl, tail) = dilog_series(1.0 - x);
        (PI2_OVER_6 - x.ln() * (-x).ln_1p() - refl, tail)
    };
    Ok(DilogResult {
        value,
        est_error: tail + 4.0 * f64::EPSILON * value.abs(),
    })
}

fn check_bose_args(op: &'static str, beta: f64, mu: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(op, format!("beta = {beta} must be positive")));
    }
    if !(mu < 0.0) {
        return Err(Error::domain(op, format!("mu = {mu} must be negative")));
    }
    Ok(())
}

/// `(1/4π²β) ∫_{ℝ²} ln(1 - e^{-β(p²-μ)}) dp`, evaluated through the closed
/// form `-Li₂(e^{βμ}) / (4πβ²)`.
pub fn bose_log_integral(beta: f64, mu: f64) -> Result<f64> {
    check_bose_args("bose_log_integral", beta, mu)?;
    let z = (beta * mu).exp();
    Ok(-dilog(z)?.value / (4.0 * PI * beta * beta))
}

/// Same quantity as [`bose_log_integral`] computed by radial quadrature of
/// the momentum integral. Used as the independent route in consistency checks.
pub fn bose_log_integral_direct(beta: f64, mu: f64) -> Result<f64> {
    check_bose_args("bose_log_integral_direct", beta, mu)?;
    // ∫_{ℝ²} dp = 2π ∫ r dr; with t = r², r dr = dt/2.
    let integrand = |t: f64| (-(-beta * (t - mu)).exp()).ln_1p();
    let r = quad::integrate_to_infinity(integrand, 0.0, 1e-300, 1e-14)?;
    Ok(PI * r.value / (4.0 * PI * PI * beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dilog_endpoints() {
        assert_eq!(dilog(0.0).unwrap().value, 0.0);
        assert!((dilog(1.0).unwrap().value - PI2_OVER_6).abs() < 1e-15);
    }

    #[test]
    fn dilog_half_matches_identity() {
        // Li₂(1/2) = π²/12 - (ln 2)²/2
        let exact = PI * PI / 12.0 - std::f64::consts::LN_2.powi(2) / 2.0;
        let r = dilog(0.5).unwrap();
        assert!((r.value - exact).abs() < 1e-15);
        assert!((r.value - 0.582_240_526_5).abs() < 1e-10);
    }

    #[test]
    fn dilog_rejects_out_of_range() {
        assert!(matches!(dilog(-1e-12), Err(Error::Domain { .. })));
        assert!(matches!(dilog(1.0 + 1e-12), Err(Error::Domain { .. })));
        assert!(dilog(f64::NAN).is_err());
    }

    #[test]
    fn dilog_error_estimate_is_small() {
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let r = dilog(x).unwrap();
            assert!(r.est_error >= 0.0 && r.est_error <= 1e-12, "x={x}");
            assert!(r.value >= x);
        }
    }

    #[test]
    fn bose_integral_vanishes_for_very_negative_mu() {
        let v = bose_log_integral(1.0, -800.0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn bose_integral_domain() {
        assert!(bose_log_integral(1.0, 0.0).is_err());
        assert!(bose_log_integral(0.0, -1.0).is_err());
        assert!(bose_log_integral(-1.0, -1.0).is_err());
    }

    #[test]
    fn closed_form_and_direct_route_agree() {
        for &beta in &[0.5, 1.0, 2.0] {
            for &mu in &[-0.01, -0.1, -1.0] {
                let a = bose_log_integral(beta, mu).unwrap();
                let b = bose_log_integral_direct(beta, mu).unwrap();
                assert!(((a - b) / a).abs() < 1e-10, "beta={beta} mu={mu}: {a} vs {b}");
            }
        }
    }
}
