//! Two-sided Riemann-sum bounds for `Tr f(-Δ)` on a periodic square.
//!
//! For `f ≥ 0` monotone decreasing,
//! `(ℓ²/4π²)∫(1 - 4/(ℓ|p|)) f(p²) dp ≤ Σ_{p∈(2π/ℓ)ℤ²} f(p²)
//!   ≤ (ℓ²/4π²)∫(1 + 4/(ℓ|p|)) f(p²) dp + f(0)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;

const MAX_SHELLS: i64 = 1_000_000;

/// A scalar map `t ↦ f(t)` on `[0, ∞)`.
///
/// `integrable` is the caller's certificate that both `f(p²)` and
/// `f(p²)/|p|` are integrable on the plane; it is not checked.
pub struct RadialFn<'a> {
    pub f: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    pub integrable: bool,
}

impl<'a> RadialFn<'a> {
    pub fn new(f: impl Fn(f64) -> f64 + Sync + 'a) -> Self {
        Self {
            f: Box::new(f),
            integrable: true,
        }
    }

    /// Bose occupation `t ↦ 1/(e^{β(t-μ)} - 1)`, `μ < 0`.
    pub fn bose_occupation(beta: f64, mu: f64) -> Self {
        Self::new(move |t| 1.0 / (beta * (t - mu)).exp_m1())
    }

    fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichResult {
    pub lattice_sum: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Leading term `(ℓ²/4π²)∫ f(p²) dp` shared by both bounds.
    pub bulk: f64,
    pub ell: f64,
    /// Non-fatal diagnostics, e.g. a failed monotonicity spot check.
    pub warnings: Vec<String>,
}

impl SandwichResult {
    pub fn holds(&self) -> bool {
        self.lower_bound <= self.lattice_sum && self.lattice_sum <= self.upper_bound
    }

    /// `(upper - lower)/lattice_sum`
    pub fn relative_gap(&self) -> f64 {
        (self.upper_bound - self.lower_bound) / self.lattice_sum
    }

    /// `(upper - lower)/bulk`
    pub fn relative_width(&self) -> f64 {
        (self.upper_bound - self.lower_bound) / self.bulk
    }
}

/// `Σ_{p∈(2π/ℓ)ℤ²} f(p²)` by square shells.
pub fn lattice_sum(f: &RadialFn<'_>, ell: f64) -> Result<f64> {
    let k2 = (2.0 * PI / ell).powi(2);
    let mut total = f.eval(0.0);
    for k in 1..=MAX_SHELLS {
        let mut shell = 0.0;
        for m in -k..=k {
            shell += 2.0 * f.eval(k2 * (k * k + m * m) as f64);
        }
        for m in -(k - 1)..=(k - 1) {
            shell += 2.0 * f.eval(k2 * (k * k + m * m) as f64);
        }
        total += shell;
        if shell.abs() < 1e-16 * total.abs() || (shell == 0.0 && total == 0.0) {
            return Ok(total);
        }
    }
    Err(Error::convergence(
        "sandwich",
        format!("shell truncation did not stabilise within {MAX_SHELLS} shells"),
    ))
}

fn monotonicity_warning(f: &RadialFn<'_>) -> Option<String> {
    let mut prev = f.eval(0.0);
    for i in 0..=240 {
        let t = 10f64.powf(-12.0 + 0.1 * i as f64);
        let v = f.eval(t);
        if v > prev * (1.0 + 1e-12) + 1e-300 {
            return Some(format!("f increases near t = {t:.3e}; bounds may not hold"));
        }
        if v < 0.0 {
            return Some(format!("f negative at t = {t:.3e}; bounds may not hold"));
        }
        prev = v;
    }
    None
}

/// Radial moments `(∫₀^∞ r f(r²) dr, ∫₀^∞ f(r²) dr)`.
pub fn radial_moments(f: &RadialFn<'_>) -> Result<(f64, f64)> {
    let area = quad::integrate_to_infinity(|t| 0.5 * f.eval(t), 0.0, 1e-300, 1e-13)?;
    let line = quad::integrate_to_infinity(|r| f.eval(r * r), 0.0, 1e-300, 1e-13)?;
    Ok((area.value, line.value))
}

/// Lattice sum of `f(p²)` together with the lower and upper integral bounds.
pub fn sandwich(f: &RadialFn<'_>, ell: f64) -> Result<SandwichResult> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(Error::domain("sandwich", format!("ell = {ell} must be positive")));
    }
    if !f.integrable {
        return Err(Error::InvalidParameters(
            "sandwich: integrand not certified integrable".into(),
        ));
    }
    let mut warnings = Vec::new();
    if let Some(w) = monotonicity_warning(f) {
        warnings.push(w);
    }
    let lattice = lattice_sum(f, ell)?;
    let (area, line) = radial_moments(f)?;
    let bulk = ell * ell / (2.0 * PI) * area;
    let edge = 2.0 * ell / PI * line;
    Ok(SandwichResult {
        lattice_sum: lattice,
        lower_bound: bulk - edge,
        upper_bound: bulk + edge + f.eval(0.0),
        bulk,
        ell,
        warnings,
    })
}

/// `(2ℓ/π²) ∫_{ℝ²} f(p²)/|p| dp + f(0)`, the width of the sandwich.
pub fn sandwich_width(f: &RadialFn<'_>, ell: f64) -> Result<f64> {
    // ∫_{ℝ²} f(p²)/|p| dp = 2π ∫₀^∞ f(r²) dr
    let (_, line) = radial_moments(f)?;
    Ok(2.0 * ell / (PI * PI) * 2.0 * PI * line + f.eval(0.0))
}
