//! Ideal two-dimensional Bose gas: infinite-volume closed forms, sums over a
//! periodic box, chemical-potential inversion, and the number-cutoff
//! estimates `τ`, `B₂` and the Gibbs tail.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specialfn::{bose_log_integral, dilog};

pub mod torus;

pub use torus::Method as LatticeMethod;
use torus::{LatticeArgs, Observable};

fn positive(op: &'static str, name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("{name} = {v} must be positive and finite")))
    }
}

/// Thermodynamic point `(β, ρ, a)` in the dilute regime `a²ρ < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub beta: f64,
    pub rho: f64,
    pub a: f64,
}

impl ThermoPoint {
    pub fn new(beta: f64, rho: f64, a: f64) -> Result<Self> {
        positive("ThermoPoint", "beta", beta)?;
        positive("ThermoPoint", "rho", rho)?;
        positive("ThermoPoint", "a", a)?;
        if a * a * rho >= 1.0 {
            return Err(Error::domain(
                "ThermoPoint",
                format!("a²ρ = {} is not dilute", a * a * rho),
            ));
        }
        Ok(Self { beta, rho, a })
    }

    /// Point with `ρ`, `βρ` and `σ = |ln a²ρ|` given.
    pub fn from_sigma(sigma: f64, beta_rho: f64, rho: f64) -> Result<Self> {
        positive("ThermoPoint", "sigma", sigma)?;
        let a = (-sigma / 2.0).exp() / rho.sqrt();
        Self::new(beta_rho / rho, rho, a)
    }

    /// `σ = |ln a²ρ|`
    pub fn sigma(&self) -> f64 {
        (self.a * self.a * self.rho).ln().abs()
    }

    pub fn beta_c(&self) -> Result<f64> {
        beta_c(self.rho, self.a)
    }

    pub fn rho_s(&self) -> Result<f64> {
        rho_s(self.beta, self.rho, self.a)
    }
}

/// Free energy density of the ideal gas,
/// `(ρ/β) ln(1 - e^{-4πβρ}) - Li₂(1 - e^{-4πβρ})/(4πβ²)`.
pub fn f0(beta: f64, rho: f64) -> Result<f64> {
    positive("f0", "beta", beta)?;
    positive("f0", "rho", rho)?;
    let y = 4.0 * PI * beta * rho;
    let one_minus = -(-y).exp_m1();
    let li = dilog(one_minus)?.value;
    Ok(rho / beta * one_minus.ln() - li / (4.0 * PI * beta * beta))
}

/// Chemical potential `∂f₀/∂ρ = β⁻¹ ln(1 - e^{-4πβρ})`.
pub fn mu0(beta: f64, rho: f64) -> Result<f64> {
    positive("mu0", "beta", beta)?;
    positive("mu0", "rho", rho)?;
    let y = 4.0 * PI * beta * rho;
    let ln = if y > std::f64::consts::LN_2 {
        (-(-y).exp()).ln_1p()
    } else {
        (-(-y).exp_m1()).ln()
    };
    Ok(ln / beta)
}

/// `f₀` recovered as the Legendre transform `sup_{μ<0} {μρ + p(β, μ)}` of the
/// infinite-volume pressure, maximised numerically over `ln(-βμ)`.
///
/// Consistency check only: it never consults [`f0`] or [`mu0`].
pub fn f0_from_pressure(beta: f64, rho: f64) -> Result<f64> {
    positive("f0_from_pressure", "beta", beta)?;
    positive("f0_from_pressure", "rho", rho)?;
    let objective = |t: f64| -> f64 {
        let mu = -t.exp() / beta;
        mu * rho + bose_log_integral(beta, mu).unwrap_or(f64::NAN)
    };
    // golden-section search for the maximum in t = ln(-βμ)
    let (mut lo, mut hi) = (-60.0f64, 8.0f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = objective(x1);
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(objective(0.5 * (lo + hi)))
}

/// Inverse BKT temperature `ln|ln a²ρ| / (4πρ)`; requires `a²ρ < 1/e`.
pub fn beta_c(rho: f64, a: f64) -> Result<f64> {
    positive("beta_c", "rho", rho)?;
    positive("beta_c", "a", a)?;
    let sigma = -(a * a * rho).ln();
    if !(sigma > 1.0) {
        return Err(Error::domain(
            "beta_c",
            format!("a²ρ = {} must be below 1/e", a * a * rho),
        ));
    }
    Ok(sigma.ln() / (4.0 * PI * rho))
}

/// Superfluid density `ρ [1 - β_c/β]₊`.
pub fn rho_s(beta: f64, rho: f64, a: f64) -> Result<f64> {
    positive("rho_s", "beta", beta)?;
    let bc = beta_c(rho, a)?;
    Ok(rho * (1.0 - bc / beta).max(0.0))
}

/// Ideal gas on a periodic box of side `ℓ̃` at chemical potential `μ < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteVolumeGas {
    pub ell_tilde: f64,
    pub beta: f64,
    pub mu: f64,
}

impl FiniteVolumeGas {
    pub fn new(ell_tilde: f64, beta: f64, mu: f64) -> Result<Self> {
        positive("FiniteVolumeGas", "ell_tilde", ell_tilde)?;
        positive("FiniteVolumeGas", "beta", beta)?;
        if !(mu < 0.0) {
            return Err(Error::domain(
                "FiniteVolumeGas",
                format!("mu = {mu} must be strictly negative"),
            ));
        }
        Ok(Self {
            ell_tilde,
            beta,
            mu,
        })
    }

    fn lattice_args(&self) -> LatticeArgs {
        let k = 2.0 * PI / self.ell_tilde;
        LatticeArgs {
            x: -self.beta * self.mu,
            c: self.beta * k * k,
        }
    }
}

/// Expected particle number `Σ_p (e^{β(p²-μ)} - 1)⁻¹` on the box.
pub fn density_finite(gas: &FiniteVolumeGas) -> Result<f64> {
    density_finite_with(gas, LatticeMethod::Auto)
}

pub fn density_finite_with(gas: &FiniteVolumeGas, method: LatticeMethod) -> Result<f64> {
    let gas = FiniteVolumeGas::new(gas.ell_tilde, gas.beta, gas.mu)?;
    torus::sum(Observable::Density, gas.lattice_args(), method)
}

/// Grand-canonical pressure `-(βℓ̃²)⁻¹ Σ_p ln(1 - e^{-β(p²-μ)})`.
pub fn pressure_finite(gas: &FiniteVolumeGas) -> Result<f64> {
    pressure_finite_with(gas, LatticeMethod::Auto)
}

pub fn pressure_finite_with(gas: &FiniteVolumeGas, method: LatticeMethod) -> Result<f64> {
    let gas = FiniteVolumeGas::new(gas.ell_tilde, gas.beta, gas.mu)?;
    let s = torus::sum(Observable::LogPartition, gas.lattice_args(), method)?;
    Ok(s / (gas.beta * gas.ell_tilde * gas.ell_tilde))
}

/// Chemical potential `μ < 0` at which the box holds `n_target` particles on
/// average. Bisection in `ln(-βμ)`; the bracket starts at the
/// infinite-volume estimate and never goes below the zero-mode bound
/// `-βμ ≥ ln(1 + 1/n)`.
pub fn invert_mu(ell_tilde: f64, beta: f64, n_target: f64) -> Result<f64> {
    positive("invert_mu", "ell_tilde", ell_tilde)?;
    positive("invert_mu", "beta", beta)?;
    positive("invert_mu", "n_target", n_target)?;
    const X_MIN: f64 = 1e-30;
    const X_MAX: f64 = 1e10;

    let density_at = |x: f64| density_finite(&FiniteVolumeGas::new(ell_tilde, beta, -x / beta)?);

    let x_floor = (1.0 / n_target).ln_1p().max(X_MIN);
    let y = 4.0 * PI * beta * n_target / (ell_tilde * ell_tilde);
    let x0 = (-(-(-y).exp_m1()).ln()).clamp(x_floor, X_MAX);

    let mut lo = (0.5 * x0).max(x_floor);
    loop {
        let d = density_at(lo)?;
        if d >= n_target {
            break;
        }
        if lo <= x_floor {
            // density(x_floor) ≥ zero-mode occupation = n_target; only the
            // zero mode is occupied and rounding decides the sign
            if d >= n_target * (1.0 - 1e-12) {
                return Ok(-x_floor / beta);
            }
            return Err(Error::convergence(
                "invert_mu",
                "zero-mode bound violated; lattice sum inaccurate",
            ));
        }
        lo = (0.25 * lo).max(x_floor);
    }
    let mut hi = (2.0 * x0).max(2.0 * lo);
    while density_at(hi)? > n_target {
        hi *= 4.0;
        if hi > X_MAX {
            return Err(Error::convergence(
                "invert_mu",
                format!("n_target = {n_target:e} not bracketed for -βμ ≤ {X_MAX:e}"),
            ));
        }
    }

    let (mut tlo, mut thi) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let tm = 0.5 * (tlo + thi);
        if tm <= tlo || tm >= thi {
            break;
        }
        if density_at(tm.exp())? > n_target {
            tlo = tm;
        } else {
            thi = tm;
        }
    }
    let x = (0.5 * (tlo + thi)).exp();
    let residual = (density_at(x)? - n_target).abs();
    if residual > 1e-10 * n_target {
        return Err(Error::convergence(
            "invert_mu",
            format!("residual {residual:e} exceeds tolerance"),
        ));
    }
    Ok(-x / beta)
}

fn check_lambda_k(op: &'static str, lambda: f64, k: f64) -> Result<()> {
    if !(lambda < 0.0) {
        return Err(Error::domain(op, format!("lambda = {lambda} must be negative")));
    }
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::domain(op, format!("k = {k} must lie in (0, 1)")));
    }
    Ok(())
}

/// `τ(λ, k) = ((e^{-λ} - 1)/(kλ)) ln(1 - (e^{-kλ} - 1)/(e^{-λ} - 1))` for
/// `λ < 0`, `0 < k < 1`.
pub fn tau(lambda: f64, k: f64) -> Result<f64> {
    check_lambda_k("tau", lambda, k)?;
    let u = -lambda;
    if u < 1e-6 {
        // second-order expansion in u
        let prefactor = -(1.0 + u / 2.0 + u * u / 6.0) / k;
        let log = (1.0 - k).ln() + (k * u / 2.0 + k * (2.0 * k - 1.0) * u * u / 12.0).ln_1p();
        return Ok(prefactor * log);
    }
    let prefactor = -u.exp_m1() / (k * u);
    let ratio = if u > 1.0 {
        (-(1.0 - k) * u).exp() * (-(-k * u).exp_m1()) / (-(-u).exp_m1())
    } else {
        (k * u).exp_m1() / u.exp_m1()
    };
    Ok(prefactor * (-ratio).ln_1p())
}

/// Exponent `kβ|μ|(𝒩 - τ(βμ,k) n_G)` shared by [`b2`] and
/// [`gibbs_tail_number`].
fn cutoff_exponent(op: &'static str, n_cut: f64, beta: f64, mu: f64, k: f64, n_g: f64) -> Result<f64> {
    positive(op, "beta", beta)?;
    check_lambda_k(op, beta * mu, k)?;
    if !(n_g >= 0.0) {
        return Err(Error::domain(op, format!("n_G = {n_g} must be nonnegative")));
    }
    let t = tau(beta * mu, k)?;
    let gap = n_cut - t * n_g;
    if !(gap > 0.0) || !gap.is_finite() {
        return Err(Error::InvalidParameters(format!(
            "{op}: cutoff 𝒩 = {n_cut:e} does not exceed τ·n_G = {:e}",
            t * n_g
        )));
    }
    Ok(k * beta * (-mu) * gap)
}

/// `B₂ = [1 - exp(-kβ|μ|(𝒩 - τ(βμ,k) n_G))]⁻¹`.
pub fn b2(n_cut: f64, beta: f64, mu: f64, k: f64, n_g: f64) -> Result<f64> {
    let e = cutoff_exponent("b2", n_cut, beta, mu, k, n_g)?;
    Ok(1.0 / (-(-e).exp_m1()))
}

/// Bound on the particle number carried by states above the cutoff,
/// `(𝒩 + 1/(kβ|μ|)) exp(-kβ|μ|(𝒩 - τ n_G))`.
pub fn gibbs_tail_number(n_cut: f64, beta: f64, mu: f64, k: f64, n_g: f64) -> Result<f64> {
    let e = cutoff_exponent("gibbs_tail_number", n_cut, beta, mu, k, n_g)?;
    Ok((n_cut + 1.0 / (k * beta * (-mu))) * (-e).exp())
}
