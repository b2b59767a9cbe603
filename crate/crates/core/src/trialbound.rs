//! Itemized upper bound on the free energy density built from the trial
//! state's closed-form error terms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::idealgas::{f0, ThermoPoint};
use crate::scattering::{tail_integral, RadialPotential};

/// `ζ(3/2)/√π`, the constant of the finite-box correction to the ideal gas.
pub const FINITE_SIZE_C: f64 = 2.612_375_348_685_488 / 1.772_453_850_905_516;

/// Tunable and derived parameters of the trial state on one box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialParameters {
    /// Box pitch `ℓ`.
    pub ell: f64,
    /// Boundary layer `b`.
    pub b: f64,
    /// Inter-box cutoff `R₀`.
    pub r0: f64,
    /// Jastrow radius `R`.
    pub r: f64,
    /// Particle-number cutoff `𝒩`.
    pub n_cut: f64,
    pub k: f64,
    /// `𝒩 = A n`.
    pub a_mult: f64,
    /// `ℓ - R₀ - 2b`
    pub ell_tilde: f64,
    pub mu: f64,
    /// `ρℓ²`
    pub n: f64,
    pub n_g: f64,
    pub n_g_tilde: f64,
    /// Condensate occupation `|z|² = n - ñ_G`.
    pub z_sq: f64,
}

impl TrialParameters {
    /// Checks the geometric and counting constraints at `t`; the error
    /// names the violated inequality.
    pub fn validate(&self, t: &ThermoPoint) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParameters(msg));
        let finite = [
            self.ell, self.b, self.r0, self.r, self.n_cut, self.k, self.ell_tilde, self.mu,
            self.n, self.n_g, self.n_g_tilde, self.z_sq,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return fail("non-finite parameter".into());
        }
        if !(self.b > 0.0) {
            return fail(format!("b = {} must be positive", self.b));
        }
        if !(self.ell_tilde > 0.0) || (self.ell - self.r0 - 2.0 * self.b - self.ell_tilde).abs() > 1e-9 * self.ell {
            return fail(format!(
                "need 2b + R₀ < ℓ (2b + R₀ = {}, ℓ = {})",
                2.0 * self.b + self.r0,
                self.ell
            ));
        }
        if !(self.r0 > t.a) {
            return fail(format!("need R₀ > a (R₀ = {}, a = {})", self.r0, t.a));
        }
        if !(self.r > t.a) {
            return fail(format!("need R > a (R = {}, a = {})", self.r, t.a));
        }
        if !(self.r * self.r * t.rho < 1.0) {
            return fail(format!("need R < ρ^(-1/2) (R²ρ = {})", self.r * self.r * t.rho));
        }
        if !(self.k > 0.0 && self.k < 1.0) {
            return fail(format!("k = {} must lie in (0, 1)", self.k));
        }
        if !(self.mu < 0.0) {
            return fail(format!("μ = {} must be negative", self.mu));
        }
        if !(self.z_sq >= 0.0) || !(self.n_g_tilde <= self.n_g) || !(self.n_g_tilde >= 0.0) {
            return fail(format!(
                "need 0 ≤ ñ_G ≤ n_G and |z|² ≥ 0 (ñ_G = {}, n_G = {}, |z|² = {})",
                self.n_g_tilde, self.n_g, self.z_sq
            ));
        }
        Ok(())
    }
}

/// Additive terms of the upper bound, per unit area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundBreakdown {
    pub ideal_term: f64,
    pub entropy_term: f64,
    pub finite_size_term: f64,
    pub interaction_term: f64,
    pub three_body_term: f64,
    pub boundary_term: f64,
    pub interbox_term: f64,
    pub total: f64,
    pub b1: f64,
    pub b2: f64,
    /// `ñ_G/ℓ̃² ≥ n_G/ℓ²`, which makes the ideal term at most the
    /// box prefactor times `f₀(β, ρ - ρ_s)`.
    pub ideal_reference_ok: bool,
}

impl BoundBreakdown {
    /// `(label, value)` for every additive term, in summation order.
    pub fn terms(&self) -> [(&'static str, f64); 7] {
        [
            ("ideal", self.ideal_term),
            ("entropy", self.entropy_term),
            ("finite_size", self.finite_size_term),
            ("interaction", self.interaction_term),
            ("three_body", self.three_body_term),
            ("boundary", self.boundary_term),
            ("interbox", self.interbox_term),
        ]
    }
}

/// `B₁ = (1 - x)⁻¹` with `x = (πR²/2ℓ̃²)(|z|⁴ + 4|z|²𝒩 + 2𝒩²)`.
pub fn b1(z_sq: f64, n_cut: f64, r: f64, ell_tilde: f64) -> Result<f64> {
    if !(z_sq >= 0.0 && n_cut >= 0.0 && r >= 0.0 && ell_tilde > 0.0) {
        return Err(Error::domain("b1", "inputs must be nonnegative with ell_tilde > 0"));
    }
    let x = PI * r * r / (2.0 * ell_tilde * ell_tilde)
        * (z_sq * z_sq + 4.0 * z_sq * n_cut + 2.0 * n_cut * n_cut);
    if !(x < 1.0) {
        return Err(Error::InvalidParameters(format!(
            "b1: norm correction {x:e} ≥ 1, bound vacuous"
        )));
    }
    Ok(1.0 / (1.0 - x))
}

fn check_ln(op: &'static str, ln_ra: f64) -> Result<()> {
    if ln_ra > 0.0 && ln_ra.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("ln(R/a) = {ln_ra} must be positive")))
    }
}

/// Two-body energy of one box,
/// `(B₁B₂/ℓ̃²)((|z|² + n_G)² - |z|⁴/2)(4π/ln(R/a) + v_tail/ln²(R/a))`.
pub fn interaction_bound(b1b2: f64, z_sq: f64, n_g: f64, ell_tilde: f64, ln_ra: f64, v_tail: f64) -> Result<f64> {
    check_ln("interaction_bound", ln_ra)?;
    let pairs = (z_sq + n_g).powi(2) - 0.5 * z_sq * z_sq;
    Ok(b1b2 / (ell_tilde * ell_tilde) * pairs * (4.0 * PI / ln_ra + v_tail / (ln_ra * ln_ra)))
}

/// Three-body remainder of one box,
/// `24π² B₁B₂ (n_G + |z|²)³/ℓ̃⁴ · R²/ln²(R/a)`.
pub fn three_body_bound(b1b2: f64, z_sq: f64, n_g: f64, ell_tilde: f64, r: f64, ln_ra: f64) -> Result<f64> {
    check_ln("three_body_bound", ln_ra)?;
    Ok(24.0 * PI * PI * b1b2 * (n_g + z_sq).powi(3) / ell_tilde.powi(4) * r * r / (ln_ra * ln_ra))
}

/// Cost `4ρ/b²` of the Dirichlet boundary layer.
pub fn boundary_penalty(rho: f64, b: f64) -> f64 {
    4.0 * rho / (b * b)
}

/// Interaction between neighbouring boxes,
/// `½ρ²(1 - R₀/ℓ)²/(1 - R₀/ℓ - 2b/ℓ)⁴ · v_tail/ln²(R₀/a)`.
pub fn interbox_term(rho: f64, ell: f64, r0: f64, b: f64, v_tail_r0: f64, ln_r0a: f64) -> Result<f64> {
    check_ln("interbox_term", ln_r0a)?;
    let fill = 1.0 - r0 / ell - 2.0 * b / ell;
    if !(fill > 0.0) {
        return Err(Error::domain("interbox_term", "need ℓ > R₀ + 2b"));
    }
    if v_tail_r0 == 0.0 {
        return Ok(0.0);
    }
    Ok(0.5 * rho * rho * (1.0 - r0 / ell).powi(2) / fill.powi(4) * v_tail_r0 / (ln_r0a * ln_r0a))
}

/// `C ℓ̃/(β^{3/2} ℓ²)`, the difference between the box sum and its integral.
pub fn finite_size_correction(ell_tilde: f64, ell: f64, beta: f64) -> f64 {
    FINITE_SIZE_C * ell_tilde / (beta.powf(1.5) * ell * ell)
}

/// Tail integrals `∫_{|x|>r} v [ln(|x|/a)]²` at `R` and at `R₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailIntegrals {
    pub at_r: f64,
    pub at_r0: f64,
}

impl TailIntegrals {
    pub fn compute(v: &RadialPotential, p: &TrialParameters, a: f64) -> Result<Self> {
        Ok(Self {
            at_r: tail_integral(v, p.r, a)?,
            at_r0: tail_integral(v, p.r0, a)?,
        })
    }
}

fn vacuous(e: Error) -> Error {
    match e {
        Error::Domain { .. } | Error::InvalidParameters(_) => Error::VacuousBound(e.to_string()),
        other => other,
    }
}

/// Assembles every term of the bound at `(t, p)` for potential `v`.
pub fn assemble_bound(t: &ThermoPoint, p: &TrialParameters, v: &RadialPotential) -> Result<BoundBreakdown> {
    p.validate(t).map_err(vacuous)?;
    let tails = TailIntegrals::compute(v, p, t.a).map_err(vacuous)?;
    assemble_with_tails(t, p, tails)
}

/// As [`assemble_bound`] with the tail integrals supplied by the caller.
pub fn assemble_with_tails(t: &ThermoPoint, p: &TrialParameters, tails: TailIntegrals) -> Result<BoundBreakdown> {
    p.validate(t).map_err(vacuous)?;
    if !(tails.at_r >= 0.0 && tails.at_r0 >= 0.0) {
        return Err(Error::VacuousBound("tail integrals must be nonnegative".into()));
    }
    let area = p.ell * p.ell;
    let b1 = b1(p.z_sq, p.n_cut, p.r, p.ell_tilde).map_err(vacuous)?;
    let b2 = crate::idealgas::b2(p.n_cut, t.beta, p.mu, p.k, p.n_g).map_err(vacuous)?;
    let b1b2 = b1 * b2;
    let ln_ra = (p.r / t.a).ln();
    let ln_r0a = (p.r0 / t.a).ln();

    let fill = p.ell_tilde / p.ell;
    let ideal_term = fill * fill * f0(t.beta, p.n_g_tilde / (p.ell_tilde * p.ell_tilde)).map_err(vacuous)?;
    let entropy_term = b1b2.ln() / (t.beta * area);
    let finite_size_term = finite_size_correction(p.ell_tilde, p.ell, t.beta);
    let interaction_term =
        interaction_bound(b1b2, p.z_sq, p.n_g, p.ell_tilde, ln_ra, tails.at_r).map_err(vacuous)? / area;
    let three_body_term =
        three_body_bound(b1b2, p.z_sq, p.n_g, p.ell_tilde, p.r, ln_ra).map_err(vacuous)? / area;
    let boundary_term = boundary_penalty(t.rho, p.b);
    let interbox_term =
        interbox_term(t.rho, p.ell, p.r0, p.b, tails.at_r0, ln_r0a).map_err(vacuous)?;

    let total = ideal_term
        + entropy_term
        + finite_size_term
        + interaction_term
        + three_body_term
        + boundary_term
        + interbox_term;
    if !total.is_finite() {
        return Err(Error::VacuousBound(format!("non-finite total {total}")));
    }
    Ok(BoundBreakdown {
        ideal_term,
        entropy_term,
        finite_size_term,
        interaction_term,
        three_body_term,
        boundary_term,
        interbox_term,
        total,
        b1,
        b2,
        ideal_reference_ok: p.n_g_tilde / (p.ell_tilde * p.ell_tilde) >= p.n_g / area,
    })
}
