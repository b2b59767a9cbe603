//! Default trial parameters, a local optimiser over them, and σ-sweeps of
//! the assembled bound against the leading-order free energy.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::idealgas::{b2, f0, gibbs_tail_number, invert_mu, ThermoPoint};
use crate::scattering::{scattering_length, RadialPotential};
use crate::trialbound::{assemble_bound, BoundBreakdown, TrialParameters};

/// Target for `B₂ - 1` and for the Gibbs tail when choosing `A`.
pub const CUTOFF_TOL: f64 = 1e-10;
const MAX_A_DOUBLINGS: u32 = 60;

/// Prefactors of the scalings `R²ρ ∼ σ⁻⁷`, `ℓ²ρ ∼ σ⁶`, `b²ρ ∼ R₀²ρ ∼ σ²`:
/// `R = r σ^{-7/2} ρ^{-1/2}`, `ℓ = ell σ³ ρ^{-1/2}`, `b = b σ ρ^{-1/2}`,
/// `R₀ = r0 σ ρ^{-1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub r: f64,
    pub ell: f64,
    pub b: f64,
    pub r0: f64,
}

impl ScalingConstants {
    pub fn unit() -> Self {
        Self {
            r: 1.0,
            ell: 1.0,
            b: 1.0,
            r0: 1.0,
        }
    }
}

impl Default for ScalingConstants {
    fn default() -> Self {
        Self {
            r: 50.0,
            ell: 0.01,
            b: 0.2,
            r0: 0.2,
        }
    }
}

/// How the particle-number cutoff `𝒩` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    /// Smallest `𝒩 = 2^j n` with `B₂ - 1` and the Gibbs tail below
    /// [`CUTOFF_TOL`].
    Adaptive,
    Fixed(f64),
}

/// Fills the derived fields (`ℓ̃`, `n`, `n_G`, `μ`, `ñ_G`, `|z|²`) for the
/// given tunables and validates the result.
pub fn complete_params(
    t: &ThermoPoint,
    ell: f64,
    b: f64,
    r0: f64,
    r: f64,
    cutoff: Cutoff,
    k: f64,
) -> Result<TrialParameters> {
    let ell_tilde = ell - r0 - 2.0 * b;
    if !(ell_tilde > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "need 2b + R₀ < ℓ (2b + R₀ = {}, ℓ = {ell})",
            2.0 * b + r0
        )));
    }
    let n = t.rho * ell * ell;
    let n_g = n * (t.beta_c()? / t.beta).min(1.0);
    let mu = invert_mu(ell_tilde, t.beta, n_g)?;

    let tau_ng = crate::idealgas::tau(t.beta * mu, k)? * n_g;
    let (n_cut, tail) = match cutoff {
        Cutoff::Fixed(n_cut) => (n_cut, gibbs_tail_number(n_cut, t.beta, mu, k, n_g)?),
        Cutoff::Adaptive => {
            let mut found = None;
            for j in 0..=MAX_A_DOUBLINGS {
                let n_cut = n * 2f64.powi(j as i32);
                if n_cut <= tau_ng {
                    continue;
                }
                let b2m1 = b2(n_cut, t.beta, mu, k, n_g)? - 1.0;
                let tail = gibbs_tail_number(n_cut, t.beta, mu, k, n_g)?;
                if b2m1 <= CUTOFF_TOL && tail <= CUTOFF_TOL {
                    found = Some((n_cut, tail));
                    break;
                }
            }
            found.ok_or_else(|| {
                Error::convergence("default_params", "no A ≤ 2^60 meets the cutoff tolerance")
            })?
        }
    };
    let n_g_tilde = (n_g - tail).max(0.0);
    let p = TrialParameters {
        ell,
        b,
        r0,
        r,
        n_cut,
        k,
        a_mult: n_cut / n,
        ell_tilde,
        mu,
        n,
        n_g,
        n_g_tilde,
        z_sq: n - n_g_tilde,
    };
    p.validate(t)?;
    Ok(p)
}

/// Parameters following the σ-power scalings with the default constants.
pub fn default_params(sigma: f64, rho: f64, a: f64, beta: f64) -> Result<TrialParameters> {
    default_params_with(sigma, rho, a, beta, &ScalingConstants::default())
}

pub fn default_params_with(
    sigma: f64,
    rho: f64,
    a: f64,
    beta: f64,
    c: &ScalingConstants,
) -> Result<TrialParameters> {
    let t = ThermoPoint::new(beta, rho, a)?;
    if !(sigma >= 10.0) {
        return Err(Error::domain("default_params", format!("σ = {sigma} must be ≥ 10")));
    }
    if (t.sigma() - sigma).abs() > 1e-9 * sigma {
        return Err(Error::domain(
            "default_params",
            format!("σ = {sigma} inconsistent with |ln a²ρ| = {}", t.sigma()),
        ));
    }
    let len = 1.0 / rho.sqrt();
    complete_params(
        &t,
        c.ell * sigma.powi(3) * len,
        c.b * sigma * len,
        c.r0 * sigma * len,
        c.r * sigma.powf(-3.5) * len,
        Cutoff::Adaptive,
        0.5,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop once the simplex spread in `f` falls below this (relative).
    pub f_tol: f64,
    /// Stop once every vertex lies within this distance of the best one.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 400,
            f_tol: 1e-14,
            x_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    /// Whether any probe other than the start was feasible.
    pub feasible_probe: bool,
}

/// Derivative-free simplex minimisation. `f` returns `None` outside the
/// feasible set, which is treated as `+∞`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], opts: NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> Option<f64>,
{
    let dim = x0.len();
    let mut evals = 0usize;
    let mut feasible_probe = false;
    let mut eval = |x: &[f64], evals: &mut usize, first: bool| -> f64 {
        *evals += 1;
        match f(x) {
            Some(v) if v.is_finite() => {
                if !first {
                    feasible_probe = true;
                }
                v
            }
            _ => f64::INFINITY,
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals, true)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let fx = eval(&x, &mut evals, false);
        simplex.push((x, fx));
    }

    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect()
    };

    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        let spread_x = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let f_converged =
            best.is_finite() && worst.is_finite() && worst - best <= opts.f_tol * best.abs();
        if spread_x <= opts.x_tol && (f_converged || worst == best) {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let xw = simplex[dim].0.clone();
        let xr = combine(&centroid, &xw, -1.0);
        let fr = eval(&xr, &mut evals, false);
        if fr < simplex[0].1 {
            let xe = combine(&centroid, &xw, -2.0);
            let fe = eval(&xe, &mut evals, false);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst {
            let xc = combine(&centroid, &xr, 0.5);
            let fc = eval(&xc, &mut evals, false);
            (xc, fc)
        } else {
            let xc = combine(&centroid, &xw, 0.5);
            let fc = eval(&xc, &mut evals, false);
            (xc, fc)
        };
        if fc < worst.min(fr) {
            simplex[dim] = (xc, fc);
            continue;
        }
        // shrink towards the best vertex
        let x_best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            v.0 = combine(&x_best, &v.0, 0.5);
            v.1 = eval(&v.0, &mut evals, false);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        fx,
        evals,
        feasible_probe,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub params: TrialParameters,
    pub total: f64,
    pub start_total: f64,
    /// `false` when the start was returned unchanged.
    pub improved: bool,
    pub evaluations: usize,
    pub seed: Option<u64>,
}

/// Local search over `log(ℓ, b, R₀, R, 𝒩)` minimising the assembled total.
/// Never returns a point worse than `start`.
pub fn optimize_params(
    t: &ThermoPoint,
    v: &RadialPotential,
    start: &TrialParameters,
    seed: Option<u64>,
) -> Result<OptimizeResult> {
    let start_total = assemble_bound(t, start, v)?.total;
    let x0 = [
        start.ell.ln(),
        start.b.ln(),
        start.r0.ln(),
        start.r.ln(),
        start.n_cut.ln(),
    ];
    let mut steps = [0.1; 5];
    if let Some(s) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        for st in &mut steps {
            *st *= rng.gen_range(0.5..1.5);
        }
    }
    let build = |x: &[f64]| -> Result<TrialParameters> {
        complete_params(
            t,
            x[0].exp(),
            x[1].exp(),
            x[2].exp(),
            x[3].exp(),
            Cutoff::Fixed(x[4].exp()),
            start.k,
        )
    };
    let objective = |x: &[f64]| -> Option<f64> {
        let p = build(x).ok()?;
        assemble_bound(t, &p, v).ok().map(|b| b.total)
    };
    let nm = nelder_mead(objective, &x0, &steps, NelderMeadOptions::default());
    if nm.feasible_probe && nm.fx < start_total {
        if let Ok(p) = build(&nm.x) {
            return Ok(OptimizeResult {
                params: p,
                total: nm.fx,
                start_total,
                improved: true,
                evaluations: nm.evals,
                seed,
            });
        }
    }
    Ok(OptimizeResult {
        params: *start,
        total: start_total,
        start_total,
        improved: false,
        evaluations: nm.evals,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub beta_rho: f64,
    pub bound_total: f64,
    /// `f₀(β, ρ - ρ_s)`
    pub ideal_ref: f64,
    /// `(bound_total - ideal_ref) σ / (4π(2ρ² - ρ_s²))`
    pub normalized_excess: f64,
    pub params_used: TrialParameters,
    #[serde(skip)]
    pub breakdown: BoundBreakdown,
    /// `2 - (ρ_s/ρ)²`
    #[serde(skip)]
    pub target_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub sigma: f64,
    pub beta_rho: f64,
    pub message: String,
}

/// Fit of `normalized_excess - 1` against `ln σ/σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepFit {
    /// `max (normalized_excess - 1) σ/ln σ` over the rows.
    pub c_envelope: f64,
    /// Least-squares slope through the origin.
    pub c_least_squares: f64,
    /// Slope of `ln(normalized_excess - 1)` against `ln σ`, if defined.
    pub rate_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
    pub fit: Option<SweepFit>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    pub constants: ScalingConstants,
    pub optimize: bool,
    pub seed: Option<u64>,
}

/// Evaluates one `(σ, βρ)` point with `ρ = 1` and `a = e^{-σ/2}`, the
/// potential rescaled to scattering length `a`. `a_v` is the scattering
/// length of `v`.
pub fn sweep_point(
    sigma: f64,
    beta_rho: f64,
    v: &RadialPotential,
    a_v: f64,
    opts: &SweepOptions,
) -> Result<SweepRow> {
    let t = ThermoPoint::from_sigma(sigma, beta_rho, 1.0)?;
    let scaled = v.scaled(t.a / a_v)?;
    let mut params = default_params_with(sigma, t.rho, t.a, t.beta, &opts.constants)?;
    if opts.optimize {
        params = optimize_params(&t, &scaled, &params, opts.seed)?.params;
    }
    let breakdown = assemble_bound(&t, &params, &scaled)?;
    let rho_s = t.rho_s()?;
    let ideal_ref = f0(t.beta, t.rho - rho_s).or_else(|e| {
        if t.rho - rho_s <= 0.0 {
            Ok(0.0)
        } else {
            Err(e)
        }
    })?;
    let lead = 4.0 * PI * (2.0 * t.rho * t.rho - rho_s * rho_s) / sigma;
    Ok(SweepRow {
        sigma,
        beta_rho,
        bound_total: breakdown.total,
        ideal_ref,
        normalized_excess: (breakdown.total - ideal_ref) / lead,
        params_used: params,
        breakdown,
        target_coefficient: 2.0 - (rho_s / t.rho).powi(2),
    })
}

fn fit(rows: &[SweepRow]) -> Option<SweepFit> {
    if rows.is_empty() {
        return None;
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.sigma.ln() / r.sigma, r.normalized_excess - 1.0))
        .collect();
    let c_envelope = pts.iter().map(|(x, y)| y / x).fold(f64::NEG_INFINITY, f64::max);
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();

    let logs: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.normalized_excess > 1.0)
        .map(|r| (r.sigma.ln(), (r.normalized_excess - 1.0).ln()))
        .collect();
    let rate_exponent = if logs.len() >= 2 {
        let n = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
        let num: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        (den > 0.0).then(|| num / den)
    } else {
        None
    };
    Some(SweepFit {
        c_envelope,
        c_least_squares: sxy / sxx,
        rate_exponent,
    })
}

/// One row per `(σ, βρ)`, ordered by σ then βρ as given. Rows that fail
/// are collected in `failures`.
pub fn sweep_sigma(
    sigmas: &[f64],
    beta_rho_values: &[f64],
    v: &RadialPotential,
    opts: &SweepOptions,
) -> Result<SweepReport> {
    if let Some(s) = sigmas.iter().find(|&&s| !(s >= 10.0)) {
        return Err(Error::domain("sweep_sigma", format!("σ = {s} must be ≥ 10")));
    }
    let a_v = scattering_length(v, 1e-10)?;
    let grid: Vec<(f64, f64)> = sigmas
        .iter()
        .flat_map(|&s| beta_rho_values.iter().map(move |&b| (s, b)))
        .collect();
    let results: Vec<_> = grid
        .par_iter()
        .map(|&(s, b)| (s, b, sweep_point(s, b, v, a_v, opts)))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (sigma, beta_rho, r) in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(SweepFailure {
                sigma,
                beta_rho,
                message: e.to_string(),
            }),
        }
    }
    Ok(SweepReport {
        fit: fit(&rows),
        rows,
        failures,
        seed: opts.seed,
    })
}

const PARAM_COLUMNS: [&str; 13] = [
    "ell", "b", "r0", "r", "n_cut", "k", "a_mult", "ell_tilde", "mu", "n", "n_g", "n_g_tilde",
    "z_sq",
];

fn param_values(p: &TrialParameters) -> [f64; 13] {
    [
        p.ell, p.b, p.r0, p.r, p.n_cut, p.k, p.a_mult, p.ell_tilde, p.mu, p.n, p.n_g,
        p.n_g_tilde, p.z_sq,
    ]
}

/// Formats with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(report: &SweepReport, mut w: W) -> std::io::Result<()> {
    let mut header = vec!["sigma", "beta_rho", "bound_total", "ideal_ref", "normalized_excess"];
    header.extend(PARAM_COLUMNS);
    writeln!(w, "{}", header.join(","))?;
    for r in &report.rows {
        let mut cols: Vec<String> = [r.sigma, r.beta_rho, r.bound_total, r.ideal_ref, r.normalized_excess]
            .iter()
            .map(|&x| fmt_f64(x))
            .collect();
        cols.extend(param_values(&r.params_used).iter().map(|&x| fmt_f64(x)));
        writeln!(w, "{}", cols.join(","))?;
    }
    for f in &report.failures {
        writeln!(
            w,
            "# failed sigma={} beta_rho={}: {}",
            fmt_f64(f.sigma),
            fmt_f64(f.beta_rho),
            f.message
        )?;
    }
    if let Some(fit) = &report.fit {
        writeln!(
            w,
            "# fit c_envelope={} c_least_squares={} rate_exponent={}",
            fmt_f64(fit.c_envelope),
            fmt_f64(fit.c_least_squares),
            fit.rate_exponent.map_or("nan".to_string(), fmt_f64)
        )?;
    }
    if let Some(seed) = report.seed {
        writeln!(w, "# seed={seed}")?;
    }
    Ok(())
}

/// One JSON object per row, then one per failure, then the fit.
pub fn write_json_lines<W: Write>(report: &SweepReport, mut w: W) -> std::io::Result<()> {
    for r in &report.rows {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    for f in &report.failures {
        serde_json::to_writer(&mut w, &serde_json::json!({ "failure": f }))?;
        writeln!(w)?;
    }
    serde_json::to_writer(
        &mut w,
        &serde_json::json!({ "fit": report.fit, "seed": report.seed }),
    )?;
    writeln!(w)?;
    Ok(())
}
