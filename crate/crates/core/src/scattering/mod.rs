//! Zero-energy two-body scattering in two dimensions.
//!
//! The minimiser of `∫_{|x|<R} (2|∇g|² + v g²) dx` with `g(R) = 1` solves
//! `-2(g'' + g'/r) + v g = 0`. In `s = ln r` this reads
//! `d²g/ds² = q(s) g` with `q = r² v(r)/2`, so force-free stretches are exactly
//! linear in `s` and the scattering length follows from
//! `g(r) = ln(r/a_R)/ln(R/a_R)` outside the support.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;

mod potential;

pub use potential::{Piece, PowerTail, RadialPotential};

/// Grid size used when callers do not choose one.
pub const DEFAULT_GRID_POINTS: usize = 100_000;

const GRID_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringSolution {
    /// Truncation radius `R`.
    pub r_max: f64,
    /// Strictly increasing radii.
    pub grid: Vec<f64>,
    /// `g₀` on `grid`, normalised to `g₀(R) = 1`.
    pub g: Vec<f64>,
    /// `r g₀'(r)` on `grid`.
    pub dg_ds: Vec<f64>,
    pub a_r: f64,
    /// Quadrature of the functional at the computed profile.
    pub functional_value: f64,
}

impl ScatteringSolution {
    pub fn ln_r_over_a(&self) -> f64 {
        (self.r_max / self.a_r).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SegmentKind {
    Constant(f64),
    Tail,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    s_lo: f64,
    s_hi: f64,
    kind: SegmentKind,
}

impl Segment {
    fn q(&self, v: &RadialPotential, s: f64) -> f64 {
        let r = s.exp();
        let value = match self.kind {
            SegmentKind::Constant(c) => c,
            SegmentKind::Tail => v.tail().map_or(0.0, |t| t.value(r)),
        };
        0.5 * r * r * value
    }

    fn force_free(&self) -> bool {
        self.kind == SegmentKind::Constant(0.0)
    }
}

/// Splits `[r_start, r_max]` at every discontinuity of `v`.
fn segments(v: &RadialPotential, r_start: f64, r_max: f64) -> Vec<Segment> {
    let mut cuts = vec![r_start, r_max];
    for p in v.pieces() {
        cuts.push(p.r_lo);
        cuts.push(p.r_hi);
    }
    if let Some(t) = v.tail() {
        cuts.push(t.start);
    }
    cuts.retain(|&c| c >= r_start && c <= r_max);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let kind = match v.tail() {
                Some(t) if mid >= t.start => SegmentKind::Tail,
                _ => SegmentKind::Constant(v.value(mid)),
            };
            Segment {
                s_lo: w[0].ln(),
                s_hi: w[1].ln(),
                kind,
            }
        })
        .collect()
}

/// Integrates outward with implicit-midpoint steps on `grid_points` nodes,
/// without the grid-doubling check.
pub fn solve_on_grid(v: &RadialPotential, r_max: f64, grid_points: usize) -> Result<ScatteringSolution> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::domain("solve_zero_energy", format!("R = {r_max} must be positive")));
    }
    let core = v.core_radius();
    if r_max <= core {
        return Err(Error::domain(
            "solve_zero_energy",
            format!("R = {r_max} must exceed the hard-core radius {core}"),
        ));
    }
    if grid_points < 16 {
        return Err(Error::domain("solve_zero_energy", "need at least 16 grid points"));
    }
    if v.is_zero() {
        return Err(Error::DegeneratePotential(
            "v ≡ 0 has scattering length 0".into(),
        ));
    }

    // Starting radius and regular initial data.
    let (r_start, g0, h0) = if core > 0.0 {
        (core, 0.0, 1.0)
    } else {
        let first_cut = v
            .pieces()
            .iter()
            .flat_map(|p| [p.r_lo, p.r_hi])
            .chain(v.tail().map(|t| t.start))
            .filter(|&c| c > 0.0)
            .fold(r_max, f64::min);
        let v0 = v.value(0.0);
        let kappa2 = 0.5 * v0;
        let mut r0 = 1e-4 * first_cut;
        if kappa2 > 0.0 {
            r0 = r0.min(1e-3 / kappa2.sqrt());
        }
        // I₀(κr) ≈ 1 + z²/4 + z⁴/64, r d/dr I₀ ≈ z²/2 + z⁴/16
        let z2 = kappa2 * r0 * r0;
        (r0, 1.0 + z2 / 4.0 + z2 * z2 / 64.0, z2 / 2.0 + z2 * z2 / 16.0)
    };

    let segs = segments(v, r_start, r_max);
    let weight = |s: &Segment| if s.force_free() { 0.1 } else { 1.0 };
    let total: f64 = segs.iter().map(|s| weight(s) * (s.s_hi - s.s_lo)).sum();
    let steps_per: Vec<usize> = segs
        .iter()
        .map(|s| {
            let share = grid_points as f64 * weight(s) * (s.s_hi - s.s_lo) / total;
            (share.round() as usize).max(4)
        })
        .collect();

    let n_nodes = 1 + steps_per.iter().sum::<usize>();
    let mut s_nodes = Vec::with_capacity(n_nodes);
    let mut g = Vec::with_capacity(n_nodes);
    let mut h = Vec::with_capacity(n_nodes);
    // q on each side of every interval, for the functional quadrature
    let mut q_pairs = Vec::with_capacity(n_nodes);
    s_nodes.push(r_start.ln());
    g.push(g0);
    h.push(h0);

    for (seg, &steps) in segs.iter().zip(&steps_per) {
        let ds = (seg.s_hi - seg.s_lo) / steps as f64;
        for i in 0..steps {
            let sa = seg.s_lo + i as f64 * ds;
            let sb = if i + 1 == steps { seg.s_hi } else { sa + ds };
            let step = sb - sa;
            let q = seg.q(v, 0.5 * (sa + sb));
            let (gn, hn) = (*g.last().unwrap(), *h.last().unwrap());
            // (I - step·A/2) y⁺ = (I + step·A/2) y, A = [[0, 1], [q, 0]]
            let half = 0.5 * step;
            let det = 1.0 - half * half * q;
            if !(det > 0.0) {
                return Err(Error::convergence(
                    "solve_zero_energy",
                    "step too large for the potential strength; increase grid points",
                ));
            }
            let rg = gn + half * hn;
            let rh = hn + half * q * gn;
            let g_new = (rg + half * rh) / det;
            let h_new = (rh + half * q * rg) / det;
            g.push(g_new);
            h.push(h_new);
            s_nodes.push(sb);
            q_pairs.push((seg.q(v, sa), seg.q(v, sb)));

            if g_new.abs() > 1e150 || h_new.abs() > 1e150 {
                for x in g.iter_mut().chain(h.iter_mut()) {
                    *x *= 1e-150;
                }
            }
        }
    }

    let g_end = *g.last().unwrap();
    if !(g_end > 0.0 && g_end.is_finite()) {
        return Err(Error::convergence(
            "solve_zero_energy",
            format!("non-positive or non-finite g(R) = {g_end}"),
        ));
    }
    for x in g.iter_mut().chain(h.iter_mut()) {
        *x /= g_end;
    }

    let h_end = *h.last().unwrap();
    let s_r = r_max.ln();
    let a_r = match segs.last() {
        Some(last) if last.force_free() && *steps_per.last().unwrap() >= 2 => {
            // least squares of g against s over the outermost decade
            let s_cut = (s_r - std::f64::consts::LN_10).max(last.s_lo);
            let pts: Vec<(f64, f64)> = s_nodes
                .iter()
                .zip(&g)
                .filter(|(s, _)| **s >= s_cut - 1e-12)
                .map(|(s, g)| (*s - s_r, *g))
                .collect();
            let n = pts.len() as f64;
            let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
            let (mx, my) = (sx / n, sy / n);
            let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
                (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
            });
            let slope = sxy / sxx;
            let intercept = my - slope * mx;
            // g = intercept + slope (s - s_R) vanishes at s = ln a
            r_max * (-intercept / slope).exp()
        }
        _ => r_max * (-1.0 / h_end).exp(),
    };
    if !(a_r > 0.0) || !a_r.is_finite() {
        return Err(Error::DegeneratePotential(format!(
            "extracted scattering length {a_r} is not positive"
        )));
    }

    // 4π ∫ (h² + q g²) ds, trapezoid per interval
    let mut functional = 0.0;
    for i in 0..q_pairs.len() {
        let ds = s_nodes[i + 1] - s_nodes[i];
        let (qa, qb) = q_pairs[i];
        let fa = h[i] * h[i] + qa * g[i] * g[i];
        let fb = h[i + 1] * h[i + 1] + qb * g[i + 1] * g[i + 1];
        functional += 0.5 * ds * (fa + fb);
    }
    functional *= 4.0 * PI;

    Ok(ScatteringSolution {
        r_max,
        grid: s_nodes.iter().map(|s| s.exp()).collect(),
        g,
        dg_ds: h,
        a_r,
        functional_value: functional,
    })
}

/// Solves the zero-energy problem on `[0, R]` and checks that `a_R` is stable
/// under grid doubling. Returns the finer solution.
pub fn solve_zero_energy(v: &RadialPotential, r_max: f64, grid_points: usize) -> Result<ScatteringSolution> {
    let coarse = solve_on_grid(v, r_max, grid_points)?;
    let fine = solve_on_grid(v, r_max, 2 * grid_points)?;
    let rel = ((fine.a_r - coarse.a_r) / fine.a_r).abs();
    if rel > GRID_TOL {
        return Err(Error::GridResolution { rel_change: rel });
    }
    Ok(fine)
}

/// `a = lim_{R→∞} a_R`, stopping when `|a_{2R} - a_R| ≤ tol · a_R`.
pub fn scattering_length(v: &RadialPotential, tol: f64) -> Result<f64> {
    if v.is_zero() {
        return Err(Error::DegeneratePotential(
            "v ≡ 0 has scattering length 0".into(),
        ));
    }
    let scale = v.inner_scale().max(v.core_radius());
    let range = v.range();
    if range.is_finite() {
        return Ok(solve_zero_energy(v, 2.0 * scale, DEFAULT_GRID_POINTS)?.a_r);
    }
    let mut r = 2.0 * scale;
    let mut a_prev = solve_zero_energy(v, r, DEFAULT_GRID_POINTS)?.a_r;
    while r < 1e12 * scale {
        r *= 2.0;
        let a = solve_zero_energy(v, r, DEFAULT_GRID_POINTS)?.a_r;
        if a < a_prev * (1.0 - GRID_TOL) {
            return Err(Error::convergence(
                "scattering_length",
                format!("a_R decreased from {a_prev:e} to {a:e} at R = {r:e}"),
            ));
        }
        if (a - a_prev).abs() <= tol * a_prev {
            return Ok(a);
        }
        a_prev = a;
    }
    Err(Error::convergence(
        "scattering_length",
        format!("a_R not converged to {tol:e} by R = {r:e}"),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub passed: bool,
    pub worst_margin: f64,
}

impl LemmaCheck {
    fn from_margin(worst_margin: f64) -> Self {
        Self {
            passed: worst_margin >= -GRID_TOL,
            worst_margin,
        }
    }
}

/// Outcome of the three properties of the scattering minimiser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GLemmaReport {
    /// `g₀(r) ≥ [ln(r/a_R)/ln(R/a_R)]₊`
    pub log_lower_bound: LemmaCheck,
    /// `g₀` nondecreasing
    pub monotone: LemmaCheck,
    /// `∫_{|x|<R} g₀'(|x|) dx ≤ 2πR/ln(R/a_R)`, margin relative to the bound
    pub derivative_integral: LemmaCheck,
}

impl GLemmaReport {
    pub fn all_passed(&self) -> bool {
        self.log_lower_bound.passed && self.monotone.passed && self.derivative_integral.passed
    }
}

pub fn verify_g_lemma(sol: &ScatteringSolution) -> GLemmaReport {
    let ln_ra = sol.ln_r_over_a();
    let lower = sol
        .grid
        .iter()
        .zip(&sol.g)
        .map(|(&r, &g)| g - ((r / sol.a_r).ln() / ln_ra).max(0.0))
        .fold(f64::INFINITY, f64::min);
    let mono = sol
        .g
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    // ∫₀^R r g₀'(r) dr = ∫ r (r g₀') ds
    let mut integral = 0.0;
    for i in 0..sol.grid.len().saturating_sub(1) {
        let ds = (sol.grid[i + 1] / sol.grid[i]).ln();
        integral += 0.5 * ds * (sol.grid[i] * sol.dg_ds[i] + sol.grid[i + 1] * sol.dg_ds[i + 1]);
    }
    let value = 2.0 * PI * integral;
    let bound = 2.0 * PI * sol.r_max / ln_ra;
    GLemmaReport {
        log_lower_bound: LemmaCheck::from_margin(lower),
        monotone: LemmaCheck::from_margin(mono),
        derivative_integral: LemmaCheck::from_margin((bound - value) / bound),
    }
}

/// `∫_{|x|>r_min} v(|x|) [ln(|x|/a)]² dx`.
pub fn tail_integral(v: &RadialPotential, r_min: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) || !(r_min > a) {
        return Err(Error::domain(
            "tail_integral",
            format!("need r_min > a > 0, got r_min = {r_min}, a = {a}"),
        ));
    }
    let weight = |r: f64| {
        let l = (r / a).ln();
        r * l * l
    };
    let mut total = 0.0;
    for p in v.pieces() {
        let lo = p.r_lo.max(r_min);
        if p.r_hi <= lo || p.value == 0.0 {
            continue;
        }
        if p.value.is_infinite() {
            return Err(Error::Divergent(format!(
                "hard core extends beyond r_min = {r_min}"
            )));
        }
        total += p.value * quad::integrate(weight, lo, p.r_hi, 1e-300, 1e-13)?.value;
    }
    if let Some(t) = v.tail() {
        if t.coeff > 0.0 {
            if !(t.exponent > 2.0) {
                return Err(Error::Divergent(format!("tail exponent {} ≤ 2", t.exponent)));
            }
            let lo = t.start.max(r_min);
            let r = quad::integrate_to_infinity(|r| t.value(r) * weight(r), lo, 1e-300, 1e-12)?;
            if !r.value.is_finite() {
                return Err(Error::Divergent("tail quadrature diverged".into()));
            }
            total += r.value;
        }
    }
    Ok(2.0 * PI * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hard_disk_at_r_equal_e() {
        let v = RadialPotential::hard_disk(1.0).unwrap();
        let sol = solve_zero_energy(&v, std::f64::consts::E, 2000).unwrap();
        assert!((sol.a_r - 1.0).abs() < 1e-12);
        assert!((sol.functional_value - 4.0 * PI).abs() < 1e-10);
        assert_eq!(*sol.g.last().unwrap(), 1.0);
        assert_eq!(sol.g[0], 0.0);
    }

    #[test]
    fn rejects_bad_radius() {
        let v = RadialPotential::hard_disk(1.0).unwrap();
        assert!(solve_zero_energy(&v, 0.5, 1000).is_err());
        assert!(solve_zero_energy(&v, -1.0, 1000).is_err());
    }

    #[test]
    fn zero_potential_is_degenerate() {
        let v = RadialPotential::zero();
        assert!(matches!(scattering_length(&v, 1e-8), Err(Error::DegeneratePotential(_))));
        assert!(matches!(
            solve_zero_energy(&v, 2.0, 1000),
            Err(Error::DegeneratePotential(_))
        ));
    }

    #[test]
    fn coarse_grid_is_flagged() {
        let v = RadialPotential::soft_disk(1.0, 16.0).unwrap();
        assert!(matches!(
            solve_zero_energy(&v, 4.0, 40),
            Err(Error::GridResolution { .. })
        ));
    }

    #[test]
    fn tail_integral_vanishes_outside_support() {
        let v = RadialPotential::hard_disk(1.0).unwrap();
        assert_eq!(tail_integral(&v, 2.0, 1.0).unwrap(), 0.0);
        assert!(tail_integral(&v, 0.5, 0.1).is_err());
        assert!(tail_integral(&v, 0.5, 1.0).is_err());
    }
}
