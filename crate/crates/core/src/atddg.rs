//! Escape-side aimpoint on the attacker-defender orthogonal bisector, plus
//! barrier consistency diagnostics.
//!
//! In the team's winning region the engagement ends with the defender
//! intercepting the attacker on the A-D orthogonal bisector (equal speeds
//! make it the interception locus). The interception point is the root of a
//! one-dimensional optimality condition along the bisector. Its fractional
//! form has a pole where the bisector meets the line through A and D (the
//! A-D midpoint); scanning and bisection therefore run on the
//! denominator-cleared form, and candidates are validated with whichever
//! residual is well conditioned. On the barrier the root coincides with the
//! capture-game aimpoint and with the circle-bisector tangency point.

use serde::{Deserialize, Serialize};

use crate::geometry::{los_angle, orthogonal_bisector, GameState, Point2};
use crate::regions::tangency_margin;
use crate::{cdg, GameError, Result};

/// Scan half-range in units of `dist(A, D)`.
const SCAN_RANGE: f64 = 20.0;
/// Scan step in units of `dist(A, D)`.
const SCAN_STEP: f64 = 0.1;
/// Normalized residual admission threshold.
const RESIDUAL_TOL: f64 = 1e-8;

/// Interception aimpoint on the A-D orthogonal bisector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectorAimpoint {
    pub point: Point2,
    /// Signed arclength of the point from the A-D midpoint.
    pub param: f64,
    /// Normalized optimality residual at the point.
    pub residual: f64,
    /// Number of distinct roots found on the bisector (> 1 is flagged to the
    /// caller by this count; the returned root maximizes the rollout score).
    pub root_count: usize,
}

/// Barrier consistency diagnostics for (near-)barrier states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierConsistency {
    /// Capture angle minus the A-to-D line-of-sight angle (wrapped).
    pub omega_star_minus_rho: f64,
    /// Capture-game value at the state.
    pub value: f64,
    /// Apollonius-circle center distance to the bisector minus the radius.
    pub tangency_gap: f64,
    /// All three gaps below their normalized thresholds.
    pub pass: bool,
}

/// Escape-side optimality condition at a bisector point (fractional form;
/// unbounded near the bisector-midpoint pole). Normalized by `dist(A, D)`.
pub fn escape_residual(state: &GameState, p: Point2) -> f64 {
    let (n1, n2, den) = residual_parts(state, p);
    let ti = p.dist(state.target);
    let ai = p.dist(state.attacker);
    let di = p.dist(state.defender);
    (state.alpha * ti - n1 / den * ai + n2 / den * di) / state.ad_dist()
}

/// Denominator-cleared escape condition, normalized by `dist(A, D)^3`;
/// finite everywhere, with an extra zero at the pole itself.
pub fn escape_residual_cleared(state: &GameState, p: Point2) -> f64 {
    let (n1, n2, den) = residual_parts(state, p);
    let ti = p.dist(state.target);
    let ai = p.dist(state.attacker);
    let di = p.dist(state.defender);
    let ad = state.ad_dist();
    (state.alpha * ti * den - n1 * ai + n2 * di) / (ad * ad * ad)
}

fn residual_parts(state: &GameState, p: Point2) -> (f64, f64, f64) {
    let t = state.target;
    let a = state.attacker;
    let d = state.defender;
    let n1 = (p.x - t.x) * (p.y - d.y) - (p.x - d.x) * (p.y - t.y);
    let n2 = (p.x - t.x) * (p.y - a.y) - (p.x - a.x) * (p.y - t.y);
    let den = (p.x - a.x) * (p.y - d.y) - (p.x - d.x) * (p.y - a.y);
    (n1, n2, den)
}

/// Solves for the team's escape aimpoint: the root of the optimality
/// condition over the bisector parameter, bracketed by a coarse scan over
/// `±20 dist(A,D)` at step `0.1 dist(A,D)` and refined by bisection.
///
/// Meaningful in `R_ea` and on the barrier (callers gate the region). With
/// several roots the one maximizing terminal attacker-target separation in a
/// short pure-pursuit rollout is returned and `root_count` flags the
/// multiplicity.
pub fn atddg_aimpoint(state: &GameState) -> Result<BisectorAimpoint> {
    let bisector = orthogonal_bisector(state.attacker, state.defender)?;
    let ad = state.ad_dist();
    let lo = -SCAN_RANGE * ad;
    let step = SCAN_STEP * ad;
    let steps = (2.0 * SCAN_RANGE / SCAN_STEP) as usize;

    let g = |tau: f64| escape_residual_cleared(state, bisector.point_at(tau));
    let mut candidates: Vec<f64> = Vec::new();
    let mut prev = g(lo);
    let mut prev_tau = lo;
    for k in 1..=steps {
        let tau = lo + k as f64 * step;
        let cur = g(tau);
        if prev == 0.0 {
            candidates.push(prev_tau);
        } else if prev * cur < 0.0 {
            let (mut a, mut b, mut fa) = (prev_tau, tau, prev);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let fm = g(mid);
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
                if b - a < 1e-13 * ad.max(1.0) {
                    break;
                }
            }
            candidates.push(0.5 * (a + b));
        }
        prev = cur;
        prev_tau = tau;
    }

    // Validate: away from the midpoint pole the fractional residual must
    // vanish; at the pole the cleared residual decides (the root can sit
    // exactly there when the target lies on the A-D line).
    let ad2 = ad * ad;
    let mut roots: Vec<(f64, Point2, f64)> = Vec::new();
    for tau in candidates {
        let p = bisector.point_at(tau);
        let (_, _, den) = residual_parts(state, p);
        let residual = if den.abs() > 1e-9 * ad2 {
            escape_residual(state, p).abs()
        } else {
            escape_residual_cleared(state, p).abs()
        };
        if residual <= RESIDUAL_TOL
            && !roots.iter().any(|(t0, _, _)| (t0 - tau).abs() < 1e-9 * ad.max(1.0))
        {
            roots.push((tau, p, residual));
        }
    }
    if roots.is_empty() {
        return Err(GameError::NoBisectorRoot { scan_lo: lo, scan_hi: -lo });
    }
    let root_count = roots.len();
    let best = if root_count == 1 {
        roots[0]
    } else {
        roots
            .into_iter()
            .max_by(|a, b| {
                rollout_separation(state, a.1)
                    .partial_cmp(&rollout_separation(state, b.1))
                    .unwrap()
            })
            .unwrap()
    };
    Ok(BisectorAimpoint { point: best.1, param: best.0, residual: best.2, root_count })
}

/// Tiebreak probe for multiple bisector roots: target and defender steer at
/// the candidate, the attacker pure-pursues the target; score is the
/// attacker-target separation when the defender reaches the candidate (zero
/// on capture).
fn rollout_separation(state: &GameState, aim: Point2) -> f64 {
    let dt = 0.01 * state.ad_dist();
    let mut s = *state;
    for _ in 0..20_000 {
        if s.defender.dist(aim) <= dt {
            return s.at_dist();
        }
        if s.at_dist() <= dt {
            return 0.0;
        }
        let phi = match los_angle(s.target, aim) {
            Ok(h) => h,
            Err(_) => return s.at_dist(),
        };
        let psi = match los_angle(s.defender, aim) {
            Ok(h) => h,
            Err(_) => return s.at_dist(),
        };
        let chi = match los_angle(s.attacker, s.target) {
            Ok(h) => h,
            Err(_) => return 0.0,
        };
        s = crate::sim::step(&s, phi, psi, chi, dt);
    }
    s.at_dist()
}

/// Normalized thresholds: the angle gap is dimensionless, the value and
/// tangency gaps scale with length and are compared against
/// `1e-6 * dist(A,D)`.
pub fn barrier_consistency_check(state: &GameState) -> Result<BarrierConsistency> {
    let aim = cdg::solve_aimpoint(state)?;
    let rho = los_angle(state.attacker, state.defender)?.angle();
    let gap = {
        let raw = aim.omega - rho;
        raw.sin().atan2(raw.cos())
    };
    let tangency = tangency_margin(state)?;
    let ad = state.ad_dist();
    let pass =
        gap.abs() < 1e-6 && aim.value.abs() < 1e-6 * ad && tangency.abs() < 1e-6 * ad;
    Ok(BarrierConsistency {
        omega_star_minus_rho: gap,
        value: aim.value,
        tangency_gap: tangency,
        pass,
    })
}
