//! Winning-region classification (the game of kind).
//!
//! The quadratic barrier function `B(x; alpha)` separates the attacker's
//! winning region `R_c` from the team's escape region. Its zero set, for fixed
//! attacker/defender positions, is one branch of a hyperbola in the target
//! coordinates; geometrically `B = 0` exactly when the A-T Apollonius circle
//! is tangent to the A-D orthogonal bisector. Both formulations are
//! implemented: the quadratic coefficients as the production path and the
//! tangency margin as an independent oracle.

use serde::{Deserialize, Serialize};

use crate::geometry::{apollonius, orthogonal_bisector, GameState, Point2, COINCIDENCE_TOL};
use crate::{GameError, Result};

/// The winning-region label of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// The target is at least as close to the defender as to the attacker
    /// and escapes regardless of `alpha`.
    #[serde(rename = "R_ed")]
    EscapeByDistance,
    /// Escape by barrier: `B < 0`, the team wins under optimal play.
    #[serde(rename = "R_ea")]
    EscapeByBarrier,
    /// The attacker's winning region, `B > 0`.
    #[serde(rename = "R_c")]
    Capture,
    /// Within the on-barrier tolerance band of `B = 0`.
    OnBarrier,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Region::EscapeByDistance => "R_ed",
            Region::EscapeByBarrier => "R_ea",
            Region::Capture => "R_c",
            Region::OnBarrier => "OnBarrier",
        })
    }
}

/// Direction cosines of the D→A axis and the A-D midpoint: the frame in which
/// the barrier quadric is expressed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierFrame {
    pub cos_sigma: f64,
    pub sin_sigma: f64,
    pub midpoint: Point2,
}

/// Coefficients of the barrier quadric in the target coordinates:
/// `B = bxx x² + byy y² + 2 bxy xy + 2 bx x + 2 by y + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierCoefficients {
    pub bxx: f64,
    pub byy: f64,
    pub bxy: f64,
    pub bx: f64,
    pub by: f64,
    pub b: f64,
}

impl BarrierCoefficients {
    /// Evaluates the quadric at a target position `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.bxx * x * x
            + self.byy * y * y
            + 2.0 * self.bxy * x * y
            + 2.0 * self.bx * x
            + 2.0 * self.by * y
            + self.b
    }
}

/// Classification result: the barrier value, the region label, and the
/// distance margin `dist(A,T) - dist(D,T)` deciding `R_ed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub barrier_value: f64,
    pub region: Region,
    pub ed_margin: f64,
}

pub fn barrier_frame(state: &GameState) -> Result<BarrierFrame> {
    let d = state.attacker - state.defender;
    let n = d.norm();
    if n < COINCIDENCE_TOL {
        return Err(GameError::DegenerateGeometry("attacker coincides with defender"));
    }
    Ok(BarrierFrame {
        cos_sigma: d.x / n,
        sin_sigma: d.y / n,
        midpoint: Point2::new(
            0.5 * (state.attacker.x + state.defender.x),
            0.5 * (state.attacker.y + state.defender.y),
        ),
    })
}

pub fn barrier_coefficients(state: &GameState) -> Result<BarrierCoefficients> {
    let frame = barrier_frame(state)?;
    let (c, s) = (frame.cos_sigma, frame.sin_sigma);
    let (x0, y0) = (frame.midpoint.x, frame.midpoint.y);
    let (xa, ya) = (state.attacker.x, state.attacker.y);
    let a2 = state.alpha * state.alpha;
    let m2 = 1.0 - a2;
    Ok(BarrierCoefficients {
        bxx: c * c - a2,
        byy: s * s - a2,
        bxy: s * c,
        bx: a2 * xa * s * s - m2 * x0 * c * c - (a2 * ya + m2 * y0) * s * c,
        by: a2 * ya * c * c - m2 * y0 * s * s - (a2 * xa + m2 * x0) * s * c,
        b: {
            let u = (a2 * ya + m2 * y0) * s + (a2 * xa + m2 * x0) * c;
            u * u - a2 * (xa * xa + ya * ya)
        },
    })
}

/// The barrier function at the state's target position.
pub fn barrier_value(state: &GameState) -> Result<f64> {
    Ok(barrier_coefficients(state)?.eval(state.target.x, state.target.y))
}

/// Default on-barrier band: `1e-9 * dist(A,D)^2`. The square makes the band
/// invariant under uniform rescaling of the configuration, matching the
/// quadratic growth of `B`.
pub fn default_on_barrier_tol(state: &GameState) -> f64 {
    let s = state.ad_dist();
    1e-9 * s * s
}

/// Classifies a state. The `R_ed` distance test is applied first, which keeps
/// the irrelevant second hyperbola branch (entirely inside the defender's
/// dominance half-plane) out of the barrier logic.
pub fn classify(state: &GameState, on_barrier_tol: f64) -> Result<RegionReport> {
    if on_barrier_tol <= 0.0 || on_barrier_tol.is_nan() {
        return Err(GameError::InvalidParameter { what: "on_barrier_tol", value: on_barrier_tol });
    }
    let ed_margin = state.at_dist() - state.dt_dist();
    let barrier = barrier_value(state)?;
    let region = if ed_margin >= 0.0 {
        Region::EscapeByDistance
    } else if barrier.abs() <= on_barrier_tol {
        Region::OnBarrier
    } else if barrier > 0.0 {
        Region::Capture
    } else {
        Region::EscapeByBarrier
    };
    Ok(RegionReport { barrier_value: barrier, region, ed_margin })
}

/// [`classify`] with the scale-equivariant default tolerance.
pub fn classify_default(state: &GameState) -> Result<RegionReport> {
    classify(state, default_on_barrier_tol(state))
}

/// Signed tangency margin: distance from the Apollonius-circle center to the
/// A-D bisector (positive toward the attacker's side) minus the radius.
///
/// Independent oracle for the barrier sign: outside `R_ed`,
/// `B = (1 - alpha²)² (d² - r²)` with `d + r > 0`, so `sign(B)` equals the
/// sign of this margin.
pub fn tangency_margin(state: &GameState) -> Result<f64> {
    let circle = apollonius(state);
    let bisector = orthogonal_bisector(state.attacker, state.defender)?;
    Ok(bisector.signed_distance(circle.center) - circle.radius)
}

/// Foot of the perpendicular from the Apollonius-circle center onto the A-D
/// bisector. On the barrier this is the tangency point, which is also the
/// optimal capture point.
pub fn tangency_point(state: &GameState) -> Result<Point2> {
    let circle = apollonius(state);
    let bisector = orthogonal_bisector(state.attacker, state.defender)?;
    let d = bisector.signed_distance(circle.center);
    Ok(circle.center - bisector.normal * d)
}

/// Axis-aligned rectangle of target positions for cross-section extraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn is_valid(&self) -> bool {
        self.x_min < self.x_max && self.y_min < self.y_max
    }
}

/// Extracts the barrier cross-section for fixed attacker/defender positions:
/// target points inside `window` where `B = 0`, restricted to the relevant
/// branch (points strictly closer to the attacker). Grid-cell edges with a
/// sign change are refined by bisection to machine precision, far inside the
/// guaranteed `|B| < 1e-9` band. Points are emitted in row-major edge order;
/// an empty result just means no sign change in the window.
pub fn barrier_cross_section(
    attacker: Point2,
    defender: Point2,
    alpha: f64,
    window: Window,
    nx: usize,
    ny: usize,
) -> Result<Vec<Point2>> {
    if !window.is_valid() {
        return Err(GameError::InvalidParameter { what: "window", value: f64::NAN });
    }
    if nx == 0 || ny == 0 {
        return Err(GameError::InvalidParameter { what: "resolution", value: 0.0 });
    }
    // Coefficients do not depend on the target position; probe with any valid T.
    let probe = GameState::new(Point2::new(0.0, 0.0), attacker, defender, alpha)?;
    let coeffs = barrier_coefficients(&probe)?;

    let node = |i: usize, j: usize| {
        Point2::new(
            window.x_min + (window.x_max - window.x_min) * i as f64 / nx as f64,
            window.y_min + (window.y_max - window.y_min) * j as f64 / ny as f64,
        )
    };
    let attacker_branch =
        |p: Point2| attacker.dist(p) - defender.dist(p) < 0.0;

    let mut out = Vec::new();
    let mut values = vec![0.0f64; (nx + 1) * (ny + 1)];
    for j in 0..=ny {
        for i in 0..=nx {
            let p = node(i, j);
            values[j * (nx + 1) + i] = coeffs.eval(p.x, p.y);
        }
    }
    for j in 0..=ny {
        for i in 0..=nx {
            let f0 = values[j * (nx + 1) + i];
            if f0 == 0.0 {
                if attacker_branch(node(i, j)) {
                    out.push(node(i, j));
                }
                continue;
            }
            if i < nx {
                let f1 = values[j * (nx + 1) + i + 1];
                if f1 != 0.0 && f0 * f1 < 0.0 {
                    let root = bisect_edge(&coeffs, node(i, j), node(i + 1, j), f0);
                    if attacker_branch(root) {
                        out.push(root);
                    }
                }
            }
            if j < ny {
                let f1 = values[(j + 1) * (nx + 1) + i];
                if f1 != 0.0 && f0 * f1 < 0.0 {
                    let root = bisect_edge(&coeffs, node(i, j), node(i, j + 1), f0);
                    if attacker_branch(root) {
                        out.push(root);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn bisect_edge(coeffs: &BarrierCoefficients, p0: Point2, p1: Point2, f0: f64) -> Point2 {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut flo = f0;
    let at = |s: f64| p0 + (p1 - p0) * s;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let p = at(mid);
        let fm = coeffs.eval(p.x, p.y);
        if fm == 0.0 {
            return p;
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    at(0.5 * (lo + hi))
}
