//! Planar geometry shared by every other module: points, headings, the full
//! game state, the A-T Apollonius circle and the A-D orthogonal bisector.

use serde::{Deserialize, Serialize};

use crate::{GameError, Result};

/// Two points closer than this (normalized length units) are treated as
/// coincident; angle-producing operations reject them instead of returning
/// noise.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// A point (or free vector) in the normalized game plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2-D cross product `self × other`.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotates `self` about `center` by `angle` radians (counterclockwise).
    pub fn rotated_about(self, center: Point2, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        let d = self - center;
        Point2::new(center.x + c * d.x - s * d.y, center.y + s * d.x + c * d.y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2::new(v[0], v[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// A unit direction: the angle in `[-pi, pi]` plus its cached cosine/sine pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Heading {
    angle: f64,
    cos: f64,
    sin: f64,
}

impl Heading {
    pub fn from_angle(angle: f64) -> Heading {
        let wrapped = angle.sin().atan2(angle.cos());
        let (sin, cos) = wrapped.sin_cos();
        Heading { angle: wrapped, cos, sin }
    }

    /// Direction of the vector `(dx, dy)`; rejects near-zero vectors.
    pub fn from_vector(dx: f64, dy: f64) -> Result<Heading> {
        let n = dx.hypot(dy);
        if !n.is_finite() || n < COINCIDENCE_TOL {
            return Err(GameError::DegenerateGeometry("zero-length direction vector"));
        }
        Ok(Heading { angle: dy.atan2(dx), cos: dx / n, sin: dy / n })
    }

    pub fn angle(self) -> f64 {
        self.angle
    }

    pub fn cos(self) -> f64 {
        self.cos
    }

    pub fn sin(self) -> f64 {
        self.sin
    }

    /// The unit vector as a point.
    pub fn unit(self) -> Point2 {
        Point2::new(self.cos, self.sin)
    }
}

/// Line-of-sight direction from one point toward another.
pub fn los_angle(from: Point2, to: Point2) -> Result<Heading> {
    Heading::from_vector(to.x - from.x, to.y - from.y)
}

/// Complete state of the engagement: the three agent positions plus the
/// speed ratio `alpha = V_T / V_A` (speeds normalized so `V_A = V_D = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub target: Point2,
    pub attacker: Point2,
    pub defender: Point2,
    pub alpha: f64,
}

impl GameState {
    /// Validates finiteness and `0 <= alpha < 1`.
    pub fn new(target: Point2, attacker: Point2, defender: Point2, alpha: f64) -> Result<GameState> {
        if !(target.is_finite() && attacker.is_finite() && defender.is_finite()) {
            return Err(GameError::InvalidParameter { what: "coordinate", value: f64::NAN });
        }
        if !alpha.is_finite() || !(0.0..1.0).contains(&alpha) {
            return Err(GameError::InvalidParameter { what: "alpha", value: alpha });
        }
        Ok(GameState { target, attacker, defender, alpha })
    }

    pub fn at_dist(&self) -> f64 {
        self.attacker.dist(self.target)
    }

    pub fn dt_dist(&self) -> f64 {
        self.defender.dist(self.target)
    }

    pub fn ad_dist(&self) -> f64 {
        self.attacker.dist(self.defender)
    }

    /// The state with every agent rotated about `center` by `angle`.
    pub fn rotated_about(&self, center: Point2, angle: f64) -> GameState {
        GameState {
            target: self.target.rotated_about(center, angle),
            attacker: self.attacker.rotated_about(center, angle),
            defender: self.defender.rotated_about(center, angle),
            alpha: self.alpha,
        }
    }

    /// The state with every agent translated by `offset`.
    pub fn translated(&self, offset: Point2) -> GameState {
        GameState {
            target: self.target + offset,
            attacker: self.attacker + offset,
            defender: self.defender + offset,
            alpha: self.alpha,
        }
    }
}

/// The A-T Apollonius circle: the locus of points `P` with
/// `dist(T, P) = alpha * dist(A, P)`, i.e. the boundary of the target's
/// dominance region against the attacker. Capture under optimal constant
/// headings occurs on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApolloniusCircle {
    pub center: Point2,
    pub radius: f64,
}

impl ApolloniusCircle {
    /// The circle point at angle `omega` from the center.
    pub fn point_at(&self, omega: f64) -> Point2 {
        let (s, c) = omega.sin_cos();
        Point2::new(self.center.x + self.radius * c, self.center.y + self.radius * s)
    }
}

/// Builds the A-T Apollonius circle for a valid state.
///
/// `radius = 0` exactly when `alpha = 0` or the target coincides with the
/// attacker (the circle collapses to the target position). The `alpha >= 1`
/// degeneracy is rejected at [`GameState::new`].
pub fn apollonius(state: &GameState) -> ApolloniusCircle {
    let a2 = state.alpha * state.alpha;
    let k = 1.0 / (1.0 - a2);
    ApolloniusCircle {
        center: Point2::new(
            k * (state.target.x - a2 * state.attacker.x),
            k * (state.target.y - a2 * state.attacker.y),
        ),
        radius: state.alpha * k * state.at_dist(),
    }
}

/// The perpendicular bisector of a segment: the interception locus of the
/// equal-speed attacker/defender pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectorLine {
    /// Segment midpoint (a point on the line).
    pub midpoint: Point2,
    /// Unit vector along the line.
    pub direction: Point2,
    /// Unit normal, pointing from `d` toward `a`.
    pub normal: Point2,
}

impl BisectorLine {
    /// The line point at signed arclength `tau` from the midpoint.
    pub fn point_at(&self, tau: f64) -> Point2 {
        self.midpoint + self.direction * tau
    }

    /// Signed distance of `p` from the line, positive on the `a` side.
    pub fn signed_distance(&self, p: Point2) -> f64 {
        (p - self.midpoint).dot(self.normal)
    }
}

/// Orthogonal bisector of the segment `a`-`d`.
pub fn orthogonal_bisector(a: Point2, d: Point2) -> Result<BisectorLine> {
    let n = a.dist(d);
    if n < COINCIDENCE_TOL {
        return Err(GameError::DegenerateGeometry("bisector of coincident points"));
    }
    let normal = Point2::new((a.x - d.x) / n, (a.y - d.y) / n);
    Ok(BisectorLine {
        midpoint: Point2::new(0.5 * (a.x + d.x), 0.5 * (a.y + d.y)),
        direction: Point2::new(-normal.y, normal.x),
        normal,
    })
}
