//! Solver library and trajectory simulator for the planar target-attacker-defender
//! (TAD) pursuit game.
//!
//! Three agents move with simple motion in the plane: an attacker `A` pursues a
//! slower target `T` (speed ratio `alpha < 1`), while a defender `D` with the same
//! speed as `A` tries to intercept `A` first. The crate answers three questions:
//!
//! - **Who wins?** [`regions`] evaluates the barrier function that splits the state
//!   space into the attacker's winning region `R_c` and the team's region
//!   `R_ed ∪ R_ea`, and classifies states.
//! - **How?** [`cdg`] solves the capture game in `R_c`: the optimal capture point on
//!   the A-T Apollonius circle (degree-6 polynomial plus a brute-force oracle), the
//!   saddle-point headings, the game value, its analytic gradient, co-states and
//!   Hamilton-Jacobi-Isaacs residual diagnostics. [`atddg`] provides the escape-side
//!   aimpoint on the A-D orthogonal bisector and barrier consistency checks.
//! - **What happens?** [`sim`] integrates the engagement under pluggable strategy
//!   assignments (optimal, region-switching, pure pursuit, fixed headings) with
//!   event detection and exact sub-step termination.
//!
//! All quantities are in normalized units: attacker and defender speeds are 1, the
//! target speed is `alpha`. Every operation is a pure function of its inputs; values
//! are `Send + Sync` and safe to use from any number of threads.

pub mod atddg;
pub mod cdg;
pub mod geometry;
pub mod poly;
pub mod regions;
pub mod sampling;
pub mod sim;

pub use geometry::{ApolloniusCircle, GameState, Heading, Point2};
pub use regions::{Region, RegionReport};

use num_complex::Complex64;

/// Errors shared by the solver and simulator modules.
#[derive(Debug, Clone, PartialEq)]
pub enum GameError {
    /// Two points that must be distinct coincide (within the coincidence
    /// tolerance), or a circle degenerated to a point.
    DegenerateGeometry(&'static str),
    /// A numeric parameter is outside its admissible range.
    InvalidParameter { what: &'static str, value: f64 },
    /// An operation was invoked outside the region where it is defined.
    RegionMismatch { required: &'static str, found: Region },
    /// The aimpoint is collinear with agents in a way that leaves the
    /// co-state expressions indeterminate.
    DegenerateAlignment(&'static str),
    /// The capture-point polynomial produced no admissible root; carries all
    /// raw roots for diagnosis.
    NoAdmissibleRoot { roots: Vec<Complex64> },
    /// The escape-aimpoint scan found no bracketed root on the bisector.
    NoBisectorRoot { scan_lo: f64, scan_hi: f64 },
}

impl std::fmt::Display for GameError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GameError::DegenerateGeometry(what) => write!(f, "degenerate geometry: {what}"),
            GameError::InvalidParameter { what, value } => {
                write!(f, "invalid parameter {what} = {value}")
            }
            GameError::RegionMismatch { required, found } => {
                write!(f, "state is in {found}, operation requires {required}")
            }
            GameError::DegenerateAlignment(what) => write!(f, "degenerate alignment: {what}"),
            GameError::NoAdmissibleRoot { roots } => {
                write!(f, "no admissible capture-point root among {} raw roots", roots.len())
            }
            GameError::NoBisectorRoot { scan_lo, scan_hi } => {
                write!(f, "no escape aimpoint bracketed on the bisector in [{scan_lo}, {scan_hi}]")
            }
        }
    }
}

impl std::error::Error for GameError {}

pub type Result<T> = std::result::Result<T, GameError>;
