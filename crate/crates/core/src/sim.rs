//! Engagement simulator: explicit Euler with per-step feedback strategy
//! recomputation, banded region-crossing events, and exact sub-step
//! termination.
//!
//! Between strategy recomputations every agent moves with a constant heading,
//! so the Euler update is exact and the inter-agent distance along a step is
//! an exact quadratic in the sub-step time; termination uses its first
//! `eps`-crossing rather than endpoint interpolation (endpoint checks miss
//! crossings once `eps` is small against `rate * dt`).

use serde::{Deserialize, Serialize};

use crate::atddg;
use crate::cdg::{self, AimpointSolution};
use crate::geometry::{apollonius, los_angle, GameState, Heading, Point2};
use crate::regions::{classify, default_on_barrier_tol, Region};
use crate::{GameError, Result};

/// Attacker strategy assignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AttackerStrategy {
    /// Steer at the solved capture point while the state admits one
    /// (`R_c` or on-barrier); otherwise fall back to pure pursuit.
    CdgOptimal,
    /// Steer at the target's instantaneous position.
    PurePursuit,
    /// Constant heading (radians).
    FixedHeading(f64),
}

/// Target/defender team strategy assignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TeamStrategy {
    /// Steer at the solved capture point while the state admits one.
    CdgOptimal,
    /// Capture-game strategies while `B > 0`, escape-side (bisector aimpoint)
    /// strategies in `R_ea` and on the barrier, distance-escape fallback in
    /// `R_ed`; switching has a dead band of the on-barrier tolerance.
    RegionSwitching,
    /// Constant headings (target, defender) in radians.
    FixedHeadings(f64, f64),
}

/// Full strategy assignment for a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub attacker: AttackerStrategy,
    pub team: TeamStrategy,
}

/// Simulation parameters (normalized units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Integration step.
    pub dt: f64,
    /// Termination radius for both capture and interception. Purely numeric;
    /// point capture is the idealized condition.
    pub capture_radius: f64,
    /// Give-up horizon.
    pub max_time: f64,
    /// On-barrier band for classification; `None` selects the
    /// scale-equivariant default.
    pub on_barrier_tol: Option<f64>,
    /// Record every n-th sample (the initial and terminal samples are always
    /// kept). 1 records everything.
    pub sample_stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1e-3,
            capture_radius: 1e-3,
            max_time: 50.0,
            on_barrier_tol: None,
            sample_stride: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dt <= 0.0 || !self.dt.is_finite() {
            return Err(GameError::InvalidParameter { what: "dt", value: self.dt });
        }
        if self.capture_radius <= 0.0 || !self.capture_radius.is_finite() {
            return Err(GameError::InvalidParameter {
                what: "capture_radius",
                value: self.capture_radius,
            });
        }
        if self.max_time <= 0.0 || !self.max_time.is_finite() {
            return Err(GameError::InvalidParameter { what: "max_time", value: self.max_time });
        }
        if self.sample_stride == 0 {
            return Err(GameError::InvalidParameter { what: "sample_stride", value: 0.0 });
        }
        Ok(())
    }
}

/// Game outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Capture: attacker-target separation reached the termination radius
    /// first.
    AttackerWins,
    /// Interception: attacker-defender separation reached it first.
    TeamWins,
    /// Horizon exceeded.
    Timeout,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::AttackerWins => "AttackerWins",
            Verdict::TeamWins => "TeamWins",
            Verdict::Timeout => "Timeout",
        })
    }
}

/// Logged simulation event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    /// The barrier value crossed zero through the tolerance band.
    BarrierCrossing { upward: bool },
    /// Classified region changed.
    RegionChange { from: Region, to: Region },
    /// The distance margin `dist(A,T) - dist(D,T)` changed sign.
    EdMarginCrossing { upward: bool },
    /// A strategy fell back because its solver failed or its region
    /// precondition stopped holding.
    StrategyFallback { agent: String, reason: String },
}

/// One recorded step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: GameState,
    /// Target heading (radians).
    pub phi: f64,
    /// Defender heading (radians).
    pub psi: f64,
    /// Attacker heading (radians).
    pub chi: f64,
    pub barrier_value: f64,
    pub region: Region,
    /// Capture-game value; defined in `R_c` and on the barrier.
    pub value: Option<f64>,
    /// Capture-game aimpoint; defined in `R_c` and on the barrier.
    pub aim: Option<Point2>,
}

/// Full engagement record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub verdict: Verdict,
    /// Both termination distances crossed the radius within the same step.
    pub simultaneous: bool,
    pub termination_time: f64,
    /// Refined capture-crossing time, when capture occurred in the final step.
    pub capture_time: Option<f64>,
    /// Refined interception-crossing time, when interception occurred in the
    /// final step.
    pub interception_time: Option<f64>,
    pub terminal_state: GameState,
    /// Terminal defender-target separation (the game payoff).
    pub terminal_dt: f64,
    pub events: Vec<Event>,
    /// Accumulated adverse value jumps from capture-point branch handoffs on
    /// the optimizing sides. Zero means the run stayed in the regular
    /// single-saddle regime where the feedback strategies carry their
    /// optimality guarantee.
    pub branch_handoff_loss: f64,
}

impl Trajectory {
    /// First barrier-crossing event time, if any.
    pub fn barrier_crossing_time(&self) -> Option<f64> {
        self.events.iter().find_map(|e| match e.kind {
            EventKind::BarrierCrossing { .. } => Some(e.t),
            _ => None,
        })
    }

    /// First entry time into a region, if any.
    pub fn region_entry_time(&self, region: Region) -> Option<f64> {
        self.events.iter().find_map(|e| match e.kind {
            EventKind::RegionChange { to, .. } if to == region => Some(e.t),
            _ => None,
        })
    }
}

/// Exact Euler update: the attacker and defender advance `dt` along their
/// headings at unit speed, the target advances `alpha * dt`.
pub fn step(state: &GameState, phi: Heading, psi: Heading, chi: Heading, dt: f64) -> GameState {
    GameState {
        target: state.target + phi.unit() * (state.alpha * dt),
        attacker: state.attacker + chi.unit() * dt,
        defender: state.defender + psi.unit() * dt,
        alpha: state.alpha,
    }
}

/// Pure-pursuit heading: from the attacker straight at the target.
pub fn pure_pursuit_heading(state: &GameState) -> Result<Heading> {
    los_angle(state.attacker, state.target)
}

/// First `tau` in `[0, dt]` where the separation of two constant-velocity
/// agents reaches `eps`, or `None`. The squared separation is an exact
/// quadratic in `tau`.
fn crossing_time(p: Point2, q: Point2, vp: Point2, vq: Point2, dt: f64, eps: f64) -> Option<f64> {
    let d = q - p;
    let dv = vq - vp;
    let c = d.dot(d) - eps * eps;
    if c <= 0.0 {
        return Some(0.0);
    }
    let a = dv.dot(dv);
    let b = 2.0 * d.dot(dv);
    if a == 0.0 {
        if b >= 0.0 {
            return None;
        }
        let tau = -c / b;
        return (tau <= dt).then_some(tau);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let tau = (-b - disc.sqrt()) / (2.0 * a);
    (tau >= 0.0 && tau <= dt).then_some(tau)
}

/// Side of the saddle a tracker serves: the attacker accepts branch switches
/// that raise the followed value, the team only ones that lower it.
#[derive(Clone, Copy, PartialEq)]
enum TrackBias {
    Raise,
    Lower,
}

/// Warm-started capture-point solver that *follows a solution branch*: the
/// previous circle angle is refined by Newton steps on the optimality
/// residual; full polynomial solves reconcile the branch against the whole
/// root set periodically and whenever the branch loses direction
/// consistency.
///
/// Branch following matters for the saddle guarantee: with several
/// direction-consistent critical points the value branches can cross, and a
/// feedback that re-selects the global minimizer every step hops downward at
/// each crossing and bleeds value. Along a direction-consistent branch the
/// followed value is monotone in the owner's favor whatever the opponents
/// do, so switches are accepted only toward direction-consistent branches on
/// the owner's good side of the current value.
struct AimTracker {
    bias: TrackBias,
    omega: Option<f64>,
    last_value: Option<f64>,
    root_count: usize,
    steps_since_full: u32,
    /// Accumulated bias-adverse value jumps at branch handoffs (followed
    /// branch lost direction consistency or vanished and another one was
    /// adopted at a worse value). Zero means the run never materially left
    /// the regular single-saddle regime.
    handoff_loss: f64,
}

const FULL_SOLVE_CADENCE: u32 = 16;

impl AimTracker {
    fn new(bias: TrackBias) -> Self {
        AimTracker {
            bias,
            omega: None,
            last_value: None,
            root_count: 0,
            steps_since_full: 0,
            handoff_loss: 0.0,
        }
    }

    fn adverse_jump(&self, from: f64, to: f64) -> f64 {
        match self.bias {
            TrackBias::Raise => (from - to).max(0.0),
            TrackBias::Lower => (to - from).max(0.0),
        }
    }

    fn solve(&mut self, state: &GameState) -> Result<AimpointSolution> {
        if let Some(omega0) = self.omega {
            if let Some(sol) = self.refine(state, omega0) {
                let due = self.steps_since_full >= FULL_SOLVE_CADENCE;
                let consistent = cdg::sign_consistency_at(state, sol.omega);
                if !due && consistent != Some(false) {
                    self.omega = Some(sol.omega);
                    self.last_value = Some(sol.value);
                    self.steps_since_full += 1;
                    return Ok(sol);
                }
                // Reconcile against all roots. The followed branch is kept
                // while it remains the best direction-consistent one; once it
                // stops being consistent the best consistent branch is the
                // defendable floor and is adopted even when it sits on the
                // unfavorable side.
                if let Ok(scan) = cdg::scan_roots(state) {
                    let best = match self.bias {
                        TrackBias::Raise => scan
                            .sign_consistent()
                            .max_by(|a, b| a.value.partial_cmp(&b.value).unwrap()),
                        TrackBias::Lower => scan
                            .sign_consistent()
                            .min_by(|a, b| a.value.partial_cmp(&b.value).unwrap()),
                    };
                    let omega = if consistent == Some(false) {
                        match best {
                            // Hand off to the defendable branch; charge the
                            // adverse part of the jump.
                            Some(b) => {
                                self.handoff_loss += self.adverse_jump(sol.value, b.value);
                                b.omega
                            }
                            // Nothing defendable in sight: keep following and
                            // charge the unguaranteed per-step drift.
                            None => {
                                let prev = self.last_value.unwrap_or(sol.value);
                                self.handoff_loss += self.adverse_jump(prev, sol.value);
                                sol.omega
                            }
                        }
                    } else {
                        match best {
                            Some(b) => {
                                let improves = match self.bias {
                                    TrackBias::Raise => b.value > sol.value + 1e-9,
                                    TrackBias::Lower => b.value < sol.value - 1e-9,
                                };
                                if improves {
                                    b.omega
                                } else {
                                    sol.omega
                                }
                            }
                            None => sol.omega,
                        }
                    };
                    self.omega = Some(omega);
                    self.last_value = Some(cdg::aimpoint_at(state, omega, 0).value);
                    self.root_count = scan.candidates.len().max(1);
                    self.steps_since_full = 0;
                    return Ok(cdg::aimpoint_at(state, omega, self.root_count));
                }
                self.omega = Some(sol.omega);
                self.last_value = Some(sol.value);
                self.steps_since_full = 0;
                return Ok(sol);
            }
        }
        let was_following = self.omega.is_some();
        let scan = cdg::scan_roots(state)?;
        let anchored = match self.bias {
            TrackBias::Raise => scan
                .sign_consistent()
                .max_by(|a, b| a.value.partial_cmp(&b.value).unwrap()),
            TrackBias::Lower => scan
                .sign_consistent()
                .min_by(|a, b| a.value.partial_cmp(&b.value).unwrap()),
        }
        .or_else(|| {
            scan.candidates.iter().min_by(|a, b| a.value.partial_cmp(&b.value).unwrap())
        })
        .ok_or(GameError::NoAdmissibleRoot { roots: scan.raw.clone() })?;
        // Re-anchoring after losing a followed branch is a handoff; charge
        // the adverse part of the value jump.
        if was_following {
            if let Some(prev) = self.last_value {
                self.handoff_loss += self.adverse_jump(prev, anchored.value);
            }
        }
        self.omega = Some(anchored.omega);
        self.last_value = Some(anchored.value);
        self.root_count = scan.candidates.len();
        self.steps_since_full = 0;
        Ok(cdg::aimpoint_at(state, anchored.omega, self.root_count))
    }

    fn refine(&self, state: &GameState, omega0: f64) -> Option<AimpointSolution> {
        let circle = apollonius(state);
        let norm = (circle.radius * state.ad_dist()).max(1e-300);
        let f = |om: f64| cdg::capture_residual(state, circle.point_at(om)) / norm;
        let h = 1e-7;
        let mut omega = omega0;
        for _ in 0..4 {
            let fv = f(omega);
            if fv.abs() < 1e-11 {
                break;
            }
            let dfd = (f(omega + h) - f(omega - h)) / (2.0 * h);
            if !dfd.is_finite() || dfd.abs() < 1e-14 {
                return None;
            }
            omega -= fv / dfd;
        }
        if !omega.is_finite() || (omega - omega0).abs() > 0.25 || f(omega).abs() > 1e-9 {
            return None;
        }
        Some(cdg::aimpoint_at(state, omega, self.root_count))
    }
}

/// Warm-started escape-aimpoint solver: refines the previous bisector
/// parameter by Newton steps on the cleared residual, falling back to the
/// full scan periodically and whenever refinement wanders.
struct EscapeTracker {
    param: Option<f64>,
    root_count: usize,
    steps_since_full: u32,
}

impl EscapeTracker {
    fn new() -> Self {
        EscapeTracker { param: None, root_count: 0, steps_since_full: 0 }
    }

    fn solve(&mut self, state: &GameState) -> Result<atddg::BisectorAimpoint> {
        if let Some(param0) = self.param {
            if self.steps_since_full < FULL_SOLVE_CADENCE {
                if let Some(sol) = self.refine(state, param0) {
                    self.param = Some(sol.param);
                    self.steps_since_full += 1;
                    return Ok(sol);
                }
            }
        }
        let sol = atddg::atddg_aimpoint(state)?;
        self.param = Some(sol.param);
        self.root_count = sol.root_count;
        self.steps_since_full = 0;
        Ok(sol)
    }

    fn refine(&self, state: &GameState, param0: f64) -> Option<atddg::BisectorAimpoint> {
        let bisector = crate::geometry::orthogonal_bisector(state.attacker, state.defender).ok()?;
        let ad = state.ad_dist();
        let g = |tau: f64| atddg::escape_residual_cleared(state, bisector.point_at(tau));
        let h = 1e-7 * ad.max(1.0);
        let mut tau = param0;
        for _ in 0..4 {
            let gv = g(tau);
            if gv.abs() < 1e-12 {
                break;
            }
            let dg = (g(tau + h) - g(tau - h)) / (2.0 * h);
            if !dg.is_finite() || dg.abs() < 1e-14 {
                return None;
            }
            tau -= gv / dg;
        }
        if !tau.is_finite() || (tau - param0).abs() > 0.5 * ad || g(tau).abs() > 1e-10 {
            return None;
        }
        let point = bisector.point_at(tau);
        let residual = atddg::escape_residual(state, point).abs();
        if !(residual < 1e-8 || g(tau).abs() < 1e-10) {
            return None;
        }
        Some(atddg::BisectorAimpoint {
            point,
            param: tau,
            residual: residual.min(g(tau).abs()),
            root_count: self.root_count,
        })
    }
}

#[derive(Clone, Copy, PartialEq)]
enum TeamMode {
    Capture,
    Escape,
    DistanceFallback,
}

struct Engine {
    attacker_tracker: AimTracker,
    team_tracker: AimTracker,
    escape_tracker: EscapeTracker,
    team_mode: Option<TeamMode>,
    last_aim: Option<Point2>,
    attacker_fallback: bool,
    team_fallback: bool,
}

impl Engine {
    /// Computes the three headings and returns the capture solution used for
    /// diagnostics (from whichever optimizing side ran, if any).
    #[allow(clippy::too_many_arguments)]
    fn headings(
        &mut self,
        state: &GameState,
        spec: &StrategySpec,
        region: Region,
        barrier: f64,
        band: f64,
        t: f64,
        events: &mut Vec<Event>,
    ) -> (Heading, Heading, Heading, Option<AimpointSolution>) {
        let prev_heading = Heading::from_angle(0.0);
        let flee = los_angle(state.attacker, state.target).unwrap_or(prev_heading);
        let capture_side = matches!(region, Region::Capture | Region::OnBarrier);
        let mut diag: Option<AimpointSolution> = None;

        // Attacker.
        let chi = match spec.attacker {
            AttackerStrategy::FixedHeading(a) => Heading::from_angle(a),
            AttackerStrategy::PurePursuit => flee,
            AttackerStrategy::CdgOptimal => {
                let sol = if capture_side {
                    self.attacker_tracker.solve(state).ok()
                } else {
                    None
                };
                match sol {
                    Some(sol) => {
                        self.attacker_fallback = false;
                        let heading = los_angle(state.attacker, sol.point).unwrap_or(flee);
                        diag = Some(sol);
                        heading
                    }
                    None => {
                        if !self.attacker_fallback {
                            self.attacker_fallback = true;
                            events.push(Event {
                                t,
                                kind: EventKind::StrategyFallback {
                                    agent: "attacker".into(),
                                    reason: format!("capture solve unavailable in {region}"),
                                },
                            });
                        }
                        flee
                    }
                }
            }
        };

        // Team.
        let team_capture_headings =
            |engine: &mut Engine, diag: &mut Option<AimpointSolution>| {
                let sol = if capture_side { engine.team_tracker.solve(state).ok() } else { None };
                match sol {
                    Some(sol) => {
                        engine.last_aim = Some(sol.point);
                        engine.team_fallback = false;
                        let headings = engine.aim_headings(state, sol.point, flee);
                        if diag.is_none() {
                            *diag = Some(sol);
                        }
                        Some(headings)
                    }
                    None => None,
                }
            };
        let (phi, psi) = match spec.team {
            TeamStrategy::FixedHeadings(a, b) => (Heading::from_angle(a), Heading::from_angle(b)),
            TeamStrategy::CdgOptimal => match team_capture_headings(self, &mut diag) {
                Some(h) => h,
                None => self.fallback_headings(state, flee, region, t, events),
            },
            TeamStrategy::RegionSwitching => {
                let mode = self.switch_mode(region, barrier, band);
                match mode {
                    TeamMode::Capture => match team_capture_headings(self, &mut diag) {
                        Some(h) => h,
                        None => self.fallback_headings(state, flee, region, t, events),
                    },
                    TeamMode::Escape => match self.escape_tracker.solve(state) {
                        Ok(sol) => {
                            self.last_aim = Some(sol.point);
                            self.team_fallback = false;
                            self.aim_headings(state, sol.point, flee)
                        }
                        Err(_) => self.fallback_headings(state, flee, region, t, events),
                    },
                    TeamMode::DistanceFallback => {
                        self.fallback_headings(state, flee, region, t, events)
                    }
                }
            }
        };
        (phi, psi, chi, diag)
    }

    fn switch_mode(&mut self, region: Region, barrier: f64, band: f64) -> TeamMode {
        let mode = match (self.team_mode, region) {
            (_, Region::EscapeByDistance) => TeamMode::DistanceFallback,
            (None, Region::Capture) => TeamMode::Capture,
            (None, _) => TeamMode::Escape,
            // Dead band: switch only when B leaves the on-barrier band on the
            // other side; the two strategies coincide on the barrier itself.
            (Some(TeamMode::Capture), _) if barrier < -band => TeamMode::Escape,
            (Some(TeamMode::Capture), _) => TeamMode::Capture,
            (Some(TeamMode::Escape), _) if barrier > band => TeamMode::Capture,
            (Some(TeamMode::Escape), _) => TeamMode::Escape,
            (Some(TeamMode::DistanceFallback), Region::Capture) => TeamMode::Capture,
            (Some(TeamMode::DistanceFallback), _) => TeamMode::Escape,
        };
        self.team_mode = Some(mode);
        mode
    }

    fn aim_headings(&self, state: &GameState, aim: Point2, flee: Heading) -> (Heading, Heading) {
        let phi = los_angle(state.target, aim).unwrap_or(flee);
        let psi = los_angle(state.defender, aim)
            .unwrap_or_else(|_| los_angle(state.defender, state.attacker).unwrap_or(flee));
        (phi, psi)
    }

    /// Escape-of-last-resort: the target flees straight away from the
    /// attacker, the defender keeps steering at the last valid aimpoint.
    fn fallback_headings(
        &mut self,
        state: &GameState,
        flee: Heading,
        region: Region,
        t: f64,
        events: &mut Vec<Event>,
    ) -> (Heading, Heading) {
        if !self.team_fallback {
            self.team_fallback = true;
            events.push(Event {
                t,
                kind: EventKind::StrategyFallback {
                    agent: "team".into(),
                    reason: format!("no aimpoint available in {region}"),
                },
            });
        }
        let psi = match self.last_aim {
            Some(aim) => los_angle(state.defender, aim)
                .unwrap_or_else(|_| los_angle(state.defender, state.attacker).unwrap_or(flee)),
            None => los_angle(state.defender, state.attacker).unwrap_or(flee),
        };
        (flee, psi)
    }
}

/// Runs an engagement from `initial` under the given strategies.
///
/// Headings are recomputed from the current state every step (state
/// feedback); termination triggers on the first sub-step crossing of the
/// capture radius by either termination distance. When both distances cross
/// within the same step the verdict is `AttackerWins` with the
/// `simultaneous` flag set (simultaneous capture and interception is the
/// expected on-barrier outcome). Strategy solver failures never abort a run;
/// they are logged and a fallback heading applies.
pub fn simulate(initial: &GameState, spec: &StrategySpec, cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let band = cfg.on_barrier_tol.unwrap_or_else(|| default_on_barrier_tol(initial));
    if band <= 0.0 || !band.is_finite() {
        return Err(GameError::InvalidParameter { what: "on_barrier_tol", value: band });
    }

    let mut engine = Engine {
        attacker_tracker: AimTracker::new(TrackBias::Raise),
        team_tracker: AimTracker::new(TrackBias::Lower),
        escape_tracker: EscapeTracker::new(),
        team_mode: None,
        last_aim: None,
        attacker_fallback: false,
        team_fallback: false,
    };
    let mut samples = Vec::new();
    let mut events = Vec::new();
    let mut state = *initial;
    let mut banded_sign: i8 = 0;
    let mut prev_region: Option<Region> = None;
    let mut prev_ed: Option<f64> = None;

    let max_steps = (cfg.max_time / cfg.dt).ceil() as u64;
    for k in 0..=max_steps {
        let t = k as f64 * cfg.dt;
        let report = classify(&state, band)?;
        let barrier = report.barrier_value;

        // Banded barrier sign and crossing events.
        let sign: i8 = if barrier.abs() <= band {
            0
        } else if barrier > 0.0 {
            1
        } else {
            -1
        };
        if sign != 0 {
            if banded_sign != 0 && sign != banded_sign {
                events.push(Event { t, kind: EventKind::BarrierCrossing { upward: sign > 0 } });
            }
            banded_sign = sign;
        }
        if let Some(prev) = prev_region {
            if prev != report.region {
                events.push(Event {
                    t,
                    kind: EventKind::RegionChange { from: prev, to: report.region },
                });
            }
        }
        prev_region = Some(report.region);
        if let Some(ed) = prev_ed {
            if ed != 0.0 && report.ed_margin != 0.0 && (ed < 0.0) != (report.ed_margin < 0.0) {
                events.push(Event {
                    t,
                    kind: EventKind::EdMarginCrossing { upward: report.ed_margin > 0.0 },
                });
            }
        }
        prev_ed = Some(report.ed_margin);

        let (phi, psi, chi, mut cdg_sol) =
            engine.headings(&state, spec, report.region, barrier, band, t, &mut events);
        // Samples carry the capture-game diagnostics whenever the region
        // defines them, even when no strategy needed the solve.
        if cdg_sol.is_none() && matches!(report.region, Region::Capture | Region::OnBarrier) {
            cdg_sol = cdg::solve_aimpoint(&state).ok();
        }

        let record_now = k % cfg.sample_stride as u64 == 0 || k == max_steps;
        let make_sample = |s: &GameState, t: f64| Sample {
            t,
            state: *s,
            phi: phi.angle(),
            psi: psi.angle(),
            chi: chi.angle(),
            barrier_value: barrier,
            region: report.region,
            value: cdg_sol.as_ref().map(|x| x.value),
            aim: cdg_sol.as_ref().map(|x| x.point),
        };
        if record_now {
            samples.push(make_sample(&state, t));
        }

        if k == max_steps {
            break;
        }

        let v_t = phi.unit() * state.alpha;
        let v_a = chi.unit();
        let v_d = psi.unit();
        let tau_capture = crossing_time(
            state.attacker,
            state.target,
            v_a,
            v_t,
            cfg.dt,
            cfg.capture_radius,
        );
        let tau_intercept = crossing_time(
            state.attacker,
            state.defender,
            v_a,
            v_d,
            cfg.dt,
            cfg.capture_radius,
        );
        if tau_capture.is_some() || tau_intercept.is_some() {
            let (verdict, tau) = match (tau_capture, tau_intercept) {
                (Some(tc), Some(_)) => (Verdict::AttackerWins, tc),
                (Some(tc), None) => (Verdict::AttackerWins, tc),
                (None, Some(ti)) => (Verdict::TeamWins, ti),
                (None, None) => unreachable!(),
            };
            let terminal = step(&state, phi, psi, chi, tau);
            if !record_now || tau > 0.0 {
                samples.push(make_sample(&terminal, t + tau));
            }
            return Ok(Trajectory {
                samples,
                verdict,
                simultaneous: tau_capture.is_some() && tau_intercept.is_some(),
                termination_time: t + tau,
                capture_time: tau_capture.map(|x| t + x),
                interception_time: tau_intercept.map(|x| t + x),
                terminal_state: terminal,
                terminal_dt: terminal.defender.dist(terminal.target),
                events,
                branch_handoff_loss: engine.attacker_tracker.handoff_loss + engine.team_tracker.handoff_loss,
            });
        }
        state = step(&state, phi, psi, chi, cfg.dt);
    }

    let t_end = max_steps as f64 * cfg.dt;
    Ok(Trajectory {
        samples,
        verdict: Verdict::Timeout,
        simultaneous: false,
        termination_time: t_end,
        capture_time: None,
        interception_time: None,
        terminal_state: state,
        terminal_dt: state.defender.dist(state.target),
        events,
        branch_handoff_loss: engine.attacker_tracker.handoff_loss + engine.team_tracker.handoff_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn state(t: (f64, f64), a: (f64, f64), d: (f64, f64), alpha: f64) -> GameState {
        GameState::new(
            Point2::new(t.0, t.1),
            Point2::new(a.0, a.1),
            Point2::new(d.0, d.1),
            alpha,
        )
        .unwrap()
    }

    #[test]
    fn step_scales_speeds() {
        let s = state((0.0, 0.0), (0.0, 0.0), (5.0, 5.0), 0.5);
        let next = step(
            &s,
            Heading::from_angle(0.0),
            Heading::from_angle(0.0),
            Heading::from_angle(std::f64::consts::FRAC_PI_2),
            0.1,
        );
        assert_relative_eq!(next.target.x, 0.05, max_relative = 1e-12);
        assert_relative_eq!(next.target.y, 0.0);
        // attacker moved along +y at unit speed
        assert!(next.attacker.x.abs() < 1e-15);
        assert_relative_eq!(next.attacker.y, 0.1);
    }

    #[test]
    fn step_unit_speed_full_second() {
        let s = state((9.0, 9.0), (0.0, 0.0), (5.0, 5.0), 0.5);
        let next = step(
            &s,
            Heading::from_angle(0.0),
            Heading::from_angle(0.0),
            Heading::from_angle(std::f64::consts::FRAC_PI_2),
            1.0,
        );
        assert!(next.attacker.x.abs() < 1e-12);
        assert_relative_eq!(next.attacker.y, 1.0);
    }

    #[test]
    fn speed_conservation_exact() {
        let s = state((1.0, 2.0), (-3.0, 0.5), (4.0, -1.0), 0.37);
        let phi = Heading::from_angle(1.1);
        let psi = Heading::from_angle(-2.3);
        let chi = Heading::from_angle(0.4);
        let dt = 0.01;
        let next = step(&s, phi, psi, chi, dt);
        assert_relative_eq!(next.attacker.dist(s.attacker), dt, max_relative = 1e-12);
        assert_relative_eq!(next.defender.dist(s.defender), dt, max_relative = 1e-12);
        assert_relative_eq!(next.target.dist(s.target), s.alpha * dt, max_relative = 1e-12);
    }

    #[test]
    fn pure_pursuit_examples() {
        let h = pure_pursuit_heading(&state((3.0, 4.0), (0.0, 0.0), (9.0, 9.0), 0.5)).unwrap();
        assert_relative_eq!(h.cos(), 0.6, max_relative = 1e-14);
        assert_relative_eq!(h.sin(), 0.8, max_relative = 1e-14);
        let h = pure_pursuit_heading(&state((1.0, 5.0), (1.0, 1.0), (9.0, 9.0), 0.5)).unwrap();
        assert_relative_eq!(h.angle(), std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn crossing_time_exact_quadratic() {
        // Head-on at combined speed 2 from distance 1: reaches eps=0.1 at
        // tau = 0.45 even though the endpoint separation at dt=0.5 is 0.
        let tau = crossing_time(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(-1.0, 0.0),
            0.5,
            0.1,
        )
        .unwrap();
        assert_relative_eq!(tau, 0.45, max_relative = 1e-12);
        // Fly-through: the minimum inside the step dips below eps although
        // both endpoints are far outside.
        let tau = crossing_time(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(-1.0, 0.0),
            1.0,
            1e-6,
        );
        assert!(tau.is_some());
        // Separating pair never crosses.
        let tau = crossing_time(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(-1.0, 0.0),
            Point2::new(1.0, 0.0),
            1.0,
            0.5,
        );
        assert!(tau.is_none());
    }

    #[test]
    fn fixed_heading_flyby_terminates() {
        let s = state((10.0, 0.0), (0.0, 0.0), (-5.0, 0.0), 0.5);
        let spec = StrategySpec {
            attacker: AttackerStrategy::FixedHeading(0.0),
            team: TeamStrategy::FixedHeadings(0.0, 0.0),
        };
        let cfg = SimConfig { max_time: 40.0, ..SimConfig::default() };
        let traj = simulate(&s, &spec, &cfg).unwrap();
        // attacker at speed 1 chases target at speed 0.5 along +x
        assert_eq!(traj.verdict, Verdict::AttackerWins);
        assert!((traj.termination_time - (10.0 - cfg.capture_radius) / 0.5).abs() < 1e-6);
    }

    #[test]
    fn timeout_when_nobody_closes() {
        let s = state((10.0, 0.0), (0.0, 0.0), (-5.0, 0.0), 0.5);
        let spec = StrategySpec {
            attacker: AttackerStrategy::FixedHeading(std::f64::consts::PI),
            team: TeamStrategy::FixedHeadings(0.0, std::f64::consts::PI),
        };
        let cfg = SimConfig { max_time: 2.0, dt: 1e-2, ..SimConfig::default() };
        let traj = simulate(&s, &spec, &cfg).unwrap();
        assert_eq!(traj.verdict, Verdict::Timeout);
        assert_relative_eq!(traj.termination_time, 2.0);
    }

    #[test]
    fn sample_timestamps_uniform() {
        let s = state((10.0, 0.0), (0.0, 0.0), (-5.0, 0.0), 0.5);
        let spec = StrategySpec {
            attacker: AttackerStrategy::PurePursuit,
            team: TeamStrategy::FixedHeadings(0.0, 0.0),
        };
        let cfg = SimConfig { max_time: 1.0, dt: 1e-2, ..SimConfig::default() };
        let traj = simulate(&s, &spec, &cfg).unwrap();
        for w in traj.samples.windows(2) {
            let d = w[1].t - w[0].t;
            assert!(d > 0.0 && d < cfg.dt + 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig { dt: 0.0, ..SimConfig::default() }.validate().is_err());
        assert!(SimConfig { capture_radius: -1.0, ..SimConfig::default() }.validate().is_err());
        assert!(SimConfig { sample_stride: 0, ..SimConfig::default() }.validate().is_err());
        assert!(SimConfig::default().validate().is_ok());
    }
}
