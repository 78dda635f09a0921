//! Command implementations shared by the binary and the test suites.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use tad_core::geometry::los_angle;
use tad_core::regions::{
    barrier_cross_section, classify, default_on_barrier_tol, tangency_point, Region, RegionReport,
    Window,
};
use tad_core::sampling::{self, SampleBounds};
use tad_core::sim::{simulate, Event, SimConfig, StrategySpec, Trajectory, Verdict};
use tad_core::{atddg, cdg, GameError, GameState, Point2};

use crate::config::ScenarioConfig;

/// Process-level error: every variant carries the exit code the binary maps
/// it to (1 usage/parse, 2 solver failure, 3 verification failure).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solver(String),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Solver(m) | CliError::Verification(m) => {
                write!(f, "{m}")
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn on_barrier_tol(cfg: &ScenarioConfig, state: &GameState) -> f64 {
    cfg.on_barrier_tol.unwrap_or_else(|| default_on_barrier_tol(state))
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ClassifyOutput {
    pub barrier_value: f64,
    pub region: Region,
    pub ed_margin: f64,
    pub on_barrier_tol: f64,
}

pub fn run_classify(cfg: &ScenarioConfig) -> Result<ClassifyOutput, CliError> {
    let state = cfg.game_state()?;
    let tol = on_barrier_tol(cfg, &state);
    let report: RegionReport = classify(&state, tol)?;
    Ok(ClassifyOutput {
        barrier_value: report.barrier_value,
        region: report.region,
        ed_margin: report.ed_margin,
        on_barrier_tol: tol,
    })
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HeadingOutput {
    pub angle: f64,
    pub cos: f64,
    pub sin: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SolveOutput {
    pub region: Region,
    pub aimpoint: Point2,
    pub omega: f64,
    pub value: f64,
    pub time_to_go: f64,
    pub residual: f64,
    pub squared_residual: f64,
    pub root_count: usize,
    pub phi: HeadingOutput,
    pub psi: HeadingOutput,
    pub chi: HeadingOutput,
    /// Gradient-based diagnostic; absent on the barrier where the gradient
    /// formulas stop being valid.
    pub hji_residual: Option<f64>,
}

pub fn run_solve(
    cfg: &ScenarioConfig,
    use_oracle: bool,
    samples_flag: Option<usize>,
) -> Result<SolveOutput, CliError> {
    let state = cfg.game_state()?;
    let tol = on_barrier_tol(cfg, &state);
    let report = classify(&state, tol)?;
    if !matches!(report.region, Region::Capture | Region::OnBarrier) {
        return Err(CliError::Solver(format!(
            "state in {}: CDG not applicable (requires R_c or OnBarrier)",
            report.region
        )));
    }
    let sol = if use_oracle {
        let samples = samples_flag.or(cfg.samples).unwrap_or(100_000);
        cdg::oracle_aimpoint(&state, samples)?
    } else {
        cdg::solve_aimpoint(&state)?
    };
    let headings = cdg::optimal_headings(&state, &sol)?;
    let to_output = |h: tad_core::Heading| HeadingOutput { angle: h.angle(), cos: h.cos(), sin: h.sin() };
    let hji = match report.region {
        Region::Capture => Some(cdg::hji_residual(&state)?),
        _ => None,
    };
    Ok(SolveOutput {
        region: report.region,
        aimpoint: sol.point,
        omega: sol.omega,
        value: sol.value,
        time_to_go: sol.time_to_go,
        residual: sol.residual,
        squared_residual: cdg::capture_residual_squared(&state, sol.point),
        root_count: sol.root_count,
        phi: to_output(headings.target),
        psi: to_output(headings.defender),
        chi: to_output(headings.attacker),
        hji_residual: hji,
    })
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    pub verdict: Verdict,
    pub simultaneous: bool,
    pub termination_time: f64,
    pub capture_time: Option<f64>,
    pub interception_time: Option<f64>,
    pub terminal_state: GameState,
    pub terminal_dt: f64,
    pub initial_region: Region,
    /// Game value at the initial state, when the initial region admits one.
    pub initial_value: Option<f64>,
    pub events: Vec<Event>,
    /// Excluded from the byte-determinism guarantee; everything else in the
    /// CLI output is byte-identical for a fixed config and seed.
    pub wall_clock_s: f64,
}

pub fn run_simulate(
    cfg: &ScenarioConfig,
    dt_flag: Option<f64>,
    eps_flag: Option<f64>,
) -> Result<(RunReport, Trajectory), CliError> {
    let state = cfg.game_state()?;
    let spec: StrategySpec = cfg.strategy_spec()?;
    let mut sim_cfg: SimConfig = cfg.sim_config();
    if let Some(dt) = dt_flag {
        sim_cfg.dt = dt;
    }
    if let Some(eps) = eps_flag {
        sim_cfg.capture_radius = eps;
    }
    let tol = on_barrier_tol(cfg, &state);
    let initial = classify(&state, tol)?;
    let initial_value = match initial.region {
        Region::Capture | Region::OnBarrier => cdg::solve_aimpoint(&state).ok().map(|s| s.value),
        _ => None,
    };
    let started = std::time::Instant::now();
    let traj = simulate(&state, &spec, &sim_cfg)?;
    let report = RunReport {
        verdict: traj.verdict,
        simultaneous: traj.simultaneous,
        termination_time: traj.termination_time,
        capture_time: traj.capture_time,
        interception_time: traj.interception_time,
        terminal_state: traj.terminal_state,
        terminal_dt: traj.terminal_dt,
        initial_region: initial.region,
        initial_value,
        events: traj.events.clone(),
        wall_clock_s: started.elapsed().as_secs_f64(),
    };
    Ok((report, traj))
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_owned()
    } else {
        format!("{v}")
    }
}

/// Fixed-schema trajectory CSV.
pub fn write_trajectory_csv<W: Write>(w: &mut W, traj: &Trajectory) -> std::io::Result<()> {
    writeln!(w, "t,xT,yT,xA,yA,xD,yD,phi,psi,chi,B,region,V_or_nan,aim_x_or_nan,aim_y_or_nan")?;
    for s in &traj.samples {
        let (v, ax, ay) = match (s.value, s.aim) {
            (Some(v), Some(p)) => (v, p.x, p.y),
            _ => (f64::NAN, f64::NAN, f64::NAN),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(s.t),
            fmt_f64(s.state.target.x),
            fmt_f64(s.state.target.y),
            fmt_f64(s.state.attacker.x),
            fmt_f64(s.state.attacker.y),
            fmt_f64(s.state.defender.x),
            fmt_f64(s.state.defender.y),
            fmt_f64(s.phi),
            fmt_f64(s.psi),
            fmt_f64(s.chi),
            fmt_f64(s.barrier_value),
            s.region,
            fmt_f64(v),
            fmt_f64(ax),
            fmt_f64(ay),
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RasterCell {
    pub x: f64,
    pub y: f64,
    pub barrier_value: f64,
    pub region: Region,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepOutput {
    pub barrier_points: Vec<Point2>,
    pub raster: Vec<RasterCell>,
}

pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepOutput, CliError> {
    let state = cfg.game_state()?;
    let window = cfg.window.ok_or_else(|| {
        CliError::Usage("sweep requires \"window\": [x_min, x_max, y_min, y_max]".into())
    })?;
    let [nx, ny] = cfg.resolution.ok_or_else(|| {
        CliError::Usage("sweep requires \"resolution\": [nx, ny]".into())
    })?;
    let win = Window { x_min: window[0], x_max: window[1], y_min: window[2], y_max: window[3] };
    let barrier_points =
        barrier_cross_section(state.attacker, state.defender, state.alpha, win, nx, ny)?;

    // Region-label raster over the grid nodes, row-major.
    let mut raster = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let p = Point2::new(
                win.x_min + (win.x_max - win.x_min) * i as f64 / nx as f64,
                win.y_min + (win.y_max - win.y_min) * j as f64 / ny as f64,
            );
            let probe = GameState::new(p, state.attacker, state.defender, state.alpha)
                .map_err(|e| CliError::Usage(format!("invalid grid node: {e}")))?;
            let report = classify(&probe, on_barrier_tol(cfg, &probe))?;
            raster.push(RasterCell {
                x: p.x,
                y: p.y,
                barrier_value: report.barrier_value,
                region: report.region,
            });
        }
    }
    Ok(SweepOutput { barrier_points, raster })
}

pub fn write_barrier_csv<W: Write>(w: &mut W, points: &[Point2]) -> std::io::Result<()> {
    writeln!(w, "x,y")?;
    for p in points {
        writeln!(w, "{},{}", fmt_f64(p.x), fmt_f64(p.y))?;
    }
    Ok(())
}

pub fn write_raster_csv<W: Write>(w: &mut W, raster: &[RasterCell]) -> std::io::Result<()> {
    writeln!(w, "x,y,B,region")?;
    for c in raster {
        writeln!(w, "{},{},{},{}", fmt_f64(c.x), fmt_f64(c.y), fmt_f64(c.barrier_value), c.region)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VerifyOutput {
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

pub struct VerifyTolerances {
    pub hji: f64,
    pub main_equation: f64,
    pub gradient: f64,
    pub barrier_agreement: f64,
    pub oracle: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances {
            hji: 1e-9,
            main_equation: 1e-9,
            gradient: 1e-5,
            barrier_agreement: 1e-6,
            oracle: 1e-6,
        }
    }
}

/// Batch verification driver: Hamilton-Jacobi-Isaacs residuals, Hamiltonian
/// stationarity, analytic-vs-finite-difference gradients, barrier-side
/// agreement of the two game solutions, and polynomial-vs-sweep oracle
/// agreement. Deterministic for a fixed seed.
pub fn run_verify(
    cfg: Option<&ScenarioConfig>,
    samples_flag: Option<usize>,
    seed_flag: Option<u64>,
) -> Result<VerifyOutput, CliError> {
    let samples = samples_flag
        .or_else(|| cfg.and_then(|c| c.samples))
        .unwrap_or(1000);
    let seed = seed_flag.or_else(|| cfg.and_then(|c| c.seed)).unwrap_or(0);
    if samples == 0 {
        return Err(CliError::Usage("verify requires samples >= 1".into()));
    }
    let mut tol = VerifyTolerances::default();
    if let Some(c) = cfg {
        if let Some(x) = c.tol_hji {
            tol.hji = x;
        }
        if let Some(x) = c.tol_main_equation {
            tol.main_equation = x;
        }
        if let Some(x) = c.tol_gradient {
            tol.gradient = x;
        }
        if let Some(x) = c.tol_barrier_agreement {
            tol.barrier_agreement = x;
        }
        if let Some(x) = c.tol_oracle {
            tol.oracle = x;
        }
    }
    let bounds = SampleBounds::default();
    let mut checks = Vec::new();

    // HJI + Hamiltonian stationarity + self-inversive structure over the
    // same state stream.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut max_hji = 0.0f64;
        let mut max_me = 0.0f64;
        let mut max_inv = 0.0f64;
        let mut n = 0;
        while n < samples {
            let s = sampling::capture_state(&mut rng, &bounds);
            let hji = match cdg::hji_residual(&s) {
                Ok(r) => r,
                Err(_) => continue,
            };
            let sol = match cdg::solve_aimpoint(&s) {
                Ok(sol) => sol,
                Err(_) => continue,
            };
            let lam = match cdg::costate(&s, &sol) {
                Ok(l) => l,
                Err(_) => continue,
            };
            max_hji = max_hji.max(hji.abs());
            max_me = max_me.max(cdg::main_equation_residual(&s, &lam).abs());
            max_inv = max_inv.max(cdg::cdg_polynomial(&s)?.self_inversive_error());
            n += 1;
        }
        checks.push(CheckReport {
            name: "hji_residual".into(),
            samples,
            max_residual: max_hji,
            tolerance: tol.hji,
            pass: max_hji < tol.hji,
        });
        checks.push(CheckReport {
            name: "main_equation_residual".into(),
            samples,
            max_residual: max_me,
            tolerance: tol.main_equation,
            pass: max_me < tol.main_equation,
        });
        checks.push(CheckReport {
            name: "self_inversive_structure".into(),
            samples,
            max_residual: max_inv,
            tolerance: 1e-12,
            pass: max_inv < 1e-12,
        });
    }

    // Analytic gradient vs central finite differences; one in five states
    // goes through the rotated-frame path.
    {
        let count = (samples / 5).max(10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut worst = 0.0f64;
        let mut n = 0;
        while n < count {
            let s = if n % 5 == 4 {
                sampling::gradient_singular_state(&mut rng, &bounds)
            } else {
                sampling::capture_state(&mut rng, &bounds)
            };
            let g = match cdg::value_gradient(&s) {
                Ok(g) => g,
                Err(_) => continue,
            };
            let scale = g.iter().map(|x| x.abs()).fold(0.0, f64::max);
            let mut ok = true;
            for (i, g_i) in g.iter().enumerate() {
                let fd = match central_difference(&s, i, 1e-6) {
                    Some(fd) => fd,
                    None => {
                        ok = false;
                        break;
                    }
                };
                worst = worst.max(((g_i - fd) / scale).abs());
            }
            if ok {
                n += 1;
            }
        }
        checks.push(CheckReport {
            name: "gradient_finite_difference".into(),
            samples: count,
            max_residual: worst,
            tolerance: tol.gradient,
            pass: worst < tol.gradient,
        });
    }

    // Barrier-side agreement: capture solution, escape solution and the
    // tangency point must coincide on the barrier, with vanishing value.
    {
        let count = (samples / 5).max(10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51d2_c4b7_a3f0_2e69);
        let mut worst = 0.0f64;
        let mut n = 0;
        while n < count {
            let s = sampling::barrier_state(&mut rng, &bounds);
            let capture = match cdg::solve_aimpoint(&s) {
                Ok(sol) => sol,
                Err(_) => continue,
            };
            let escape = match atddg::atddg_aimpoint(&s) {
                Ok(sol) => sol,
                Err(_) => continue,
            };
            let tangency = tangency_point(&s)?;
            let rho = los_angle(s.attacker, s.defender)?.angle();
            let omega_gap = (capture.omega - rho).sin().abs();
            let ad = s.ad_dist();
            worst = worst
                .max(capture.point.dist(escape.point))
                .max(capture.point.dist(tangency))
                .max(capture.value.abs() / ad)
                .max(omega_gap);
            n += 1;
        }
        checks.push(CheckReport {
            name: "barrier_agreement".into(),
            samples: count,
            max_residual: worst,
            tolerance: tol.barrier_agreement,
            pass: worst < tol.barrier_agreement,
        });
    }

    // Polynomial solver vs sweep-and-bisect oracle.
    {
        let count = (samples / 10).max(10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2545_f491_4f6c_dd1d);
        let mut worst = 0.0f64;
        let mut n = 0;
        while n < count {
            let s = sampling::capture_state(&mut rng, &bounds);
            let sol = match cdg::solve_aimpoint(&s) {
                Ok(sol) => sol,
                Err(_) => continue,
            };
            let orc = cdg::oracle_aimpoint(&s, 10_000)?;
            let gap = (sol.omega - orc.omega).sin().abs();
            worst = worst.max(gap);
            n += 1;
        }
        checks.push(CheckReport {
            name: "oracle_agreement".into(),
            samples: count,
            max_residual: worst,
            tolerance: tol.oracle,
            pass: worst < tol.oracle,
        });
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyOutput { seed, samples, checks, pass })
}

fn central_difference(state: &GameState, i: usize, h: f64) -> Option<f64> {
    let perturbed = |delta: f64| -> Option<f64> {
        let mut c = [
            state.target.x,
            state.target.y,
            state.attacker.x,
            state.attacker.y,
            state.defender.x,
            state.defender.y,
        ];
        c[i] += delta;
        let s = GameState::new(
            Point2::new(c[0], c[1]),
            Point2::new(c[2], c[3]),
            Point2::new(c[4], c[5]),
            state.alpha,
        )
        .ok()?;
        cdg::value(&s).ok()
    };
    Some((perturbed(h)? - perturbed(-h)?) / (2.0 * h))
}

// ---------------------------------------------------------------------------
// shared pretty-printing
// ---------------------------------------------------------------------------

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serialization cannot fail")
}

/// Extra diagnostics printed for on-barrier solves.
pub fn barrier_check_json(state: &GameState) -> Option<serde_json::Value> {
    let check = atddg::barrier_consistency_check(state).ok()?;
    serde_json::to_value(check).ok()
}

// re-exported for the acceptance tests
pub use tad_core::sim::Sample;

#[allow(unused)]
fn region_of(state: &GameState) -> Result<Region, CliError> {
    Ok(classify(state, default_on_barrier_tol(state))?.region)
}
