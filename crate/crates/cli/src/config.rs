//! Scenario configuration: one flat JSON document per scenario.

use serde::Deserialize;

use tad_core::sim::{AttackerStrategy, SimConfig, StrategySpec, TeamStrategy};
use tad_core::{GameState, Point2};

/// Scenario file schema. Unknown keys are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub target: [f64; 2],
    pub attacker: [f64; 2],
    pub defender: [f64; 2],
    pub alpha: f64,
    /// "cdg_optimal" | "pure_pursuit" | "fixed:<angle>"
    #[serde(default = "default_attacker_strategy")]
    pub attacker_strategy: String,
    /// "cdg_optimal" | "region_switching" | "fixed:<phi>,<psi>"
    #[serde(default = "default_team_strategy")]
    pub team_strategy: String,
    pub dt: Option<f64>,
    pub capture_radius: Option<f64>,
    pub max_time: Option<f64>,
    pub on_barrier_tol: Option<f64>,
    /// Sweep window: [x_min, x_max, y_min, y_max].
    pub window: Option<[f64; 4]>,
    /// Sweep grid cells: [nx, ny].
    pub resolution: Option<[usize; 2]>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    /// Verification tolerance overrides.
    pub tol_hji: Option<f64>,
    pub tol_main_equation: Option<f64>,
    pub tol_gradient: Option<f64>,
    pub tol_barrier_agreement: Option<f64>,
    pub tol_oracle: Option<f64>,
}

fn default_attacker_strategy() -> String {
    "cdg_optimal".to_owned()
}

fn default_team_strategy() -> String {
    "cdg_optimal".to_owned()
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ScenarioConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("failed to read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("failed to parse {}: {e}", path.display())))
    }

    pub fn game_state(&self) -> Result<GameState, ConfigError> {
        GameState::new(
            Point2::new(self.target[0], self.target[1]),
            Point2::new(self.attacker[0], self.attacker[1]),
            Point2::new(self.defender[0], self.defender[1]),
            self.alpha,
        )
        .map_err(|e| ConfigError(format!("invalid state: {e}")))
    }

    pub fn sim_config(&self) -> SimConfig {
        let mut cfg = SimConfig::default();
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(eps) = self.capture_radius {
            cfg.capture_radius = eps;
        }
        if let Some(t) = self.max_time {
            cfg.max_time = t;
        }
        cfg.on_barrier_tol = self.on_barrier_tol;
        cfg
    }

    pub fn strategy_spec(&self) -> Result<StrategySpec, ConfigError> {
        let attacker = match self.attacker_strategy.as_str() {
            "cdg_optimal" => AttackerStrategy::CdgOptimal,
            "pure_pursuit" => AttackerStrategy::PurePursuit,
            other => match other.strip_prefix("fixed:") {
                Some(angle) => AttackerStrategy::FixedHeading(parse_angle(angle)?),
                None => {
                    return Err(ConfigError(format!(
                        "unknown attacker_strategy \"{other}\" (expected cdg_optimal, pure_pursuit or fixed:<angle>)"
                    )))
                }
            },
        };
        let team = match self.team_strategy.as_str() {
            "cdg_optimal" => TeamStrategy::CdgOptimal,
            "region_switching" => TeamStrategy::RegionSwitching,
            other => match other.strip_prefix("fixed:") {
                Some(pair) => {
                    let mut it = pair.splitn(2, ',');
                    let phi = parse_angle(it.next().unwrap_or(""))?;
                    let psi = parse_angle(it.next().ok_or_else(|| {
                        ConfigError("team fixed strategy needs two angles: fixed:<phi>,<psi>".into())
                    })?)?;
                    TeamStrategy::FixedHeadings(phi, psi)
                }
                None => {
                    return Err(ConfigError(format!(
                        "unknown team_strategy \"{other}\" (expected cdg_optimal, region_switching or fixed:<phi>,<psi>)"
                    )))
                }
            },
        };
        Ok(StrategySpec { attacker, team })
    }
}

fn parse_angle(text: &str) -> Result<f64, ConfigError> {
    text.trim()
        .parse::<f64>()
        .map_err(|e| ConfigError(format!("invalid heading angle \"{text}\": {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_scenario() {
        let cfg: ScenarioConfig = serde_json::from_str(
            r#"{"target": [1.0, 2.0], "attacker": [3.0, 4.0], "defender": [5.0, 6.0], "alpha": 0.5}"#,
        )
        .unwrap();
        assert!(cfg.game_state().is_ok());
        let spec = cfg.strategy_spec().unwrap();
        assert_eq!(spec.attacker, AttackerStrategy::CdgOptimal);
        assert_eq!(spec.team, TeamStrategy::CdgOptimal);
    }

    #[test]
    fn rejects_unknown_keys() {
        let r: Result<ScenarioConfig, _> = serde_json::from_str(
            r#"{"target": [1, 2], "attacker": [3, 4], "defender": [5, 6], "alpha": 0.5, "bogus": 1}"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn parses_fixed_strategies() {
        let cfg: ScenarioConfig = serde_json::from_str(
            r#"{"target": [1, 2], "attacker": [3, 4], "defender": [5, 6], "alpha": 0.5,
                "attacker_strategy": "fixed:1.25", "team_strategy": "fixed:0.5,-0.75"}"#,
        )
        .unwrap();
        let spec = cfg.strategy_spec().unwrap();
        assert_eq!(spec.attacker, AttackerStrategy::FixedHeading(1.25));
        assert_eq!(spec.team, TeamStrategy::FixedHeadings(0.5, -0.75));
    }

    #[test]
    fn rejects_bad_strategy_names() {
        let cfg: ScenarioConfig = serde_json::from_str(
            r#"{"target": [1, 2], "attacker": [3, 4], "defender": [5, 6], "alpha": 0.5,
                "attacker_strategy": "zigzag"}"#,
        )
        .unwrap();
        assert!(cfg.strategy_spec().is_err());
    }
}
