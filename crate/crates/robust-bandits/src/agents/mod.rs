//! The five bandit agents behind one interface.
//!
//! | kind | estimator weights | exploration radius |
//! |------|-------------------|--------------------|
//! | `greedy` | uniform | none (pure exploitation) |
//! | `oful` | uniform | Bernstein radius at noise scale `R` |
//! | `weighted-oful` | `1/σ̄²` | corruption-free weighted radius |
//! | `robust-weighted-oful` | `1/σ̄²` | weighted radius enlarged by known `C` |
//! | `multi-level-weighted-oful` | `1/σ̄²` | cascade of per-level sets |
//!
//! Each agent exposes `select_action` (deterministic given its state and its
//! own random stream) and `observe` (exactly once per round, after
//! selection). Coverage probes for the diagnostics live here too, but the
//! corruption threshold `ℓ*` itself does not: agents never see the true
//! corruption level.

mod multilevel;
mod radii;

pub use multilevel::{select_from_set, LevelMembership, MultiLevelAgent};
pub use radii::{
    corruption_free_radius, level_cap, level_constant, level_probabilities, oful_radius,
    radius_alpha, radius_beta, radius_gamma, sample_level, sigma_bar, ConfidenceParams,
};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::env::EnvConfig;
use crate::linalg::WeightedRidgeState;
use crate::{Error, Result};

/// Which algorithm an agent runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    Greedy,
    Oful,
    WeightedOful,
    RobustWeightedOful,
    MultiLevelWeightedOful,
}

impl AgentKind {
    pub fn label(&self) -> &'static str {
        match self {
            AgentKind::Greedy => "greedy",
            AgentKind::Oful => "oful",
            AgentKind::WeightedOful => "weighted-oful",
            AgentKind::RobustWeightedOful => "robust-weighted-oful",
            AgentKind::MultiLevelWeightedOful => "multi-level-weighted-oful",
        }
    }

    pub fn all() -> [AgentKind; 5] {
        [
            AgentKind::Oful,
            AgentKind::WeightedOful,
            AgentKind::Greedy,
            AgentKind::RobustWeightedOful,
            AgentKind::MultiLevelWeightedOful,
        ]
    }
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(AgentKind::Greedy),
            "oful" => Ok(AgentKind::Oful),
            "weighted-oful" => Ok(AgentKind::WeightedOful),
            "robust-weighted-oful" => Ok(AgentKind::RobustWeightedOful),
            "multi-level-weighted-oful" => Ok(AgentKind::MultiLevelWeightedOful),
            other => Err(Error::InvalidArgument(format!("unknown agent kind `{other}`"))),
        }
    }
}

/// Outcome of one action selection, with the trace fields the harness logs.
#[derive(Debug, Clone, Copy)]
pub struct Selection {
    pub index: usize,
    /// `f(t)` for the multi-level agent, absent otherwise.
    pub level: Option<usize>,
    /// Radius of the (global) confidence set used for the pick.
    pub radius: f64,
    /// Radius of the level's own set, when one exists.
    pub level_radius: Option<f64>,
    /// Optimistic index value of the chosen action.
    pub optimistic_value: f64,
}

/// Lowest index attaining the maximum score.
pub(crate) fn argmax_lowest(scores: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best
}

/// Coverage indicators an agent can report against a reference parameter.
#[derive(Debug, Clone)]
pub enum CoverageCheck {
    /// `‖μ_t − μ*‖_{Σ_t} ≤ α_t` for the known-budget agent.
    Alpha(bool),
    /// Per-level pair memberships for the multi-level agent.
    Levels(Vec<LevelMembership>),
}

/// Single-estimator optimistic agents (the greedy baseline is the degenerate
/// zero-radius case). Construct through [`Agent::new`].
#[derive(Debug, Clone)]
pub struct SingleEstimatorAgent {
    kind: AgentKind,
    state: WeightedRidgeState,
    params: ConfidenceParams,
    dim: usize,
}

impl SingleEstimatorAgent {
    fn new(kind: AgentKind, dim: usize, params: ConfidenceParams) -> Result<Self> {
        if kind == AgentKind::RobustWeightedOful && params.known_corruption.is_none() {
            return Err(Error::InvalidState(
                "robust-weighted-oful requires a known corruption level".into(),
            ));
        }
        Ok(SingleEstimatorAgent {
            kind,
            state: WeightedRidgeState::new(dim, params.lambda)?,
            params,
            dim,
        })
    }

    fn uses_variance_weights(&self) -> bool {
        matches!(
            self.kind,
            AgentKind::WeightedOful | AgentKind::RobustWeightedOful
        )
    }

    fn radius(&self, t: usize) -> Result<f64> {
        match self.kind {
            AgentKind::Greedy => Ok(0.0),
            AgentKind::Oful => oful_radius(t, self.dim, &self.params),
            AgentKind::WeightedOful => corruption_free_radius(t, self.dim, &self.params),
            AgentKind::RobustWeightedOful => radius_alpha(t, self.dim, &self.params),
            AgentKind::MultiLevelWeightedOful => unreachable!("multi-level is a separate agent"),
        }
    }

    fn select_action(&mut self, actions: &[DVector<f64>], t: usize) -> Result<Selection> {
        if actions.is_empty() {
            return Err(Error::InvalidArgument("empty decision set".into()));
        }
        let radius = self.radius(t)?;
        let mut scores = Vec::with_capacity(actions.len());
        for a in actions {
            let mean = self.state.estimate().dot(a);
            let score = if radius == 0.0 {
                mean
            } else {
                mean + radius * self.state.norm_inv(a)?
            };
            scores.push(score);
        }
        let (index, optimistic_value) = argmax_lowest(&scores).expect("nonempty scores");
        Ok(Selection {
            index,
            level: None,
            radius,
            level_radius: None,
            optimistic_value,
        })
    }

    fn observe(&mut self, action: &DVector<f64>, reward: f64, sigma_t: f64) -> Result<()> {
        let weight = if self.uses_variance_weights() {
            sigma_bar(sigma_t, self.params.noise_range, self.dim)
        } else {
            1.0
        };
        self.state.update(action, reward, weight)
    }
}

/// Any of the five agents, built from an [`AgentKind`].
#[derive(Debug, Clone)]
pub enum Agent {
    Single(SingleEstimatorAgent),
    MultiLevel(MultiLevelAgent),
}

impl Agent {
    /// Build an agent. `seed` feeds the agent's own stream (only the
    /// multi-level agent draws randomness, for its level sampling).
    pub fn new(kind: AgentKind, env: &EnvConfig, params: ConfidenceParams, seed: u64) -> Result<Self> {
        match kind {
            AgentKind::MultiLevelWeightedOful => Ok(Agent::MultiLevel(MultiLevelAgent::new(
                env.dimension,
                env.horizon,
                params,
                seed,
            )?)),
            _ => Ok(Agent::Single(SingleEstimatorAgent::new(
                kind,
                env.dimension,
                params,
            )?)),
        }
    }

    pub fn kind(&self) -> AgentKind {
        match self {
            Agent::Single(a) => a.kind,
            Agent::MultiLevel(_) => AgentKind::MultiLevelWeightedOful,
        }
    }

    pub fn select_action(&mut self, actions: &[DVector<f64>], t: usize) -> Result<Selection> {
        match self {
            Agent::Single(a) => a.select_action(actions, t),
            Agent::MultiLevel(ml) => ml.select_action(actions, t),
        }
    }

    pub fn observe(&mut self, action: &DVector<f64>, reward: f64, sigma_t: f64) -> Result<()> {
        match self {
            Agent::Single(a) => a.observe(action, reward, sigma_t),
            Agent::MultiLevel(ml) => ml.observe(action, reward, sigma_t),
        }
    }

    /// Coverage probe for the diagnostics, evaluated on the start-of-round
    /// estimators. Baselines report nothing.
    pub fn coverage(&self, mu_star: &DVector<f64>, t: usize) -> Result<Option<CoverageCheck>> {
        match self {
            Agent::Single(a) if a.kind == AgentKind::RobustWeightedOful => {
                let dist = a.state.norm_sigma(&(mu_star - a.state.estimate()))?;
                let alpha = radius_alpha(t, a.dim, &a.params)?;
                Ok(Some(CoverageCheck::Alpha(dist <= alpha)))
            }
            Agent::MultiLevel(ml) => Ok(Some(CoverageCheck::Levels(ml.membership(mu_star, t)?))),
            Agent::Single(_) => Ok(None),
        }
    }

    /// The multi-level internals, for level-aware diagnostics.
    pub fn as_multi_level(&self) -> Option<&MultiLevelAgent> {
        match self {
            Agent::MultiLevel(ml) => Some(ml),
            Agent::Single(_) => None,
        }
    }

    /// The agent's (global) ridge estimator.
    pub fn ridge_state(&self) -> &WeightedRidgeState {
        match self {
            Agent::Single(a) => &a.state,
            Agent::MultiLevel(ml) => ml.global_state(),
        }
    }

    /// Re-factorize all maintained inverses (call at trial end).
    pub fn finish_trial(&mut self) {
        match self {
            Agent::Single(a) => a.state.refactorize(),
            Agent::MultiLevel(ml) => ml.finish_trial(),
        }
    }
}
