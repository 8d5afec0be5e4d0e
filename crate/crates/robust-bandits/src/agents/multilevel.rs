//! The corruption-agnostic multi-level agent.
//!
//! Alongside a global weighted estimator it keeps `ℓ_max = ⌈log₂ 2T⌉`
//! sub-sampled estimators; each round is routed to level `ℓ` with probability
//! `2^{−ℓ}` (level 1 takes the remainder), and only that level's estimator
//! absorbs the observation. Per round the agent forms a cascade of candidate
//! confidence sets — at each level the intersection of the global `β`
//! ellipsoid with the level's `γ` ellipsoid, falling back to the next level
//! up whenever the intersection is empty — then acts optimistically on the
//! set at the sampled level.

use nalgebra::DVector;
use rand_chacha::ChaCha12Rng;

use crate::linalg::{ConfidenceSet, Ellipsoid, WeightedRidgeState};
use crate::rng::{stream_rng, STREAM_AGENT};
use crate::{Error, Result};

use super::radii::{
    level_cap, radius_beta, radius_gamma, sample_level, sigma_bar, ConfidenceParams,
};
use super::{argmax_lowest, Selection};

/// Tolerance handed to the ellipsoid-intersection emptiness test.
const INTERSECT_TOL: f64 = 1e-9;

/// Membership of a reference parameter in one level's pair of ellipsoids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelMembership {
    /// `‖μ* − μ_t‖_{Σ_t} ≤ β_{t,ℓ}`.
    pub beta_ok: bool,
    /// `‖μ* − μ_{t,ℓ}‖_{Σ_{t,ℓ}} ≤ γ_{t,ℓ}`.
    pub gamma_ok: bool,
}

#[derive(Debug, Clone)]
pub struct MultiLevelAgent {
    global: WeightedRidgeState,
    levels: Vec<WeightedRidgeState>,
    level_cap: usize,
    horizon: usize,
    dim: usize,
    params: ConfidenceParams,
    rng: ChaCha12Rng,
    pending_level: Option<usize>,
}

impl MultiLevelAgent {
    pub fn new(dim: usize, horizon: usize, params: ConfidenceParams, seed: u64) -> Result<Self> {
        let cap = level_cap(horizon);
        let global = WeightedRidgeState::new(dim, params.lambda)?;
        let levels = (0..cap)
            .map(|_| WeightedRidgeState::new(dim, params.lambda))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiLevelAgent {
            global,
            levels,
            level_cap: cap,
            horizon,
            dim,
            params,
            rng: stream_rng(seed, &[STREAM_AGENT]),
            pending_level: None,
        })
    }

    pub fn level_cap(&self) -> usize {
        self.level_cap
    }

    pub fn global_state(&self) -> &WeightedRidgeState {
        &self.global
    }

    /// Sub-sampled estimator at `level` (1-based).
    pub fn level_state(&self, level: usize) -> &WeightedRidgeState {
        &self.levels[level - 1]
    }

    /// Candidate sets `C_{t,1..ℓ_max}`, computed in descending level order so
    /// each empty intersection can fall back to the already-resolved set one
    /// level up; an empty intersection at the top level falls back to the
    /// global `β` ellipsoid alone.
    pub fn build_cascade(&self, t: usize) -> Result<Vec<ConfidenceSet>> {
        let mut sets: Vec<Option<ConfidenceSet>> = vec![None; self.level_cap];
        for level in (1..=self.level_cap).rev() {
            let beta = radius_beta(t, level, self.dim, &self.params)?;
            let gamma = radius_gamma(t, level, self.dim, self.horizon, &self.params)?;
            let global = Ellipsoid::from_ridge(&self.global, beta)?;
            let local = Ellipsoid::from_ridge(&self.levels[level - 1], gamma)?;
            let set = if global.intersects(&local, INTERSECT_TOL)? {
                ConfidenceSet::Intersection(global, local)
            } else if level == self.level_cap {
                ConfidenceSet::Single(global)
            } else {
                sets[level].clone().expect("higher level resolved first")
            };
            sets[level - 1] = Some(set);
        }
        Ok(sets.into_iter().map(|s| s.expect("all levels resolved")).collect())
    }

    /// Sample `f(t)`, then act optimistically on the cascade set at that
    /// level. Lowest index wins ties.
    pub fn select_action(&mut self, actions: &[DVector<f64>], t: usize) -> Result<Selection> {
        if actions.is_empty() {
            return Err(Error::InvalidArgument("empty decision set".into()));
        }
        let cascade = self.build_cascade(t)?;
        let level = sample_level(&mut self.rng, self.level_cap)?;
        let (index, value) = select_from_set(&cascade[level - 1], actions)?;
        self.pending_level = Some(level);
        Ok(Selection {
            index,
            level: Some(level),
            radius: radius_beta(t, level, self.dim, &self.params)?,
            level_radius: Some(radius_gamma(t, level, self.dim, self.horizon, &self.params)?),
            optimistic_value: value,
        })
    }

    /// Absorb the observed reward into the global estimator and the estimator
    /// of the level sampled for this round; all other levels carry over.
    pub fn observe(&mut self, action: &DVector<f64>, reward: f64, sigma_t: f64) -> Result<()> {
        let level = self.pending_level.take().ok_or_else(|| {
            Error::InvalidState("observe called before select_action".into())
        })?;
        let sbar = sigma_bar(sigma_t, self.params.noise_range, self.dim);
        self.global.update(action, reward, sbar)?;
        self.levels[level - 1].update(action, reward, sbar)
    }

    /// Both ellipsoid memberships of `mu_star` at every level for round `t`
    /// (evaluated on the start-of-round estimators).
    pub fn membership(&self, mu_star: &DVector<f64>, t: usize) -> Result<Vec<LevelMembership>> {
        let global_dist = self.global.norm_sigma(&(mu_star - self.global.estimate()))?;
        (1..=self.level_cap)
            .map(|level| {
                let beta = radius_beta(t, level, self.dim, &self.params)?;
                let gamma = radius_gamma(t, level, self.dim, self.horizon, &self.params)?;
                let state = &self.levels[level - 1];
                let local_dist = state.norm_sigma(&(mu_star - state.estimate()))?;
                Ok(LevelMembership {
                    beta_ok: global_dist <= beta,
                    gamma_ok: local_dist <= gamma,
                })
            })
            .collect()
    }

    /// Re-derive all inverses from fresh factorizations (trial end).
    pub fn finish_trial(&mut self) {
        self.global.refactorize();
        for state in &mut self.levels {
            state.refactorize();
        }
    }
}

/// Lowest index maximizing the optimistic index over a confidence set.
pub fn select_from_set(set: &ConfidenceSet, actions: &[DVector<f64>]) -> Result<(usize, f64)> {
    let mut scores = Vec::with_capacity(actions.len());
    for a in actions {
        scores.push(set.ucb(a)?);
    }
    argmax_lowest(&scores).ok_or_else(|| Error::InvalidArgument("empty decision set".into()))
}
