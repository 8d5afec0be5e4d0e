//! Decision-set generation, stochastic rewards, and heteroscedastic
//! truncated-Gaussian noise.
//!
//! Each round the environment draws `K` action vectors, a per-round noise
//! scale `σ_t ~ U[0, σ_max]`, and noise `ε ~ N(0, σ_t²)` clamped to
//! `[−R, R]`. During the first `k` (to-be-corrupted) rounds the decision set
//! is fresh i.i.d.; from round `k+1` on a single fixed set is drawn once and
//! reused, so a non-robust learner that picked up a poisoned estimate keeps
//! facing the same actions.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::{stream_rng, StreamHash, STREAM_ENV};
use crate::{Error, Result};

/// Problem-instance parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvConfig {
    /// Context dimension `d`.
    pub dimension: usize,
    /// Number of rounds `T`.
    pub horizon: usize,
    /// Actions per round `K = |D_t|`.
    pub actions_per_round: usize,
    /// Bound `A` with `‖a‖₂ ≤ A` for every action.
    pub action_norm_bound: f64,
    /// Bound `B` with `‖μ*‖₂ ≤ B`.
    pub param_norm_bound: f64,
    /// Noise range `R`: `|ε_t| ≤ R` always.
    pub noise_range: f64,
    /// Upper end of the per-round `σ_t ~ U[0, σ_max]` draw.
    pub sigma_max: f64,
    /// Hidden parameter vector; defaults to `(1/√d, …, 1/√d)`.
    pub mu_star: Vec<f64>,
    /// Draw one noise value per action instead of one shared per round.
    pub per_action_noise: bool,
    /// Seed for the environment stream when run standalone (the harness
    /// derives per-trial streams instead).
    pub seed: u64,
}

impl EnvConfig {
    /// Config with the default `μ* = (1/√d, …, 1/√d)` and the standard
    /// bounds `A = B = 1`, `R = 0.5`, `σ_max = 0.05`.
    pub fn new(dimension: usize, horizon: usize, actions_per_round: usize, seed: u64) -> Self {
        let entry = 1.0 / (dimension as f64).sqrt();
        EnvConfig {
            dimension,
            horizon,
            actions_per_round,
            action_norm_bound: 1.0,
            param_norm_bound: 1.0,
            noise_range: 0.5,
            sigma_max: 0.05,
            mu_star: vec![entry; dimension],
            per_action_noise: false,
            seed,
        }
    }

    pub fn mu_star_vector(&self) -> DVector<f64> {
        DVector::from_row_slice(&self.mu_star)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::config("env.dimension", "must be >= 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("env.horizon", "must be >= 1"));
        }
        if self.actions_per_round == 0 {
            return Err(Error::config("env.actions_per_round", "must be >= 1"));
        }
        for (field, v) in [
            ("env.action_norm_bound", self.action_norm_bound),
            ("env.param_norm_bound", self.param_norm_bound),
            ("env.noise_range", self.noise_range),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.sigma_max >= 0.0) || !self.sigma_max.is_finite() {
            return Err(Error::config(
                "env.sigma_max",
                format!("must be nonnegative, got {}", self.sigma_max),
            ));
        }
        if self.mu_star.len() != self.dimension {
            return Err(Error::config(
                "env.mu_star",
                format!(
                    "length {} does not match dimension {}",
                    self.mu_star.len(),
                    self.dimension
                ),
            ));
        }
        let norm = self.mu_star_vector().norm();
        if norm > self.param_norm_bound + 1e-12 {
            return Err(Error::config(
                "env.mu_star",
                format!(
                    "norm {norm} exceeds param_norm_bound {}",
                    self.param_norm_bound
                ),
            ));
        }
        // Generated entries live in [−1/√d, 1/√d], so ‖a‖₂ ≤ 1; the protocol
        // additionally needs |⟨a, μ*⟩| ≤ 1.
        if self.action_norm_bound < 1.0 {
            return Err(Error::config(
                "env.action_norm_bound",
                "must be >= 1 (generated actions have norm up to 1)",
            ));
        }
        if norm > 1.0 + 1e-12 {
            return Err(Error::config(
                "env.mu_star",
                format!("norm {norm} would allow |<a, mu*>| > 1"),
            ));
        }
        Ok(())
    }
}

/// One round of interaction. The adversary fills the corrupted rewards;
/// until then accessing them panics, which pins the protocol ordering
/// (corruption happens before any agent acts).
#[derive(Debug, Clone)]
pub struct RoundContext {
    pub t: usize,
    pub actions: Vec<DVector<f64>>,
    /// Revealed noise-scale bound for this round (treated as exact).
    pub sigma: f64,
    /// Realized noise per action (identical entries unless per-action noise
    /// is enabled).
    pub noise: Vec<f64>,
    /// `⟨a_i, μ*⟩` for each action.
    pub means: Vec<f64>,
    /// Stochastic rewards `r'_t(a_i) = means[i] + noise[i]`.
    pub stoch_rewards: Vec<f64>,
    corrupted: Option<Vec<f64>>,
}

impl RoundContext {
    /// Rewards after the adversary's pass.
    ///
    /// # Panics
    /// If the adversary has not yet processed this round.
    pub fn corrupted_rewards(&self) -> &[f64] {
        self.corrupted
            .as_deref()
            .expect("round used before the adversary processed it")
    }

    pub fn is_corrupted_set(&self) -> bool {
        self.corrupted.is_some()
    }

    /// Install the adversary's reward function.
    pub fn set_corrupted_rewards(&mut self, rewards: Vec<f64>) {
        assert_eq!(rewards.len(), self.actions.len());
        self.corrupted = Some(rewards);
    }

    /// Largest per-round alteration `sup_a |r'(a) − r(a)|`.
    pub fn sup_alteration(&self) -> f64 {
        self.stoch_rewards
            .iter()
            .zip(self.corrupted_rewards())
            .map(|(s, c)| (s - c).abs())
            .fold(0.0, f64::max)
    }
}

/// Draw `K` i.i.d. action vectors with entries uniform on `[−1/√d, 1/√d]`.
pub fn fresh_decision_set<R: Rng + ?Sized>(rng: &mut R, k: usize, d: usize) -> Vec<DVector<f64>> {
    let bound = 1.0 / (d as f64).sqrt();
    (0..k)
        .map(|_| DVector::from_fn(d, |_, _| rng.random_range(-bound..=bound)))
        .collect()
}

/// `σ_t ~ U[0, σ_max]` (degenerate at 0 when `σ_max = 0`).
pub fn sample_sigma<R: Rng + ?Sized>(rng: &mut R, sigma_max: f64) -> f64 {
    if sigma_max == 0.0 {
        return 0.0;
    }
    rng.random_range(0.0..=sigma_max)
}

/// `ε ~ N(0, σ_t²)` clamped to `[−R, R]`; exactly 0 when `σ_t = 0`.
pub fn sample_noise<R: Rng + ?Sized>(rng: &mut R, sigma_t: f64, noise_range: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    (sigma_t * z).clamp(-noise_range, noise_range)
}

/// Gap between the best and second-best expected rewards; `+∞` when every
/// action is a maximizer (ties sit inside the argmax set).
pub fn compute_gap(actions: &[DVector<f64>], mu_star: &DVector<f64>) -> Result<f64> {
    if actions.is_empty() {
        return Err(Error::InvalidArgument(
            "gap is undefined for an empty action set".into(),
        ));
    }
    let rewards: Vec<f64> = actions.iter().map(|a| a.dot(mu_star)).collect();
    let best = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    rewards
        .iter()
        .filter(|&&r| r != best)
        .map(|&r| best - r)
        .min_by(|a, b| a.total_cmp(b))
        .map_or(Ok(f64::INFINITY), Ok)
}

/// A seeded environment instance for one trial.
#[derive(Debug, Clone)]
pub struct Environment {
    cfg: EnvConfig,
    mu_star: DVector<f64>,
    corrupted_rounds: usize,
    rng: ChaCha12Rng,
    fixed_set: Option<Vec<DVector<f64>>>,
    hash: StreamHash,
}

impl Environment {
    /// Environment seeded from `cfg.seed`; `corrupted_rounds` is the attack
    /// prefix length `k` that controls the fresh-vs-fixed decision-set phase.
    pub fn new(cfg: EnvConfig, corrupted_rounds: usize) -> Result<Self> {
        let rng = stream_rng(cfg.seed, &[STREAM_ENV]);
        Environment::from_stream(cfg, corrupted_rounds, rng)
    }

    /// Environment on an externally derived stream (harness path).
    pub fn from_stream(cfg: EnvConfig, corrupted_rounds: usize, rng: ChaCha12Rng) -> Result<Self> {
        cfg.validate()?;
        let mu_star = cfg.mu_star_vector();
        Ok(Environment {
            cfg,
            mu_star,
            corrupted_rounds,
            rng,
            fixed_set: None,
            hash: StreamHash::new(),
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn mu_star(&self) -> &DVector<f64> {
        &self.mu_star
    }

    /// Fingerprint of every draw handed out so far.
    pub fn stream_hash(&self) -> u64 {
        self.hash.finish()
    }

    /// Decision set for round `t`: fresh during the corrupted prefix, the
    /// fixed set afterwards (drawn once, from this same stream, at the first
    /// post-corruption round).
    pub fn decision_set(&mut self, t: usize) -> Vec<DVector<f64>> {
        let d = self.cfg.dimension;
        let k_actions = self.cfg.actions_per_round;
        if t <= self.corrupted_rounds {
            fresh_decision_set(&mut self.rng, k_actions, d)
        } else {
            if self.fixed_set.is_none() {
                self.fixed_set = Some(fresh_decision_set(&mut self.rng, k_actions, d));
            }
            self.fixed_set.as_ref().unwrap().clone()
        }
    }

    /// Generate the full round: decision set, `σ_t`, noise, and stochastic
    /// rewards. Corrupted rewards stay unset until the adversary runs.
    pub fn next_round(&mut self, t: usize) -> RoundContext {
        let actions = self.decision_set(t);
        let sigma = sample_sigma(&mut self.rng, self.cfg.sigma_max);
        let noise: Vec<f64> = if self.cfg.per_action_noise {
            (0..actions.len())
                .map(|_| sample_noise(&mut self.rng, sigma, self.cfg.noise_range))
                .collect()
        } else {
            let eps = sample_noise(&mut self.rng, sigma, self.cfg.noise_range);
            vec![eps; actions.len()]
        };
        let means: Vec<f64> = actions.iter().map(|a| a.dot(&self.mu_star)).collect();
        let stoch_rewards: Vec<f64> = means.iter().zip(&noise).map(|(m, e)| m + e).collect();

        for (a, m) in actions.iter().zip(&means) {
            debug_assert!(a.norm() <= self.cfg.action_norm_bound + 1e-12);
            debug_assert!(m.abs() <= 1.0 + 1e-12);
        }
        self.hash.write_u64(t as u64);
        for a in &actions {
            for &x in a.iter() {
                self.hash.write_f64(x);
            }
        }
        self.hash.write_f64(sigma);
        for &e in &noise {
            self.hash.write_f64(e);
        }

        RoundContext {
            t,
            actions,
            sigma,
            noise,
            means,
            stoch_rewards,
            corrupted: None,
        }
    }
}
