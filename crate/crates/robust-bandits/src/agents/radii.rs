//! Confidence-radius formulas shared by the optimistic agents.
//!
//! All radii follow the corruption-tolerant Bernstein family
//!
//! ```text
//! 8·√(d · ln(((R+1)²λ + tA²) / ((R+1)²λ)) · L) + 4·√d · L + (extra)·√d + √λ·B
//! ```
//!
//! with `L = ln(4t²/δ)` for the known-budget and global radii and
//! `L = ln(8t²T/δ)` for the per-level radii; `extra` is the corruption
//! allowance (`C`, `2^ℓ`, or `C̄_ℓ = ln(2ℓ²/δ) + 3`). Natural logarithms
//! throughout.

use rand::Rng;

use crate::env::EnvConfig;
use crate::{Error, Result};

/// Constants entering the confidence radii.
#[derive(Debug, Clone, Copy)]
pub struct ConfidenceParams {
    /// Failure probability `δ ∈ (0, 1/3)`.
    pub delta: f64,
    /// Ridge regularizer `λ` (defaults to `1/B²`).
    pub lambda: f64,
    /// Action-norm bound `A`.
    pub action_norm_bound: f64,
    /// Parameter-norm bound `B`.
    pub param_norm_bound: f64,
    /// Noise range `R`.
    pub noise_range: f64,
    /// Corruption budget `C`, when revealed to the agent.
    pub known_corruption: Option<f64>,
}

impl ConfidenceParams {
    pub fn new(
        delta: f64,
        lambda: f64,
        action_norm_bound: f64,
        param_norm_bound: f64,
        noise_range: f64,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0 / 3.0) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, 1/3), got {delta}"
            )));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        for (name, v) in [
            ("action_norm_bound", action_norm_bound),
            ("param_norm_bound", param_norm_bound),
            ("noise_range", noise_range),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(ConfidenceParams {
            delta,
            lambda,
            action_norm_bound,
            param_norm_bound,
            noise_range,
            known_corruption: None,
        })
    }

    /// Parameters for a problem instance with the default `λ = 1/B²`.
    pub fn for_problem(delta: f64, env: &EnvConfig) -> Result<Self> {
        let b = env.param_norm_bound;
        ConfidenceParams::new(
            delta,
            1.0 / (b * b),
            env.action_norm_bound,
            b,
            env.noise_range,
        )
    }

    pub fn with_known_corruption(mut self, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "known corruption level must be nonnegative, got {c}"
            )));
        }
        self.known_corruption = Some(c);
        Ok(self)
    }
}

/// `σ̄_t = max{(R + 1)/√d, σ_t}`, the weighting floor.
pub fn sigma_bar(sigma_t: f64, noise_range: f64, d: usize) -> f64 {
    ((noise_range + 1.0) / (d as f64).sqrt()).max(sigma_t)
}

fn require_round(t: usize) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidArgument("round index must be >= 1".into()));
    }
    Ok(())
}

/// Shared Bernstein body: `8√(d·G_t·L) + 4√d·L` with
/// `G_t = ln(((R+1)²λ + tA²)/((R+1)²λ))`.
fn bernstein_body(t: usize, d: usize, p: &ConfidenceParams, log_term: f64) -> f64 {
    let d = d as f64;
    let r1 = p.noise_range + 1.0;
    let gram_log = ((r1 * r1 * p.lambda + t as f64 * p.action_norm_bound * p.action_norm_bound)
        / (r1 * r1 * p.lambda))
        .ln();
    8.0 * (d * gram_log * log_term).sqrt() + 4.0 * d.sqrt() * log_term
}

/// Known-budget radius `α_t` (requires `known_corruption`).
pub fn radius_alpha(t: usize, d: usize, p: &ConfidenceParams) -> Result<f64> {
    require_round(t)?;
    let c = p.known_corruption.ok_or_else(|| {
        Error::InvalidState("alpha radius needs a known corruption level".into())
    })?;
    let log_term = (4.0 * (t * t) as f64 / p.delta).ln();
    Ok(bernstein_body(t, d, p, log_term)
        + c * (d as f64).sqrt()
        + p.lambda.sqrt() * p.param_norm_bound)
}

/// Global cascade radius `β_{t,ℓ}` with corruption allowance `2^ℓ`.
pub fn radius_beta(t: usize, level: usize, d: usize, p: &ConfidenceParams) -> Result<f64> {
    require_round(t)?;
    if level < 1 {
        return Err(Error::InvalidArgument("level must be >= 1".into()));
    }
    let log_term = (4.0 * (t * t) as f64 / p.delta).ln();
    Ok(bernstein_body(t, d, p, log_term)
        + (2.0f64).powi(level as i32) * (d as f64).sqrt()
        + p.lambda.sqrt() * p.param_norm_bound)
}

/// `C̄_ℓ = ln(2ℓ²/δ) + 3`, the per-level corruption allowance.
pub fn level_constant(level: usize, delta: f64) -> f64 {
    (2.0 * (level * level) as f64 / delta).ln() + 3.0
}

/// Sub-sampled estimator radius `γ_{t,ℓ}`.
pub fn radius_gamma(
    t: usize,
    level: usize,
    d: usize,
    horizon: usize,
    p: &ConfidenceParams,
) -> Result<f64> {
    require_round(t)?;
    if level < 1 {
        return Err(Error::InvalidArgument("level must be >= 1".into()));
    }
    let log_term = (8.0 * (t * t) as f64 * horizon as f64 / p.delta).ln();
    Ok(bernstein_body(t, d, p, log_term)
        + level_constant(level, p.delta) * (d as f64).sqrt()
        + p.lambda.sqrt() * p.param_norm_bound)
}

/// Corruption-free radius: the `β` family with the `2^ℓ` allowance dropped.
/// This is the weighted-baseline radius.
pub fn corruption_free_radius(t: usize, d: usize, p: &ConfidenceParams) -> Result<f64> {
    require_round(t)?;
    let log_term = (4.0 * (t * t) as f64 / p.delta).ln();
    Ok(bernstein_body(t, d, p, log_term) + p.lambda.sqrt() * p.param_norm_bound)
}

/// Radius for the unweighted baseline: the same Bernstein bound instantiated
/// with noise scale `σ = R`, feature bound `L = A`, uniform weights.
pub fn oful_radius(t: usize, d: usize, p: &ConfidenceParams) -> Result<f64> {
    require_round(t)?;
    let d_f = d as f64;
    let r = p.noise_range;
    let log_term = (4.0 * (t * t) as f64 / p.delta).ln();
    let gram_log = ((d_f * p.lambda + t as f64 * p.action_norm_bound * p.action_norm_bound)
        / (d_f * p.lambda))
        .ln();
    Ok(8.0 * r * (d_f * gram_log * log_term).sqrt()
        + 4.0 * r * log_term
        + p.lambda.sqrt() * p.param_norm_bound)
}

/// Number of sub-sampling levels: `ℓ_max = ⌈log₂ 2T⌉`, clamped to at least 2
/// so the level distribution is well defined.
pub fn level_cap(horizon: usize) -> usize {
    let n = 2 * horizon.max(1);
    let ceil_log2 = (usize::BITS - (n - 1).leading_zeros()) as usize;
    ceil_log2.max(2)
}

/// `P(f = ℓ)` for `ℓ = 1..=level_cap`: `2^{−ℓ}` above level 1, remainder at
/// level 1.
pub fn level_probabilities(level_cap: usize) -> Vec<f64> {
    let tail: f64 = (2..=level_cap).map(|l| 0.5f64.powi(l as i32)).sum();
    let mut probs = vec![1.0 - tail];
    probs.extend((2..=level_cap).map(|l| 0.5f64.powi(l as i32)));
    probs
}

/// Draw the level for this round: `ℓ` with probability `2^{−ℓ}` for
/// `1 < ℓ ≤ level_cap`, level 1 otherwise.
pub fn sample_level<R: Rng + ?Sized>(rng: &mut R, level_cap: usize) -> Result<usize> {
    if level_cap < 2 {
        return Err(Error::InvalidArgument(format!(
            "level cap must be >= 2, got {level_cap}"
        )));
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for level in 2..=level_cap {
        acc += 0.5f64.powi(level as i32);
        if u < acc {
            return Ok(level);
        }
    }
    Ok(1)
}
