//! Linear contextual bandits under adversarial reward corruption.
//!
//! This crate simulates the protocol where an environment draws a decision
//! set and heteroscedastic stochastic rewards each round, an adversary may
//! alter the reward function before the agent acts, and the agent selects an
//! action from a confidence-set index. It ships five agents behind one
//! interface:
//!
//! - `greedy` — pure exploitation of an unweighted ridge estimate,
//! - `oful` — optimism with an unweighted ridge estimator,
//! - `weighted-oful` — optimism with a variance-weighted ridge estimator,
//! - `robust-weighted-oful` — weighted optimism with a confidence radius
//!   enlarged by a known corruption budget,
//! - `multi-level-weighted-oful` — corruption-agnostic agent that maintains
//!   randomly sub-sampled estimators at geometrically weighted levels and a
//!   cascade of candidate confidence sets.
//!
//! Alongside the agents there is a corruption ledger, pseudo-regret metrics,
//! Monte-Carlo diagnostics for the confidence-set and corruption-budget
//! guarantees, and CSV/SVG emission for benchmark sweeps.
//!
//! The `examples/` directory is the best place to start; each example is a
//! runnable walkthrough of one capability (`cargo run --example
//! known_corruption`, etc.). A thin CLI binary (`robust-bandits`) drives the
//! same harness from a TOML config.
//!
//! ```
//! use robust_bandits::agents::{Agent, AgentKind, ConfidenceParams};
//! use robust_bandits::env::EnvConfig;
//!
//! let env = EnvConfig::new(8, 100, 10, 7);
//! let params = ConfidenceParams::for_problem(0.01, &env).unwrap();
//! let mut agent = Agent::new(AgentKind::WeightedOful, &env, params, 3).unwrap();
//! let mut rng = robust_bandits::rng::stream_rng(7, &[0]);
//! let actions = robust_bandits::env::fresh_decision_set(&mut rng, 10, 8);
//! let pick = agent.select_action(&actions, 1).unwrap();
//! assert!(pick.index < actions.len());
//! ```

pub mod adversary;
pub mod agents;
pub mod config;
pub mod diagnostics;
pub mod env;
pub mod harness;
pub mod linalg;
pub mod output;
pub mod rng;

use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value violates an operation precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation was invoked on state that cannot support it.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Configuration rejected; `path` names the offending field.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// Filesystem failure, annotated with the path involved.
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
