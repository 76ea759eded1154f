//! Rewards and evaluation metrics for generated game descriptions.
//!
//! The math is generic over the scalar type ([`scalar::Scalar`] /
//! [`scalar::Real`]); the aliases below fix it to `f64`, which is what the
//! CLI and the HTTP service use.

pub mod concepts;
pub mod dataset;
pub mod engine;
pub mod grammar;
pub mod lexer;
pub mod metrics;
pub mod rewards;
pub mod scalar;
pub mod seeds;

pub use engine::{compile, GameSpec, Outcome};
pub use grammar::{Grammar, GrammarError, ValidPrefixResult};
pub use scalar::{Rational, Real, Scalar};
pub use seeds::SeedPolicy;

pub type ConceptVector = concepts::ConceptVector<f64>;
pub type RewardConfig = rewards::RewardConfig<f64>;
pub type RewardConfigOverrides = rewards::RewardConfigOverrides<f64>;
pub type RewardBreakdown = rewards::RewardBreakdown<f64>;
pub type PredictedConcepts = rewards::PredictedConcepts<f64>;
pub type ScoredGroup = rewards::ScoredGroup<f64>;
pub type EvalReport = metrics::EvalReport<f64>;

/// Exact-arithmetic config for closed-form checks of the reward weights.
pub type ExactRewardConfig = rewards::RewardConfig<Rational>;

/// Shipped corpus of LudiLite games (instance JSON Lines).
pub const SHIPPED_CORPUS: &str = include_str!("../assets/corpus.jsonl");
