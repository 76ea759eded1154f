//! Grammar, concept and combined rewards, plus group-relative advantages.
//!
//! The concept reward compares predicted concept values `ĉ` with ground-truth
//! values `c` through Gaussian penalties `p = 1 − exp(−½((ĉ − c)/σ)²)` and
//! returns `1 − Σ w·p`. A game that does not compile or is not functional
//! scores 0; a functional game whose concepts could not be computed within
//! the time budget scores `floor_reward`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concepts::{compute_concepts, ConceptError, ConceptVector};
use crate::engine::{check_functionality, compile, CompileError, GameSpec, NonFunctionalReason};
use crate::grammar::Grammar;
use crate::scalar::{Real, Scalar};
use crate::seeds::SeedPolicy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig<T> {
    pub sigma: T,
    pub weight_per_item: T,
    pub lambda_c: T,
    pub floor_reward: T,
    pub playouts_gt: usize,
    pub playouts_pred: usize,
    pub max_turns: usize,
    pub budget_secs: f64,
    pub probe_seeds: usize,
}

impl<T: Scalar> Default for RewardConfig<T> {
    fn default() -> Self {
        RewardConfig {
            sigma: T::ratio_of(3, 10),
            weight_per_item: T::ratio_of(18, 100),
            lambda_c: T::one(),
            floor_reward: T::ratio_of(1, 10),
            playouts_gt: 50,
            playouts_pred: 10,
            max_turns: 250,
            budget_secs: 180.0,
            probe_seeds: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid config: {field} {reason}")]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: &'static str,
}

impl<T: Scalar> RewardConfig<T> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |field, reason| Err(ConfigError { field, reason });
        // `!(x > 0)` also rejects NaN.
        if !(self.sigma > T::zero()) {
            return err("sigma", "must be > 0");
        }
        if !(self.weight_per_item >= T::zero()) {
            return err("weight_per_item", "must be ≥ 0");
        }
        if !(self.lambda_c >= T::zero()) {
            return err("lambda_c", "must be ≥ 0");
        }
        if !(self.floor_reward >= T::zero() && self.floor_reward <= T::one()) {
            return err("floor_reward", "must lie in [0, 1]");
        }
        for (field, v) in [
            ("playouts_gt", self.playouts_gt),
            ("playouts_pred", self.playouts_pred),
            ("max_turns", self.max_turns),
            ("probe_seeds", self.probe_seeds),
        ] {
            if v < 1 {
                return err(field, "must be ≥ 1");
            }
        }
        if !(self.budget_secs >= 0.0) {
            return err("budget_secs", "must be ≥ 0");
        }
        Ok(())
    }

    pub fn probe_seed_list(&self) -> Vec<u64> {
        (0..self.probe_seeds as u64).collect()
    }
}

/// Partial config; unset fields keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfigOverrides<T> {
    pub sigma: Option<T>,
    pub weight_per_item: Option<T>,
    pub lambda_c: Option<T>,
    pub floor_reward: Option<T>,
    pub playouts_gt: Option<usize>,
    pub playouts_pred: Option<usize>,
    pub max_turns: Option<usize>,
    pub budget_secs: Option<f64>,
    pub probe_seeds: Option<usize>,
}

impl<T: Scalar> RewardConfigOverrides<T> {
    pub fn apply(&self, base: &RewardConfig<T>) -> Result<RewardConfig<T>, ConfigError> {
        let pick = |o: &Option<T>, b: &T| o.clone().unwrap_or_else(|| b.clone());
        let cfg = RewardConfig {
            sigma: pick(&self.sigma, &base.sigma),
            weight_per_item: pick(&self.weight_per_item, &base.weight_per_item),
            lambda_c: pick(&self.lambda_c, &base.lambda_c),
            floor_reward: pick(&self.floor_reward, &base.floor_reward),
            playouts_gt: self.playouts_gt.unwrap_or(base.playouts_gt),
            playouts_pred: self.playouts_pred.unwrap_or(base.playouts_pred),
            max_turns: self.max_turns.unwrap_or(base.max_turns),
            budget_secs: self.budget_secs.unwrap_or(base.budget_secs),
            probe_seeds: self.probe_seeds.unwrap_or(base.probe_seeds),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Gaussian-kernel penalty in `[0, 1)`; zero when the values agree.
pub fn gaussian_penalty<T: Real>(predicted: T, target: T, sigma: T) -> T {
    let z = (predicted - target) / sigma;
    T::one() - (-T::lit(0.5) * z * z).exp()
}

/// `1 − Σ weight·p` clamped to `[0, 1]`.
pub fn concept_reward_from_penalties<T: Scalar>(penalties: &[T], weight: &T) -> T {
    let total = penalties
        .iter()
        .fold(T::zero(), |acc, p| acc + weight.clone() * p.clone());
    (T::one() - total).clamp_unit()
}

/// Concept-side status of a candidate description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "status",
    content = "concepts",
    rename_all = "kebab-case",
    bound = "T: Real"
)]
pub enum PredictedConcepts<T> {
    NotCompilable,
    NonFunctional,
    /// Functional, but no playout finished within the budget.
    Uncomputable,
    Computed(ConceptVector<T>),
}

impl<T> PredictedConcepts<T> {
    pub fn computed(&self) -> Option<&ConceptVector<T>> {
        match self {
            PredictedConcepts::Computed(c) => Some(c),
            _ => None,
        }
    }
}

/// Concept reward; items undefined on either side are skipped.
pub fn concept_reward<T: Real>(
    predicted: &PredictedConcepts<T>,
    reference: &ConceptVector<T>,
    cfg: &RewardConfig<T>,
) -> T {
    match predicted {
        PredictedConcepts::NotCompilable | PredictedConcepts::NonFunctional => T::zero(),
        PredictedConcepts::Uncomputable => cfg.floor_reward,
        PredictedConcepts::Computed(c) => {
            let penalties: Vec<T> = c
                .paired_items(reference)
                .into_iter()
                .map(|(p, g)| gaussian_penalty(p, g, cfg.sigma))
                .collect();
            concept_reward_from_penalties(&penalties, &cfg.weight_per_item)
        }
    }
}

pub fn combined_reward<T: Scalar>(grammar: T, concept: T, lambda_c: T) -> T {
    grammar + lambda_c * concept
}

/// Group-normalized advantages `(r − mean) / std` with the population
/// standard deviation. All zeros for a single reward or equal rewards.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn group_advantages<T: Real>(rewards: &[T]) -> Vec<T> {
    let zeros = vec![T::zero(); rewards.len()];
    let Some(first) = rewards.first() else {
        return zeros;
    };
    if rewards.iter().all(|r| r == first) {
        return zeros;
    }
    let n = T::of_usize(rewards.len());
    let mean = rewards.iter().copied().sum::<T>() / n;
    let var = rewards.iter().map(|r| (*r - mean).powi(2)).sum::<T>() / n;
    let std = var.sqrt();
    if !(std > T::zero()) {
        return zeros;
    }
    rewards.iter().map(|r| (*r - mean) / std).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FailureReason {
    CompileError { error: CompileError },
    NonFunctional { reason: NonFunctionalReason },
    ConceptTimeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RewardBreakdown<T> {
    pub r_g: T,
    pub r_c: T,
    pub r: T,
    pub compilable: bool,
    pub functional: bool,
    pub concepts: Option<ConceptVector<T>>,
    pub failure: Option<FailureReason>,
    /// Candidate and reference define a different number of concept items.
    pub player_mismatch: bool,
    pub consumed_chars: usize,
    pub total_chars: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "kebab-case")]
pub enum ReferenceError {
    #[error("reference does not compile: {error}")]
    NotCompilable { error: CompileError },
    #[error("reference is not functional: {reason}")]
    NotFunctional { reason: NonFunctionalReason },
    #[error("reference concepts could not be computed within the time budget")]
    ConceptsUncomputable,
}

impl ReferenceError {
    pub fn code(&self) -> &'static str {
        match self {
            ReferenceError::NotCompilable { .. } => "reference-not-compilable",
            ReferenceError::NotFunctional { .. } => "reference-not-functional",
            ReferenceError::ConceptsUncomputable => "reference-concepts-uncomputable",
        }
    }
}

/// Compile-and-probe result for one description.
#[derive(Debug, Clone)]
pub enum Evaluated<T> {
    NotCompilable(CompileError),
    NonFunctional(GameSpec, NonFunctionalReason),
    Uncomputable(GameSpec),
    Computed(GameSpec, ConceptVector<T>),
}

impl<T: Real> Evaluated<T> {
    pub fn predicted(&self) -> PredictedConcepts<T> {
        match self {
            Evaluated::NotCompilable(_) => PredictedConcepts::NotCompilable,
            Evaluated::NonFunctional(..) => PredictedConcepts::NonFunctional,
            Evaluated::Uncomputable(_) => PredictedConcepts::Uncomputable,
            Evaluated::Computed(_, c) => PredictedConcepts::Computed(c.clone()),
        }
    }

    pub fn compilable(&self) -> bool {
        !matches!(self, Evaluated::NotCompilable(_))
    }

    pub fn functional(&self) -> bool {
        matches!(self, Evaluated::Uncomputable(_) | Evaluated::Computed(..))
    }
}

/// Compile `text`, probe its functionality, and compute concepts from
/// `playouts` seeded playouts.
pub fn evaluate_description<T: Real>(
    text: &str,
    playouts: usize,
    cfg: &RewardConfig<T>,
    seeds: SeedPolicy,
) -> Evaluated<T> {
    let spec = match compile(text) {
        Ok(s) => s,
        Err(e) => return Evaluated::NotCompilable(e),
    };
    let probe = check_functionality(&spec, &cfg.probe_seed_list(), cfg.max_turns);
    if let Some(reason) = probe.reason {
        return Evaluated::NonFunctional(spec, reason);
    }
    match compute_concepts(
        &spec,
        playouts,
        seeds.base_seed(text),
        cfg.max_turns,
        cfg.budget_secs,
    ) {
        Ok(c) => Evaluated::Computed(spec, c),
        Err(ConceptError::NoCompletedPlayouts) => Evaluated::Uncomputable(spec),
    }
}

/// Ground-truth concepts from `playouts_gt` playouts.
pub fn reference_concepts<T: Real>(
    reference: &str,
    cfg: &RewardConfig<T>,
    seeds: SeedPolicy,
) -> Result<ConceptVector<T>, ReferenceError> {
    match evaluate_description(reference, cfg.playouts_gt, cfg, seeds) {
        Evaluated::Computed(_, c) => Ok(c),
        Evaluated::NotCompilable(error) => Err(ReferenceError::NotCompilable { error }),
        Evaluated::NonFunctional(_, reason) => Err(ReferenceError::NotFunctional { reason }),
        Evaluated::Uncomputable(_) => Err(ReferenceError::ConceptsUncomputable),
    }
}

pub fn score_candidate<T: Real>(
    candidate: &str,
    reference: &ConceptVector<T>,
    grammar: &Grammar,
    cfg: &RewardConfig<T>,
    seeds: SeedPolicy,
) -> RewardBreakdown<T> {
    let prefix = grammar.recognize(candidate);
    let r_g: T = crate::scalar::ratio(prefix.consumed_chars, prefix.total_chars);
    let evaluated = evaluate_description(candidate, cfg.playouts_pred, cfg, seeds);
    let predicted = evaluated.predicted();
    let r_c = concept_reward(&predicted, reference, cfg);
    let failure = match &evaluated {
        Evaluated::NotCompilable(error) => Some(FailureReason::CompileError {
            error: error.clone(),
        }),
        Evaluated::NonFunctional(_, reason) => {
            Some(FailureReason::NonFunctional { reason: *reason })
        }
        Evaluated::Uncomputable(_) => Some(FailureReason::ConceptTimeout),
        Evaluated::Computed(..) => None,
    };
    let concepts = match predicted {
        PredictedConcepts::Computed(c) => Some(c),
        _ => None,
    };
    RewardBreakdown {
        r_g,
        r_c,
        r: combined_reward(r_g, r_c, cfg.lambda_c),
        compilable: evaluated.compilable(),
        functional: evaluated.functional(),
        player_mismatch: concepts
            .as_ref()
            .is_some_and(|c| c.defined_items() != reference.defined_items()),
        concepts,
        failure,
        consumed_chars: prefix.consumed_chars,
        total_chars: prefix.total_chars,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScoredGroup<T> {
    pub breakdowns: Vec<RewardBreakdown<T>>,
    pub advantages: Vec<T>,
}

/// Score candidates against precomputed reference concepts.
pub fn score_against<T: Real>(
    reference: &ConceptVector<T>,
    candidates: &[String],
    grammar: &Grammar,
    cfg: &RewardConfig<T>,
    seeds: SeedPolicy,
) -> ScoredGroup<T> {
    let breakdowns: Vec<RewardBreakdown<T>> = candidates
        .par_iter()
        .map(|c| score_candidate(c, reference, grammar, cfg, seeds))
        .collect();
    let rewards: Vec<T> = breakdowns.iter().map(|b| b.r).collect();
    ScoredGroup {
        advantages: group_advantages(&rewards),
        breakdowns,
    }
}

/// Full pipeline: reference concepts, then every candidate, then advantages.
pub fn score_candidates<T: Real>(
    reference: &str,
    candidates: &[String],
    grammar: &Grammar,
    cfg: &RewardConfig<T>,
    seeds: SeedPolicy,
) -> Result<(ConceptVector<T>, ScoredGroup<T>), ReferenceError> {
    let gt = reference_concepts(reference, cfg, seeds)?;
    let scored = score_against(&gt, candidates, grammar, cfg, seeds);
    Ok((gt, scored))
}
