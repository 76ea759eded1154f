//! Corpus evaluation: compilability, functionality, ROUGE-L and normalized
//! concept distance, aggregated as mean ± standard error over seed groups.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concepts::ConceptVector;
use crate::dataset::{Instance, Prediction, SeedLabel};
use crate::grammar::Grammar;
use crate::rewards::{
    evaluate_description, reference_concepts, PredictedConcepts, ReferenceError, RewardConfig,
};
use crate::scalar::{mean, ratio, Real};
use crate::seeds::SeedPolicy;

/// Words for ROUGE-L: brackets and braces become separate tokens, everything
/// else splits on whitespace.
pub fn gdl_words(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        let bracket = matches!(c, '(' | ')' | '{' | '}');
        if c.is_whitespace() || bracket {
            if let Some(s) = start.take() {
                out.push(&text[s..i]);
            }
            if bracket {
                out.push(&text[i..i + 1]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(&text[s..]);
    }
    out
}

pub fn lcs_len<S: PartialEq>(a: &[S], b: &[S]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L F1 between token sequences; 0 if either is empty.
pub fn rouge_l_f1<T: Real, S: PartialEq>(candidate: &[S], reference: &[S]) -> T {
    let lcs = lcs_len(candidate, reference);
    if lcs == 0 {
        return T::zero();
    }
    let p: T = ratio(lcs, candidate.len());
    let r: T = ratio(lcs, reference.len());
    (T::one() + T::one()) * p * r / (p + r)
}

/// `½(1 − cos θ)`, or 1 when either vector has zero magnitude.
pub fn cosine_distance<T: Real>(a: &[T], b: &[T]) -> T {
    let dot: T = a.iter().zip(b).map(|(x, y)| *x * *y).sum();
    let aa: T = a.iter().map(|x| *x * *x).sum();
    let bb: T = b.iter().map(|x| *x * *x).sum();
    if !(aa > T::zero() && bb > T::zero()) {
        return T::one();
    }
    // sqrt(aa·bb) rather than sqrt(aa)·sqrt(bb): exact 1 for identical vectors.
    let cos = (dot / (aa * bb).sqrt()).max(-T::one()).min(T::one());
    T::lit(0.5) * (T::one() - cos)
}

/// Normalized concept distance; 1 for candidates without concepts.
pub fn ncd<T: Real>(predicted: &PredictedConcepts<T>, reference: &ConceptVector<T>) -> T {
    match predicted.computed() {
        Some(c) => concept_distance(c, reference),
        None => T::one(),
    }
}

pub fn concept_distance<T: Real>(a: &ConceptVector<T>, b: &ConceptVector<T>) -> T {
    let (x, y) = a.aligned(b);
    cosine_distance(&x, &y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MeanStderr<T> {
    pub mean: T,
    pub stderr: T,
}

/// Mean of per-group means and its standard error (sample standard
/// deviation of group means over √groups; 0 for a single group).
pub fn mean_stderr<T: Real>(groups: &[Vec<T>]) -> MeanStderr<T> {
    let means: Vec<T> = groups.iter().map(|g| mean(g)).collect();
    mean_stderr_of_means(&means)
}

pub fn mean_stderr_of_means<T: Real>(means: &[T]) -> MeanStderr<T> {
    let m = mean(means);
    let k = means.len();
    let stderr = if k < 2 {
        T::zero()
    } else {
        let ss: T = means.iter().map(|x| (*x - m).powi(2)).sum();
        (ss / T::of_usize(k - 1)).sqrt() / T::of_usize(k).sqrt()
    };
    MeanStderr { mean: m, stderr }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct InstanceRow<T> {
    pub id: String,
    pub seed: SeedLabel,
    pub category: Option<String>,
    pub compilable: bool,
    pub functional: bool,
    pub r_g: T,
    pub rouge_l: T,
    pub ncd: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Summary<T> {
    /// Percent of instances that compile.
    pub compilability: MeanStderr<T>,
    /// Percent of instances that are functional.
    pub functionality: MeanStderr<T>,
    /// ROUGE-L F1 on a 0–100 scale.
    pub rouge_l: MeanStderr<T>,
    pub ncd: MeanStderr<T>,
    pub instances: usize,
    pub seed_groups: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EvalReport<T> {
    pub config: RewardConfig<T>,
    pub seed_policy: SeedPolicy,
    pub overall: Summary<T>,
    pub categories: BTreeMap<String, Summary<T>>,
    pub rows: Vec<InstanceRow<T>>,
    /// (id, seed) pairs without a prediction, scored as failures.
    pub missing: Vec<(String, SeedLabel)>,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction references unknown instance id `{0}`")]
    UnknownInstance(String),
    #[error("ground truth for `{id}` is unusable: {error}")]
    GroundTruth { id: String, error: ReferenceError },
    #[error("no predictions to evaluate")]
    NoPredictions,
}

#[derive(Clone, Copy)]
struct Scores<T> {
    compilable: bool,
    functional: bool,
    rouge_l: T,
    ncd: T,
}

impl<T: Real> Scores<T> {
    fn failure() -> Self {
        Scores {
            compilable: false,
            functional: false,
            rouge_l: T::zero(),
            ncd: T::one(),
        }
    }
}

fn summarize<T: Real>(
    ids: &[&str],
    seeds: &[SeedLabel],
    scores: &HashMap<(&str, &SeedLabel), Scores<T>>,
) -> Summary<T> {
    let hundred = T::lit(100.0);
    let mut cols: [Vec<T>; 4] = Default::default();
    for seed in seeds {
        let group: Vec<Scores<T>> = ids.iter().map(|id| scores[&(*id, seed)]).collect();
        let frac = |f: &dyn Fn(&Scores<T>) -> bool| -> T {
            ratio(group.iter().filter(|s| f(s)).count(), group.len())
        };
        cols[0].push(hundred * frac(&|s| s.compilable));
        cols[1].push(hundred * frac(&|s| s.functional));
        cols[2].push(hundred * mean(&group.iter().map(|s| s.rouge_l).collect::<Vec<_>>()));
        cols[3].push(mean(&group.iter().map(|s| s.ncd).collect::<Vec<_>>()));
    }
    Summary {
        compilability: mean_stderr_of_means(&cols[0]),
        functionality: mean_stderr_of_means(&cols[1]),
        rouge_l: mean_stderr_of_means(&cols[2]),
        ncd: mean_stderr_of_means(&cols[3]),
        instances: ids.len(),
        seed_groups: seeds.len(),
    }
}

/// Ground-truth concepts for every instance, in instance order.
pub fn ground_truth_concepts<T: Real>(
    instances: &[Instance],
    cfg: &RewardConfig<T>,
    seeds: SeedPolicy,
) -> Result<Vec<ConceptVector<T>>, EvalError> {
    instances
        .par_iter()
        .map(|inst| {
            reference_concepts(&inst.description, cfg, seeds).map_err(|error| {
                EvalError::GroundTruth {
                    id: inst.id.clone(),
                    error,
                }
            })
        })
        .collect()
}

/// Score every prediction against its instance and aggregate per seed group.
/// Seed groups are the distinct prediction seed labels; an instance with no
/// prediction in a group counts as a failure in that group.
pub fn evaluate_corpus<T: Real>(
    instances: &[Instance],
    predictions: &[Prediction],
    grammar: &Grammar,
    cfg: &RewardConfig<T>,
    seeds: SeedPolicy,
) -> Result<EvalReport<T>, EvalError> {
    let by_id: HashMap<&str, usize> = instances
        .iter()
        .enumerate()
        .map(|(i, inst)| (inst.id.as_str(), i))
        .collect();
    if let Some(p) = predictions
        .iter()
        .find(|p| !by_id.contains_key(p.id.as_str()))
    {
        return Err(EvalError::UnknownInstance(p.id.clone()));
    }
    if predictions.is_empty() {
        return Err(EvalError::NoPredictions);
    }
    let gt = ground_truth_concepts(instances, cfg, seeds)?;

    let mut rows: Vec<InstanceRow<T>> = predictions
        .par_iter()
        .map(|p| {
            let inst = &instances[by_id[p.id.as_str()]];
            let evaluated = evaluate_description(&p.candidate, cfg.playouts_pred, cfg, seeds);
            let predicted = evaluated.predicted();
            InstanceRow {
                id: p.id.clone(),
                seed: p.seed.clone(),
                category: inst.category.clone(),
                compilable: evaluated.compilable(),
                functional: evaluated.functional(),
                r_g: grammar.reward(&p.candidate),
                rouge_l: rouge_l_f1(&gdl_words(&p.candidate), &gdl_words(&inst.description)),
                ncd: ncd(&predicted, &gt[by_id[p.id.as_str()]]),
            }
        })
        .collect();
    rows.sort_by(|a, b| (&a.id, &a.seed).cmp(&(&b.id, &b.seed)));

    let seed_labels: Vec<SeedLabel> = predictions
        .iter()
        .map(|p| p.seed.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut scores: HashMap<(&str, &SeedLabel), Scores<T>> = HashMap::new();
    for row in &rows {
        scores.insert(
            (row.id.as_str(), &row.seed),
            Scores {
                compilable: row.compilable,
                functional: row.functional,
                rouge_l: row.rouge_l,
                ncd: row.ncd,
            },
        );
    }
    let mut missing = Vec::new();
    let mut ids: Vec<&str> = instances.iter().map(|i| i.id.as_str()).collect();
    ids.sort_unstable();
    for id in &ids {
        for seed in &seed_labels {
            scores.entry((id, seed)).or_insert_with(|| {
                missing.push((id.to_string(), seed.clone()));
                Scores::failure()
            });
        }
    }

    let mut categories: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for inst in instances {
        if let Some(c) = &inst.category {
            categories
                .entry(c.clone())
                .or_default()
                .push(inst.id.as_str());
        }
    }

    Ok(EvalReport {
        config: cfg.clone(),
        seed_policy: seeds,
        overall: summarize(&ids, &seed_labels, &scores),
        categories: categories
            .into_iter()
            .map(|(c, mut members)| {
                members.sort_unstable();
                (c, summarize(&members, &seed_labels, &scores))
            })
            .collect(),
        rows,
        missing,
    })
}

/// Mean concept distance over pairs `(a, b)` with different ids; 0 when no
/// such pair exists.
pub fn mean_pairwise_distance<T: Real>(
    a: &[(&str, &ConceptVector<T>)],
    b: &[(&str, &ConceptVector<T>)],
) -> T {
    let dists: Vec<T> = a
        .iter()
        .flat_map(|(ia, va)| {
            b.iter()
                .filter(move |(ib, _)| ia != ib)
                .map(move |(_, vb)| concept_distance(va, vb))
        })
        .collect();
    mean(&dists)
}

/// Average concept distance between two instance groups' ground truths.
pub fn category_concept_distance<T: Real>(
    a: &[Instance],
    b: &[Instance],
    cfg: &RewardConfig<T>,
    seeds: SeedPolicy,
) -> Result<T, EvalError> {
    let ca = ground_truth_concepts(a, cfg, seeds)?;
    let cb = ground_truth_concepts(b, cfg, seeds)?;
    let pa: Vec<_> = a.iter().map(|i| i.id.as_str()).zip(&ca).collect();
    let pb: Vec<_> = b.iter().map(|i| i.id.as_str()).zip(&cb).collect();
    Ok(mean_pairwise_distance(&pa, &pb))
}
