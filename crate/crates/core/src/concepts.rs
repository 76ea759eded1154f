//! Playout batches and concept values.
//!
//! Five concepts summarize how a game plays under uniform random play:
//!
//! | item | meaning |
//! |------|---------|
//! | `decision_moves` | share of turns with more than one legal move |
//! | `board_coverage` | share of sites that received a piece during the game |
//! | `timeout` | share of playouts ending without an end rule firing |
//! | `balance` | `1 − mean |win_rate_a − win_rate_b|` over player pairs |
//! | `completion` | share of playouts with a winner |
//!
//! The last two exist only for games with two or more players. Two extra
//! features (normalized game length and branching factor) are appended for
//! concept distances.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{random_playout, GameSpec, Outcome, PlayoutTrace};
use crate::scalar::{mean, ratio, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayoutStats {
    pub traces: Vec<PlayoutTrace>,
    /// Indexed by player - 1.
    pub wins_per_player: Vec<usize>,
    pub draws: usize,
    pub timeouts: usize,
    pub elapsed_secs: f64,
    pub requested: usize,
    pub completed: usize,
    pub budget_exceeded: bool,
    pub max_turns: usize,
}

impl PlayoutStats {
    pub fn total_wins(&self) -> usize {
        self.wins_per_player.iter().sum()
    }
}

/// Run up to `n` playouts with seeds `base_seed, base_seed + 1, ...`. Stops
/// starting new playouts once `budget_secs` of wall-clock time has elapsed.
pub fn run_playouts(
    spec: &GameSpec,
    n: usize,
    base_seed: u64,
    max_turns: usize,
    budget_secs: f64,
) -> PlayoutStats {
    let start = Instant::now();
    let budget = Duration::try_from_secs_f64(budget_secs.max(0.0)).unwrap_or(Duration::MAX);
    let mut stats = PlayoutStats {
        traces: Vec::with_capacity(n),
        wins_per_player: vec![0; spec.num_players],
        draws: 0,
        timeouts: 0,
        elapsed_secs: 0.0,
        requested: n,
        completed: 0,
        budget_exceeded: false,
        max_turns,
    };
    for i in 0..n {
        if start.elapsed() >= budget {
            stats.budget_exceeded = true;
            break;
        }
        let trace = random_playout(spec, base_seed.wrapping_add(i as u64), max_turns);
        match trace.outcome {
            Outcome::Win(p) => stats.wins_per_player[p as usize - 1] += 1,
            Outcome::Draw => stats.draws += 1,
            Outcome::Timeout => stats.timeouts += 1,
        }
        stats.traces.push(trace);
        stats.completed += 1;
    }
    stats.elapsed_secs = start.elapsed().as_secs_f64();
    stats
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ConceptError {
    #[error("no playout completed within the time budget")]
    NoCompletedPlayouts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConceptVector<T> {
    pub decision_moves: T,
    pub board_coverage: T,
    pub timeout: T,
    pub balance: Option<T>,
    pub completion: Option<T>,
    /// Mean game length over `max_turns`, then mean branching factor over
    /// board size.
    pub extended: Vec<T>,
}

impl<T: Real> ConceptVector<T> {
    /// The reward items in order; `None` where undefined.
    pub fn items(&self) -> [Option<T>; 5] {
        [
            Some(self.decision_moves),
            Some(self.board_coverage),
            Some(self.timeout),
            self.balance,
            self.completion,
        ]
    }

    pub fn defined_items(&self) -> usize {
        self.items().iter().flatten().count()
    }

    /// Pairs of reward items defined on both sides.
    pub fn paired_items(&self, other: &Self) -> Vec<(T, T)> {
        self.items()
            .into_iter()
            .zip(other.items())
            .filter_map(|(a, b)| Some((a?, b?)))
            .collect()
    }

    /// Flattened vectors over the components defined on both sides: paired
    /// reward items followed by the extended features.
    pub fn aligned(&self, other: &Self) -> (Vec<T>, Vec<T>) {
        let (mut a, mut b): (Vec<T>, Vec<T>) = self.paired_items(other).into_iter().unzip();
        for (x, y) in self.extended.iter().zip(&other.extended) {
            a.push(*x);
            b.push(*y);
        }
        (a, b)
    }

    pub fn scaled(&self, k: T) -> Self {
        ConceptVector {
            decision_moves: self.decision_moves * k,
            board_coverage: self.board_coverage * k,
            timeout: self.timeout * k,
            balance: self.balance.map(|v| v * k),
            completion: self.completion.map(|v| v * k),
            extended: self.extended.iter().map(|v| *v * k).collect(),
        }
    }
}

pub fn extract_concepts<T: Real>(
    stats: &PlayoutStats,
    spec: &GameSpec,
) -> Result<ConceptVector<T>, ConceptError> {
    let n = stats.completed;
    if n == 0 || stats.traces.is_empty() {
        return Err(ConceptError::NoCompletedPlayouts);
    }
    let sites = spec.num_sites();
    let per_trace = |f: &dyn Fn(&PlayoutTrace) -> T| -> T {
        mean(&stats.traces.iter().map(f).collect::<Vec<_>>())
    };

    let decision_moves = per_trace(&|t| {
        let multi = t.decision_points.iter().filter(|&&d| d >= 2).count();
        ratio(multi, t.decision_points.len())
    });
    let board_coverage = per_trace(&|t| ratio(t.final_touched, sites));
    let timeout = ratio(stats.timeouts, n);

    let (balance, completion) = if spec.num_players >= 2 {
        let rates: Vec<T> = stats.wins_per_player.iter().map(|&w| ratio(w, n)).collect();
        let mut diffs = Vec::new();
        for (i, a) in rates.iter().enumerate() {
            for b in &rates[i + 1..] {
                diffs.push((*a - *b).abs());
            }
        }
        (
            Some((T::one() - mean(&diffs)).clamp_unit()),
            Some(ratio(stats.total_wins(), n)),
        )
    } else {
        (None, None)
    };

    let length = per_trace(&|t| ratio(t.len(), stats.max_turns));
    let branching = per_trace(&|t| {
        let total: usize = t.decision_points.iter().sum();
        ratio::<T>(total, t.decision_points.len()) / T::of_usize(sites)
    });

    Ok(ConceptVector {
        decision_moves,
        board_coverage,
        timeout,
        balance,
        completion,
        extended: vec![length.clamp_unit(), branching.clamp_unit()],
    })
}

/// Run a playout batch and extract its concepts.
pub fn compute_concepts<T: Real>(
    spec: &GameSpec,
    n: usize,
    base_seed: u64,
    max_turns: usize,
    budget_secs: f64,
) -> Result<ConceptVector<T>, ConceptError> {
    extract_concepts(
        &run_playouts(spec, n, base_seed, max_turns, budget_secs),
        spec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::compile;
    use crate::engine::tests::TIC_TAC_TOE;

    #[test]
    fn batch_accounting() {
        let spec = compile(TIC_TAC_TOE).unwrap();
        let stats = run_playouts(&spec, 10, 0, 250, 180.0);
        assert_eq!(stats.completed, 10);
        assert!(!stats.budget_exceeded);
        assert_eq!(
            stats.total_wins() + stats.draws + stats.timeouts,
            stats.completed
        );
    }

    #[test]
    fn zero_budget() {
        let spec = compile(TIC_TAC_TOE).unwrap();
        let stats = run_playouts(&spec, 10, 0, 250, 0.0);
        assert_eq!(stats.completed, 0);
        assert!(stats.budget_exceeded);
        assert_eq!(
            extract_concepts::<f64>(&stats, &spec),
            Err(ConceptError::NoCompletedPlayouts)
        );
    }

    #[test]
    fn tic_tac_toe_never_times_out() {
        let spec = compile(TIC_TAC_TOE).unwrap();
        let c: ConceptVector<f64> = compute_concepts(&spec, 200, 3, 250, 180.0).unwrap();
        assert_eq!(c.timeout, 0.0);
        assert!(c.balance.is_some() && c.completion.is_some());
        assert_eq!(c.extended.len(), 2);
    }

    #[test]
    fn single_player_has_three_items() {
        let text = TIC_TAC_TOE.replace("(players 2)", "(players 1)");
        let spec = compile(&text).unwrap();
        let c: ConceptVector<f64> = compute_concepts(&spec, 20, 0, 250, 180.0).unwrap();
        assert_eq!(c.balance, None);
        assert_eq!(c.completion, None);
        assert_eq!(c.defined_items(), 3);
    }

    #[test]
    fn hand_computed_concepts() {
        // Two playouts on a 1x2 board, one player, Full -> Mover Win.
        let text = "(game \"Pair\" (players 1) (equipment { (board (rectangle 1 2)) (piece \"p\" Each) }) (rules (play (move Add (to (sites Empty)))) (end (if (is Full) (result Mover Win)))))";
        let spec = compile(text).unwrap();
        let stats = run_playouts(&spec, 2, 0, 4, 180.0);
        let c: ConceptVector<f64> = extract_concepts(&stats, &spec).unwrap();
        // Decision points [2, 1]: half the turns offer a choice.
        assert_eq!(c.decision_moves, 0.5);
        assert_eq!(c.board_coverage, 1.0);
        assert_eq!(c.timeout, 0.0);
        assert_eq!(c.extended, vec![0.5, 0.75]);
    }

    #[test]
    fn seed_stability() {
        let spec = compile(TIC_TAC_TOE).unwrap();
        let a: ConceptVector<f64> = compute_concepts(&spec, 50, 9, 250, 180.0).unwrap();
        let b: ConceptVector<f64> = compute_concepts(&spec, 50, 9, 250, 180.0).unwrap();
        assert_eq!(a, b);
    }
}
