//! Seeded uniform-random playouts and the functionality probe.
//!
//! Each playout owns a ChaCha8 stream seeded with `seed_from_u64(seed)`; a
//! move is drawn with `random_range(0..legal.len())` over the row-major legal
//! move list. ChaCha8 has published test vectors, so traces are reproducible
//! on any platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GameSpec, Move, Outcome};

pub const DEFAULT_MAX_TURNS: usize = 250;
pub const DEFAULT_PROBE_COUNT: u64 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayoutTrace {
    pub moves: Vec<Move>,
    /// Legal move count before each move.
    pub decision_points: Vec<usize>,
    pub outcome: Outcome,
    /// True when the playout stopped because the mover had no legal move.
    pub stalled: bool,
    pub final_touched: usize,
    pub seed: u64,
}

impl PlayoutTrace {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

/// Play uniformly random moves until an end rule fires, the mover has no
/// legal move, or `max_turns` moves have been made. The last two end as
/// [`Outcome::Timeout`].
pub fn random_playout(spec: &GameSpec, seed: u64, max_turns: usize) -> PlayoutTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = spec.initial_state();
    let mut moves = Vec::new();
    let mut decision_points = Vec::new();
    let mut stalled = false;

    let outcome = loop {
        if moves.len() >= max_turns {
            break Outcome::Timeout;
        }
        let legal = spec.legal_moves(&state);
        if legal.is_empty() {
            stalled = true;
            break Outcome::Timeout;
        }
        decision_points.push(legal.len());
        let mv = legal[rng.random_range(0..legal.len())];
        state = spec
            .apply_move(&state, mv)
            .expect("generated moves are legal");
        moves.push(mv);
        if let Some(outcome) = spec.terminal_result(&state) {
            break outcome;
        }
    };

    PlayoutTrace {
        moves,
        decision_points,
        outcome,
        stalled,
        final_touched: state.touched_count(),
        seed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonFunctionalReason {
    NoInitialMoves,
    StalemateWithoutEnd,
    NeverTerminates,
}

impl NonFunctionalReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            NonFunctionalReason::NoInitialMoves => "no-initial-moves",
            NonFunctionalReason::StalemateWithoutEnd => "stalemate-without-end",
            NonFunctionalReason::NeverTerminates => "never-terminates",
        }
    }
}

impl std::fmt::Display for NonFunctionalReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Functionality {
    pub functional: bool,
    pub reason: Option<NonFunctionalReason>,
}

impl Functionality {
    const OK: Functionality = Functionality {
        functional: true,
        reason: None,
    };

    fn fail(reason: NonFunctionalReason) -> Self {
        Functionality {
            functional: false,
            reason: Some(reason),
        }
    }
}

pub fn default_probe_seeds() -> Vec<u64> {
    (0..DEFAULT_PROBE_COUNT).collect()
}

/// A compiled game is functional when the first player can move, no probe
/// playout reaches a non-terminal state without legal moves, and at least
/// one probe playout ends through an end rule.
pub fn check_functionality(
    spec: &GameSpec,
    probe_seeds: &[u64],
    max_turns: usize,
) -> Functionality {
    if spec.legal_moves(&spec.initial_state()).is_empty() {
        return Functionality::fail(NonFunctionalReason::NoInitialMoves);
    }
    let mut terminated = false;
    for &seed in probe_seeds {
        let trace = random_playout(spec, seed, max_turns);
        if trace.stalled {
            return Functionality::fail(NonFunctionalReason::StalemateWithoutEnd);
        }
        terminated |= trace.outcome != Outcome::Timeout;
    }
    if terminated {
        Functionality::OK
    } else {
        Functionality::fail(NonFunctionalReason::NeverTerminates)
    }
}
