//! LudiLite game engine: compilation, rules, and random playouts.
//!
//! LudiLite covers placement games on rectangular grids. Each turn the mover
//! adds a piece to an empty site; the game ends when the first satisfied end
//! rule fires (a line of `k` pieces through the last move, or a full board).

mod compile;
mod playout;
mod state;

use serde::{Deserialize, Serialize};

pub use compile::{compile, CompileError, CompileErrorKind};
pub use playout::{
    check_functionality, default_probe_seeds, random_playout, Functionality, NonFunctionalReason,
    PlayoutTrace, DEFAULT_MAX_TURNS,
};
pub use state::{Cell, GameState, IllegalMove, Move};

pub use crate::lexer::{tokenize, LexError, Token, TokenKind};

/// 1-based player index.
pub type Player = u8;

pub const MAX_PLAYERS: usize = 16;
pub const MAX_SITES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ownership {
    /// Every player has their own copy.
    Each,
    /// One piece type used by all players.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub name: String,
    pub ownership: Ownership,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoveRule {
    AddToEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndCondition {
    /// `k` consecutive like pieces through the last placed piece.
    Line(usize),
    /// No empty sites remain.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Mover,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResultKind {
    Win,
    Loss,
    Draw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndRule {
    pub condition: EndCondition,
    pub role: Role,
    pub result: ResultKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Win(Player),
    Draw,
    Timeout,
}

/// A compiled game description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSpec {
    pub name: String,
    pub num_players: usize,
    pub rows: usize,
    pub cols: usize,
    pub pieces: Vec<Piece>,
    pub move_rule: MoveRule,
    pub end_rules: Vec<EndRule>,
}

impl GameSpec {
    pub fn num_sites(&self) -> usize {
        self.rows * self.cols
    }

    /// Ownership of placed pieces; the first declared piece is the one placed.
    pub fn placement(&self) -> Ownership {
        self.pieces[0].ownership
    }

    pub fn site(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Outcome a rule produces when `mover` just triggered it.
    fn outcome_of(&self, rule: &EndRule, mover: Player) -> Outcome {
        match (rule.role, rule.result) {
            (Role::All, _) | (Role::Mover, ResultKind::Draw) => Outcome::Draw,
            (Role::Mover, ResultKind::Win) => Outcome::Win(mover),
            // Compilation restricts mover losses to two-player games.
            (Role::Mover, ResultKind::Loss) => Outcome::Win(3 - mover),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const TIC_TAC_TOE: &str = "(game \"Tic-Tac-Toe\" (players 2) (equipment { (board (square 3)) (piece \"Disc\" Each) }) (rules (play (move Add (to (sites Empty)))) (end (if (is Line 3) (result Mover Win)) (if (is Full) (result All Draw)))))";

    #[test]
    fn shipped_example_compiles_and_parses() {
        let spec = compile(TIC_TAC_TOE).unwrap();
        assert_eq!(spec.num_sites(), 9);
        assert!(
            crate::grammar::Grammar::ludilite()
                .recognize(TIC_TAC_TOE)
                .accepted
        );
    }

    #[test]
    fn outcome_mapping() {
        let mut text = TIC_TAC_TOE.replace("Mover Win", "Mover Loss");
        let spec = compile(&text).unwrap();
        assert_eq!(spec.outcome_of(&spec.end_rules[0], 1), Outcome::Win(2));
        assert_eq!(spec.outcome_of(&spec.end_rules[1], 1), Outcome::Draw);
        text = TIC_TAC_TOE.replace("All Draw", "All Win");
        let spec = compile(&text).unwrap();
        assert_eq!(spec.outcome_of(&spec.end_rules[1], 2), Outcome::Draw);
    }
}
