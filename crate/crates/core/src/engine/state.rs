use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EndCondition, GameSpec, Outcome, Ownership, Player};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    Empty,
    Owned(Player),
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    /// Row-major site index.
    pub site: usize,
    pub player: Player,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IllegalMove {
    #[error("site {0} is out of range")]
    OutOfRange(usize),
    #[error("site {0} is occupied")]
    Occupied(usize),
    #[error("player {found} moved but it is player {expected}'s turn")]
    WrongPlayer { expected: Player, found: Player },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameState {
    pub cells: Vec<Cell>,
    pub mover: Player,
    pub move_count: usize,
    /// Sites that have ever held a piece.
    pub touched: Vec<bool>,
    pub last_move: Option<Move>,
}

impl GameState {
    pub fn occupied(&self) -> usize {
        self.cells.iter().filter(|c| **c != Cell::Empty).count()
    }

    pub fn touched_count(&self) -> usize {
        self.touched.iter().filter(|t| **t).count()
    }
}

const DIRECTIONS: [(isize, isize); 4] = [(0, 1), (1, 0), (1, 1), (1, -1)];

impl GameSpec {
    pub fn initial_state(&self) -> GameState {
        GameState {
            cells: vec![Cell::Empty; self.num_sites()],
            mover: 1,
            move_count: 0,
            touched: vec![false; self.num_sites()],
            last_move: None,
        }
    }

    /// One move per empty site for the current mover, in row-major order.
    pub fn legal_moves(&self, state: &GameState) -> Vec<Move> {
        state
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Cell::Empty)
            .map(|(site, _)| Move {
                site,
                player: state.mover,
            })
            .collect()
    }

    pub fn apply_move(&self, state: &GameState, mv: Move) -> Result<GameState, IllegalMove> {
        if mv.site >= state.cells.len() {
            return Err(IllegalMove::OutOfRange(mv.site));
        }
        if state.cells[mv.site] != Cell::Empty {
            return Err(IllegalMove::Occupied(mv.site));
        }
        if mv.player != state.mover {
            return Err(IllegalMove::WrongPlayer {
                expected: state.mover,
                found: mv.player,
            });
        }
        let mut next = state.clone();
        next.cells[mv.site] = match self.placement() {
            Ownership::Each => Cell::Owned(mv.player),
            Ownership::Shared => Cell::Shared,
        };
        next.touched[mv.site] = true;
        next.move_count += 1;
        next.mover = (state.mover as usize % self.num_players + 1) as Player;
        next.last_move = Some(mv);
        Ok(next)
    }

    /// Longest run of pieces like the one on `site`, through `site`.
    fn run_through(&self, state: &GameState, site: usize) -> usize {
        let piece = state.cells[site];
        let (r0, c0) = ((site / self.cols) as isize, (site % self.cols) as isize);
        let same = |r: isize, c: isize| {
            r >= 0
                && c >= 0
                && (r as usize) < self.rows
                && (c as usize) < self.cols
                && state.cells[self.site(r as usize, c as usize)] == piece
        };
        DIRECTIONS
            .iter()
            .map(|&(dr, dc)| {
                let mut len = 1;
                for sign in [1, -1] {
                    let (mut r, mut c) = (r0 + sign * dr, c0 + sign * dc);
                    while same(r, c) {
                        len += 1;
                        r += sign * dr;
                        c += sign * dc;
                    }
                }
                len
            })
            .max()
            .unwrap_or(1)
    }

    /// Outcome of the first satisfied end rule, if any, for the player who
    /// made the last move.
    pub fn terminal_result(&self, state: &GameState) -> Option<Outcome> {
        let last = state.last_move?;
        self.end_rules.iter().find_map(|rule| {
            let fired = match rule.condition {
                EndCondition::Line(k) => self.run_through(state, last.site) >= k,
                EndCondition::Full => state.cells.iter().all(|c| *c != Cell::Empty),
            };
            fired.then(|| self.outcome_of(rule, last.player))
        })
    }
}
