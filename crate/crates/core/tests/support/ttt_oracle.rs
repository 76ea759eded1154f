//! Exhaustive uniform-random enumeration of 3x3 tic-tac-toe, written without
//! the engine. Probabilities are exact rationals.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_rational::Ratio;

pub type Q = Ratio<i64>;

const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

/// 0 = draw, 1 or 2 = winner.
pub type Terminal = ([u8; 9], u8);

#[derive(Debug, Clone, Default)]
pub struct Exact {
    pub p_win1: Q,
    pub p_win2: Q,
    pub p_draw: Q,
    /// Expected per-playout share of turns with at least two legal moves.
    pub decision_moves: Q,
    /// Expected per-playout share of sites used.
    pub board_coverage: Q,
    pub mean_length: Q,
    /// Expected per-playout mean legal-move count divided by 9.
    pub branching: Q,
    pub terminals: BTreeSet<Terminal>,
}

impl Exact {
    pub fn balance(&self) -> Q {
        let d = self.p_win1 - self.p_win2;
        Q::from_integer(1) - if d < Q::from_integer(0) { -d } else { d }
    }

    pub fn completion(&self) -> Q {
        self.p_win1 + self.p_win2
    }
}

fn winner(board: &[u8; 9]) -> u8 {
    for l in LINES {
        let a = board[l[0]];
        if a != 0 && a == board[l[1]] && a == board[l[2]] {
            return a;
        }
    }
    0
}

fn walk(
    board: &mut [u8; 9],
    player: u8,
    depth: usize,
    p: Q,
    choices: &mut Vec<usize>,
    out: &mut Exact,
) {
    let empties: Vec<usize> = (0..9).filter(|&i| board[i] == 0).collect();
    let w = winner(board);
    if w != 0 || empties.is_empty() {
        let len = depth as i64;
        match w {
            1 => out.p_win1 += p,
            2 => out.p_win2 += p,
            _ => out.p_draw += p,
        }
        let multi = choices.iter().filter(|&&c| c >= 2).count() as i64;
        let total: i64 = choices.iter().map(|&c| c as i64).sum();
        out.decision_moves += p * Q::new(multi, len);
        out.board_coverage += p * Q::new(len, 9);
        out.mean_length += p * Q::from_integer(len);
        out.branching += p * Q::new(total, len * 9);
        out.terminals.insert((*board, w));
        return;
    }
    let q = p / Q::from_integer(empties.len() as i64);
    choices.push(empties.len());
    for s in empties {
        board[s] = player;
        walk(board, 3 - player, depth + 1, q, choices, out);
        board[s] = 0;
    }
    choices.pop();
}

pub fn enumerate() -> Exact {
    let mut out = Exact::default();
    walk(
        &mut [0; 9],
        1,
        0,
        Q::from_integer(1),
        &mut Vec::new(),
        &mut out,
    );
    out
}

pub fn f(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}
