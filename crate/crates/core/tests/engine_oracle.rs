mod support;

use std::collections::BTreeSet;

use gdl_reward::concepts::{compute_concepts, run_playouts};
use gdl_reward::engine::{random_playout, Cell, GameSpec, GameState, Outcome};
use gdl_reward::{compile, ConceptVector};
use proptest::prelude::*;
use support::ttt_oracle::{enumerate, f, Q};

const TTT: &str = "(game \"Tic-Tac-Toe\" (players 2) (equipment { (board (square 3)) (piece \"Disc\" Each) }) (rules (play (move Add (to (sites Empty)))) (end (if (is Line 3) (result Mover Win)) (if (is Full) (result All Draw)))))";

#[test]
fn oracle_matches_known_random_play_probabilities() {
    let exact = enumerate();
    assert_eq!(
        exact.p_win1 + exact.p_win2 + exact.p_draw,
        Q::from_integer(1)
    );
    // Uniform random tic-tac-toe: 737/1260, 121/420, 8/63.
    assert_eq!(exact.p_win1, Q::new(737, 1260));
    assert_eq!(exact.p_win2, Q::new(121, 420));
    assert_eq!(exact.p_draw, Q::new(8, 63));
}

fn engine_terminals(spec: &GameSpec, state: &GameState, out: &mut BTreeSet<([u8; 9], u8)>) {
    if let Some(outcome) = spec.terminal_result(state) {
        let mut board = [0u8; 9];
        for (i, c) in state.cells.iter().enumerate() {
            board[i] = match c {
                Cell::Owned(p) => *p,
                _ => 0,
            };
        }
        let w = match outcome {
            Outcome::Win(p) => p,
            _ => 0,
        };
        out.insert((board, w));
        return;
    }
    for mv in spec.legal_moves(state) {
        let next = spec.apply_move(state, mv).unwrap();
        engine_terminals(spec, &next, out);
    }
}

#[test]
fn terminal_sets_match_enumerator() {
    let spec = compile(TTT).unwrap();
    let mut engine = BTreeSet::new();
    engine_terminals(&spec, &spec.initial_state(), &mut engine);
    let exact = enumerate();
    assert_eq!(engine, exact.terminals);
    assert_eq!(engine.len(), 958);
}

#[test]
fn concepts_converge_to_exact_values() {
    let spec = compile(TTT).unwrap();
    let exact = enumerate();
    let c: ConceptVector = compute_concepts(&spec, 10_000, 0, 250, 180.0).unwrap();
    assert_eq!(c.timeout, 0.0);
    let pairs = [
        ("decision_moves", c.decision_moves, f(exact.decision_moves)),
        ("board_coverage", c.board_coverage, f(exact.board_coverage)),
        ("balance", c.balance.unwrap(), f(exact.balance())),
        ("completion", c.completion.unwrap(), f(exact.completion())),
        ("length", c.extended[0], f(exact.mean_length) / 250.0),
        ("branching", c.extended[1], f(exact.branching)),
    ];
    for (name, got, want) in pairs {
        assert!((got - want).abs() <= 0.02, "{name}: {got} vs exact {want}");
    }
}

#[test]
fn playout_lengths_follow_the_game_tree() {
    let spec = compile(TTT).unwrap();
    let stats = run_playouts(&spec, 2_000, 11, 250, 180.0);
    let lengths: BTreeSet<usize> = stats.traces.iter().map(|t| t.len()).collect();
    assert_eq!(lengths.first(), Some(&5));
    assert_eq!(lengths.last(), Some(&9));
    assert_eq!(stats.timeouts, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reachable_states_conserve_pieces(seed in any::<u64>(), n in 1usize..6, rows in 1usize..5, cols in 1usize..5, k in 1usize..5) {
        let text = TTT
            .replace("(players 2)", &format!("(players {n})"))
            .replace("(square 3)", &format!("(rectangle {rows} {cols})"))
            .replace("Line 3", &format!("Line {k}"));
        let spec = compile(&text).unwrap();
        let trace = random_playout(&spec, seed, 250);
        let mut state = spec.initial_state();
        for mv in &trace.moves {
            let legal = spec.legal_moves(&state);
            let empty = state.cells.iter().filter(|c| **c == Cell::Empty).count();
            prop_assert_eq!(legal.len(), empty);
            prop_assert!(legal.iter().all(|m| state.cells[m.site] == Cell::Empty));
            prop_assert!(legal.contains(mv));
            let before = state.clone();
            let next = spec.apply_move(&state, *mv).unwrap();
            prop_assert_eq!(&state, &before);
            state = next;
            prop_assert_eq!(state.occupied(), state.move_count);
            prop_assert!(state.mover as usize >= 1 && state.mover as usize <= n);
            for (i, c) in state.cells.iter().enumerate() {
                if *c != Cell::Empty {
                    prop_assert!(state.touched[i]);
                }
            }
        }
        prop_assert_eq!(trace.clone(), random_playout(&spec, seed, 250));
    }
}
