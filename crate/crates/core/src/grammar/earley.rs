//! Earley recognizer with viable-prefix reporting.

use std::collections::HashSet;

use super::{FailurePoint, Grammar, Symbol, Terminal, ValidPrefixResult};
use crate::lexer::{char_offset, Lexer, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Item {
    rule: usize,
    dot: usize,
    origin: usize,
}

/// Sets stay small for typical grammars; hashing only pays off past this.
const LINEAR_DEDUP_LIMIT: usize = 48;

#[derive(Default)]
struct ItemSet {
    items: Vec<Item>,
    seen: HashSet<Item>,
}

impl ItemSet {
    fn push(&mut self, item: Item) {
        let fresh = if self.items.len() < LINEAR_DEDUP_LIMIT {
            !self.items.contains(&item)
        } else {
            if self.seen.len() < self.items.len() {
                self.seen.extend(self.items.iter().copied());
            }
            self.seen.insert(item)
        };
        if fresh {
            self.items.push(item);
        }
    }
}

fn matches(terminal: &Terminal, token: &Token<'_>) -> bool {
    match terminal {
        Terminal::Literal(lit) => {
            !matches!(token.kind, TokenKind::Str | TokenKind::Int) && token.text == lit
        }
        Terminal::Str => token.kind == TokenKind::Str,
        Terminal::Int => token.kind == TokenKind::Int,
    }
}

/// Length in characters of the longest token matching `terminal` that the
/// failing token's text starts with. A word like `ab` where `a` is expected
/// counts as `a` followed by an unscannable `b`.
fn split_match(terminal: &Terminal, text: &str) -> usize {
    match terminal {
        Terminal::Literal(lit) if text.starts_with(lit.as_str()) => lit.chars().count(),
        Terminal::Literal(_) => 0,
        Terminal::Int => {
            let sign = usize::from(text.starts_with('-'));
            match text[sign..]
                .chars()
                .take_while(char::is_ascii_digit)
                .count()
            {
                0 => 0,
                digits => sign + digits,
            }
        }
        // A failing token that starts a string would have scanned or failed
        // to lex, so strings never split.
        Terminal::Str => 0,
    }
}

struct Chart<'g> {
    grammar: &'g Grammar,
    sets: Vec<ItemSet>,
}

impl<'g> Chart<'g> {
    fn new(grammar: &'g Grammar) -> Self {
        let mut first = ItemSet::default();
        for &r in &grammar.by_lhs[grammar.start] {
            first.push(Item {
                rule: r,
                dot: 0,
                origin: 0,
            });
        }
        let mut chart = Chart {
            grammar,
            sets: vec![first],
        };
        chart.close(0);
        chart
    }

    fn next_symbol(&self, item: Item) -> Option<&'g Symbol> {
        self.grammar.rules[item.rule].rhs.get(item.dot)
    }

    /// Prediction and completion to a fixed point. Rules are never empty, so
    /// a completed item always has an origin before `k`.
    fn close(&mut self, k: usize) {
        let mut i = 0;
        while i < self.sets[k].items.len() {
            let item = self.sets[k].items[i];
            i += 1;
            match self.next_symbol(item) {
                Some(Symbol::NonTerminal(nt)) => {
                    for &r in &self.grammar.by_lhs[*nt] {
                        self.sets[k].push(Item {
                            rule: r,
                            dot: 0,
                            origin: k,
                        });
                    }
                }
                Some(Symbol::Terminal(_)) => {}
                None => {
                    let lhs = self.grammar.rules[item.rule].lhs;
                    // origin < k, so the parent set is not the one growing.
                    let (done, rest) = self.sets.split_at_mut(k);
                    for &p in &done[item.origin].items {
                        let rhs = &self.grammar.rules[p.rule].rhs;
                        if matches!(rhs.get(p.dot), Some(Symbol::NonTerminal(nt)) if *nt == lhs) {
                            rest[0].push(Item {
                                dot: p.dot + 1,
                                ..p
                            });
                        }
                    }
                }
            }
        }
    }

    fn expected(&self, k: usize) -> Vec<&'g Terminal> {
        let mut out: Vec<&Terminal> = Vec::new();
        for &item in &self.sets[k].items {
            if let Some(Symbol::Terminal(t)) = self.next_symbol(item) {
                if !out.contains(&t) {
                    out.push(t);
                }
            }
        }
        out
    }

    /// Scan `token` from set `k`; false if no item can advance over it.
    fn scan(&mut self, k: usize, token: &Token<'_>) -> bool {
        let mut next = ItemSet::default();
        for &item in &self.sets[k].items {
            if let Some(Symbol::Terminal(t)) = self.next_symbol(item) {
                if matches(t, token) {
                    next.push(Item {
                        dot: item.dot + 1,
                        ..item
                    });
                }
            }
        }
        if next.items.is_empty() {
            return false;
        }
        self.sets.push(next);
        self.close(k + 1);
        true
    }

    fn complete_at(&self, k: usize) -> bool {
        self.sets[k].items.iter().any(|&item| {
            item.origin == 0
                && self.grammar.rules[item.rule].lhs == self.grammar.start
                && self.next_symbol(item).is_none()
        })
    }
}

pub(super) fn recognize(grammar: &Grammar, input: &str) -> ValidPrefixResult {
    let total_chars = input.chars().count();
    let mut chart = Chart::new(grammar);

    for (k, tok) in Lexer::new(input).enumerate() {
        let tok = match tok {
            Ok(t) => t,
            Err(err) => {
                // Like a scan failure: everything before the bad token counts.
                let offset = err.offset();
                let consumed = if k == 0 {
                    0
                } else {
                    char_offset(input, offset)
                };
                let token: String = input[offset..].chars().take(32).collect();
                return ValidPrefixResult {
                    consumed_chars: consumed,
                    total_chars,
                    accepted: false,
                    failure: Some(FailurePoint {
                        token,
                        offset: char_offset(input, offset),
                        expected: chart.expected(k).iter().map(|t| t.to_string()).collect(),
                    }),
                };
            }
        };
        if !chart.scan(k, &tok) {
            let expected = chart.expected(k);
            let split = expected
                .iter()
                .map(|t| split_match(t, tok.text))
                .max()
                .unwrap_or(0);
            let start = char_offset(input, tok.start);
            // Whitespace before the failing token belongs to the previous
            // token; with no previous token and no split nothing counts.
            let consumed = if k == 0 && split == 0 {
                0
            } else {
                start + split
            };
            return ValidPrefixResult {
                consumed_chars: consumed,
                total_chars,
                accepted: false,
                failure: Some(FailurePoint {
                    token: tok.text.to_string(),
                    offset: start,
                    expected: expected.iter().map(|t| t.to_string()).collect(),
                }),
            };
        }
    }

    let scanned = chart.sets.len() - 1;
    ValidPrefixResult {
        consumed_chars: if scanned == 0 { 0 } else { total_chars },
        total_chars,
        accepted: scanned > 0 && chart.complete_at(scanned),
        failure: None,
    }
}
