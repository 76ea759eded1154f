//! Context-free grammars and the grammar reward.
//!
//! A [`Grammar`] is loaded from a small line-oriented file format (see
//! [`Grammar::parse`]) and drives an Earley recognizer that reports how far
//! into a candidate text the input remains a viable prefix of some sentence.
//! The grammar reward is that prefix length divided by the input length, both
//! in characters.

mod earley;
mod loader;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{ratio, Real};

/// Grammar for the LudiLite description language, shipped with the crate.
pub const LUDILITE_GRAMMAR: &str = include_str!("../../assets/ludilite.grammar");

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Terminal {
    /// Exact keyword or punctuation.
    Literal(String),
    /// Any double-quoted string.
    Str,
    /// Any signed integer.
    Int,
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::Literal(s) => write!(f, "\"{s}\""),
            Terminal::Str => f.write_str("STRING"),
            Terminal::Int => f.write_str("INT"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    NonTerminal(usize),
    Terminal(Terminal),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: usize,
    pub rhs: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("undefined nonterminal <{name}> referenced on line {line}")]
    UndefinedNonTerminal { name: String, line: usize },
    #[error("grammar has no productions")]
    Empty,
    #[error("literal \"{literal}\" on line {line} is also matched by a terminal class")]
    LiteralOverlapsClass { literal: String, line: usize },
    #[error("cannot read grammar file: {0}")]
    Io(String),
}

/// An immutable context-free grammar without empty productions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    names: Vec<String>,
    rules: Vec<Rule>,
    by_lhs: Vec<Vec<usize>>,
    start: usize,
}

impl Grammar {
    fn from_parts(names: Vec<String>, rules: Vec<Rule>, start: usize) -> Self {
        let mut by_lhs = vec![Vec::new(); names.len()];
        for (i, r) in rules.iter().enumerate() {
            by_lhs[r.lhs].push(i);
        }
        Grammar {
            names,
            rules,
            by_lhs,
            start,
        }
    }

    /// Parse grammar file text. The first production's left-hand side is the
    /// start symbol.
    pub fn parse(source: &str) -> Result<Self, GrammarError> {
        loader::parse(source)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GrammarError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| GrammarError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The shipped LudiLite grammar.
    pub fn ludilite() -> Self {
        Self::parse(LUDILITE_GRAMMAR).expect("shipped grammar is valid")
    }

    pub fn start_symbol(&self) -> &str {
        &self.names[self.start]
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn nonterminal_name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn nonterminal_count(&self) -> usize {
        self.names.len()
    }

    /// Run the recognizer and report the longest viable prefix.
    pub fn recognize(&self, input: &str) -> ValidPrefixResult {
        earley::recognize(self, input)
    }

    /// Fraction of `candidate`'s characters covered by its longest viable
    /// prefix; 0 for empty input.
    pub fn reward<T: Real>(&self, candidate: &str) -> T {
        let res = self.recognize(candidate);
        ratio(res.consumed_chars, res.total_chars)
    }
}

/// Where recognition stopped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailurePoint {
    pub token: String,
    /// Character offset of the failing token.
    pub offset: usize,
    /// Terminals the recognizer could have scanned at that point.
    pub expected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidPrefixResult {
    pub consumed_chars: usize,
    pub total_chars: usize,
    pub accepted: bool,
    pub failure: Option<FailurePoint>,
}

/// Grammar reward of `candidate` under `grammar`.
pub fn grammar_reward<T: Real>(grammar: &Grammar, candidate: &str) -> T {
    grammar.reward(candidate)
}
