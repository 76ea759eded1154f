//! Grammar file parsing.
//!
//! ```text
//! # comment
//! <game>    := "(" "game" STRING <players> ")"
//! <players> := "(" "players" INT ")"
//!            | "(" "players" ")"
//! ```
//!
//! One production per line, alternatives separated by `|`. A line starting
//! with `|` continues the previous production. Nonterminals are written
//! `<name>` or as a bare identifier; `STRING` and `INT` are terminal classes.

use std::collections::HashMap;

use super::{Grammar, GrammarError, Rule, Symbol, Terminal};
use crate::lexer::{self, TokenKind};

struct RawRule {
    lhs: String,
    alternatives: Vec<Vec<RawSymbol>>,
}

struct RawSymbol {
    kind: RawKind,
    line: usize,
    column: usize,
}

enum RawKind {
    Literal(String),
    Class(Terminal),
    NonTerminal(String),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> GrammarError {
    GrammarError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '-')
}

/// Splits a right-hand side into symbols. Quoted literals may contain `|`
/// and whitespace, so this is a small scanner rather than a `split`.
fn parse_rhs(
    text: &str,
    line: usize,
    base_col: usize,
) -> Result<Vec<Vec<RawSymbol>>, GrammarError> {
    let mut alternatives = vec![Vec::new()];
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let column = base_col + text[..i].chars().count();
        if c.is_whitespace() {
            chars.next();
        } else if c == '#' {
            break;
        } else if c == '|' {
            chars.next();
            alternatives.push(Vec::new());
        } else if c == '"' {
            chars.next();
            let mut lit = String::new();
            let mut closed = false;
            for (_, c) in chars.by_ref() {
                if c == '"' {
                    closed = true;
                    break;
                }
                lit.push(c);
            }
            if !closed {
                return Err(syntax(line, column, "unterminated literal"));
            }
            alternatives.last_mut().unwrap().push(RawSymbol {
                kind: RawKind::Literal(lit),
                line,
                column,
            });
        } else {
            let mut word = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_whitespace() || c == '|' || c == '"' || c == '#' {
                    break;
                }
                word.push(c);
                chars.next();
            }
            let kind = match word.as_str() {
                "STRING" => RawKind::Class(Terminal::Str),
                "INT" => RawKind::Class(Terminal::Int),
                w => {
                    let name = w
                        .strip_prefix('<')
                        .and_then(|w| w.strip_suffix('>'))
                        .unwrap_or(w);
                    if !valid_name(name) {
                        return Err(syntax(line, column, format!("invalid symbol `{w}`")));
                    }
                    RawKind::NonTerminal(name.to_string())
                }
            };
            alternatives
                .last_mut()
                .unwrap()
                .push(RawSymbol { kind, line, column });
        }
    }
    if let Some(pos) = alternatives.iter().position(Vec::is_empty) {
        let msg = if alternatives.len() == 1 {
            "empty right-hand side".to_string()
        } else {
            format!("empty alternative #{}", pos + 1)
        };
        return Err(syntax(line, base_col, msg));
    }
    Ok(alternatives)
}

fn check_literal(lit: &str, line: usize, column: usize) -> Result<(), GrammarError> {
    let tokens = lexer::tokenize(lit).ok().unwrap_or_default();
    let single = tokens.len() == 1 && tokens[0].text == lit;
    if !single {
        return Err(syntax(
            line,
            column,
            format!("literal \"{lit}\" is not a single token"),
        ));
    }
    match tokens[0].kind {
        TokenKind::Int | TokenKind::Str => Err(GrammarError::LiteralOverlapsClass {
            literal: lit.to_string(),
            line,
        }),
        _ => Ok(()),
    }
}

pub(super) fn parse(source: &str) -> Result<Grammar, GrammarError> {
    let mut raw: Vec<RawRule> = Vec::new();

    for (idx, full_line) in source.lines().enumerate() {
        let line = idx + 1;
        let trimmed = full_line.trim_start();
        let indent = full_line.chars().count() - trimmed.chars().count();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('|') {
            let Some(last) = raw.last_mut() else {
                return Err(syntax(
                    line,
                    indent + 1,
                    "continuation before any production",
                ));
            };
            last.alternatives.extend(parse_rhs(rest, line, indent + 2)?);
            continue;
        }
        let Some(split) = trimmed.find(":=") else {
            return Err(syntax(line, indent + 1, "expected `:=`"));
        };
        let lhs_text = trimmed[..split].trim();
        let lhs = lhs_text
            .strip_prefix('<')
            .and_then(|s| s.strip_suffix('>'))
            .unwrap_or(lhs_text);
        if !valid_name(lhs) {
            return Err(syntax(
                line,
                indent + 1,
                format!("invalid left-hand side `{lhs_text}`"),
            ));
        }
        let rhs_col = indent + trimmed[..split + 2].chars().count() + 1;
        let alternatives = parse_rhs(&trimmed[split + 2..], line, rhs_col)?;
        raw.push(RawRule {
            lhs: lhs.to_string(),
            alternatives,
        });
    }

    if raw.is_empty() {
        return Err(GrammarError::Empty);
    }

    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    for r in &raw {
        if !ids.contains_key(&r.lhs) {
            ids.insert(r.lhs.clone(), names.len());
            names.push(r.lhs.clone());
        }
    }

    let mut rules = Vec::new();
    for r in raw {
        let lhs = ids[&r.lhs];
        for alt in r.alternatives {
            let mut rhs = Vec::with_capacity(alt.len());
            for sym in alt {
                rhs.push(match sym.kind {
                    RawKind::Literal(lit) => {
                        check_literal(&lit, sym.line, sym.column)?;
                        Symbol::Terminal(Terminal::Literal(lit))
                    }
                    RawKind::Class(t) => Symbol::Terminal(t),
                    RawKind::NonTerminal(name) => match ids.get(&name) {
                        Some(&id) => Symbol::NonTerminal(id),
                        None => {
                            return Err(GrammarError::UndefinedNonTerminal {
                                name,
                                line: sym.line,
                            })
                        }
                    },
                });
            }
            rules.push(Rule { lhs, rhs });
        }
    }

    Ok(Grammar::from_parts(names, rules, 0))
}
