use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    EndCondition, EndRule, GameSpec, MoveRule, Ownership, Piece, ResultKind, Role, MAX_PLAYERS,
    MAX_SITES,
};
use crate::lexer::{char_offset, tokenize, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompileErrorKind {
    Lex,
    Structural,
    Semantic,
}

impl fmt::Display for CompileErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompileErrorKind::Lex => "lexing",
            CompileErrorKind::Structural => "structural",
            CompileErrorKind::Semantic => "semantic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{kind} error at char {offset}: {message}")]
pub struct CompileError {
    pub kind: CompileErrorKind,
    /// Character offset into the description.
    pub offset: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token<'a>>,
    pos: usize,
}

type Result<T> = std::result::Result<T, CompileError>;

impl<'a> Parser<'a> {
    fn error_at(&self, kind: CompileErrorKind, byte: usize, message: String) -> CompileError {
        CompileError {
            kind,
            offset: char_offset(self.src, byte),
            message,
        }
    }

    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.src.len(), |t| t.start)
    }

    fn structural(&self, expected: &str) -> CompileError {
        let found = self
            .peek()
            .map_or_else(|| "end of input".to_string(), |t| format!("`{t}`"));
        self.error_at(
            CompileErrorKind::Structural,
            self.here(),
            format!("expected {expected}, found {found}"),
        )
    }

    fn semantic(&self, byte: usize, message: impl Into<String>) -> CompileError {
        self.error_at(CompileErrorKind::Semantic, byte, message.into())
    }

    fn next(&mut self, kind: TokenKind, expected: &str) -> Result<Token<'a>> {
        match self.peek() {
            Some(t) if t.kind == kind => {
                let t = t.clone();
                self.pos += 1;
                Ok(t)
            }
            _ => Err(self.structural(expected)),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<()> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Word && t.text == word => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.structural(&format!("`{word}`"))),
        }
    }

    fn one_of<T: Copy>(&mut self, choices: &[(&str, T)]) -> Result<T> {
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Word {
                if let Some(&(_, v)) = choices.iter().find(|(w, _)| *w == t.text) {
                    self.pos += 1;
                    return Ok(v);
                }
            }
        }
        let names: Vec<_> = choices.iter().map(|(w, _)| format!("`{w}`")).collect();
        Err(self.structural(&names.join(" or ")))
    }

    fn open(&mut self) -> Result<()> {
        self.next(TokenKind::OpenParen, "`(`").map(drop)
    }

    fn close(&mut self) -> Result<()> {
        self.next(TokenKind::CloseParen, "`)`").map(drop)
    }

    fn open_form(&mut self, word: &str) -> Result<()> {
        self.open()?;
        self.keyword(word)
    }

    fn at_open(&self) -> bool {
        matches!(self.peek(), Some(t) if t.kind == TokenKind::OpenParen)
    }

    fn string(&mut self) -> Result<String> {
        Ok(self
            .next(TokenKind::Str, "a string")?
            .unquoted()
            .to_string())
    }

    /// Integer literal, with its byte offset for semantic errors.
    fn int(&mut self) -> Result<(i64, usize)> {
        let tok = self.next(TokenKind::Int, "an integer")?;
        let v = tok.text.parse::<i64>().map_err(|_| {
            self.semantic(tok.start, format!("integer `{}` out of range", tok.text))
        })?;
        Ok((v, tok.start))
    }

    fn positive(&mut self, what: &str, max: usize) -> Result<usize> {
        let (v, at) = self.int()?;
        if v < 1 {
            return Err(self.semantic(at, format!("{what} must be ≥ 1")));
        }
        if v as u64 > max as u64 {
            return Err(self.semantic(at, format!("{what} must be ≤ {max}")));
        }
        Ok(v as usize)
    }

    fn game(&mut self) -> Result<GameSpec> {
        self.open_form("game")?;
        let name = self.string()?;

        self.open_form("players")?;
        let num_players = self.positive("players", MAX_PLAYERS)?;
        self.close()?;

        let equip_at = self.here();
        self.open_form("equipment")?;
        self.next(TokenKind::OpenBrace, "`{`")?;
        let mut board = None;
        let mut pieces = Vec::new();
        while self.at_open() {
            let item_at = self.here();
            self.open()?;
            match self.one_of(&[("board", true), ("piece", false)])? {
                true => {
                    let dims = self.shape()?;
                    if board.replace(dims).is_some() {
                        return Err(self.semantic(item_at, "more than one board"));
                    }
                }
                false => {
                    let name = self.string()?;
                    let ownership =
                        self.one_of(&[("Each", Ownership::Each), ("Shared", Ownership::Shared)])?;
                    pieces.push(Piece { name, ownership });
                }
            }
            self.close()?;
        }
        self.next(TokenKind::CloseBrace, "`(` or `}`")?;
        self.close()?;
        let Some((rows, cols)) = board else {
            return Err(self.semantic(equip_at, "equipment declares no board"));
        };
        if pieces.is_empty() {
            return Err(self.semantic(equip_at, "equipment declares no piece"));
        }

        self.open_form("rules")?;
        self.open_form("play")?;
        self.open_form("move")?;
        self.keyword("Add")?;
        self.open_form("to")?;
        self.open_form("sites")?;
        self.keyword("Empty")?;
        for _ in 0..4 {
            self.close()?;
        }

        let end_at = self.here();
        self.open_form("end")?;
        let mut end_rules = Vec::new();
        while self.at_open() {
            let rule_at = self.here();
            let rule = self.end_rule()?;
            if rule.role == Role::Mover && rule.result == ResultKind::Loss && num_players != 2 {
                return Err(
                    self.semantic(rule_at, "`result Mover Loss` requires exactly 2 players")
                );
            }
            end_rules.push(rule);
        }
        self.close()?;
        if end_rules.is_empty() {
            return Err(self.semantic(end_at, "at least one end rule is required"));
        }
        self.close()?;
        self.close()?;

        if let Some(t) = self.peek() {
            return Err(self.error_at(
                CompileErrorKind::Structural,
                t.start,
                format!("unexpected `{t}` after game"),
            ));
        }

        Ok(GameSpec {
            name,
            num_players,
            rows,
            cols,
            pieces,
            move_rule: MoveRule::AddToEmpty,
            end_rules,
        })
    }

    fn shape(&mut self) -> Result<(usize, usize)> {
        let at = self.here();
        self.open()?;
        let dims = match self.one_of(&[("square", true), ("rectangle", false)])? {
            true => {
                let n = self.positive("square size", MAX_SITES)?;
                (n, n)
            }
            false => {
                let r = self.positive("rectangle rows", MAX_SITES)?;
                let c = self.positive("rectangle columns", MAX_SITES)?;
                (r, c)
            }
        };
        self.close()?;
        if dims.0 * dims.1 > MAX_SITES {
            return Err(self.semantic(at, format!("board exceeds {MAX_SITES} sites")));
        }
        Ok(dims)
    }

    fn end_rule(&mut self) -> Result<EndRule> {
        self.open_form("if")?;
        self.open_form("is")?;
        let condition = match self.one_of(&[("Line", true), ("Full", false)])? {
            true => EndCondition::Line(self.positive("line length", MAX_SITES)?),
            false => EndCondition::Full,
        };
        self.close()?;
        self.open_form("result")?;
        let role = self.one_of(&[("Mover", Role::Mover), ("All", Role::All)])?;
        let result = self.one_of(&[
            ("Win", ResultKind::Win),
            ("Loss", ResultKind::Loss),
            ("Draw", ResultKind::Draw),
        ])?;
        self.close()?;
        self.close()?;
        Ok(EndRule {
            condition,
            role,
            result,
        })
    }
}

/// Compile a LudiLite description.
pub fn compile(text: &str) -> std::result::Result<GameSpec, CompileError> {
    let tokens = tokenize(text).map_err(|e| CompileError {
        kind: CompileErrorKind::Lex,
        offset: char_offset(text, e.offset()),
        message: e.to_string(),
    })?;
    Parser {
        src: text,
        tokens,
        pos: 0,
    }
    .game()
}
