//! Tokenizer shared by the grammar recognizer and the game compiler.
//!
//! Token classes: parentheses and braces, double-quoted strings (no escapes),
//! signed integers, and bare words. Whitespace separates tokens; every other
//! character belongs to a bare word.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    OpenParen,
    CloseParen,
    OpenBrace,
    CloseBrace,
    /// Quoted string; the token text keeps its quotes.
    Str,
    Int,
    Word,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    /// Byte offset of the first byte.
    pub start: usize,
    /// Byte offset one past the last byte.
    pub end: usize,
}

impl Token<'_> {
    /// Contents of a quoted string without the quotes; the raw text otherwise.
    pub fn unquoted(&self) -> &str {
        match self.kind {
            TokenKind::Str => &self.text[1..self.text.len() - 1],
            _ => self.text,
        }
    }
}

impl fmt::Display for Token<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unterminated string starting at byte {offset}")]
    UnterminatedString { offset: usize },
}

impl LexError {
    pub fn offset(&self) -> usize {
        match self {
            LexError::UnterminatedString { offset } => *offset,
        }
    }
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '{' | '}' | '"')
}

/// True if `s` is a signed decimal integer: `-?[0-9]+`.
pub fn is_int(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// Streaming lexer. Yields tokens until the input ends or a lexing error
/// occurs; after an error the iterator is exhausted.
#[derive(Debug, Clone)]
pub struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    failed: bool,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            failed: false,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }
}

impl<'a> Iterator for Lexer<'a> {
    type Item = Result<Token<'a>, LexError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let rest = self.rest();
        let trimmed = rest.trim_start();
        self.pos += rest.len() - trimmed.len();
        let start = self.pos;
        let c = trimmed.chars().next()?;

        let (kind, len) = match c {
            '(' => (TokenKind::OpenParen, 1),
            ')' => (TokenKind::CloseParen, 1),
            '{' => (TokenKind::OpenBrace, 1),
            '}' => (TokenKind::CloseBrace, 1),
            '"' => match trimmed[1..].find('"') {
                Some(i) => (TokenKind::Str, i + 2),
                None => {
                    self.failed = true;
                    return Some(Err(LexError::UnterminatedString { offset: start }));
                }
            },
            _ => {
                let len = trimmed.find(is_delimiter).unwrap_or(trimmed.len());
                let kind = if is_int(&trimmed[..len]) {
                    TokenKind::Int
                } else {
                    TokenKind::Word
                };
                (kind, len)
            }
        };
        self.pos += len;
        Some(Ok(Token {
            kind,
            text: &self.src[start..self.pos],
            start,
            end: self.pos,
        }))
    }
}

/// Lex the whole input, failing on the first lexing error.
pub fn tokenize(src: &str) -> Result<Vec<Token<'_>>, LexError> {
    Lexer::new(src).collect()
}

/// Number of characters in `s[..byte_offset]`.
pub(crate) fn char_offset(s: &str, byte_offset: usize) -> usize {
    s[..byte_offset].chars().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(src: &str) -> Vec<&str> {
        tokenize(src).unwrap().iter().map(|t| t.text).collect()
    }

    #[test]
    fn players_clause() {
        assert_eq!(texts("(players 2)"), ["(", "players", "2", ")"]);
        let toks = tokenize("(players 2)").unwrap();
        assert_eq!(toks[2].kind, TokenKind::Int);
        assert_eq!(toks[1].kind, TokenKind::Word);
    }

    #[test]
    fn unterminated_string_reports_quote_offset() {
        let err = tokenize("(game \"Tic)").unwrap_err();
        assert_eq!(err, LexError::UnterminatedString { offset: 6 });
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("  \n\t ").unwrap().is_empty());
    }

    #[test]
    fn strings_and_adjacent_brackets() {
        let toks = tokenize("{(piece \"Disc\" Each)}").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            [
                TokenKind::OpenBrace,
                TokenKind::OpenParen,
                TokenKind::Word,
                TokenKind::Str,
                TokenKind::Word,
                TokenKind::CloseParen,
                TokenKind::CloseBrace
            ]
        );
        assert_eq!(toks[3].unquoted(), "Disc");
    }

    #[test]
    fn integers() {
        assert!(is_int("-12"));
        assert!(is_int("0"));
        assert!(!is_int("-"));
        assert!(!is_int("12x"));
        assert_eq!(tokenize("-3 x-3").unwrap()[1].kind, TokenKind::Word);
    }
}
