//! MiniAlloy: lexer, parser, syntax tree and name resolution.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod resolve;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ast::*;
pub use lexer::{text_position, tokenize, Position, Token, TokenKind, SECRET_MARKER};
pub use parser::{parse, parse_with_limit, DEFAULT_MAX_SOURCE_BYTES};
pub use resolve::{resolve, ResolvedModel};

/// Byte range `start..end` in the source text.
///
/// Spans always compare equal so that deriving `PartialEq` on syntax trees
/// gives structural equality. Use [`Span::range`] to compare positions.
#[derive(Clone, Copy, Default, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    pub fn range(self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl fmt::Debug for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}
