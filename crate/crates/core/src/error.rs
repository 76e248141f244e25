use thiserror::Error;

use crate::lang::{Position, Span};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("illegal character `{character}` at {position}")]
    IllegalCharacter { character: char, position: Position },
    #[error("unterminated block comment starting at {position}")]
    UnterminatedComment { position: Position },
    #[error("number literal too large at {position}")]
    NumberTooLarge { position: Position },
}

impl LexError {
    pub fn position(&self) -> Position {
        match self {
            LexError::IllegalCharacter { position, .. }
            | LexError::UnterminatedComment { position }
            | LexError::NumberTooLarge { position } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("expected {} at {position}, found {found}", .expected.join(" or "))]
    Unexpected {
        position: Position,
        expected: Vec<String>,
        found: String,
    },
    #[error("unsupported construct: {construct} at {position}")]
    Unsupported {
        construct: String,
        position: Position,
    },
    #[error("//SECRET at {position} must be directly followed by a paragraph")]
    DanglingSecretMarker { position: Position },
    #[error("source is {size} bytes, over the {limit} byte limit")]
    SourceTooLarge { size: usize, limit: usize },
}

impl ParseError {
    pub fn position(&self) -> Option<Position> {
        match self {
            ParseError::Lex(e) => Some(e.position()),
            ParseError::Unexpected { position, .. }
            | ParseError::Unsupported { position, .. }
            | ParseError::DanglingSecretMarker { position } => Some(*position),
            ParseError::SourceTooLarge { .. } => None,
        }
    }
}

/// Name and typing errors. Messages cite names only, never source text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("unknown name `{name}`")]
    UnknownName { name: String, span: Span },
    #[error("arity mismatch: {message}")]
    ArityMismatch { message: String, span: Span },
    #[error("type mismatch: {message}")]
    TypeMismatch { message: String, span: Span },
    #[error("duplicate name `{name}`")]
    DuplicateName { name: String, span: Span },
    #[error("cyclic extension involving sig `{name}`")]
    CyclicExtends { name: String, span: Span },
    #[error("predicate `{name}` calls itself")]
    RecursivePredicate { name: String, span: Span },
    #[error("`{name}` is not a {expected}")]
    WrongKind {
        name: String,
        expected: &'static str,
        span: Span,
    },
}

impl ResolveError {
    pub fn span(&self) -> Span {
        match self {
            ResolveError::UnknownName { span, .. }
            | ResolveError::ArityMismatch { span, .. }
            | ResolveError::TypeMismatch { span, .. }
            | ResolveError::DuplicateName { span, .. }
            | ResolveError::CyclicExtends { span, .. }
            | ResolveError::RecursivePredicate { span, .. }
            | ResolveError::WrongKind { span, .. } => *span,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ResolveError::UnknownName { .. } => "unknown_name",
            ResolveError::ArityMismatch { .. } => "arity_mismatch",
            ResolveError::TypeMismatch { .. } => "type_mismatch",
            ResolveError::DuplicateName { .. } => "duplicate_name",
            ResolveError::CyclicExtends { .. } => "cyclic_extends",
            ResolveError::RecursivePredicate { .. } => "recursive_predicate",
            ResolveError::WrongKind { .. } => "wrong_kind",
        }
    }
}
