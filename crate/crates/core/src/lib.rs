//! Core of the sharing and auto-grading platform: the MiniAlloy language,
//! a bounded model finder with its own SAT search, and the secret-paragraph
//! challenge engine.

pub mod challenge;
pub mod error;
pub mod finder;
pub mod lang;

pub use error::{LexError, ParseError, ResolveError};
