//! Tokenizer for MiniAlloy source text.
//!
//! Comments (`//`, `--`, `/* */`) are skipped, except for a line whose only
//! content is `//SECRET`, which is emitted as [`TokenKind::SecretMarker`].

use std::fmt;

use super::Span;
use crate::error::LexError;

pub const SECRET_MARKER: &str = "//SECRET";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    SecretMarker,
    Ident(String),
    Num(u32),

    // keywords
    Sig,
    Abstract,
    Extends,
    One,
    Lone,
    Some,
    No,
    Set,
    All,
    Fact,
    Pred,
    Assert,
    Run,
    Check,
    For,
    But,
    Exactly,
    Expect,
    And,
    Or,
    Not,
    Implies,
    Iff,
    In,
    Univ,
    Iden,
    None,
    /// A keyword of full Alloy that MiniAlloy does not accept.
    Unsupported(&'static str),

    // punctuation
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Colon,
    Bar,
    Dot,
    Arrow,
    Plus,
    Minus,
    Amp,
    Tilde,
    Caret,
    Star,
    Eq,
    NotEq,
    Bang,
    AndAnd,
    OrOr,
    FatArrow,
    DoubleArrow,
    /// An operator of full Alloy that MiniAlloy does not accept.
    UnsupportedOp(&'static str),
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::SecretMarker => SECRET_MARKER.to_string(),
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Num(n) => format!("number `{n}`"),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        use TokenKind::*;
        match self {
            SecretMarker => SECRET_MARKER,
            Ident(_) => "identifier",
            Num(_) => "number",
            Sig => "sig",
            Abstract => "abstract",
            Extends => "extends",
            One => "one",
            Lone => "lone",
            Some => "some",
            No => "no",
            Set => "set",
            All => "all",
            Fact => "fact",
            Pred => "pred",
            Assert => "assert",
            Run => "run",
            Check => "check",
            For => "for",
            But => "but",
            Exactly => "exactly",
            Expect => "expect",
            And => "and",
            Or => "or",
            Not => "not",
            Implies => "implies",
            Iff => "iff",
            In => "in",
            Univ => "univ",
            Iden => "iden",
            None => "none",
            Unsupported(s) | UnsupportedOp(s) => s,
            LBrace => "{",
            RBrace => "}",
            LBracket => "[",
            RBracket => "]",
            LParen => "(",
            RParen => ")",
            Comma => ",",
            Colon => ":",
            Bar => "|",
            Dot => ".",
            Arrow => "->",
            Plus => "+",
            Minus => "-",
            Amp => "&",
            Tilde => "~",
            Caret => "^",
            Star => "*",
            Eq => "=",
            NotEq => "!=",
            Bang => "!",
            AndAnd => "&&",
            OrOr => "||",
            FatArrow => "=>",
            DoubleArrow => "<=>",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

fn keyword(word: &str) -> Option<TokenKind> {
    use TokenKind::*;
    Option::Some(match word {
        "sig" => Sig,
        "abstract" => Abstract,
        "extends" => Extends,
        "one" => One,
        "lone" => Lone,
        "some" => Some,
        "no" => No,
        "set" => Set,
        "all" => All,
        "fact" => Fact,
        "pred" => Pred,
        "assert" => Assert,
        "run" => Run,
        "check" => Check,
        "for" => For,
        "but" => But,
        "exactly" => Exactly,
        "expect" => Expect,
        "and" => And,
        "or" => Or,
        "not" => Not,
        "implies" => Implies,
        "iff" => Iff,
        "in" => In,
        "univ" => Univ,
        "iden" => Iden,
        "none" => None,
        "let" => Unsupported("let"),
        "fun" => Unsupported("fun"),
        "open" => Unsupported("open"),
        "module" => Unsupported("module"),
        "disj" => Unsupported("disj"),
        "seq" => Unsupported("seq"),
        "Int" => Unsupported("Int"),
        "int" => Unsupported("int"),
        "sum" => Unsupported("sum"),
        "else" => Unsupported("else"),
        "this" => Unsupported("this"),
        "private" => Unsupported("private"),
        "enum" => Unsupported("enum"),
        "String" => Unsupported("String"),
        _ => return Option::None,
    })
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// True when `pos` is preceded on its line only by spaces or tabs.
fn line_start_before(text: &str, pos: usize) -> bool {
    text[..pos]
        .bytes()
        .rev()
        .take_while(|&b| b != b'\n')
        .all(|b| b == b' ' || b == b'\t')
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;

    while pos < bytes.len() {
        let c = text[pos..].chars().next().expect("in bounds");
        if c.is_whitespace() {
            pos += c.len_utf8();
            continue;
        }
        let rest = &text[pos..];

        if rest.starts_with("//") || rest.starts_with("--") {
            let end = rest.find('\n').map_or(bytes.len(), |i| pos + i);
            let line = &text[pos..end];
            if rest.starts_with(SECRET_MARKER)
                && line.trim_end() == SECRET_MARKER
                && line_start_before(text, pos)
            {
                tokens.push(Token {
                    kind: TokenKind::SecretMarker,
                    span: Span::new(pos, pos + SECRET_MARKER.len()),
                });
            }
            pos = end;
            continue;
        }
        if rest.starts_with("/*") {
            match rest[2..].find("*/") {
                Some(i) => pos += i + 4,
                None => {
                    return Err(LexError::UnterminatedComment {
                        position: text_position(text, pos),
                    })
                }
            }
            continue;
        }

        let start = pos;
        if is_ident_start(c) {
            let len = rest
                .char_indices()
                .find(|&(_, ch)| !is_ident_continue(ch))
                .map_or(rest.len(), |(i, _)| i);
            let word = &rest[..len];
            pos += len;
            let kind = keyword(word).unwrap_or_else(|| TokenKind::Ident(word.to_string()));
            tokens.push(Token {
                kind,
                span: Span::new(start, pos),
            });
            continue;
        }
        if c.is_ascii_digit() {
            let len = rest
                .bytes()
                .position(|b| !b.is_ascii_digit())
                .unwrap_or(rest.len());
            pos += len;
            let n = rest[..len].parse::<u32>().map_err(|_| LexError::NumberTooLarge {
                position: text_position(text, start),
            })?;
            tokens.push(Token {
                kind: TokenKind::Num(n),
                span: Span::new(start, pos),
            });
            continue;
        }

        const OPERATORS: &[(&str, TokenKind)] = {
            use TokenKind::*;
            &[
            ("<=>", DoubleArrow),
            ("->", Arrow),
            ("=>", FatArrow),
            ("!=", NotEq),
            ("&&", AndAnd),
            ("||", OrOr),
            ("<:", UnsupportedOp("<:")),
            (":>", UnsupportedOp(":>")),
            ("++", UnsupportedOp("++")),
            ("<=", UnsupportedOp("<=")),
            (">=", UnsupportedOp(">=")),
            ("=<", UnsupportedOp("=<")),
            ("{", LBrace),
            ("}", RBrace),
            ("[", LBracket),
            ("]", RBracket),
            ("(", LParen),
            (")", RParen),
            (",", Comma),
            (":", Colon),
            ("|", Bar),
            (".", Dot),
            ("+", Plus),
            ("-", Minus),
            ("&", Amp),
            ("~", Tilde),
            ("^", Caret),
            ("*", Star),
            ("=", Eq),
            ("!", Bang),
            ("#", UnsupportedOp("#")),
            ("/", UnsupportedOp("/")),
            ("<", UnsupportedOp("<")),
            (">", UnsupportedOp(">")),
            ]
        };
        match OPERATORS.iter().find(|(op, _)| rest.starts_with(op)) {
            Some((op, kind)) => {
                pos += op.len();
                tokens.push(Token {
                    kind: kind.clone(),
                    span: Span::new(start, pos),
                });
            }
            None => {
                return Err(LexError::IllegalCharacter {
                    character: c,
                    position: text_position(text, start),
                })
            }
        }
    }
    Ok(tokens)
}

/// Byte offset plus 1-based line and column (in characters).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Position {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

pub fn text_position(text: &str, offset: usize) -> Position {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let column = text[line_start..offset].chars().count() + 1;
    Position {
        offset,
        line,
        column,
    }
}
