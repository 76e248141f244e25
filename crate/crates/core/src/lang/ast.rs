//! Syntax tree produced by the parser.
//!
//! Box joins are desugared while parsing (`e[a]` becomes `a.e`), and
//! parentheses leave no node behind, so `a + (b & c)` and `a + b & c` build
//! the same tree.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mult {
    Set,
    One,
    Lone,
    Some,
}

impl fmt::Display for Mult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mult::Set => "set",
            Mult::One => "one",
            Mult::Lone => "lone",
            Mult::Some => "some",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: Span) -> Self {
        Ident {
            name: name.into(),
            span,
        }
    }
}

/// Parsed model: the original text plus its paragraphs in source order.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    pub text: String,
    pub paragraphs: Vec<Paragraph>,
}

impl SourceModel {
    pub fn paragraph(&self, name: &str) -> Option<&Paragraph> {
        self.paragraphs.iter().find(|p| p.name == name)
    }

    pub fn commands(&self) -> impl Iterator<Item = (&Paragraph, &Command)> {
        self.paragraphs.iter().filter_map(|p| match &p.body {
            ParagraphBody::Command(c) => Some((p, c)),
            _ => None,
        })
    }

    pub fn has_secrets(&self) -> bool {
        self.paragraphs.iter().any(|p| p.secret)
    }

    /// Source text of a paragraph (without its `//SECRET` marker).
    pub fn paragraph_text(&self, paragraph: &Paragraph) -> &str {
        &self.text[paragraph.span.start..paragraph.span.end]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParagraphKind {
    SigDecl,
    Fact,
    Pred,
    Assert,
    RunCmd,
    CheckCmd,
}

impl ParagraphKind {
    pub fn is_command(self) -> bool {
        matches!(self, ParagraphKind::RunCmd | ParagraphKind::CheckCmd)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Paragraph {
    pub kind: ParagraphKind,
    /// Declared name, or a generated `fact$N` / `run$N` / `check$N`.
    pub name: String,
    /// Whether `name` was generated.
    pub anonymous: bool,
    pub secret: bool,
    pub span: Span,
    /// Span of the `//SECRET` marker when `secret` is set.
    pub marker: Option<Span>,
    pub body: ParagraphBody,
}

impl Paragraph {
    /// Every global name this paragraph introduces: the paragraph name plus
    /// any additional sigs and all fields of a signature paragraph.
    pub fn declared_names(&self) -> Vec<&str> {
        match &self.body {
            ParagraphBody::Sigs(sigs) => sigs
                .iter()
                .flat_map(|s| {
                    std::iter::once(s.name.name.as_str())
                        .chain(s.fields.iter().map(|f| f.name.name.as_str()))
                })
                .collect(),
            // `check a` borrows the name of the assertion it checks.
            ParagraphBody::Command(Command {
                target: CommandTarget::Named(id),
                ..
            }) if id.name == self.name => Vec::new(),
            _ => vec![self.name.as_str()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParagraphBody {
    /// `sig A, B extends C { ... }` declares one sig per name sharing fields.
    Sigs(Vec<SigDecl>),
    Fact(Formula),
    Pred(PredDecl),
    Assert(Formula),
    Command(Command),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigDecl {
    pub name: Ident,
    pub is_abstract: bool,
    pub mult: Mult,
    pub parent: Option<Ident>,
    pub fields: Vec<FieldDecl>,
}

/// A field `name: columns`, whose implicit first column is the owning sig.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecl {
    pub name: Ident,
    /// One or two sig names after the owner column.
    pub columns: Vec<Ident>,
    /// Multiplicity of the range for binary fields.
    pub range_mult: Mult,
    /// `A m -> n B` multiplicities of ternary fields.
    pub arrow_mult: Option<(Mult, Mult)>,
}

impl FieldDecl {
    pub fn arity(&self) -> usize {
        self.columns.len() + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredDecl {
    pub params: Vec<ParamDecl>,
    pub body: Formula,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDecl {
    pub name: Ident,
    pub bound: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Run,
    Check,
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CommandKind::Run => "run",
            CommandKind::Check => "check",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub kind: CommandKind,
    pub target: CommandTarget,
    pub scope: Scope,
    pub expect: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandTarget {
    /// A predicate (run) or assertion (check) by name.
    Named(Ident),
    Block(Formula),
}

pub const DEFAULT_SCOPE: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scope {
    pub default: u32,
    /// `for exactly N`: every sig without an override is exact.
    pub default_exactly: bool,
    pub overrides: Vec<ScopeOverride>,
}

impl Default for Scope {
    fn default() -> Self {
        Scope {
            default: DEFAULT_SCOPE,
            default_exactly: false,
            overrides: Vec::new(),
        }
    }
}

impl Scope {
    pub fn new(default: u32) -> Self {
        Scope {
            default,
            ..Scope::default()
        }
    }

    pub fn exactly(default: u32) -> Self {
        Scope {
            default,
            default_exactly: true,
            overrides: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeOverride {
    pub sig: Ident,
    pub bound: u32,
    pub exactly: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantKind {
    All,
    Some,
    No,
    Lone,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultKind {
    Some,
    No,
    Lone,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogicOp {
    And,
    Or,
    Implies,
    Iff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompareOp {
    In,
    Eq,
    Neq,
    NotIn,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Quant {
        kind: QuantKind,
        decls: Vec<(Ident, Expr)>,
        body: Box<Formula>,
        span: Span,
    },
    Binary {
        op: LogicOp,
        left: Box<Formula>,
        right: Box<Formula>,
        span: Span,
    },
    Not {
        formula: Box<Formula>,
        span: Span,
    },
    Compare {
        op: CompareOp,
        left: Expr,
        right: Expr,
        span: Span,
    },
    Mult {
        kind: MultKind,
        expr: Expr,
        span: Span,
    },
    PredCall {
        name: Ident,
        args: Vec<Expr>,
        span: Span,
    },
    /// `{ f1 f2 ... }`, the conjunction of its members (true when empty).
    Block {
        formulas: Vec<Formula>,
        span: Span,
    },
}

impl Formula {
    pub fn span(&self) -> Span {
        match self {
            Formula::Quant { span, .. }
            | Formula::Binary { span, .. }
            | Formula::Not { span, .. }
            | Formula::Compare { span, .. }
            | Formula::Mult { span, .. }
            | Formula::PredCall { span, .. }
            | Formula::Block { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnaryOp {
    Transpose,
    Closure,
    ReflexiveClosure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryOp {
    Union,
    Diff,
    Inter,
    Product,
    Join,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// A sig, field, quantified variable or predicate parameter; which one is
    /// decided by name resolution.
    Name(Ident),
    Univ(Span),
    Iden(Span),
    None(Span),
    Unary {
        op: UnaryOp,
        expr: Box<Expr>,
        span: Span,
    },
    Binary {
        op: BinaryOp,
        left: Box<Expr>,
        right: Box<Expr>,
        span: Span,
    },
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Name(id) => id.span,
            Expr::Univ(s) | Expr::Iden(s) | Expr::None(s) => *s,
            Expr::Unary { span, .. } | Expr::Binary { span, .. } => *span,
        }
    }
}
