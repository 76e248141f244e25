//! Recursive-descent parser for MiniAlloy.
//!
//! Formula precedence, loosest first: `or`, `iff`, `implies` (right
//! associative), `and`, `not`. Quantifier bodies extend as far right as
//! possible. Expression precedence, loosest first: `+ -`, `&`, `->`, `.` and
//! box join, then the prefix operators `~ ^ *`.

use super::ast::*;
use super::lexer::{text_position, tokenize, Token, TokenKind};
use super::Span;
use crate::error::ParseError;

pub const DEFAULT_MAX_SOURCE_BYTES: usize = 64 * 1024;

pub fn parse(text: &str) -> Result<SourceModel, ParseError> {
    parse_with_limit(text, DEFAULT_MAX_SOURCE_BYTES)
}

pub fn parse_with_limit(text: &str, max_bytes: usize) -> Result<SourceModel, ParseError> {
    if text.len() > max_bytes {
        return Err(ParseError::SourceTooLarge {
            size: text.len(),
            limit: max_bytes,
        });
    }
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        text,
        tokens,
        pos: 0,
        counters: [0; 3],
    };
    let paragraphs = parser.paragraphs()?;
    Ok(SourceModel {
        text: text.to_string(),
        paragraphs,
    })
}

type PResult<T> = Result<T, ParseError>;

struct Parser<'a> {
    text: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    /// Next anonymous index for facts, runs and checks.
    counters: [usize; 3],
}

fn is_paragraph_start(kind: &TokenKind) -> bool {
    use TokenKind::*;
    matches!(
        kind,
        Sig | Abstract | One | Lone | Some | Fact | Pred | Assert | Run | Check | Ident(_)
    )
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, offset: usize) -> Option<&TokenKind> {
        self.tokens.get(self.pos + offset).map(|t| &t.kind)
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek() == Some(kind)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        self.pos += 1;
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> Option<Span> {
        if self.at(kind) {
            Some(self.bump().span)
        } else {
            None
        }
    }

    fn current_offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map_or(self.text.len(), |t| t.span.start)
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.tokens[self.pos - 1].span.end
        }
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let position = text_position(self.text, self.current_offset());
        if let Some(TokenKind::Unsupported(s) | TokenKind::UnsupportedOp(s)) = self.peek() {
            return Err(ParseError::Unsupported {
                construct: describe_unsupported(s).to_string(),
                position,
            });
        }
        Err(ParseError::Unexpected {
            position,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self
                .peek()
                .map_or_else(|| "end of input".to_string(), |k| k.describe()),
        })
    }

    fn unsupported<T>(&self, construct: &str) -> PResult<T> {
        Err(ParseError::Unsupported {
            construct: construct.to_string(),
            position: text_position(self.text, self.current_offset()),
        })
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> PResult<Span> {
        match self.eat(kind) {
            Some(span) => Ok(span),
            None => self.error(&[what]),
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek() {
            Some(TokenKind::Ident(name)) => {
                let name = name.clone();
                let span = self.bump().span;
                Ok(Ident::new(name, span))
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn anonymous_name(&mut self, kind: ParagraphKind) -> String {
        let (slot, prefix) = match kind {
            ParagraphKind::Fact => (0, "fact"),
            ParagraphKind::RunCmd => (1, "run"),
            ParagraphKind::CheckCmd => (2, "check"),
            _ => unreachable!("only facts and commands are anonymous"),
        };
        let n = self.counters[slot];
        self.counters[slot] += 1;
        format!("{prefix}${n}")
    }

    // ---------------------------------------------------------------------
    // Paragraphs
    // ---------------------------------------------------------------------

    fn paragraphs(&mut self) -> PResult<Vec<Paragraph>> {
        let mut out = Vec::new();
        while let Some(kind) = self.peek() {
            let marker = if *kind == TokenKind::SecretMarker {
                let marker = self.bump().span;
                let follows = self.peek().is_some_and(is_paragraph_start)
                    && self.text[marker.end..self.current_offset()]
                        .chars()
                        .all(char::is_whitespace);
                if !follows {
                    return Err(ParseError::DanglingSecretMarker {
                        position: text_position(self.text, marker.start),
                    });
                }
                Some(marker)
            } else {
                None
            };
            let mut paragraph = self.paragraph()?;
            paragraph.secret = marker.is_some();
            paragraph.marker = marker;
            out.push(paragraph);
        }
        Ok(out)
    }

    fn paragraph(&mut self) -> PResult<Paragraph> {
        let start = self.current_offset();
        match self.peek() {
            Some(TokenKind::Sig | TokenKind::Abstract | TokenKind::One | TokenKind::Lone | TokenKind::Some) => {
                self.sig_paragraph(start)
            }
            Some(TokenKind::Fact) => {
                self.bump();
                let name = match self.peek() {
                    Some(TokenKind::Ident(_)) => Some(self.ident()?.name),
                    _ => None,
                };
                let body = self.block()?;
                let (name, anonymous) = match name {
                    Some(n) => (n, false),
                    None => (self.anonymous_name(ParagraphKind::Fact), true),
                };
                Ok(self.finish(ParagraphKind::Fact, name, anonymous, start, ParagraphBody::Fact(body)))
            }
            Some(TokenKind::Pred) => {
                self.bump();
                let name = self.ident()?;
                let params = self.params()?;
                let body = self.block()?;
                Ok(self.finish(
                    ParagraphKind::Pred,
                    name.name,
                    false,
                    start,
                    ParagraphBody::Pred(PredDecl { params, body }),
                ))
            }
            Some(TokenKind::Assert) => {
                self.bump();
                let name = self.ident()?;
                let body = self.block()?;
                Ok(self.finish(ParagraphKind::Assert, name.name, false, start, ParagraphBody::Assert(body)))
            }
            Some(TokenKind::Run | TokenKind::Check) => self.command(None, start),
            Some(TokenKind::Ident(_)) if self.peek_at(1) == Some(&TokenKind::Colon) => {
                let label = self.ident()?;
                self.bump();
                if !matches!(self.peek(), Some(TokenKind::Run | TokenKind::Check)) {
                    return self.error(&["run", "check"]);
                }
                self.command(Some(label), start)
            }
            _ => self.error(&["sig", "fact", "pred", "assert", "run", "check"]),
        }
    }

    fn finish(
        &self,
        kind: ParagraphKind,
        name: String,
        anonymous: bool,
        start: usize,
        body: ParagraphBody,
    ) -> Paragraph {
        Paragraph {
            kind,
            name,
            anonymous,
            secret: false,
            span: Span::new(start, self.prev_end()),
            marker: None,
            body,
        }
    }

    fn sig_paragraph(&mut self, start: usize) -> PResult<Paragraph> {
        let mut is_abstract = false;
        let mut mult = None;
        loop {
            match self.peek() {
                Some(TokenKind::Abstract) if !is_abstract => {
                    self.bump();
                    is_abstract = true;
                }
                Some(TokenKind::One) if mult.is_none() => {
                    self.bump();
                    mult = Some(Mult::One);
                }
                Some(TokenKind::Lone) if mult.is_none() => {
                    self.bump();
                    mult = Some(Mult::Lone);
                }
                Some(TokenKind::Some) if mult.is_none() => {
                    self.bump();
                    mult = Some(Mult::Some);
                }
                _ => break,
            }
        }
        self.expect(&TokenKind::Sig, "sig")?;
        let mut names = vec![self.ident()?];
        while self.eat(&TokenKind::Comma).is_some() {
            names.push(self.ident()?);
        }
        let parent = if self.eat(&TokenKind::Extends).is_some() {
            Some(self.ident()?)
        } else if self.at(&TokenKind::In) {
            return self.unsupported("subset signature (`in`)");
        } else {
            None
        };
        self.expect(&TokenKind::LBrace, "{")?;
        let mut fields = Vec::new();
        if !self.at(&TokenKind::RBrace) {
            loop {
                fields.extend(self.field_decls()?);
                if self.eat(&TokenKind::Comma).is_none() {
                    break;
                }
            }
        }
        self.expect(&TokenKind::RBrace, "}")?;
        if self.at(&TokenKind::LBrace) {
            return self.unsupported("signature fact");
        }
        let sigs: Vec<SigDecl> = names
            .into_iter()
            .map(|name| SigDecl {
                name,
                is_abstract,
                mult: mult.unwrap_or(Mult::Set),
                parent: parent.clone(),
                fields: fields.clone(),
            })
            .collect();
        let name = sigs[0].name.name.clone();
        Ok(self.finish(ParagraphKind::SigDecl, name, false, start, ParagraphBody::Sigs(sigs)))
    }

    fn mult_keyword(&mut self) -> Option<Mult> {
        let m = match self.peek()? {
            TokenKind::Set => Mult::Set,
            TokenKind::One => Mult::One,
            TokenKind::Lone => Mult::Lone,
            TokenKind::Some => Mult::Some,
            _ => return None,
        };
        self.bump();
        Some(m)
    }

    fn field_decls(&mut self) -> PResult<Vec<FieldDecl>> {
        if self.at(&TokenKind::Unsupported("disj")) {
            return self.unsupported("`disj` field");
        }
        let mut names = vec![self.ident()?];
        while self.eat(&TokenKind::Comma).is_some() {
            names.push(self.ident()?);
        }
        self.expect(&TokenKind::Colon, ":")?;
        let lead = self.mult_keyword();
        let first = self.column()?;
        let left = self.mult_keyword();
        let (columns, range_mult, arrow_mult) = if self.eat(&TokenKind::Arrow).is_some() {
            if lead.is_some() {
                return self.unsupported("multiplicity before an arrow field's first column");
            }
            let right = self.mult_keyword();
            let second = self.column()?;
            if self.at(&TokenKind::Arrow) || self.peek().is_some_and(|k| matches!(k, TokenKind::One | TokenKind::Lone | TokenKind::Some | TokenKind::Set)) {
                return self.unsupported("field of arity greater than 3");
            }
            let arrow = match (left, right) {
                (None, None) => None,
                (l, r) => Some((l.unwrap_or(Mult::Set), r.unwrap_or(Mult::Set))),
            };
            (vec![first, second], Mult::Set, arrow)
        } else {
            if left.is_some() {
                return self.error(&["->"]);
            }
            (vec![first], lead.unwrap_or(Mult::One), None)
        };
        Ok(names
            .into_iter()
            .map(|name| FieldDecl {
                name,
                columns: columns.clone(),
                range_mult,
                arrow_mult,
            })
            .collect())
    }

    fn column(&mut self) -> PResult<Ident> {
        match self.peek() {
            Some(TokenKind::Ident(_)) => self.ident(),
            Some(TokenKind::Unsupported(_)) => self.error(&["sig name"]),
            Some(TokenKind::LParen | TokenKind::Univ | TokenKind::Tilde | TokenKind::Caret) => {
                self.unsupported("field bound that is not a sig name")
            }
            _ => self.error(&["sig name"]),
        }
    }

    fn params(&mut self) -> PResult<Vec<ParamDecl>> {
        let close = if self.eat(&TokenKind::LBracket).is_some() {
            TokenKind::RBracket
        } else if self.eat(&TokenKind::LParen).is_some() {
            TokenKind::RParen
        } else {
            return Ok(Vec::new());
        };
        let mut params = Vec::new();
        if self.eat(&close).is_some() {
            return Ok(params);
        }
        loop {
            if self.at(&TokenKind::Unsupported("disj")) {
                return self.unsupported("`disj` parameter");
            }
            let mut names = vec![self.ident()?];
            while self.eat(&TokenKind::Comma).is_some() {
                names.push(self.ident()?);
            }
            self.expect(&TokenKind::Colon, ":")?;
            match self.mult_keyword() {
                None | Some(Mult::One) => {}
                Some(_) => return self.unsupported("parameter multiplicity other than `one`"),
            }
            let bound = self.expr()?;
            params.extend(names.into_iter().map(|name| ParamDecl {
                name,
                bound: bound.clone(),
            }));
            if self.eat(&TokenKind::Comma).is_none() {
                break;
            }
        }
        let what = if close == TokenKind::RBracket { "]" } else { ")" };
        self.expect(&close, what)?;
        Ok(params)
    }

    fn command(&mut self, label: Option<Ident>, start: usize) -> PResult<Paragraph> {
        let kind = match self.bump().kind {
            TokenKind::Run => CommandKind::Run,
            TokenKind::Check => CommandKind::Check,
            _ => unreachable!("caller checked for run/check"),
        };
        let pkind = match kind {
            CommandKind::Run => ParagraphKind::RunCmd,
            CommandKind::Check => ParagraphKind::CheckCmd,
        };
        let (own_name, target) = match self.peek() {
            Some(TokenKind::Ident(_)) => {
                let id = self.ident()?;
                if self.at(&TokenKind::LBrace) {
                    (Some(id.name), CommandTarget::Block(self.block()?))
                } else {
                    (Some(id.name.clone()), CommandTarget::Named(id))
                }
            }
            Some(TokenKind::LBrace) => (None, CommandTarget::Block(self.block()?)),
            _ => return self.error(&["name", "{"]),
        };
        let scope = if self.eat(&TokenKind::For).is_some() {
            self.scope()?
        } else {
            Scope::default()
        };
        let expect = if self.eat(&TokenKind::Expect).is_some() {
            match self.peek() {
                Some(TokenKind::Num(n)) => {
                    let n = *n;
                    self.bump();
                    Some(n)
                }
                _ => return self.error(&["number"]),
            }
        } else {
            None
        };
        let (name, anonymous) = match label.map(|l| l.name).or(own_name) {
            Some(n) => (n, false),
            None => (self.anonymous_name(pkind), true),
        };
        Ok(self.finish(
            pkind,
            name,
            anonymous,
            start,
            ParagraphBody::Command(Command {
                kind,
                target,
                scope,
                expect,
            }),
        ))
    }

    fn number(&mut self) -> PResult<u32> {
        match self.peek() {
            Some(TokenKind::Num(n)) => {
                let n = *n;
                self.bump();
                Ok(n)
            }
            _ => self.error(&["number"]),
        }
    }

    fn scope(&mut self) -> PResult<Scope> {
        let mut scope = Scope::default();
        let exactly = self.eat(&TokenKind::Exactly).is_some();
        let n = self.number()?;
        if matches!(self.peek(), Some(TokenKind::Ident(_))) {
            // `for 2 A, 3 B`: no default given.
            let sig = self.ident()?;
            scope.overrides.push(ScopeOverride {
                sig,
                bound: n,
                exactly,
            });
            while self.eat(&TokenKind::Comma).is_some() {
                scope.overrides.push(self.scope_override()?);
            }
            return Ok(scope);
        }
        scope.default = n;
        scope.default_exactly = exactly;
        if self.eat(&TokenKind::But).is_some() {
            loop {
                scope.overrides.push(self.scope_override()?);
                if self.eat(&TokenKind::Comma).is_none() {
                    break;
                }
            }
        }
        Ok(scope)
    }

    fn scope_override(&mut self) -> PResult<ScopeOverride> {
        let exactly = self.eat(&TokenKind::Exactly).is_some();
        let bound = self.number()?;
        let sig = self.ident()?;
        Ok(ScopeOverride {
            sig,
            bound,
            exactly,
        })
    }

    // ---------------------------------------------------------------------
    // Formulas
    // ---------------------------------------------------------------------

    fn block(&mut self) -> PResult<Formula> {
        let open = self.expect(&TokenKind::LBrace, "{")?;
        let mut formulas = Vec::new();
        while !self.at(&TokenKind::RBrace) {
            if self.peek().is_none() {
                return self.error(&["}"]);
            }
            formulas.push(self.formula()?);
        }
        let close = self.bump().span;
        Ok(Formula::Block {
            formulas,
            span: open.to(close),
        })
    }

    pub(crate) fn formula(&mut self) -> PResult<Formula> {
        self.or_formula()
    }

    fn binary(op: LogicOp, left: Formula, right: Formula) -> Formula {
        let span = left.span().to(right.span());
        Formula::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
            span,
        }
    }

    fn or_formula(&mut self) -> PResult<Formula> {
        let mut left = self.iff_formula()?;
        while self.eat(&TokenKind::Or).or_else(|| self.eat(&TokenKind::OrOr)).is_some() {
            let right = self.iff_formula()?;
            left = Self::binary(LogicOp::Or, left, right);
        }
        Ok(left)
    }

    fn iff_formula(&mut self) -> PResult<Formula> {
        let mut left = self.implies_formula()?;
        while self
            .eat(&TokenKind::Iff)
            .or_else(|| self.eat(&TokenKind::DoubleArrow))
            .is_some()
        {
            let right = self.implies_formula()?;
            left = Self::binary(LogicOp::Iff, left, right);
        }
        Ok(left)
    }

    fn implies_formula(&mut self) -> PResult<Formula> {
        let left = self.and_formula()?;
        if self
            .eat(&TokenKind::Implies)
            .or_else(|| self.eat(&TokenKind::FatArrow))
            .is_some()
        {
            let right = self.implies_formula()?;
            if self.at(&TokenKind::Unsupported("else")) {
                return self.unsupported("`implies ... else`");
            }
            return Ok(Self::binary(LogicOp::Implies, left, right));
        }
        Ok(left)
    }

    fn and_formula(&mut self) -> PResult<Formula> {
        let mut left = self.unary_formula()?;
        while self.eat(&TokenKind::And).or_else(|| self.eat(&TokenKind::AndAnd)).is_some() {
            let right = self.unary_formula()?;
            left = Self::binary(LogicOp::And, left, right);
        }
        Ok(left)
    }

    fn quant_kind(kind: &TokenKind) -> Option<QuantKind> {
        Some(match kind {
            TokenKind::All => QuantKind::All,
            TokenKind::Some => QuantKind::Some,
            TokenKind::No => QuantKind::No,
            TokenKind::Lone => QuantKind::Lone,
            TokenKind::One => QuantKind::One,
            _ => return None,
        })
    }

    fn is_quantifier(&self) -> bool {
        let Some(kind) = self.peek() else { return false };
        if Self::quant_kind(kind).is_none() {
            return false;
        }
        *kind == TokenKind::All
            || matches!(self.peek_at(1), Some(TokenKind::Unsupported("disj")))
            || (matches!(self.peek_at(1), Some(TokenKind::Ident(_)))
                && matches!(self.peek_at(2), Some(TokenKind::Comma | TokenKind::Colon)))
    }

    fn unary_formula(&mut self) -> PResult<Formula> {
        let start = self.current_offset();
        match self.peek() {
            Some(TokenKind::Not | TokenKind::Bang) => {
                self.bump();
                let inner = self.unary_formula()?;
                let span = Span::new(start, inner.span().end);
                Ok(Formula::Not {
                    formula: Box::new(inner),
                    span,
                })
            }
            Some(TokenKind::LBrace) => self.block(),
            Some(TokenKind::Unsupported("let")) => self.unsupported("`let`"),
            Some(k) if self.is_quantifier() => {
                let kind = Self::quant_kind(k).expect("checked");
                self.bump();
                self.quantifier(kind, start)
            }
            Some(TokenKind::Some | TokenKind::No | TokenKind::Lone | TokenKind::One) => {
                let kind = match self.bump().kind {
                    TokenKind::Some => MultKind::Some,
                    TokenKind::No => MultKind::No,
                    TokenKind::Lone => MultKind::Lone,
                    _ => MultKind::One,
                };
                let expr = self.expr()?;
                let span = Span::new(start, expr.span().end);
                Ok(Formula::Mult { kind, expr, span })
            }
            _ => self.atomic_formula(),
        }
    }

    fn quantifier(&mut self, kind: QuantKind, start: usize) -> PResult<Formula> {
        let mut decls = Vec::new();
        loop {
            if self.at(&TokenKind::Unsupported("disj")) {
                return self.unsupported("`disj` quantifier");
            }
            let mut names = vec![self.ident()?];
            while self.eat(&TokenKind::Comma).is_some() {
                names.push(self.ident()?);
            }
            self.expect(&TokenKind::Colon, ":")?;
            match self.mult_keyword() {
                None | Some(Mult::One) => {}
                Some(_) => return self.unsupported("higher-order quantifier"),
            }
            let bound = self.expr()?;
            decls.extend(names.into_iter().map(|n| (n, bound.clone())));
            if self.eat(&TokenKind::Comma).is_none() {
                break;
            }
        }
        let body = if self.eat(&TokenKind::Bar).is_some() {
            self.formula()?
        } else if self.at(&TokenKind::LBrace) {
            self.block()?
        } else {
            return self.error(&["|", "{"]);
        };
        let span = Span::new(start, body.span().end);
        Ok(Formula::Quant {
            kind,
            decls,
            body: Box::new(body),
            span,
        })
    }

    fn comparison_op(&mut self) -> Option<CompareOp> {
        let op = match (self.peek()?, self.peek_at(1)) {
            (TokenKind::In, _) => {
                self.bump();
                CompareOp::In
            }
            (TokenKind::Eq, _) => {
                self.bump();
                CompareOp::Eq
            }
            (TokenKind::NotEq, _) => {
                self.bump();
                CompareOp::Neq
            }
            (TokenKind::Not | TokenKind::Bang, Some(TokenKind::In)) => {
                self.bump();
                self.bump();
                CompareOp::NotIn
            }
            _ => return None,
        };
        Some(op)
    }

    /// A comparison, a predicate call, or a parenthesized formula.
    fn atomic_formula(&mut self) -> PResult<Formula> {
        let start_pos = self.pos;
        let start = self.current_offset();
        let opens_paren = self.at(&TokenKind::LParen);
        let expr_err = match self.expr() {
            Ok(left) => {
                if let Some(op) = self.comparison_op() {
                    let right = self.expr()?;
                    let span = Span::new(start, right.span().end);
                    return Ok(Formula::Compare {
                        op,
                        left,
                        right,
                        span,
                    });
                }
                if let Some((name, args)) = call_shape(&left) {
                    return Ok(Formula::PredCall {
                        name,
                        args,
                        span: Span::new(start, self.prev_end()),
                    });
                }
                if !opens_paren {
                    return self.error(&["in", "=", "!=", "not in"]);
                }
                None
            }
            Err(e) => Some(e),
        };
        if opens_paren {
            self.pos = start_pos;
            self.bump();
            let inner = self.formula()?;
            self.expect(&TokenKind::RParen, ")")?;
            return Ok(inner);
        }
        Err(expr_err.expect("non-paren failures returned above"))
    }

    // ---------------------------------------------------------------------
    // Expressions
    // ---------------------------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        self.union_expr()
    }

    fn bin_expr(op: BinaryOp, left: Expr, right: Expr) -> Expr {
        let span = left.span().to(right.span());
        Expr::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
            span,
        }
    }

    fn union_expr(&mut self) -> PResult<Expr> {
        let mut left = self.inter_expr()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Plus) => BinaryOp::Union,
                Some(TokenKind::Minus) => BinaryOp::Diff,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.inter_expr()?;
            left = Self::bin_expr(op, left, right);
        }
    }

    fn inter_expr(&mut self) -> PResult<Expr> {
        let mut left = self.product_expr()?;
        while self.eat(&TokenKind::Amp).is_some() {
            let right = self.product_expr()?;
            left = Self::bin_expr(BinaryOp::Inter, left, right);
        }
        Ok(left)
    }

    fn product_expr(&mut self) -> PResult<Expr> {
        let mut left = self.join_expr()?;
        loop {
            if self.at(&TokenKind::Arrow) {
                self.bump();
            } else if matches!(
                (self.peek(), self.peek_at(1)),
                (
                    Some(TokenKind::One | TokenKind::Lone | TokenKind::Some | TokenKind::Set),
                    Some(TokenKind::Arrow)
                )
            ) {
                return self.unsupported("arrow multiplicity inside an expression");
            } else {
                return Ok(left);
            }
            if matches!(
                self.peek(),
                Some(TokenKind::One | TokenKind::Lone | TokenKind::Some | TokenKind::Set)
            ) {
                return self.unsupported("arrow multiplicity inside an expression");
            }
            let right = self.join_expr()?;
            left = Self::bin_expr(BinaryOp::Product, left, right);
        }
    }

    fn join_expr(&mut self) -> PResult<Expr> {
        let mut left = self.unary_expr()?;
        loop {
            if self.eat(&TokenKind::Dot).is_some() {
                let right = self.unary_expr()?;
                left = Self::bin_expr(BinaryOp::Join, left, right);
            } else if self.eat(&TokenKind::LBracket).is_some() {
                let mut args = vec![self.expr()?];
                while self.eat(&TokenKind::Comma).is_some() {
                    args.push(self.expr()?);
                }
                let close = self.expect(&TokenKind::RBracket, "]")?;
                for arg in args {
                    let span = left.span().to(close);
                    left = Expr::Binary {
                        op: BinaryOp::Join,
                        left: Box::new(arg),
                        right: Box::new(left),
                        span,
                    };
                }
            } else {
                return Ok(left);
            }
        }
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        let start = self.current_offset();
        let op = match self.peek() {
            Some(TokenKind::Tilde) => UnaryOp::Transpose,
            Some(TokenKind::Caret) => UnaryOp::Closure,
            Some(TokenKind::Star) => UnaryOp::ReflexiveClosure,
            _ => return self.primary_expr(),
        };
        self.bump();
        let inner = self.unary_expr()?;
        let span = Span::new(start, inner.span().end);
        Ok(Expr::Unary {
            op,
            expr: Box::new(inner),
            span,
        })
    }

    fn primary_expr(&mut self) -> PResult<Expr> {
        match self.peek() {
            Some(TokenKind::Ident(_)) => Ok(Expr::Name(self.ident()?)),
            Some(TokenKind::Univ) => Ok(Expr::Univ(self.bump().span)),
            Some(TokenKind::Iden) => Ok(Expr::Iden(self.bump().span)),
            Some(TokenKind::None) => Ok(Expr::None(self.bump().span)),
            Some(TokenKind::LParen) => {
                self.bump();
                let inner = self.expr()?;
                self.expect(&TokenKind::RParen, ")")?;
                Ok(inner)
            }
            Some(TokenKind::LBrace) => self.unsupported("set comprehension"),
            Some(TokenKind::Num(_)) => self.unsupported("integer literal"),
            _ => self.error(&["expression"]),
        }
    }
}

fn describe_unsupported(token: &str) -> &str {
    match token {
        "#" => "cardinality `#`",
        "<:" => "domain restriction `<:`",
        ":>" => "range restriction `:>`",
        "++" => "override `++`",
        "<" | ">" | "<=" | ">=" | "=<" => "integer comparison",
        "Int" | "int" | "sum" => "integers",
        "seq" => "sequences",
        "String" => "strings",
        "let" => "`let`",
        "fun" => "`fun` declaration",
        "open" | "module" => "module system",
        "disj" => "`disj`",
        "else" => "`else`",
        "this" => "`this`",
        "enum" => "`enum` declaration",
        "private" => "`private`",
        other => other,
    }
}

/// `P`, `P[a, b]` (parsed as `b.(a.P)`) or `a.P` read as a predicate call.
fn call_shape(expr: &Expr) -> Option<(Ident, Vec<Expr>)> {
    let mut args = Vec::new();
    let mut cur = expr;
    loop {
        match cur {
            Expr::Name(id) => {
                args.reverse();
                return Some((id.clone(), args));
            }
            Expr::Binary {
                op: BinaryOp::Join,
                left,
                right,
                ..
            } => {
                args.push((**left).clone());
                cur = right;
            }
            _ => return None,
        }
    }
}
