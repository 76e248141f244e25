//! Name resolution, arity checking and predicate inlining.
//!
//! Every column of a resolved expression carries a bit mask over top-level
//! sigs; joins whose shared columns cannot overlap, and closures whose
//! endpoints cannot meet, are rejected.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::Span;
use crate::error::ResolveError;

pub type SigId = usize;
pub type FieldId = usize;
pub type VarId = usize;

/// Column types: one bit per top-level sig.
pub type TypeMask = u64;

pub const MAX_TOP_LEVEL_SIGS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SigInfo {
    pub name: String,
    pub is_abstract: bool,
    pub mult: Mult,
    pub parent: Option<SigId>,
    pub children: Vec<SigId>,
    /// The top-level ancestor (itself when top-level).
    pub top: SigId,
    pub span: Span,
}

impl SigInfo {
    pub fn is_top_level(&self) -> bool {
        self.parent.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldInfo {
    pub name: String,
    pub owner: SigId,
    /// Column sigs including the owner in position 0.
    pub columns: Vec<SigId>,
    pub range_mult: Mult,
    pub arrow_mult: Option<(Mult, Mult)>,
    pub span: Span,
}

impl FieldInfo {
    pub fn arity(&self) -> usize {
        self.columns.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RExpr {
    pub kind: RExprKind,
    /// Per-column type masks; the arity is `types.len()`.
    pub types: Vec<TypeMask>,
    pub span: Span,
}

impl RExpr {
    pub fn arity(&self) -> usize {
        self.types.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RExprKind {
    Sig(SigId),
    Field(FieldId),
    Var(VarId),
    Univ,
    Iden,
    None,
    Unary(UnaryOp, Box<RExpr>),
    Binary(BinaryOp, Box<RExpr>, Box<RExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RFormula {
    Const(bool),
    Not(Box<RFormula>),
    Logic(LogicOp, Box<RFormula>, Box<RFormula>),
    And(Vec<RFormula>),
    Quant {
        kind: QuantKind,
        decls: Vec<(VarId, RExpr)>,
        body: Box<RFormula>,
    },
    Compare(CompareOp, RExpr, RExpr),
    Mult(MultKind, RExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScope {
    pub default: u32,
    pub default_exactly: bool,
    /// Overrides per top-level sig: (sig, bound, exactly).
    pub overrides: Vec<(SigId, u32, bool)>,
}

impl ResolvedScope {
    /// Bound and exactness for a top-level sig.
    pub fn bound_of(&self, sig: SigId) -> (u32, bool) {
        self.overrides
            .iter()
            .find(|(s, _, _)| *s == sig)
            .map(|&(_, b, e)| (b, e))
            .unwrap_or((self.default, self.default_exactly))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedCommand {
    pub name: String,
    pub kind: CommandKind,
    pub secret: bool,
    pub scope: ResolvedScope,
    /// The run target, or the asserted property of a check (not negated).
    pub body: RFormula,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedModel {
    pub sigs: Vec<SigInfo>,
    pub fields: Vec<FieldInfo>,
    pub facts: Vec<(String, RFormula)>,
    pub asserts: Vec<(String, RFormula)>,
    /// Bodies of parameterless predicates.
    pub preds: Vec<(String, RFormula)>,
    pub commands: Vec<ResolvedCommand>,
    /// Source names of variables, indexed by `VarId`.
    pub var_names: Vec<String>,
}

impl ResolvedModel {
    pub fn sig_id(&self, name: &str) -> Option<SigId> {
        self.sigs.iter().position(|s| s.name == name)
    }

    pub fn field_id(&self, name: &str) -> Option<FieldId> {
        self.fields.iter().position(|f| f.name == name)
    }

    pub fn command(&self, name: &str) -> Option<&ResolvedCommand> {
        self.commands.iter().find(|c| c.name == name)
    }

    pub fn pred(&self, name: &str) -> Option<&RFormula> {
        self.preds.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    pub fn top_level_sigs(&self) -> impl Iterator<Item = SigId> + '_ {
        (0..self.sigs.len()).filter(|&s| self.sigs[s].is_top_level())
    }

    /// All strict descendants of a sig, in declaration order.
    pub fn descendants(&self, sig: SigId) -> Vec<SigId> {
        let mut out = Vec::new();
        let mut stack: Vec<SigId> = self.sigs[sig].children.iter().rev().copied().collect();
        while let Some(s) = stack.pop() {
            out.push(s);
            stack.extend(self.sigs[s].children.iter().rev().copied());
        }
        out
    }

    pub fn is_subsig_of(&self, sig: SigId, ancestor: SigId) -> bool {
        let mut cur = Some(sig);
        while let Some(s) = cur {
            if s == ancestor {
                return true;
            }
            cur = self.sigs[s].parent;
        }
        false
    }

    pub fn all_types(&self) -> TypeMask {
        self.top_level_sigs().fold(0, |m, s| m | self.type_bit(s))
    }

    pub fn type_bit(&self, sig: SigId) -> TypeMask {
        let top = self.sigs[sig].top;
        let index = self.top_level_sigs().position(|s| s == top).expect("top-level");
        1 << index
    }

    /// Conjunction of all facts.
    pub fn facts_formula(&self) -> RFormula {
        RFormula::And(self.facts.iter().map(|(_, f)| f.clone()).collect())
    }
}

pub fn resolve(model: &SourceModel) -> Result<ResolvedModel, ResolveError> {
    let mut r = Resolver::new(model)?;
    r.declare_sigs()?;
    r.declare_fields()?;
    r.resolve_paragraphs()?;
    Ok(r.out)
}

#[derive(Clone)]
enum Binding {
    Var(VarId, TypeMask),
    Param(RExpr),
}

struct Resolver<'m> {
    model: &'m SourceModel,
    out: ResolvedModel,
    preds: HashMap<&'m str, &'m PredDecl>,
    globals: HashSet<&'m str>,
    scopes: Vec<Vec<(String, Binding)>>,
    call_stack: Vec<String>,
}

fn arity_error<T>(message: String, span: Span) -> Result<T, ResolveError> {
    Err(ResolveError::ArityMismatch { message, span })
}

impl<'m> Resolver<'m> {
    fn new(model: &'m SourceModel) -> Result<Self, ResolveError> {
        let mut globals = HashSet::new();
        let mut commands = HashSet::new();
        let mut preds = HashMap::new();
        for p in &model.paragraphs {
            if p.kind.is_command() {
                if !commands.insert(p.name.as_str()) {
                    return Err(ResolveError::DuplicateName {
                        name: p.name.clone(),
                        span: p.span,
                    });
                }
                continue;
            }
            for name in p.declared_names() {
                if !globals.insert(name) {
                    return Err(ResolveError::DuplicateName {
                        name: name.to_string(),
                        span: p.span,
                    });
                }
            }
            if let ParagraphBody::Pred(decl) = &p.body {
                preds.insert(p.name.as_str(), decl);
            }
        }
        Ok(Resolver {
            model,
            out: ResolvedModel {
                sigs: Vec::new(),
                fields: Vec::new(),
                facts: Vec::new(),
                asserts: Vec::new(),
                preds: Vec::new(),
                commands: Vec::new(),
                var_names: Vec::new(),
            },
            preds,
            globals,
            scopes: Vec::new(),
            call_stack: Vec::new(),
        })
    }

    fn sig_decls(&self) -> impl Iterator<Item = &'m SigDecl> {
        self.model.paragraphs.iter().flat_map(|p| match &p.body {
            ParagraphBody::Sigs(sigs) => sigs.as_slice(),
            _ => &[],
        })
    }

    fn declare_sigs(&mut self) -> Result<(), ResolveError> {
        let decls: Vec<&SigDecl> = self.sig_decls().collect();
        let ids: HashMap<&str, SigId> = decls
            .iter()
            .enumerate()
            .map(|(i, d)| (d.name.name.as_str(), i))
            .collect();
        let mut parents = Vec::with_capacity(decls.len());
        for d in &decls {
            let parent = match &d.parent {
                None => None,
                Some(p) => match ids.get(p.name.as_str()) {
                    Some(&id) => Some(id),
                    None if self.globals.contains(p.name.as_str()) => {
                        return Err(ResolveError::WrongKind {
                            name: p.name.clone(),
                            expected: "sig",
                            span: p.span,
                        })
                    }
                    None => {
                        return Err(ResolveError::UnknownName {
                            name: p.name.clone(),
                            span: p.span,
                        })
                    }
                },
            };
            parents.push(parent);
        }
        let mut tops = Vec::with_capacity(decls.len());
        for (i, d) in decls.iter().enumerate() {
            let mut seen = HashSet::from([i]);
            let mut cur = i;
            while let Some(p) = parents[cur] {
                if !seen.insert(p) {
                    return Err(ResolveError::CyclicExtends {
                        name: d.name.name.clone(),
                        span: d.name.span,
                    });
                }
                cur = p;
            }
            tops.push(cur);
        }
        for (i, d) in decls.iter().enumerate() {
            self.out.sigs.push(SigInfo {
                name: d.name.name.clone(),
                is_abstract: d.is_abstract,
                mult: d.mult,
                parent: parents[i],
                children: (0..decls.len()).filter(|&c| parents[c] == Some(i)).collect(),
                top: tops[i],
                span: d.name.span,
            });
        }
        if self.out.top_level_sigs().count() > MAX_TOP_LEVEL_SIGS {
            return Err(ResolveError::ArityMismatch {
                message: format!("more than {MAX_TOP_LEVEL_SIGS} top-level sigs"),
                span: Span::default(),
            });
        }
        Ok(())
    }

    fn sig_ref(&self, id: &Ident) -> Result<SigId, ResolveError> {
        match self.out.sig_id(&id.name) {
            Some(s) => Ok(s),
            None if self.globals.contains(id.name.as_str()) => Err(ResolveError::WrongKind {
                name: id.name.clone(),
                expected: "sig",
                span: id.span,
            }),
            None => Err(ResolveError::UnknownName {
                name: id.name.clone(),
                span: id.span,
            }),
        }
    }

    fn declare_fields(&mut self) -> Result<(), ResolveError> {
        let decls: Vec<&SigDecl> = self.sig_decls().collect();
        for d in decls {
            let owner = self.out.sig_id(&d.name.name).expect("declared");
            for f in &d.fields {
                let mut columns = vec![owner];
                for c in &f.columns {
                    columns.push(self.sig_ref(c)?);
                }
                self.out.fields.push(FieldInfo {
                    name: f.name.name.clone(),
                    owner,
                    columns,
                    range_mult: f.range_mult,
                    arrow_mult: f.arrow_mult,
                    span: f.name.span,
                });
            }
        }
        Ok(())
    }

    fn resolve_paragraphs(&mut self) -> Result<(), ResolveError> {
        let model = self.model;
        for p in &model.paragraphs {
            match &p.body {
                ParagraphBody::Sigs(_) => {}
                ParagraphBody::Fact(f) => {
                    let f = self.top_formula(f)?;
                    self.out.facts.push((p.name.clone(), f));
                }
                ParagraphBody::Assert(f) => {
                    let f = self.top_formula(f)?;
                    self.out.asserts.push((p.name.clone(), f));
                }
                ParagraphBody::Pred(decl) => {
                    // Checked standalone, with parameters as free variables.
                    let f = self.closed_pred(&p.name, decl)?;
                    if decl.params.is_empty() {
                        self.out.preds.push((p.name.clone(), f));
                    }
                }
                ParagraphBody::Command(_) => {}
            }
        }
        for p in &model.paragraphs {
            if let ParagraphBody::Command(cmd) = &p.body {
                let resolved = self.command(p, cmd)?;
                self.out.commands.push(resolved);
            }
        }
        Ok(())
    }

    /// Existential closure of a predicate over its parameters.
    fn closed_pred(&mut self, name: &str, decl: &PredDecl) -> Result<RFormula, ResolveError> {
        self.call_stack.push(name.to_string());
        self.scopes.push(Vec::new());
        let mut decls = Vec::new();
        let result = (|| {
            for param in &decl.params {
                let bound = self.expr(&param.bound)?;
                if bound.arity() != 1 {
                    return arity_error(
                        format!("parameter `{}` needs a unary bound", param.name.name),
                        param.bound.span(),
                    );
                }
                let var = self.fresh_var(&param.name.name);
                self.scopes
                    .last_mut()
                    .expect("pushed")
                    .push((param.name.name.clone(), Binding::Var(var, bound.types[0])));
                decls.push((var, bound));
            }
            self.formula(&decl.body)
        })();
        self.scopes.pop();
        self.call_stack.pop();
        let body = result?;
        Ok(if decls.is_empty() {
            body
        } else {
            RFormula::Quant {
                kind: QuantKind::Some,
                decls,
                body: Box::new(body),
            }
        })
    }

    fn command(&mut self, p: &Paragraph, cmd: &Command) -> Result<ResolvedCommand, ResolveError> {
        let body = match &cmd.target {
            CommandTarget::Block(f) => self.top_formula(f)?,
            CommandTarget::Named(id) => match cmd.kind {
                CommandKind::Run => match self.preds.get(id.name.as_str()) {
                    Some(decl) => self.closed_pred(&id.name, decl)?,
                    None => return Err(self.not_a(id, "predicate")),
                },
                CommandKind::Check => match self.out.asserts.iter().find(|(n, _)| *n == id.name) {
                    Some((_, f)) => f.clone(),
                    None => return Err(self.not_a(id, "assertion")),
                },
            },
        };
        let scope = &cmd.scope;
        if scope.default == 0 {
            return Err(ResolveError::WrongKind {
                name: "0".into(),
                expected: "positive default scope",
                span: p.span,
            });
        }
        let mut overrides: Vec<(SigId, u32, bool)> = Vec::new();
        for o in &scope.overrides {
            let sig = self.sig_ref(&o.sig)?;
            if !self.out.sigs[sig].is_top_level() {
                return Err(ResolveError::WrongKind {
                    name: o.sig.name.clone(),
                    expected: "top-level sig",
                    span: o.sig.span,
                });
            }
            if overrides.iter().any(|(s, _, _)| *s == sig) {
                return Err(ResolveError::DuplicateName {
                    name: o.sig.name.clone(),
                    span: o.sig.span,
                });
            }
            overrides.push((sig, o.bound, o.exactly));
        }
        Ok(ResolvedCommand {
            name: p.name.clone(),
            kind: cmd.kind,
            secret: p.secret,
            scope: ResolvedScope {
                default: scope.default,
                default_exactly: scope.default_exactly,
                overrides,
            },
            body,
        })
    }

    fn not_a(&self, id: &Ident, expected: &'static str) -> ResolveError {
        if self.globals.contains(id.name.as_str()) {
            ResolveError::WrongKind {
                name: id.name.clone(),
                expected,
                span: id.span,
            }
        } else {
            ResolveError::UnknownName {
                name: id.name.clone(),
                span: id.span,
            }
        }
    }

    fn fresh_var(&mut self, name: &str) -> VarId {
        self.out.var_names.push(name.to_string());
        self.out.var_names.len() - 1
    }

    fn lookup_local(&self, name: &str) -> Option<&Binding> {
        self.scopes
            .last()?
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b)
    }

    fn top_formula(&mut self, f: &Formula) -> Result<RFormula, ResolveError> {
        self.scopes.push(Vec::new());
        let result = self.formula(f);
        self.scopes.pop();
        result
    }

    fn formula(&mut self, f: &Formula) -> Result<RFormula, ResolveError> {
        Ok(match f {
            Formula::Block { formulas, .. } => RFormula::And(
                formulas
                    .iter()
                    .map(|f| self.formula(f))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::Not { formula, .. } => RFormula::Not(Box::new(self.formula(formula)?)),
            Formula::Binary {
                op, left, right, ..
            } => RFormula::Logic(
                *op,
                Box::new(self.formula(left)?),
                Box::new(self.formula(right)?),
            ),
            Formula::Compare {
                op,
                left,
                right,
                span,
            } => {
                let l = self.expr(left)?;
                let r = self.expr(right)?;
                if l.arity() != r.arity() {
                    return arity_error(
                        format!("comparison of arity {} with arity {}", l.arity(), r.arity()),
                        *span,
                    );
                }
                RFormula::Compare(*op, l, r)
            }
            Formula::Mult { kind, expr, .. } => RFormula::Mult(*kind, self.expr(expr)?),
            Formula::Quant {
                kind, decls, body, ..
            } => {
                let depth = self.scopes.last().expect("scope").len();
                let result = (|| {
                    let mut rdecls = Vec::new();
                    for (name, bound) in decls {
                        let bound = self.expr(bound)?;
                        if bound.arity() != 1 {
                            return arity_error(
                                format!("variable `{}` needs a unary bound", name.name),
                                name.span,
                            );
                        }
                        let var = self.fresh_var(&name.name);
                        self.scopes
                            .last_mut()
                            .expect("scope")
                            .push((name.name.clone(), Binding::Var(var, bound.types[0])));
                        rdecls.push((var, bound));
                    }
                    let body = self.formula(body)?;
                    Ok(RFormula::Quant {
                        kind: *kind,
                        decls: rdecls,
                        body: Box::new(body),
                    })
                })();
                self.scopes.last_mut().expect("scope").truncate(depth);
                result?
            }
            Formula::PredCall { name, args, span } => self.call(name, args, *span)?,
        })
    }

    fn call(&mut self, name: &Ident, args: &[Expr], span: Span) -> Result<RFormula, ResolveError> {
        if self.lookup_local(&name.name).is_some() || !self.preds.contains_key(name.name.as_str()) {
            let is_known = self.lookup_local(&name.name).is_some() || self.globals.contains(name.name.as_str());
            return Err(if is_known {
                ResolveError::WrongKind {
                    name: name.name.clone(),
                    expected: "predicate or formula",
                    span: name.span,
                }
            } else {
                ResolveError::UnknownName {
                    name: name.name.clone(),
                    span: name.span,
                }
            });
        }
        if self.call_stack.iter().any(|n| *n == name.name) {
            return Err(ResolveError::RecursivePredicate {
                name: name.name.clone(),
                span: name.span,
            });
        }
        let decl = self.preds[name.name.as_str()];
        if decl.params.len() != args.len() {
            return arity_error(
                format!(
                    "`{}` takes {} argument(s), given {}",
                    name.name,
                    decl.params.len(),
                    args.len()
                ),
                span,
            );
        }
        let mut bindings = Vec::new();
        for (param, arg) in decl.params.iter().zip(args) {
            let arg = self.expr(arg)?;
            bindings.push((param.name.name.clone(), Binding::Param(arg)));
        }
        // Parameter bounds are checked for arity in the callee's own scope.
        self.scopes.push(Vec::new());
        self.call_stack.push(name.name.clone());
        let result = (|| {
            for (param, (pname, binding)) in decl.params.iter().zip(&bindings) {
                let bound = self.expr(&param.bound)?;
                let Binding::Param(arg) = binding else { unreachable!() };
                if bound.arity() != arg.arity() {
                    return arity_error(
                        format!(
                            "argument for `{}` has arity {}, expected {}",
                            pname,
                            arg.arity(),
                            bound.arity()
                        ),
                        arg.span,
                    );
                }
                self.scopes.last_mut().expect("pushed").push((pname.clone(), binding.clone()));
            }
            self.formula(&decl.body)
        })();
        self.call_stack.pop();
        self.scopes.pop();
        result
    }

    fn expr(&mut self, e: &Expr) -> Result<RExpr, ResolveError> {
        let all = self.out.all_types();
        let span = e.span();
        let (kind, types) = match e {
            Expr::Name(id) => {
                if let Some(b) = self.lookup_local(&id.name) {
                    match b.clone() {
                        Binding::Var(v, t) => (RExprKind::Var(v), vec![t]),
                        Binding::Param(arg) => return Ok(arg),
                    }
                } else if let Some(s) = self.out.sig_id(&id.name) {
                    (RExprKind::Sig(s), vec![self.out.type_bit(s)])
                } else if let Some(f) = self.out.field_id(&id.name) {
                    let types = self.out.fields[f]
                        .columns
                        .iter()
                        .map(|&c| self.out.type_bit(c))
                        .collect();
                    (RExprKind::Field(f), types)
                } else if self.globals.contains(id.name.as_str()) {
                    return Err(ResolveError::WrongKind {
                        name: id.name.clone(),
                        expected: "relation",
                        span: id.span,
                    });
                } else {
                    return Err(ResolveError::UnknownName {
                        name: id.name.clone(),
                        span: id.span,
                    });
                }
            }
            Expr::Univ(_) => (RExprKind::Univ, vec![all]),
            Expr::Iden(_) => (RExprKind::Iden, vec![all, all]),
            Expr::None(_) => (RExprKind::None, vec![all]),
            Expr::Unary { op, expr, .. } => {
                let inner = self.expr(expr)?;
                if inner.arity() != 2 {
                    return arity_error(
                        format!("{op:?} needs a binary relation, got arity {}", inner.arity()),
                        span,
                    );
                }
                let types = match op {
                    UnaryOp::Transpose => vec![inner.types[1], inner.types[0]],
                    UnaryOp::Closure | UnaryOp::ReflexiveClosure => {
                        if inner.types[0] & inner.types[1] == 0 {
                            return Err(ResolveError::TypeMismatch {
                                message: "closure of a relation whose domain and range are disjoint".into(),
                                span,
                            });
                        }
                        if *op == UnaryOp::Closure {
                            inner.types.clone()
                        } else {
                            vec![all, all]
                        }
                    }
                };
                (RExprKind::Unary(*op, Box::new(inner)), types)
            }
            Expr::Binary {
                op, left, right, ..
            } => {
                let l = self.expr(left)?;
                let r = self.expr(right)?;
                let types = match op {
                    BinaryOp::Union | BinaryOp::Diff | BinaryOp::Inter => {
                        if l.arity() != r.arity() {
                            return arity_error(
                                format!(
                                    "{op:?} of arity {} with arity {}",
                                    l.arity(),
                                    r.arity()
                                ),
                                span,
                            );
                        }
                        match op {
                            BinaryOp::Union => l.types.iter().zip(&r.types).map(|(a, b)| a | b).collect(),
                            BinaryOp::Inter => l.types.iter().zip(&r.types).map(|(a, b)| a & b).collect(),
                            _ => l.types.clone(),
                        }
                    }
                    BinaryOp::Product => l.types.iter().chain(&r.types).copied().collect(),
                    BinaryOp::Join => {
                        if l.arity() + r.arity() < 3 {
                            return arity_error(
                                format!(
                                    "join of arity {} with arity {} has no columns",
                                    l.arity(),
                                    r.arity()
                                ),
                                span,
                            );
                        }
                        let (lt, rt) = (l.types[l.arity() - 1], r.types[0]);
                        if lt & rt == 0 && lt != 0 && rt != 0 {
                            return Err(ResolveError::TypeMismatch {
                                message: "join of relations with disjoint inner columns".into(),
                                span,
                            });
                        }
                        l.types[..l.arity() - 1]
                            .iter()
                            .chain(&r.types[1..])
                            .copied()
                            .collect()
                    }
                };
                (RExprKind::Binary(*op, Box::new(l), Box::new(r)), types)
            }
        };
        Ok(RExpr { kind, types, span })
    }
}
