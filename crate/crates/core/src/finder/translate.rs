//! Translation of a resolved command into a circuit over bounds variables.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use crate::finder::bounds::{Bounds, Lit};
use crate::finder::circuit::{Circuit, NodeId};
use crate::finder::{FinderError, ResourceBudget};
use crate::lang::ast::{BinaryOp, CommandKind, CompareOp, LogicOp, Mult, MultKind, QuantKind, UnaryOp};
use crate::lang::resolve::{RExpr, RExprKind, RFormula, ResolvedCommand, ResolvedModel, SigId, VarId};

/// Sparse relation: candidate tuple to the condition under which it holds.
#[derive(Debug, Clone)]
struct Matrix {
    arity: usize,
    cells: BTreeMap<Vec<usize>, NodeId>,
}

impl Matrix {
    fn empty(arity: usize) -> Self {
        Matrix {
            arity,
            cells: BTreeMap::new(),
        }
    }

    fn get(&self, t: &[usize]) -> NodeId {
        self.cells.get(t).copied().unwrap_or(NodeId::FALSE)
    }

    fn insert(&mut self, t: Vec<usize>, n: NodeId) {
        if n != NodeId::FALSE {
            self.cells.insert(t, n);
        }
    }
}

/// How to read an instance back from a satisfying assignment.
#[derive(Debug, Clone)]
pub struct Decoder {
    pub atom_names: Vec<String>,
    /// Per sig: its name and the literal of each candidate atom.
    pub sigs: Vec<(String, Vec<(usize, Lit)>)>,
    /// Per field: its name and the variable of each candidate tuple.
    pub fields: Vec<(String, Vec<(Vec<usize>, u32)>)>,
    pub presence: Vec<Lit>,
}

impl Decoder {
    pub fn decode(&self, assignment: &[bool]) -> crate::finder::Instance {
        let holds = |l: Lit| match l {
            Lit::Const(b) => b,
            Lit::Var(v) => assignment[v as usize],
        };
        let mut inst = crate::finder::Instance::default();
        for (a, &p) in self.presence.iter().enumerate() {
            if holds(p) {
                inst.universe.push(self.atom_names[a].clone());
            }
        }
        for (name, atoms) in &self.sigs {
            let list = atoms
                .iter()
                .filter(|(_, l)| holds(*l))
                .map(|(a, _)| self.atom_names[*a].clone())
                .collect();
            inst.sigs.insert(name.clone(), list);
        }
        for (name, tuples) in &self.fields {
            let list = tuples
                .iter()
                .filter(|(_, v)| assignment[*v as usize])
                .map(|(t, _)| t.iter().map(|&a| self.atom_names[a].clone()).collect())
                .collect();
            inst.fields.insert(name.clone(), list);
        }
        inst.normalize();
        inst
    }
}

#[derive(Debug, Clone)]
pub struct Translation {
    pub circuit: Circuit,
    pub root: NodeId,
    pub num_bounds_vars: u32,
    pub decoder: Decoder,
}

pub fn translate(
    model: &ResolvedModel,
    command: &ResolvedCommand,
    bounds: &Bounds,
    budget: &ResourceBudget,
) -> Result<Translation, FinderError> {
    translate_with_deadline(model, command, bounds, budget, Instant::now())
}

pub(crate) fn translate_with_deadline(
    model: &ResolvedModel,
    command: &ResolvedCommand,
    bounds: &Bounds,
    budget: &ResourceBudget,
    start: Instant,
) -> Result<Translation, FinderError> {
    let mut t = Translator {
        model,
        bounds,
        c: Circuit::new(bounds.num_vars()),
        env: HashMap::new(),
        cache: HashMap::new(),
        deadline: budget.deadline(start),
        budget,
        ticks: 0,
    };
    let structural = t.structural()?;
    let facts = t.formula(&model.facts_formula())?;
    let target = t.formula(&command.body)?;
    let target = match command.kind {
        CommandKind::Run => target,
        CommandKind::Check => t.c.not(target),
    };
    let root = t.c.and([structural, facts, target]);
    let decoder = t.decoder();
    Ok(Translation {
        circuit: t.c,
        root,
        num_bounds_vars: bounds.num_vars(),
        decoder,
    })
}

struct Translator<'a> {
    model: &'a ResolvedModel,
    bounds: &'a Bounds,
    c: Circuit,
    env: HashMap<VarId, usize>,
    /// Matrices of variable-free expressions, keyed by address.
    cache: HashMap<*const RExpr, Matrix>,
    deadline: Instant,
    budget: &'a ResourceBudget,
    ticks: u32,
}

impl Translator<'_> {
    fn check_limits(&mut self) -> Result<(), FinderError> {
        self.ticks = self.ticks.wrapping_add(1);
        if self.c.len() > self.budget.max_nodes {
            return Err(FinderError::ResourceLimit);
        }
        if self.ticks % 256 == 0 && (Instant::now() >= self.deadline || self.budget.cancelled()) {
            return Err(FinderError::ResourceLimit);
        }
        Ok(())
    }

    fn lit(&self, l: Lit) -> NodeId {
        match l {
            Lit::Const(b) => self.c.constant(b),
            Lit::Var(v) => self.c.var(v),
        }
    }

    fn member(&self, atom: usize, sig: SigId) -> NodeId {
        self.lit(self.bounds.membership(self.model, atom, sig))
    }

    fn mult_gate(&mut self, mult: Mult, values: &[NodeId]) -> NodeId {
        match mult {
            Mult::Set => NodeId::TRUE,
            Mult::One => self.c.exactly_one(values),
            Mult::Lone => self.c.at_most_one(values),
            Mult::Some => self.c.or(values.iter().copied()),
        }
    }

    fn structural(&mut self) -> Result<NodeId, FinderError> {
        let model = self.model;
        let bounds = self.bounds;
        let mut parts = Vec::new();

        for sb in &bounds.top_sigs {
            let atoms: Vec<usize> = sb.atoms.clone().collect();
            for w in atoms.windows(2) {
                let (lo, hi) = (self.lit(bounds.presence(w[0])), self.lit(bounds.presence(w[1])));
                parts.push(self.c.implies(hi, lo));
            }
        }

        for sig in 0..model.sigs.len() {
            let info = &model.sigs[sig];
            let cand: Vec<usize> = bounds.candidates(model, sig).collect();
            let mem: Vec<NodeId> = cand.iter().map(|&a| self.member(a, sig)).collect();
            parts.push(self.mult_gate(info.mult, &mem));
            if let Some(parent) = info.parent {
                for &a in &cand {
                    let (m, p) = (self.member(a, sig), self.member(a, parent));
                    parts.push(self.c.implies(m, p));
                }
            }
            if !info.children.is_empty() {
                for &a in &cand {
                    let kids: Vec<NodeId> = info.children.iter().map(|&k| self.member(a, k)).collect();
                    parts.push(self.c.at_most_one(&kids));
                    if info.is_abstract {
                        let m = self.member(a, sig);
                        let any = self.c.or(kids);
                        parts.push(self.c.implies(m, any));
                    }
                }
            }
            self.check_limits()?;
        }

        for (fid, info) in model.fields.iter().enumerate() {
            let fb = &bounds.fields[fid];
            for (tuple, var) in &fb.tuples {
                let typed: Vec<NodeId> = tuple
                    .iter()
                    .zip(&info.columns)
                    .map(|(&a, &col)| self.member(a, col))
                    .collect();
                let v = self.c.var(*var);
                let all = self.c.and(typed);
                parts.push(self.c.implies(v, all));
            }
            let owners: Vec<usize> = bounds.candidates(model, info.owner).collect();
            for &s in &owners {
                let guard = self.member(s, info.owner);
                match info.arity() {
                    2 => {
                        let values: Vec<NodeId> = bounds
                            .candidates(model, info.columns[1])
                            .map(|b| fb.var(&[s, b]).map_or(NodeId::FALSE, |v| self.c.var(v)))
                            .collect();
                        let m = self.mult_gate(info.range_mult, &values);
                        parts.push(self.c.implies(guard, m));
                    }
                    3 => {
                        let Some((left, right)) = info.arrow_mult else { continue };
                        let col_a: Vec<usize> = bounds.candidates(model, info.columns[1]).collect();
                        let col_b: Vec<usize> = bounds.candidates(model, info.columns[2]).collect();
                        let cell = |t: &Translator, a: usize, b: usize| {
                            fb.var(&[s, a, b]).map_or(NodeId::FALSE, |v| t.c.var(v))
                        };
                        for &a in &col_a {
                            let values: Vec<NodeId> = col_b.iter().map(|&b| cell(self, a, b)).collect();
                            let m = self.mult_gate(right, &values);
                            let ma = self.member(a, info.columns[1]);
                            let g = self.c.and2(guard, ma);
                            parts.push(self.c.implies(g, m));
                        }
                        for &b in &col_b {
                            let values: Vec<NodeId> = col_a.iter().map(|&a| cell(self, a, b)).collect();
                            let m = self.mult_gate(left, &values);
                            let mb = self.member(b, info.columns[2]);
                            let g = self.c.and2(guard, mb);
                            parts.push(self.c.implies(g, m));
                        }
                    }
                    _ => {}
                }
                self.check_limits()?;
            }
        }
        Ok(self.c.and(parts))
    }

    fn formula(&mut self, f: &RFormula) -> Result<NodeId, FinderError> {
        self.check_limits()?;
        Ok(match f {
            RFormula::Const(b) => self.c.constant(*b),
            RFormula::Not(a) => {
                let a = self.formula(a)?;
                self.c.not(a)
            }
            RFormula::Logic(op, a, b) => {
                let (a, b) = (self.formula(a)?, self.formula(b)?);
                match op {
                    LogicOp::And => self.c.and2(a, b),
                    LogicOp::Or => self.c.or2(a, b),
                    LogicOp::Implies => self.c.implies(a, b),
                    LogicOp::Iff => self.c.iff(a, b),
                }
            }
            RFormula::And(fs) => {
                let mut parts = Vec::with_capacity(fs.len());
                for f in fs {
                    parts.push(self.formula(f)?);
                }
                self.c.and(parts)
            }
            RFormula::Quant { kind, decls, body } => {
                let mut cases = Vec::new();
                self.expand(decls, body, NodeId::TRUE, &mut cases)?;
                match kind {
                    QuantKind::All => {
                        let parts: Vec<NodeId> = cases
                            .into_iter()
                            .map(|(g, b)| self.c.implies(g, b))
                            .collect();
                        self.c.and(parts)
                    }
                    _ => {
                        let hits: Vec<NodeId> = cases.into_iter().map(|(g, b)| self.c.and2(g, b)).collect();
                        match kind {
                            QuantKind::Some => self.c.or(hits),
                            QuantKind::No => {
                                let any = self.c.or(hits);
                                self.c.not(any)
                            }
                            QuantKind::Lone => self.c.at_most_one(&hits),
                            QuantKind::One => self.c.exactly_one(&hits),
                            QuantKind::All => unreachable!(),
                        }
                    }
                }
            }
            RFormula::Compare(op, a, b) => {
                let (ma, mb) = (self.expr(a)?, self.expr(b)?);
                match op {
                    CompareOp::In => self.subset(&ma, &mb),
                    CompareOp::NotIn => {
                        let s = self.subset(&ma, &mb);
                        self.c.not(s)
                    }
                    CompareOp::Eq | CompareOp::Neq => {
                        let ab = self.subset(&ma, &mb);
                        let ba = self.subset(&mb, &ma);
                        let eq = self.c.and2(ab, ba);
                        if *op == CompareOp::Eq {
                            eq
                        } else {
                            self.c.not(eq)
                        }
                    }
                }
            }
            RFormula::Mult(kind, e) => {
                let m = self.expr(e)?;
                let values: Vec<NodeId> = m.cells.values().copied().collect();
                match kind {
                    MultKind::Some => self.c.or(values),
                    MultKind::No => {
                        let any = self.c.or(values);
                        self.c.not(any)
                    }
                    MultKind::Lone => self.c.at_most_one(&values),
                    MultKind::One => self.c.exactly_one(&values),
                }
            }
        })
    }

    /// One (guard, body) pair per combination of candidate atoms.
    fn expand(
        &mut self,
        decls: &[(VarId, RExpr)],
        body: &RFormula,
        guard: NodeId,
        out: &mut Vec<(NodeId, NodeId)>,
    ) -> Result<(), FinderError> {
        let Some(((var, bound), rest)) = decls.split_first() else {
            let b = self.formula(body)?;
            out.push((guard, b));
            return Ok(());
        };
        let range = self.expr(bound)?;
        for (tuple, cond) in range.cells {
            let g = self.c.and2(guard, cond);
            if g == NodeId::FALSE {
                continue;
            }
            let saved = self.env.insert(*var, tuple[0]);
            self.expand(rest, body, g, out)?;
            match saved {
                Some(a) => self.env.insert(*var, a),
                None => self.env.remove(var),
            };
        }
        Ok(())
    }

    fn subset(&mut self, a: &Matrix, b: &Matrix) -> NodeId {
        let parts: Vec<NodeId> = a
            .cells
            .iter()
            .map(|(t, &n)| {
                let m = b.get(t);
                self.c.implies(n, m)
            })
            .collect();
        self.c.and(parts)
    }

    fn closed(e: &RExpr) -> bool {
        match &e.kind {
            RExprKind::Var(_) => false,
            RExprKind::Unary(_, a) => Self::closed(a),
            RExprKind::Binary(_, a, b) => Self::closed(a) && Self::closed(b),
            _ => true,
        }
    }

    fn expr(&mut self, e: &RExpr) -> Result<Matrix, FinderError> {
        let key = e as *const RExpr;
        if let Some(m) = self.cache.get(&key) {
            return Ok(m.clone());
        }
        self.check_limits()?;
        let m = self.expr_uncached(e)?;
        if Self::closed(e) {
            self.cache.insert(key, m.clone());
        }
        Ok(m)
    }

    fn universe(&self) -> Vec<usize> {
        (0..self.bounds.atoms.len()).collect()
    }

    fn iden(&self) -> Matrix {
        let mut m = Matrix::empty(2);
        for a in self.universe() {
            m.insert(vec![a, a], self.lit(self.bounds.presence(a)));
        }
        m
    }

    fn expr_uncached(&mut self, e: &RExpr) -> Result<Matrix, FinderError> {
        let model = self.model;
        Ok(match &e.kind {
            RExprKind::Sig(s) => {
                let mut m = Matrix::empty(1);
                for a in self.bounds.candidates(model, *s) {
                    m.insert(vec![a], self.member(a, *s));
                }
                m
            }
            RExprKind::Field(f) => {
                let mut m = Matrix::empty(model.fields[*f].arity());
                for (t, v) in &self.bounds.fields[*f].tuples {
                    m.insert(t.clone(), self.c.var(*v));
                }
                m
            }
            RExprKind::Var(v) => {
                let mut m = Matrix::empty(1);
                m.insert(vec![self.env[v]], NodeId::TRUE);
                m
            }
            RExprKind::Univ => {
                let mut m = Matrix::empty(1);
                for a in self.universe() {
                    m.insert(vec![a], self.lit(self.bounds.presence(a)));
                }
                m
            }
            RExprKind::Iden => self.iden(),
            RExprKind::None => Matrix::empty(e.arity()),
            RExprKind::Unary(op, a) => {
                let a = self.expr(a)?;
                match op {
                    UnaryOp::Transpose => {
                        let mut m = Matrix::empty(2);
                        for (t, n) in a.cells {
                            m.insert(vec![t[1], t[0]], n);
                        }
                        m
                    }
                    UnaryOp::Closure => self.closure(a)?,
                    UnaryOp::ReflexiveClosure => {
                        let cl = self.closure(a)?;
                        let id = self.iden();
                        self.union(&cl, &id)
                    }
                }
            }
            RExprKind::Binary(op, a, b) => {
                let (a, b) = (self.expr(a)?, self.expr(b)?);
                match op {
                    BinaryOp::Union => self.union(&a, &b),
                    BinaryOp::Inter => {
                        let mut m = Matrix::empty(a.arity);
                        for (t, &n) in &a.cells {
                            let o = b.get(t);
                            let g = self.c.and2(n, o);
                            m.insert(t.clone(), g);
                        }
                        m
                    }
                    BinaryOp::Diff => {
                        let mut m = Matrix::empty(a.arity);
                        for (t, &n) in &a.cells {
                            let o = b.get(t);
                            let no = self.c.not(o);
                            let g = self.c.and2(n, no);
                            m.insert(t.clone(), g);
                        }
                        m
                    }
                    BinaryOp::Product => {
                        let mut m = Matrix::empty(a.arity + b.arity);
                        for (ta, &na) in &a.cells {
                            for (tb, &nb) in &b.cells {
                                let mut t = ta.clone();
                                t.extend_from_slice(tb);
                                let g = self.c.and2(na, nb);
                                m.insert(t, g);
                            }
                            self.check_limits()?;
                        }
                        m
                    }
                    BinaryOp::Join => self.join(&a, &b)?,
                }
            }
        })
    }

    fn union(&mut self, a: &Matrix, b: &Matrix) -> Matrix {
        let mut m = a.clone();
        for (t, &n) in &b.cells {
            let g = match m.cells.get(t) {
                Some(&o) => self.c.or2(o, n),
                None => n,
            };
            m.insert(t.clone(), g);
        }
        m
    }

    fn join(&mut self, a: &Matrix, b: &Matrix) -> Result<Matrix, FinderError> {
        let mut by_first: HashMap<usize, Vec<(&[usize], NodeId)>> = HashMap::new();
        for (t, &n) in &b.cells {
            by_first.entry(t[0]).or_default().push((&t[1..], n));
        }
        let mut acc: BTreeMap<Vec<usize>, Vec<NodeId>> = BTreeMap::new();
        for (ta, &na) in &a.cells {
            let (last, prefix) = ta.split_last().expect("arity at least one");
            let Some(rows) = by_first.get(last) else { continue };
            for (rest, nb) in rows {
                let mut t = prefix.to_vec();
                t.extend_from_slice(rest);
                let g = self.c.and2(na, *nb);
                acc.entry(t).or_default().push(g);
            }
            self.check_limits()?;
        }
        let mut m = Matrix::empty(a.arity + b.arity - 2);
        for (t, ns) in acc {
            let g = self.c.or(ns);
            m.insert(t, g);
        }
        Ok(m)
    }

    fn closure(&mut self, base: Matrix) -> Result<Matrix, FinderError> {
        let n = self.bounds.atoms.len();
        let mut rounds = 0;
        while (1usize << rounds) < n {
            rounds += 1;
        }
        let mut r = base;
        for _ in 0..rounds {
            let sq = self.join(&r, &r)?;
            r = self.union(&r, &sq);
        }
        Ok(r)
    }

    fn decoder(&self) -> Decoder {
        let model = self.model;
        let bounds = self.bounds;
        let sigs = (0..model.sigs.len())
            .map(|s| {
                let atoms = bounds
                    .candidates(model, s)
                    .map(|a| (a, bounds.membership(model, a, s)))
                    .collect();
                (model.sigs[s].name.clone(), atoms)
            })
            .collect();
        let fields = model
            .fields
            .iter()
            .enumerate()
            .map(|(f, info)| (info.name.clone(), bounds.fields[f].tuples.clone()))
            .collect();
        Decoder {
            atom_names: bounds.atoms.iter().map(|a| a.name.clone()).collect(),
            sigs,
            fields,
            presence: (0..bounds.atoms.len()).map(|a| bounds.presence(a)).collect(),
        }
    }
}

