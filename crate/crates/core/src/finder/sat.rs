//! Tseitin clausification and a CDCL solver with a fixed decision order.
//!
//! Decisions always pick the lowest-numbered unassigned variable and try
//! false first. Bounds variables are numbered before auxiliary ones, and
//! there are no restarts or heuristics, so the first model found is the
//! lexicographically least assignment of the bounds variables (variable 0
//! most significant, false before true). Learned clauses are implied by the
//! formula, so they prune only subtrees without models.

use std::collections::HashMap;
use std::time::Instant;

use crate::finder::circuit::{Circuit, Node, NodeId};
use crate::finder::translate::Translation;
use crate::finder::{ResourceBudget, SolveOutcome};

/// `var * 2 + negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn pos(var: u32) -> Lit {
        Lit(var << 1)
    }

    pub fn neg(var: u32) -> Lit {
        Lit(var << 1 | 1)
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

/// Clauses for `root` holding. Circuit variable `v` becomes solver variable
/// `v`; each reachable gate gets a fresh variable after them.
pub fn clausify(circuit: &Circuit, root: NodeId) -> Cnf {
    let mut cnf = Cnf {
        num_vars: circuit.num_vars(),
        clauses: Vec::new(),
    };
    if root == NodeId::TRUE {
        return cnf;
    }
    if root == NodeId::FALSE {
        cnf.clauses.push(Vec::new());
        return cnf;
    }
    let mut lits: HashMap<NodeId, Lit> = HashMap::new();
    // Post-order walk without recursion.
    let mut stack = vec![(root, false)];
    while let Some((id, expanded)) = stack.pop() {
        if lits.contains_key(&id) {
            continue;
        }
        match circuit.node(id) {
            Node::Const(_) => unreachable!("constants are folded away"),
            Node::Var(v) => {
                lits.insert(id, Lit::pos(*v));
            }
            Node::Not(a) => {
                if let Some(&l) = lits.get(a) {
                    lits.insert(id, !l);
                } else {
                    stack.push((id, true));
                    stack.push((*a, false));
                }
            }
            Node::And(ops) | Node::Or(ops) => {
                if !expanded {
                    stack.push((id, true));
                    for op in ops.iter().rev() {
                        if !lits.contains_key(op) {
                            stack.push((*op, false));
                        }
                    }
                    continue;
                }
                let x = Lit::pos(cnf.num_vars);
                cnf.num_vars += 1;
                let ins: Vec<Lit> = ops.iter().map(|o| lits[o]).collect();
                if matches!(circuit.node(id), Node::And(_)) {
                    for &i in &ins {
                        cnf.clauses.push(vec![!x, i]);
                    }
                    let mut big: Vec<Lit> = ins.iter().map(|&i| !i).collect();
                    big.push(x);
                    cnf.clauses.push(big);
                } else {
                    for &i in &ins {
                        cnf.clauses.push(vec![x, !i]);
                    }
                    let mut big = ins;
                    big.push(!x);
                    cnf.clauses.push(big);
                }
                lits.insert(id, x);
            }
        }
    }
    cnf.clauses.push(vec![lits[&root]]);
    cnf
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
    Limit,
}

const UNASSIGNED: u8 = 2;

pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    value: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    next_decision: usize,
    inconsistent: bool,
    pub steps: u64,
}

impl Solver {
    pub fn new(cnf: &Cnf) -> Self {
        let n = cnf.num_vars as usize;
        let mut s = Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            value: vec![UNASSIGNED; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: vec![false; n],
            next_decision: 0,
            inconsistent: false,
            steps: 0,
        };
        for c in &cnf.clauses {
            s.add_clause(c.clone());
        }
        s
    }

    pub fn num_vars(&self) -> usize {
        self.value.len()
    }

    /// True or false for an assigned literal, `None` otherwise.
    fn lit_value(&self, l: Lit) -> Option<bool> {
        match self.value[l.var() as usize] {
            UNASSIGNED => None,
            v => Some((v == 1) != l.is_neg()),
        }
    }

    pub fn model_value(&self, var: u32) -> bool {
        self.value[var as usize] == 1
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var() as usize;
        self.value[v] = if l.is_neg() { 0 } else { 1 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds a clause at decision level 0.
    pub fn add_clause(&mut self, mut clause: Vec<Lit>) {
        if self.inconsistent {
            return;
        }
        self.backtrack(0);
        clause.sort_unstable();
        clause.dedup();
        if clause.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        if clause.iter().any(|&l| self.lit_value(l) == Some(true)) {
            return;
        }
        clause.retain(|&l| self.lit_value(l).is_none());
        match clause.len() {
            0 => self.inconsistent = true,
            1 => {
                self.enqueue(clause[0], None);
                if self.propagate(&mut u64::MAX.clone()).is_some() {
                    self.inconsistent = true;
                }
            }
            _ => {
                let idx = self.clauses.len();
                self.watches[(!clause[0]).index()].push(idx);
                self.watches[(!clause[1]).index()].push(idx);
                self.clauses.push(clause);
            }
        }
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level as usize];
        for &l in &self.trail[start..] {
            let v = l.var() as usize;
            self.value[v] = UNASSIGNED;
            self.reason[v] = None;
            self.next_decision = self.next_decision.min(v);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level as usize);
        self.qhead = self.trail.len();
    }

    /// Unit propagation; returns a conflicting clause. Counts one step per
    /// propagated literal against `steps_left`.
    fn propagate(&mut self, steps_left: &mut u64) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.steps += 1;
            *steps_left = steps_left.saturating_sub(1);
            // Clauses watching !p (registered under index of p).
            let mut ws = std::mem::take(&mut self.watches[p.index()]);
            let mut i = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                let false_lit = !p;
                {
                    let c = &mut self.clauses[ci];
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                }
                let first = self.clauses[ci][0];
                if self.lit_value(first) == Some(true) {
                    i += 1;
                    continue;
                }
                let len = self.clauses[ci].len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[ci][k];
                    if self.lit_value(l) != Some(false) {
                        self.clauses[ci].swap(1, k);
                        self.watches[(!l).index()].push(ci);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                match self.lit_value(first) {
                    Some(false) => {
                        conflict = Some(ci);
                        break;
                    }
                    _ => {
                        self.enqueue(first, Some(ci));
                        i += 1;
                    }
                }
            }
            let rest = std::mem::take(&mut self.watches[p.index()]);
            ws.extend(rest);
            self.watches[p.index()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    /// First-UIP conflict analysis. Returns the learned clause (asserting
    /// literal first) and the level to jump back to.
    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, u32) {
        let mut learned = vec![Lit(0)];
        let mut counter = 0;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            let clause = self.clauses[confl].clone();
            for &q in clause.iter().skip(if p.is_some() { 1 } else { 0 }) {
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    if self.level[v] == current {
                        counter += 1;
                    } else {
                        learned.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var() as usize] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            self.seen[lit.var() as usize] = false;
            counter -= 1;
            if counter == 0 {
                break;
            }
            confl = self.reason[lit.var() as usize].expect("implied literal has a reason");
        }
        learned[0] = !p.expect("conflict at positive level");
        for l in &learned[1..] {
            self.seen[l.var() as usize] = false;
        }
        let mut back = 0;
        let mut max_i = 1;
        for (i, l) in learned.iter().enumerate().skip(1) {
            let lv = self.level[l.var() as usize];
            if lv > back {
                back = lv;
                max_i = i;
            }
        }
        if learned.len() > 1 {
            learned.swap(1, max_i);
        }
        (learned, back)
    }

    /// Searches for a model from the current state.
    pub fn solve(&mut self, budget: &ResourceBudget, deadline: Instant) -> SatResult {
        if self.inconsistent {
            return SatResult::Unsat;
        }
        let mut steps_left = budget.max_steps.saturating_sub(self.steps);
        let mut checks = 0u32;
        loop {
            if let Some(confl) = self.propagate(&mut steps_left) {
                if self.decision_level() == 0 {
                    self.inconsistent = true;
                    return SatResult::Unsat;
                }
                let (learned, back) = self.analyze(confl);
                self.backtrack(back);
                if learned.len() == 1 {
                    self.enqueue(learned[0], None);
                } else {
                    let idx = self.clauses.len();
                    self.watches[(!learned[0]).index()].push(idx);
                    self.watches[(!learned[1]).index()].push(idx);
                    let asserting = learned[0];
                    self.clauses.push(learned);
                    self.enqueue(asserting, Some(idx));
                }
                continue;
            }
            if steps_left == 0 {
                return SatResult::Limit;
            }
            checks = checks.wrapping_add(1);
            if checks % 64 == 0 && (Instant::now() >= deadline || budget.cancelled()) {
                return SatResult::Limit;
            }
            while self.next_decision < self.value.len() && self.value[self.next_decision] != UNASSIGNED {
                self.next_decision += 1;
            }
            if self.next_decision == self.value.len() {
                return SatResult::Sat;
            }
            let v = self.next_decision as u32;
            self.trail_lim.push(self.trail.len());
            self.enqueue(Lit::neg(v), None);
            self.steps += 1;
            steps_left = steps_left.saturating_sub(1);
        }
    }
}

/// Successive distinct models of a translation, each blocked once found.
pub struct Enumerator<'a> {
    translation: &'a Translation,
    solver: Solver,
    budget: ResourceBudget,
    deadline: Instant,
    done: bool,
}

impl<'a> Enumerator<'a> {
    pub fn new(translation: &'a Translation, budget: ResourceBudget, start: Instant) -> Self {
        let cnf = clausify(&translation.circuit, translation.root);
        Enumerator {
            translation,
            solver: Solver::new(&cnf),
            deadline: budget.deadline(start),
            budget,
            done: false,
        }
    }

    pub fn steps(&self) -> u64 {
        self.solver.steps
    }

    pub fn next_outcome(&mut self) -> SolveOutcome {
        if self.done {
            return SolveOutcome::Unsat;
        }
        match self.solver.solve(&self.budget, self.deadline) {
            SatResult::Unsat => {
                self.done = true;
                SolveOutcome::Unsat
            }
            SatResult::Limit => SolveOutcome::ResourceLimit,
            SatResult::Sat => {
                let n = self.translation.num_bounds_vars;
                let assignment: Vec<bool> = (0..n).map(|v| self.solver.model_value(v)).collect();
                let instance = self.translation.decoder.decode(&assignment);
                let block = (0..n)
                    .map(|v| if assignment[v as usize] { Lit::neg(v) } else { Lit::pos(v) })
                    .collect();
                self.solver.add_clause(block);
                SolveOutcome::Sat(instance)
            }
        }
    }
}
