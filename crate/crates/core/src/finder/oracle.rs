//! Brute-force reference: every assignment of the bounds variables, in the
//! solver's order, kept when it is a well-formed instance satisfying the
//! command. Only the variable numbering is shared with the solver path.

use std::collections::{BTreeMap, BTreeSet};

use crate::finder::bounds::{compute_bounds, Bounds, VarMeaning};
use crate::finder::eval::{evaluate_formula, Env};
use crate::finder::{FinderError, Instance};
use crate::lang::ast::{CommandKind, Mult};
use crate::lang::resolve::{ResolvedCommand, ResolvedModel};

pub const ORACLE_MAX_VARS: u32 = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub sat: bool,
    pub count: usize,
    pub instances: Vec<Instance>,
}

pub fn brute_force(
    model: &ResolvedModel,
    command: &ResolvedCommand,
    max_scope: u32,
) -> Result<OracleResult, FinderError> {
    let bounds = compute_bounds(model, &command.scope, max_scope)?;
    let n = bounds.num_vars();
    if n > ORACLE_MAX_VARS {
        return Err(FinderError::OracleTooLarge {
            vars: n,
            cap: ORACLE_MAX_VARS,
        });
    }
    let mut search = Search {
        model,
        command,
        bounds: &bounds,
        assignment: vec![false; n as usize],
        found: Vec::new(),
    };
    search.go(0);
    let instances = search.found;
    Ok(OracleResult {
        sat: !instances.is_empty(),
        count: instances.len(),
        instances,
    })
}

struct Search<'a> {
    model: &'a ResolvedModel,
    command: &'a ResolvedCommand,
    bounds: &'a Bounds,
    assignment: Vec<bool>,
    found: Vec<Instance>,
}

impl Search<'_> {
    /// Assigns variable `v` onwards, false before true. Subtrees are cut
    /// only where every completion would fail the well-formedness check.
    fn go(&mut self, v: usize) {
        if v == self.assignment.len() {
            let inst = self.decode();
            if well_formed(self.model, self.bounds, &inst) && self.satisfies(&inst) {
                self.found.push(inst);
            }
            return;
        }
        let phase_end = |m: &VarMeaning| -> u8 {
            match m {
            VarMeaning::Presence { .. } => 0,
            VarMeaning::Membership { .. } => 1,
            VarMeaning::Tuple { .. } => 2,
            }
        };
        // At a phase boundary, check what is already decided.
        if v > 0 && phase_end(&self.bounds.vars[v - 1]) != phase_end(&self.bounds.vars[v]) {
            let inst = self.decode();
            if !sig_part_ok(self.model, self.bounds, &inst, phase_end(&self.bounds.vars[v - 1])) {
                return;
            }
        }
        for value in [false, true] {
            if value && !self.may_be_true(v) {
                continue;
            }
            self.assignment[v] = value;
            self.go(v + 1);
        }
        self.assignment[v] = false;
    }

    /// A tuple over an atom outside its column sig can never be true in a
    /// well-formed instance; sig variables precede tuples, so this is known.
    fn may_be_true(&self, v: usize) -> bool {
        let VarMeaning::Tuple { field, tuple } = self.bounds.vars[v] else {
            return true;
        };
        let inst = self.decode();
        let info = &self.model.fields[field];
        let (t, _) = &self.bounds.fields[field].tuples[tuple];
        t.iter().zip(&info.columns).all(|(&a, &col)| {
            inst.sig(&self.model.sigs[col].name)
                .contains(&self.bounds.atoms[a].name)
        })
    }

    fn decode(&self) -> Instance {
        let mut inst = Instance::default();
        let name = |a: usize| self.bounds.atoms[a].name.clone();
        for (atom, a) in self.bounds.atoms.iter().enumerate() {
            let present = match self.bounds.presence(atom) {
                crate::finder::bounds::Lit::Const(b) => b,
                crate::finder::bounds::Lit::Var(v) => self.assignment[v as usize],
            };
            if present {
                inst.universe.push(name(atom));
                inst.sigs
                    .entry(self.model.sigs[a.sig].name.clone())
                    .or_default()
                    .push(name(atom));
            }
        }
        for s in &self.model.sigs {
            inst.sigs.entry(s.name.clone()).or_default();
        }
        for f in &self.model.fields {
            inst.fields.entry(f.name.clone()).or_default();
        }
        for (v, m) in self.bounds.vars.iter().enumerate() {
            if !self.assignment[v] {
                continue;
            }
            match *m {
                VarMeaning::Presence { .. } => {}
                VarMeaning::Membership { atom, sig } => {
                    inst.sigs
                        .get_mut(&self.model.sigs[sig].name)
                        .expect("all sigs listed")
                        .push(name(atom));
                }
                VarMeaning::Tuple { field, tuple } => {
                    let t = self.bounds.fields[field].tuples[tuple].0.iter().map(|&a| name(a)).collect();
                    inst.fields
                        .get_mut(&self.model.fields[field].name)
                        .expect("all fields listed")
                        .push(t);
                }
            }
        }
        inst.normalize();
        inst
    }

    fn satisfies(&self, inst: &Instance) -> bool {
        let env = Env::new();
        if !evaluate_formula(self.model, &self.model.facts_formula(), inst, &env) {
            return false;
        }
        let body = evaluate_formula(self.model, &self.command.body, inst, &env);
        match self.command.kind {
            CommandKind::Run => body,
            CommandKind::Check => !body,
        }
    }
}

fn mult_ok(mult: Mult, n: usize) -> bool {
    match mult {
        Mult::Set => true,
        Mult::One => n == 1,
        Mult::Lone => n <= 1,
        Mult::Some => n >= 1,
    }
}

/// Checks on sig atoms only. `phase` 0 covers top-level sigs, 1 also the
/// hierarchy.
fn sig_part_ok(model: &ResolvedModel, bounds: &Bounds, inst: &Instance, phase: u8) -> bool {
    for sb in &bounds.top_sigs {
        let info = &model.sigs[sb.sig];
        let present: Vec<bool> = sb
            .atoms
            .clone()
            .map(|a| inst.universe.contains(&bounds.atoms[a].name))
            .collect();
        // present atoms form a prefix
        if present.windows(2).any(|w| !w[0] && w[1]) {
            return false;
        }
        let k = present.iter().filter(|&&p| p).count();
        if sb.exactly && k != present.len() {
            return false;
        }
        if !mult_ok(info.mult, k) {
            return false;
        }
    }
    if phase == 0 {
        return true;
    }
    for info in &model.sigs {
        let atoms: BTreeSet<&String> = inst.sig(&info.name).iter().collect();
        if let Some(p) = info.parent {
            let parent: BTreeSet<&String> = inst.sig(&model.sigs[p].name).iter().collect();
            if !atoms.is_subset(&parent) {
                return false;
            }
        }
        if !mult_ok(info.mult, atoms.len()) {
            return false;
        }
        let mut covered: BTreeSet<&String> = BTreeSet::new();
        for &c in &info.children {
            for a in inst.sig(&model.sigs[c].name) {
                if !covered.insert(a) {
                    return false;
                }
            }
        }
        if info.is_abstract && !info.children.is_empty() && !atoms.is_subset(&covered) {
            return false;
        }
    }
    true
}

/// Structural well-formedness of an instance against the model and bounds.
pub fn well_formed(model: &ResolvedModel, bounds: &Bounds, inst: &Instance) -> bool {
    if !sig_part_ok(model, bounds, inst, 1) {
        return false;
    }
    for info in &model.fields {
        let tuples = inst.field(&info.name);
        let cols: Vec<BTreeSet<&String>> = info
            .columns
            .iter()
            .map(|&c| inst.sig(&model.sigs[c].name).iter().collect())
            .collect();
        if !tuples
            .iter()
            .all(|t| t.iter().zip(&cols).all(|(a, col)| col.contains(a)))
        {
            return false;
        }
        for owner in &cols[0] {
            let rows: Vec<&[String]> = tuples
                .iter()
                .filter(|t| &&t[0] == owner)
                .map(|t| &t[1..])
                .collect();
            match info.arity() {
                2 => {
                    if !mult_ok(info.range_mult, rows.len()) {
                        return false;
                    }
                }
                3 => {
                    let Some((left, right)) = info.arrow_mult else { continue };
                    let mut fwd: BTreeMap<&String, usize> = cols[1].iter().map(|a| (*a, 0)).collect();
                    let mut back: BTreeMap<&String, usize> = cols[2].iter().map(|b| (*b, 0)).collect();
                    for r in &rows {
                        *fwd.get_mut(&r[0]).expect("typed") += 1;
                        *back.get_mut(&r[1]).expect("typed") += 1;
                    }
                    if !fwd.values().all(|&n| mult_ok(right, n)) || !back.values().all(|&n| mult_ok(left, n)) {
                        return false;
                    }
                }
                _ => {}
            }
        }
    }
    true
}
