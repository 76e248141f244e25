//! Candidate atoms and propositional variables for one scope.
//!
//! Variable numbering depends only on names, never on declaration order:
//! presence variables come first (top-level sigs by name, atoms by index),
//! then sub-sig membership (atoms in universe order, descendant sigs by
//! name), then field tuples (fields by name, tuples lexicographically).

use std::collections::HashMap;
use std::ops::Range;

use crate::finder::FinderError;
use crate::lang::resolve::{FieldId, ResolvedModel, ResolvedScope, SigId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lit {
    Const(bool),
    Var(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub name: String,
    /// Top-level sig the atom is drawn from.
    pub sig: SigId,
    pub index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigBounds {
    pub sig: SigId,
    pub atoms: Range<usize>,
    pub exactly: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldBounds {
    pub field: FieldId,
    /// Candidate tuples (universe indices) with their variables, sorted.
    pub tuples: Vec<(Vec<usize>, u32)>,
    index: HashMap<Vec<usize>, u32>,
}

impl FieldBounds {
    pub fn var(&self, tuple: &[usize]) -> Option<u32> {
        self.index.get(tuple).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarMeaning {
    Presence { atom: usize },
    Membership { atom: usize, sig: SigId },
    Tuple { field: FieldId, tuple: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub atoms: Vec<Atom>,
    /// Top-level sigs, ordered by name.
    pub top_sigs: Vec<SigBounds>,
    presence: Vec<Lit>,
    membership: HashMap<(usize, SigId), u32>,
    /// Indexed by `FieldId`.
    pub fields: Vec<FieldBounds>,
    pub vars: Vec<VarMeaning>,
}

pub const DEFAULT_MAX_SCOPE: u32 = 8;

impl Bounds {
    pub fn num_vars(&self) -> u32 {
        self.vars.len() as u32
    }

    pub fn presence(&self, atom: usize) -> Lit {
        self.presence[atom]
    }

    /// Literal for "atom belongs to sig" (false when the atom is drawn from
    /// another top-level sig).
    pub fn membership(&self, model: &ResolvedModel, atom: usize, sig: SigId) -> Lit {
        let top = model.sigs[sig].top;
        if self.atoms[atom].sig != top {
            Lit::Const(false)
        } else if top == sig {
            self.presence[atom]
        } else {
            Lit::Var(self.membership[&(atom, sig)])
        }
    }

    /// Universe indices of the candidate atoms of a sig's top-level sig.
    pub fn candidates(&self, model: &ResolvedModel, sig: SigId) -> Range<usize> {
        let top = model.sigs[sig].top;
        self.top_sigs
            .iter()
            .find(|b| b.sig == top)
            .expect("every top-level sig is bounded")
            .atoms
            .clone()
    }

    pub fn atom_index(&self, name: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a.name == name)
    }
}

pub fn compute_bounds(
    model: &ResolvedModel,
    scope: &ResolvedScope,
    max_scope: u32,
) -> Result<Bounds, FinderError> {
    let mut tops: Vec<SigId> = model.top_level_sigs().collect();
    tops.sort_by(|&a, &b| model.sigs[a].name.cmp(&model.sigs[b].name));

    let mut atoms = Vec::new();
    let mut top_sigs = Vec::new();
    for &sig in &tops {
        let (bound, exactly) = scope.bound_of(sig);
        if bound > max_scope {
            return Err(FinderError::ScopeTooLarge {
                sig: model.sigs[sig].name.clone(),
                bound,
                max: max_scope,
            });
        }
        let start = atoms.len();
        for index in 0..bound {
            atoms.push(Atom {
                name: format!("{}${}", model.sigs[sig].name, index),
                sig,
                index,
            });
        }
        top_sigs.push(SigBounds {
            sig,
            atoms: start..atoms.len(),
            exactly,
        });
    }

    let mut vars = Vec::new();
    let mut presence = vec![Lit::Const(false); atoms.len()];
    for b in &top_sigs {
        for atom in b.atoms.clone() {
            presence[atom] = if b.exactly {
                Lit::Const(true)
            } else {
                vars.push(VarMeaning::Presence { atom });
                Lit::Var(vars.len() as u32 - 1)
            };
        }
    }

    let mut descendants: HashMap<SigId, Vec<SigId>> = HashMap::new();
    for &top in &tops {
        let mut d = model.descendants(top);
        d.sort_by(|&a, &b| model.sigs[a].name.cmp(&model.sigs[b].name));
        descendants.insert(top, d);
    }
    let mut membership = HashMap::new();
    for (atom, a) in atoms.iter().enumerate() {
        for &sig in &descendants[&a.sig] {
            vars.push(VarMeaning::Membership { atom, sig });
            membership.insert((atom, sig), vars.len() as u32 - 1);
        }
    }

    let mut by_name: Vec<FieldId> = (0..model.fields.len()).collect();
    by_name.sort_by(|&a, &b| model.fields[a].name.cmp(&model.fields[b].name));
    let mut fields: Vec<Option<FieldBounds>> = vec![None; model.fields.len()];
    for field in by_name {
        let columns: Vec<Range<usize>> = model.fields[field]
            .columns
            .iter()
            .map(|&c| {
                let top = model.sigs[c].top;
                top_sigs.iter().find(|b| b.sig == top).expect("bounded").atoms.clone()
            })
            .collect();
        let mut tuples = Vec::new();
        let mut index = HashMap::new();
        for tuple in cartesian(&columns) {
            vars.push(VarMeaning::Tuple {
                field,
                tuple: tuples.len(),
            });
            let var = vars.len() as u32 - 1;
            index.insert(tuple.clone(), var);
            tuples.push((tuple, var));
        }
        fields[field] = Some(FieldBounds {
            field,
            tuples,
            index,
        });
    }

    Ok(Bounds {
        atoms,
        top_sigs,
        presence,
        membership,
        fields: fields.into_iter().map(|f| f.expect("all fields bounded")).collect(),
        vars,
    })
}

/// Lexicographic cartesian product of index ranges.
pub(crate) fn cartesian(columns: &[Range<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for col in columns {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                col.clone().map(move |a| {
                    let mut t = prefix.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, resolve};

    fn bounds_for(src: &str) -> (ResolvedModel, Bounds) {
        let model = resolve(&parse(src).unwrap()).unwrap();
        let scope = model.commands[0].scope.clone();
        let b = compute_bounds(&model, &scope, DEFAULT_MAX_SCOPE).unwrap();
        (model, b)
    }

    #[test]
    fn three_candidate_atoms() {
        let (_, b) = bounds_for("sig A {}\nrun {} for 3");
        let names: Vec<_> = b.atoms.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, vec!["A$0", "A$1", "A$2"]);
        assert_eq!(b.num_vars(), 3);
        assert!(b.vars.iter().all(|v| matches!(v, VarMeaning::Presence { .. })));
    }

    #[test]
    fn exact_scope_fixes_presence() {
        let (_, b) = bounds_for("sig A { r: set A }\nrun {} for exactly 2");
        assert_eq!(b.presence(0), Lit::Const(true));
        assert_eq!(b.num_vars(), 4);
    }

    #[test]
    fn numbering_ignores_declaration_order() {
        let (_, b1) = bounds_for("sig B { g: set A }\nsig A { f: set B }\nrun {} for 2");
        let (_, b2) = bounds_for("sig A { f: set B }\nsig B { g: set A }\nrun {} for 2");
        let names = |b: &Bounds| b.atoms.iter().map(|a| a.name.clone()).collect::<Vec<_>>();
        assert_eq!(names(&b1), names(&b2));
        assert_eq!(b1.num_vars(), b2.num_vars());
    }

    #[test]
    fn membership_vars_for_subsigs() {
        let (m, b) = bounds_for("abstract sig S {}\nsig C1, C2 extends S {}\nrun {} for 2");
        let c1 = m.sig_id("C1").unwrap();
        assert!(matches!(b.membership(&m, 1, c1), Lit::Var(_)));
        assert_eq!(b.num_vars(), 2 + 4);
    }

    #[test]
    fn field_candidates_follow_columns() {
        let (m, b) = bounds_for("sig A { f: B -> A }\nsig B {}\nrun {} for 2 but 1 B");
        let f = m.field_id("f").unwrap();
        assert_eq!(b.fields[f].tuples.len(), 2 * 1 * 2);
        for (t, _) in &b.fields[f].tuples {
            assert_eq!(b.atoms[t[0]].sig, m.sig_id("A").unwrap());
            assert_eq!(b.atoms[t[1]].sig, m.sig_id("B").unwrap());
        }
    }

    #[test]
    fn scope_too_large() {
        let model = resolve(&parse("sig A {}\nrun {} for 9").unwrap()).unwrap();
        let err = compute_bounds(&model, &model.commands[0].scope, 8).unwrap_err();
        assert!(matches!(err, FinderError::ScopeTooLarge { bound: 9, .. }));
    }
}
