//! Optional isomorphism filter over labeled instances.

use std::collections::{BTreeMap, HashSet};

use itertools::Itertools;

use crate::finder::Instance;
use crate::lang::resolve::ResolvedModel;

/// Largest number of atoms per top-level sig the filter will permute.
pub const ISO_MAX_ATOMS: usize = 4;

/// The least relabeling of `inst` over all permutations of atoms within
/// each top-level sig, or `None` when some sig has too many atoms.
pub fn canonical_form(model: &ResolvedModel, inst: &Instance) -> Option<Instance> {
    let groups: Vec<Vec<String>> = model
        .top_level_sigs()
        .map(|s| inst.sig(&model.sigs[s].name).to_vec())
        .filter(|g| g.len() > 1)
        .collect();
    if groups.iter().any(|g| g.len() > ISO_MAX_ATOMS) {
        return None;
    }
    let perms: Vec<Vec<Vec<String>>> = groups
        .iter()
        .map(|g| g.iter().cloned().permutations(g.len()).collect())
        .collect();
    let mut best: Option<Instance> = None;
    for choice in perms.iter().map(|p| p.iter()).multi_cartesian_product() {
        let mut rename: BTreeMap<&str, &str> = BTreeMap::new();
        for (group, image) in groups.iter().zip(&choice) {
            for (from, to) in group.iter().zip(image.iter()) {
                rename.insert(from, to);
            }
        }
        let r = |a: &String| rename.get(a.as_str()).map_or_else(|| a.clone(), |s| s.to_string());
        let mut candidate = Instance {
            sigs: inst
                .sigs
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().map(r).collect()))
                .collect(),
            fields: inst
                .fields
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().map(|t| t.iter().map(r).collect()).collect()))
                .collect(),
            universe: inst.universe.iter().map(r).collect(),
        };
        candidate.normalize();
        if best.as_ref().is_none_or(|b| candidate < *b) {
            best = Some(candidate);
        }
    }
    Some(best.unwrap_or_else(|| inst.clone()))
}

/// Drops instances isomorphic to an earlier one, keeping order. Instances
/// too large to canonicalize are kept.
pub fn filter_isomorphic(model: &ResolvedModel, instances: Vec<Instance>) -> Vec<Instance> {
    let mut seen = HashSet::new();
    instances
        .into_iter()
        .filter(|i| match canonical_form(model, i) {
            Some(c) => seen.insert(c),
            None => true,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finder::{enumerate_all, ResourceBudget};
    use crate::lang::{parse, resolve};

    #[test]
    fn functions_on_two_atoms_up_to_isomorphism() {
        let model = resolve(&parse("sig A { f: one A }\nrun {} for exactly 2").unwrap()).unwrap();
        let (all, _) = enumerate_all(&model, &model.commands[0], 100, &ResourceBudget::default()).unwrap();
        assert_eq!(all.len(), 4);
        // identity, constant, swap
        assert_eq!(filter_isomorphic(&model, all).len(), 3);
    }
}
