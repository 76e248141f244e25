use a4f_core::finder::{
    brute_force, compute_bounds, enumerate, enumerate_all, evaluate_formula, solve, translate, Env, FinderError,
    Instance, ResourceBudget, SolveOutcome, DEFAULT_MAX_SCOPE,
};
use a4f_core::lang::{parse, resolve, ResolvedModel};

fn model(src: &str) -> ResolvedModel {
    resolve(&parse(src).unwrap()).unwrap()
}

fn all_instances(m: &ResolvedModel, cmd: usize) -> Vec<Instance> {
    let (out, end) = enumerate_all(m, &m.commands[cmd], 10_000, &ResourceBudget::default()).unwrap();
    assert_eq!(end, Some(SolveOutcome::Unsat));
    out
}

fn pairs(i: &Instance, field: &str) -> Vec<(String, String)> {
    i.field(field).iter().map(|t| (t[0].clone(), t[1].clone())).collect()
}

#[test]
fn set_relation_on_one_atom_has_two_instances() {
    let m = model("sig A { r: set A }\nrun {} for exactly 1");
    let b = ResourceBudget::default();
    let first = enumerate(&m, &m.commands[0], 0, &b).unwrap();
    let second = enumerate(&m, &m.commands[0], 1, &b).unwrap();
    let third = enumerate(&m, &m.commands[0], 2, &b).unwrap();
    assert_eq!(pairs(first.instance().unwrap(), "r"), vec![]);
    assert_eq!(
        pairs(second.instance().unwrap(), "r"),
        vec![("A$0".to_string(), "A$0".to_string())]
    );
    assert_eq!(third, SolveOutcome::Unsat);
}

#[test]
fn total_functions_on_two_atoms() {
    let m = model("sig A { f: one A }\nrun {} for exactly 2");
    let got = all_instances(&m, 0);
    // each atom picks one of two images
    let mut expected: Vec<Vec<(String, String)>> = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            expected.push(vec![
                ("A$0".into(), format!("A${x}")),
                ("A$1".into(), format!("A${y}")),
            ]);
        }
    }
    let mut seen: Vec<_> = got.iter().map(|i| pairs(i, "f")).collect();
    seen.sort();
    expected.sort();
    assert_eq!(seen, expected);
}

#[test]
fn closure_cycle_count() {
    let m = model("sig A { r: set A }\nrun { some a: A | a in a.^r } for exactly 2");
    let got = all_instances(&m, 0);
    // Every subset of A x A, encoded as four bits, with a cycle: a self
    // loop or both off-diagonal pairs.
    let expected = (0u32..16)
        .filter(|bits| {
            let has = |k: u32| bits >> k & 1 == 1;
            let (l00, l01, l10, l11) = (has(0), has(1), has(2), has(3));
            l00 || l11 || (l01 && l10)
        })
        .count();
    assert_eq!(expected, 13);
    assert_eq!(got.len(), expected);
    let mut distinct = got.clone();
    distinct.sort();
    distinct.dedup();
    assert_eq!(distinct.len(), got.len());
}

#[test]
fn forced_singleton_instance() {
    let m = model("sig A {}\nrun {} for exactly 1");
    let out = enumerate(&m, &m.commands[0], 0, &ResourceBudget::default()).unwrap();
    let i = out.instance().unwrap();
    assert_eq!(i.sig("A"), ["A$0".to_string()]);
    assert_eq!(i.universe, vec!["A$0".to_string()]);
    assert!(i.fields.is_empty());
}

#[test]
fn negated_tautology_is_unsat() {
    let m = model("sig A { r: set A }\ncheck A1 { no none } for 3");
    let b = ResourceBudget::default();
    let bounds = compute_bounds(&m, &m.commands[0].scope, DEFAULT_MAX_SCOPE).unwrap();
    let t = translate(&m, &m.commands[0], &bounds, &b).unwrap();
    assert_eq!(t.root, a4f_core::finder::NodeId::FALSE);
    assert_eq!(solve(&t, &b), SolveOutcome::Unsat);
}

#[test]
fn one_sig_has_one_atom() {
    let m = model("one sig A {}\nrun {} for 3");
    let got = all_instances(&m, 0);
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].sig("A").len(), 1);
}

#[test]
fn unbounded_sig_sizes_are_prefixes() {
    let m = model("sig A {}\nrun {} for 3");
    let got = all_instances(&m, 0);
    let sizes: Vec<usize> = got.iter().map(|i| i.sig("A").len()).collect();
    assert_eq!(sizes, vec![0, 1, 2, 3]);
    for i in &got {
        let expected: Vec<String> = (0..i.sig("A").len()).map(|k| format!("A${k}")).collect();
        assert_eq!(i.sig("A"), expected.as_slice());
    }
}

#[test]
fn abstract_sig_is_partitioned() {
    let m = model("abstract sig S {}\nsig C1, C2 extends S {}\nrun {} for 2");
    let got = all_instances(&m, 0);
    assert!(!got.is_empty());
    for i in &got {
        for a in i.sig("S") {
            let n = [i.sig("C1"), i.sig("C2")].iter().filter(|s| s.contains(a)).count();
            assert_eq!(n, 1, "{i:?}");
        }
        for a in i.sig("C1").iter().chain(i.sig("C2")) {
            assert!(i.sig("S").contains(a));
        }
    }
    // sizes 0, 1, 2 with 1, 2, 4 labelings
    assert_eq!(got.len(), 1 + 2 + 4);
}

#[test]
fn enumeration_matches_oracle_order() {
    let srcs = [
        "sig A { r: set A }\nrun { some r } for 2",
        "sig A { f: lone B }\nsig B {}\nrun { all a: A | some a.f } for 2",
        "sig A { r: A -> lone A }\nrun { some r } for exactly 2 but 1 A",
        "abstract sig S { n: lone S }\nsig X, Y extends S {}\nrun { some X and no n.X } for 2",
        "sig A { r: set A }\nassert acyc { no a: A | a in a.^r }\ncheck acyc for 2",
        "sig A { r: set A }\nfact { r = ~r }\nrun { one a: A | a in a.r } for 2",
    ];
    for src in srcs {
        let m = model(src);
        let got = all_instances(&m, 0);
        let oracle = brute_force(&m, &m.commands[0], DEFAULT_MAX_SCOPE).unwrap();
        assert_eq!(got, oracle.instances, "{src}");
    }
}

#[test]
fn counterexamples_satisfy_facts_and_falsify_assertion() {
    let m = model("sig A { r: set A }\nfact { some r }\nassert sym { r = ~r }\ncheck sym for 2");
    let got = all_instances(&m, 0);
    assert!(!got.is_empty());
    for i in &got {
        assert!(evaluate_formula(&m, &m.facts_formula(), i, &Env::new()));
        assert!(!evaluate_formula(&m, &m.commands[0].body, i, &Env::new()));
    }
}

#[test]
fn repeated_runs_are_identical() {
    let m = model("sig A { r: set A, f: lone A }\nrun { some r.f } for 3");
    let b = ResourceBudget::default();
    for skip in 0..3 {
        let x = enumerate(&m, &m.commands[0], skip, &b).unwrap();
        let y = enumerate(&m, &m.commands[0], skip, &b).unwrap();
        assert_eq!(serde_json::to_string(&x.instance()).unwrap(), serde_json::to_string(&y.instance()).unwrap());
    }
}

#[test]
fn closure_of_empty_universe_is_empty() {
    let m = model("sig A { r: set A }\nrun { no ^r and no *r } for 1 but 0 A");
    let out = enumerate(&m, &m.commands[0], 0, &ResourceBudget::default()).unwrap();
    let i = out.instance().unwrap();
    assert!(i.universe.is_empty());
    assert!(i.field("r").is_empty());
}

#[test]
fn scope_limit_is_enforced() {
    let m = model("sig A {}\nrun {} for 9");
    let err = enumerate(&m, &m.commands[0], 0, &ResourceBudget::default()).unwrap_err();
    assert!(matches!(err, FinderError::ScopeTooLarge { .. }));
}

#[test]
fn step_budget_gives_resource_limit() {
    let src = "sig P { h: one H }\nsig H {}\nfact { all p, q: P | p.h = q.h implies p = q }\nrun {} for exactly 8 but exactly 7 H";
    let m = model(src);
    let b = ResourceBudget {
        max_steps: 20_000,
        ..ResourceBudget::default()
    };
    let out = enumerate(&m, &m.commands[0], 0, &b).unwrap();
    assert_eq!(out, SolveOutcome::ResourceLimit);
}
