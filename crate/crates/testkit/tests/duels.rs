use a4f_core::challenge::{execute_on_view, split, Access, Verdict};
use a4f_core::finder::{evaluate_formula, Env, ResourceBudget};
use a4f_core::lang::{parse, resolve};
use a4f_testkit::DUELS;

#[test]
fn equivalent_candidates_solve_and_others_are_refuted() {
    let budget = ResourceBudget::default();
    for duel in DUELS {
        let full = parse(&duel.model()).unwrap();
        let view = split(&full);
        assert!(!view.public_text.contains(duel.spec), "{}", duel.name);

        let good = duel.submission(&view.public_text, duel.equivalent);
        let r = execute_on_view(&view, Access::Public, &good, &duel.check_name(), 0, &budget).unwrap();
        assert_eq!(r.verdict, Verdict::Solved, "{}", duel.name);

        let bad = duel.submission(&view.public_text, duel.inequivalent);
        let r = execute_on_view(&view, Access::Public, &bad, &duel.check_name(), 0, &budget).unwrap();
        let Verdict::Counterexample(inst) = r.verdict else {
            panic!("{}: {:?}", duel.name, r.verdict)
        };
        // the two predicates disagree on the counter-example
        let both = format!(
            "{}\npred Spec {{ {} }}\npred Cand {{ {} }}\nrun Spec",
            duel.decls, duel.spec, duel.inequivalent
        );
        let m = resolve(&parse(&both).unwrap()).unwrap();
        let spec = evaluate_formula(&m, m.pred("Spec").unwrap(), &inst, &Env::new());
        let cand = evaluate_formula(&m, m.pred("Cand").unwrap(), &inst, &Env::new());
        assert_ne!(spec, cand, "{}", duel.name);
    }
}

#[test]
fn handed_out_state_is_refuted() {
    let budget = ResourceBudget::default();
    for duel in DUELS.iter().take(5) {
        let view = split(&parse(&duel.model()).unwrap());
        let r = execute_on_view(&view, Access::Public, &view.public_text, &duel.check_name(), 0, &budget).unwrap();
        assert!(matches!(r.verdict, Verdict::Counterexample(_)), "{}", duel.name);
    }
}
