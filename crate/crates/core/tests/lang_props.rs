use a4f_core::lang::{parse, tokenize, Formula, ParagraphBody};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum E {
    Name(&'static str),
    Un(&'static str, Box<E>),
    Bin(&'static str, Box<E>, Box<E>),
}

// Binding strength, loosest first.
fn expr_level(op: &str) -> u8 {
    match op {
        "+" | "-" => 1,
        "&" => 2,
        "->" => 3,
        "." => 4,
        _ => unreachable!(),
    }
}

fn arb_expr() -> impl Strategy<Value = E> {
    let leaf = prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(E::Name);
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (prop::sample::select(vec!["~", "^", "*"]), inner.clone()).prop_map(|(o, e)| E::Un(o, Box::new(e))),
            (prop::sample::select(vec!["+", "-", "&", "->", "."]), inner.clone(), inner)
                .prop_map(|(o, l, r)| E::Bin(o, Box::new(l), Box::new(r))),
        ]
    })
}

fn full_e(e: &E) -> String {
    match e {
        E::Name(n) => n.to_string(),
        E::Un(o, x) => format!("({o}{})", full_e(x)),
        E::Bin(o, l, r) => format!("({} {o} {})", full_e(l), full_e(r)),
    }
}

fn level_e(e: &E) -> u8 {
    match e {
        E::Name(_) => 6,
        E::Un(..) => 5,
        E::Bin(o, ..) => expr_level(o),
    }
}

fn min_e(e: &E) -> String {
    match e {
        E::Name(n) => n.to_string(),
        E::Un(o, x) if level_e(x) < 5 => format!("{o}({})", min_e(x)),
        E::Un(o, x) => format!("{o}{}", min_e(x)),
        E::Bin(o, l, r) => {
            let p = expr_level(o);
            let l = if level_e(l) < p { format!("({})", min_e(l)) } else { min_e(l) };
            let r = if level_e(r) <= p { format!("({})", min_e(r)) } else { min_e(r) };
            format!("{l} {o} {r}")
        }
    }
}

#[derive(Debug, Clone)]
enum F {
    Atom(&'static str),
    Not(Box<F>),
    Bin(&'static str, Box<F>, Box<F>),
}

fn formula_level(op: &str) -> u8 {
    match op {
        "or" => 1,
        "iff" => 2,
        "implies" => 3,
        "and" => 4,
        _ => unreachable!(),
    }
}

fn arb_formula() -> impl Strategy<Value = F> {
    let leaf = prop::sample::select(vec!["some p", "no q", "r in s", "one t"]).prop_map(F::Atom);
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|f| F::Not(Box::new(f))),
            (prop::sample::select(vec!["or", "iff", "implies", "and"]), inner.clone(), inner)
                .prop_map(|(o, l, r)| F::Bin(o, Box::new(l), Box::new(r))),
        ]
    })
}

fn full_f(f: &F) -> String {
    match f {
        F::Atom(a) => format!("({a})"),
        F::Not(x) => format!("(not {})", full_f(x)),
        F::Bin(o, l, r) => format!("({} {o} {})", full_f(l), full_f(r)),
    }
}

fn level_f(f: &F) -> u8 {
    match f {
        F::Atom(_) => 6,
        F::Not(_) => 5,
        F::Bin(o, ..) => formula_level(o),
    }
}

fn min_f(f: &F) -> String {
    match f {
        F::Atom(a) => a.to_string(),
        F::Not(x) if level_f(x) < 5 => format!("not ({})", min_f(x)),
        F::Not(x) => format!("not {}", min_f(x)),
        F::Bin(o, l, r) => {
            let p = formula_level(o);
            // `implies` groups to the right, the rest to the left.
            let (wrap_l, wrap_r) = if *o == "implies" {
                (level_f(l) <= p, level_f(r) < p)
            } else {
                (level_f(l) < p, level_f(r) <= p)
            };
            let l = if wrap_l { format!("({})", min_f(l)) } else { min_f(l) };
            let r = if wrap_r { format!("({})", min_f(r)) } else { min_f(r) };
            format!("{l} {o} {r}")
        }
    }
}

fn fact_body(text: &str) -> Formula {
    let m = parse(text).unwrap_or_else(|e| panic!("{text}: {e}"));
    match &m.paragraphs[0].body {
        ParagraphBody::Fact(f) => f.clone(),
        other => panic!("not a fact: {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn expression_precedence_matches_table(e in arb_expr()) {
        let minimal = fact_body(&format!("fact {{ x = {} }}", min_e(&e)));
        let explicit = fact_body(&format!("fact {{ x = {} }}", full_e(&e)));
        prop_assert_eq!(minimal, explicit);
    }

    #[test]
    fn formula_precedence_matches_table(f in arb_formula()) {
        let minimal = fact_body(&format!("fact {{ {} }}", min_f(&f)));
        let explicit = fact_body(&format!("fact {{ {} }}", full_f(&f)));
        prop_assert_eq!(minimal, explicit);
    }

    #[test]
    fn arbitrary_text_never_panics(s in "[a-z{}()\\[\\]|.:,=!<>&+*^~#/\\- \n0-9]{0,120}") {
        let _ = parse(&s);
        let _ = tokenize(&s);
    }
}

#[test]
fn documented_examples() {
    assert_eq!(fact_body("fact { x = a + b & c }"), fact_body("fact { x = a + (b & c) }"));
    assert_eq!(
        fact_body("fact { p implies q implies r }"),
        fact_body("fact { p implies (q implies r) }")
    );
}
