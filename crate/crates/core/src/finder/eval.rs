//! Set-theoretic evaluation of resolved formulas on an instance.

use std::collections::{BTreeSet, HashMap};

use crate::finder::Instance;
use crate::lang::ast::{BinaryOp, CompareOp, LogicOp, MultKind, QuantKind, UnaryOp};
use crate::lang::resolve::{RExpr, RExprKind, RFormula, ResolvedModel, VarId};

pub type TupleSet = BTreeSet<Vec<String>>;

/// Variable bindings by atom name.
pub type Env = HashMap<VarId, String>;

type Rel = BTreeSet<Vec<u32>>;

pub fn evaluate_formula(model: &ResolvedModel, f: &RFormula, instance: &Instance, env: &Env) -> bool {
    let ctx = Ctx::new(model, instance);
    let mut env = ctx.bind(env);
    ctx.formula(f, &mut env)
}

pub fn evaluate_expr(model: &ResolvedModel, e: &RExpr, instance: &Instance, env: &Env) -> TupleSet {
    let ctx = Ctx::new(model, instance);
    let mut env = ctx.bind(env);
    ctx.expr(e, &mut env)
        .into_iter()
        .map(|t| t.into_iter().map(|a| ctx.names[a as usize].clone()).collect())
        .collect()
}

/// True when every fact holds on the instance.
pub fn facts_hold(model: &ResolvedModel, instance: &Instance) -> bool {
    evaluate_formula(model, &model.facts_formula(), instance, &Env::new())
}

pub(crate) struct Ctx {
    names: Vec<String>,
    index: HashMap<String, u32>,
    sigs: Vec<Rel>,
    fields: Vec<Rel>,
    universe: Rel,
}

impl Ctx {
    pub(crate) fn new(model: &ResolvedModel, instance: &Instance) -> Self {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut intern = |s: &str| -> u32 {
            if let Some(&i) = index.get(s) {
                return i;
            }
            let i = names.len() as u32;
            names.push(s.to_string());
            index.insert(s.to_string(), i);
            i
        };
        let universe: Rel = instance.universe.iter().map(|a| vec![intern(a)]).collect();
        let sigs = model
            .sigs
            .iter()
            .map(|s| instance.sig(&s.name).iter().map(|a| vec![intern(a)]).collect())
            .collect();
        let fields = model
            .fields
            .iter()
            .map(|f| {
                instance
                    .field(&f.name)
                    .iter()
                    .map(|t| t.iter().map(|a| intern(a)).collect())
                    .collect()
            })
            .collect();
        Ctx {
            names,
            index,
            sigs,
            fields,
            universe,
        }
    }

    fn bind(&self, env: &Env) -> HashMap<VarId, u32> {
        env.iter()
            .map(|(&v, a)| (v, *self.index.get(a).expect("bound atom is in the instance")))
            .collect()
    }

    pub(crate) fn formula(&self, f: &RFormula, env: &mut HashMap<VarId, u32>) -> bool {
        match f {
            RFormula::Const(b) => *b,
            RFormula::Not(a) => !self.formula(a, env),
            RFormula::Logic(op, a, b) => {
                let a = self.formula(a, env);
                match op {
                    LogicOp::And => a && self.formula(b, env),
                    LogicOp::Or => a || self.formula(b, env),
                    LogicOp::Implies => !a || self.formula(b, env),
                    LogicOp::Iff => a == self.formula(b, env),
                }
            }
            RFormula::And(fs) => fs.iter().all(|f| self.formula(f, env)),
            RFormula::Quant { kind, decls, body } => {
                let mut count = 0usize;
                let mut total = 0usize;
                self.combos(decls, body, env, &mut count, &mut total);
                match kind {
                    QuantKind::All => count == total,
                    QuantKind::Some => count > 0,
                    QuantKind::No => count == 0,
                    QuantKind::Lone => count <= 1,
                    QuantKind::One => count == 1,
                }
            }
            RFormula::Compare(op, a, b) => {
                let (a, b) = (self.expr(a, env), self.expr(b, env));
                match op {
                    CompareOp::In => a.is_subset(&b),
                    CompareOp::NotIn => !a.is_subset(&b),
                    CompareOp::Eq => a == b,
                    CompareOp::Neq => a != b,
                }
            }
            RFormula::Mult(kind, e) => {
                let n = self.expr(e, env).len();
                match kind {
                    MultKind::Some => n > 0,
                    MultKind::No => n == 0,
                    MultKind::Lone => n <= 1,
                    MultKind::One => n == 1,
                }
            }
        }
    }

    /// Counts combinations of bindings, and those satisfying the body.
    fn combos(
        &self,
        decls: &[(VarId, RExpr)],
        body: &RFormula,
        env: &mut HashMap<VarId, u32>,
        count: &mut usize,
        total: &mut usize,
    ) {
        let Some(((var, bound), rest)) = decls.split_first() else {
            *total += 1;
            if self.formula(body, env) {
                *count += 1;
            }
            return;
        };
        for t in self.expr(bound, env) {
            let saved = env.insert(*var, t[0]);
            self.combos(rest, body, env, count, total);
            match saved {
                Some(a) => env.insert(*var, a),
                None => env.remove(var),
            };
        }
    }

    fn iden(&self) -> Rel {
        self.universe.iter().map(|t| vec![t[0], t[0]]).collect()
    }

    pub(crate) fn expr(&self, e: &RExpr, env: &mut HashMap<VarId, u32>) -> Rel {
        match &e.kind {
            RExprKind::Sig(s) => self.sigs[*s].clone(),
            RExprKind::Field(f) => self.fields[*f].clone(),
            RExprKind::Var(v) => [vec![env[v]]].into_iter().collect(),
            RExprKind::Univ => self.universe.clone(),
            RExprKind::Iden => self.iden(),
            RExprKind::None => Rel::new(),
            RExprKind::Unary(op, a) => {
                let a = self.expr(a, env);
                match op {
                    UnaryOp::Transpose => a.into_iter().map(|t| vec![t[1], t[0]]).collect(),
                    UnaryOp::Closure => closure(a),
                    UnaryOp::ReflexiveClosure => {
                        let mut c = closure(a);
                        c.extend(self.iden());
                        c
                    }
                }
            }
            RExprKind::Binary(op, a, b) => {
                let (a, b) = (self.expr(a, env), self.expr(b, env));
                match op {
                    BinaryOp::Union => a.union(&b).cloned().collect(),
                    BinaryOp::Diff => a.difference(&b).cloned().collect(),
                    BinaryOp::Inter => a.intersection(&b).cloned().collect(),
                    BinaryOp::Product => a
                        .iter()
                        .flat_map(|x| b.iter().map(move |y| [x.as_slice(), y.as_slice()].concat()))
                        .collect(),
                    BinaryOp::Join => join(&a, &b),
                }
            }
        }
    }
}

fn join(a: &Rel, b: &Rel) -> Rel {
    let mut out = Rel::new();
    for x in a {
        let (last, prefix) = x.split_last().expect("non-empty tuple");
        for y in b.iter().filter(|y| y[0] == *last) {
            out.insert([prefix, &y[1..]].concat());
        }
    }
    out
}

/// Least transitive relation containing `r`.
fn closure(r: Rel) -> Rel {
    let mut c = r;
    loop {
        let step = join(&c, &c);
        let before = c.len();
        c.extend(step);
        if c.len() == before {
            return c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, resolve};

    fn inst(universe: &[&str], r: &[(&str, &str)]) -> Instance {
        let mut i = Instance::default();
        i.universe = universe.iter().map(|s| s.to_string()).collect();
        i.sigs.insert("A".into(), i.universe.clone());
        i.fields.insert(
            "r".into(),
            r.iter().map(|(a, b)| vec![a.to_string(), b.to_string()]).collect(),
        );
        i
    }

    fn expr_of(model: &ResolvedModel, pred: &str) -> RExpr {
        match model.pred(pred).unwrap() {
            RFormula::Compare(_, _, e) => e.clone(),
            RFormula::And(fs) if fs.len() == 1 => match &fs[0] {
                RFormula::Compare(_, _, e) => e.clone(),
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    fn set(pairs: &[(&str, &str)]) -> TupleSet {
        pairs.iter().map(|(a, b)| vec![a.to_string(), b.to_string()]).collect()
    }

    #[test]
    fn iden_and_closure() {
        let src = "sig A { r: set A }\npred p { r in iden }\npred q { r in ^r }\nrun p";
        let model = resolve(&parse(src).unwrap()).unwrap();
        let i = inst(&["A$0", "A$1"], &[("A$0", "A$1"), ("A$1", "A$0")]);
        let iden = evaluate_expr(&model, &expr_of(&model, "p"), &i, &Env::new());
        assert_eq!(iden, set(&[("A$0", "A$0"), ("A$1", "A$1")]));
        let cl = evaluate_expr(&model, &expr_of(&model, "q"), &i, &Env::new());
        assert_eq!(
            cl,
            set(&[("A$0", "A$0"), ("A$0", "A$1"), ("A$1", "A$0"), ("A$1", "A$1")])
        );
    }

    #[test]
    fn quantifiers_count_bindings() {
        let src = "sig A { r: set A }\npred p { one a: A | some a.r }\npred q { lone a: A | no a.r }\nrun p";
        let model = resolve(&parse(src).unwrap()).unwrap();
        let i = inst(&["A$0", "A$1"], &[("A$0", "A$1")]);
        assert!(evaluate_formula(&model, model.pred("p").unwrap(), &i, &Env::new()));
        assert!(evaluate_formula(&model, model.pred("q").unwrap(), &i, &Env::new()));
    }
}
