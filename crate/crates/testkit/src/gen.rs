//! Seeded generator of small well-typed models.

use a4f_core::finder::{compute_bounds, DEFAULT_MAX_SCOPE};
use a4f_core::lang::{parse, resolve};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_depth: u32,
    /// Upper bound on bounds variables, to keep the oracle fast.
    pub max_vars: u32,
    pub max_fields: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 4,
            max_vars: 16,
            max_fields: 3,
        }
    }
}

#[derive(Clone)]
struct Field {
    name: String,
    arity: usize,
}

struct Gen {
    rng: ChaCha8Rng,
    sigs: Vec<String>,
    tops: Vec<String>,
    fields: Vec<Field>,
    vars: Vec<String>,
    next_var: usize,
}

/// A model that parses, resolves and has at most `max_vars` bounds
/// variables for its first command. Deterministic in `seed`.
pub fn random_model(seed: u64) -> String {
    random_model_with(seed, &GenConfig::default())
}

pub fn random_model_with(seed: u64, config: &GenConfig) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let attempt_seed = rng.random();
        let text = generate(attempt_seed, config);
        if acceptable(&text, config) {
            return text;
        }
    }
}

pub fn corpus(n: usize, seed: u64) -> Vec<String> {
    (0..n as u64).map(|i| random_model(seed.wrapping_mul(1_000_003).wrapping_add(i))).collect()
}

fn acceptable(text: &str, config: &GenConfig) -> bool {
    let Ok(parsed) = parse(text) else { return false };
    let Ok(model) = resolve(&parsed) else { return false };
    let Some(cmd) = model.commands.first() else { return false };
    match compute_bounds(&model, &cmd.scope, DEFAULT_MAX_SCOPE) {
        Ok(b) => b.num_vars() <= config.max_vars,
        Err(_) => false,
    }
}

fn generate(seed: u64, config: &GenConfig) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        sigs: Vec::new(),
        tops: Vec::new(),
        fields: Vec::new(),
        vars: Vec::new(),
        next_var: 0,
    };
    let mut out = String::new();

    let n_tops = g.rng.random_range(1..=2);
    for name in ["A", "B"].iter().take(n_tops) {
        g.tops.push(name.to_string());
        g.sigs.push(name.to_string());
    }
    let sub_parent = if g.rng.random_bool(0.35) {
        Some(g.tops[0].clone())
    } else {
        None
    };
    let mut subs = Vec::new();
    if let Some(p) = &sub_parent {
        let n = g.rng.random_range(1..=2);
        for i in 1..=n {
            subs.push(format!("{p}{i}"));
        }
        g.sigs.extend(subs.iter().cloned());
    }

    let n_fields = g.rng.random_range(0..=config.max_fields);
    let mut field_decls: Vec<(String, String)> = Vec::new();
    for name in ["r", "s", "t"].iter().take(n_fields) {
        let owner = g.sigs.choose(&mut g.rng).unwrap().clone();
        let col = g.sigs.choose(&mut g.rng).unwrap().clone();
        if g.rng.random_bool(0.25) {
            let col2 = g.sigs.choose(&mut g.rng).unwrap().clone();
            let lm = ["", "", "lone ", "one ", "some "].choose(&mut g.rng).unwrap();
            let rm = ["", "", "lone ", "one ", "some "].choose(&mut g.rng).unwrap();
            let decl = format!("{name}: {col} {lm}-> {rm}{col2}").replace("  ", " ");
            field_decls.push((owner, decl));
            g.fields.push(Field {
                name: name.to_string(),
                arity: 3,
            });
        } else {
            let m = ["set ", "set ", "lone ", "one ", "some ", ""].choose(&mut g.rng).unwrap();
            field_decls.push((owner, format!("{name}: {m}{col}")));
            g.fields.push(Field {
                name: name.to_string(),
                arity: 2,
            });
        }
    }
    let fields_of = |sig: &str| -> String {
        field_decls
            .iter()
            .filter(|(o, _)| o == sig)
            .map(|(_, d)| d.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    };
    for top in g.tops.clone() {
        let is_abstract = sub_parent.as_deref() == Some(top.as_str()) && g.rng.random_bool(0.5);
        let mult = if g.rng.random_bool(0.2) {
            *["one ", "lone ", "some "].choose(&mut g.rng).unwrap()
        } else {
            ""
        };
        let abs = if is_abstract { "abstract " } else { "" };
        out.push_str(&format!("{abs}{mult}sig {top} {{ {} }}\n", fields_of(&top)));
    }
    if let Some(p) = &sub_parent {
        for s in &subs {
            let mult = if g.rng.random_bool(0.15) { "lone " } else { "" };
            out.push_str(&format!("{mult}sig {s} extends {p} {{ {} }}\n", fields_of(s)));
        }
    }

    let n_facts = g.rng.random_range(0..=2);
    for _ in 0..n_facts {
        let f = g.formula(config.max_depth.min(3));
        out.push_str(&format!("fact {{ {f} }}\n"));
    }

    let scope = g.scope();
    let body = g.formula(config.max_depth);
    match g.rng.random_range(0..5) {
        0 => {
            out.push_str(&format!("pred p {{ {body} }}\nrun p {scope}\n"));
        }
        1 | 2 => {
            out.push_str(&format!("assert a {{ {body} }}\ncheck a {scope}\n"));
        }
        _ => {
            out.push_str(&format!("run {{ {body} }} {scope}\n"));
        }
    }
    out
}

impl Gen {
    fn scope(&mut self) -> String {
        let d = self.rng.random_range(1..=2);
        let exact = if self.rng.random_bool(0.3) { "exactly " } else { "" };
        let mut s = format!("for {exact}{d}");
        if self.tops.len() == 2 && self.rng.random_bool(0.4) {
            let k = self.rng.random_range(1..=2);
            let ex = if self.rng.random_bool(0.5) { "exactly " } else { "" };
            s.push_str(&format!(" but {ex}{k} B"));
        }
        s
    }

    fn fresh_var(&mut self) -> String {
        let v = format!("v{}", self.next_var);
        self.next_var += 1;
        v
    }

    fn formula(&mut self, depth: u32) -> String {
        let leaf = depth <= 1 || self.rng.random_bool(0.25);
        if leaf {
            return self.atomic(depth);
        }
        match self.rng.random_range(0..10) {
            0 => format!("not {}", self.paren_formula(depth - 1)),
            1 | 2 => {
                let op = ["and", "or", "implies", "iff"].choose(&mut self.rng).unwrap();
                let a = self.paren_formula(depth - 1);
                let b = self.paren_formula(depth - 1);
                format!("{a} {op} {b}")
            }
            3..=6 => self.quantified(depth),
            _ => self.atomic(depth),
        }
    }

    fn paren_formula(&mut self, depth: u32) -> String {
        format!("({})", self.formula(depth))
    }

    fn quantified(&mut self, depth: u32) -> String {
        let q = ["all", "some", "no", "one", "lone"].choose(&mut self.rng).unwrap();
        let v = self.fresh_var();
        let bound = if self.rng.random_bool(0.75) {
            self.sigs.choose(&mut self.rng).unwrap().clone()
        } else {
            self.expr(1, 2)
        };
        let mut decls = format!("{v}: {bound}");
        self.vars.push(v);
        let mut pushed = 1;
        if self.rng.random_bool(0.2) {
            let w = self.fresh_var();
            let b2 = self.sigs.choose(&mut self.rng).unwrap().clone();
            decls.push_str(&format!(", {w}: {b2}"));
            self.vars.push(w);
            pushed += 1;
        }
        let body = self.formula(depth - 1);
        for _ in 0..pushed {
            self.vars.pop();
        }
        format!("{q} {decls} | {body}")
    }

    fn atomic(&mut self, depth: u32) -> String {
        let ed = depth.clamp(1, 3);
        match self.rng.random_range(0..6) {
            0..=2 => {
                let m = ["some", "no", "lone", "one"].choose(&mut self.rng).unwrap();
                let arity = self.rng.random_range(1..=2);
                format!("{m} {}", self.expr(arity, ed))
            }
            _ => {
                let arity = self.rng.random_range(1..=2);
                let op = ["in", "=", "!=", "not in"].choose(&mut self.rng).unwrap();
                let a = self.expr(arity, ed);
                let b = self.expr(arity, ed);
                format!("{a} {op} {b}")
            }
        }
    }

    fn fields_of_arity(&self, arity: usize) -> Vec<String> {
        self.fields.iter().filter(|f| f.arity == arity).map(|f| f.name.clone()).collect()
    }

    fn expr(&mut self, arity: usize, depth: u32) -> String {
        let leaf = depth <= 1 || self.rng.random_bool(0.35);
        match arity {
            1 => {
                if leaf {
                    let mut options = self.sigs.clone();
                    options.extend(self.vars.iter().cloned());
                    options.extend(self.vars.iter().cloned());
                    if self.rng.random_bool(0.05) {
                        return "univ".into();
                    }
                    return options.choose(&mut self.rng).unwrap().clone();
                }
                match self.rng.random_range(0..5) {
                    0 => format!("{}.{}", self.expr(1, depth - 1), self.paren_expr(2, depth - 1)),
                    1 => format!("{}.{}", self.paren_expr(2, depth - 1), self.paren_expr(1, depth - 1)),
                    2 if !self.fields_of_arity(3).is_empty() => {
                        format!("{}.({}.{})", self.expr(1, 1), self.expr(1, 1), self.pick_field(3))
                    }
                    _ => {
                        let op = ["+", "&", "-"].choose(&mut self.rng).unwrap();
                        format!("{} {op} {}", self.paren_expr(1, depth - 1), self.paren_expr(1, depth - 1))
                    }
                }
            }
            2 => {
                let binary = self.fields_of_arity(2);
                if leaf {
                    if binary.is_empty() || self.rng.random_bool(0.1) {
                        return "iden".into();
                    }
                    return binary.choose(&mut self.rng).unwrap().clone();
                }
                match self.rng.random_range(0..7) {
                    0 => format!("~{}", self.paren_expr(2, depth - 1)),
                    1 => format!("^{}", self.paren_expr(2, depth - 1)),
                    2 => format!("*{}", self.paren_expr(2, depth - 1)),
                    3 => format!("{} -> {}", self.paren_expr(1, depth - 1), self.paren_expr(1, depth - 1)),
                    4 if !self.fields_of_arity(3).is_empty() => {
                        format!("{}.{}", self.expr(1, 1), self.pick_field(3))
                    }
                    _ => {
                        let op = ["+", "&", "-"].choose(&mut self.rng).unwrap();
                        format!("{} {op} {}", self.paren_expr(2, depth - 1), self.paren_expr(2, depth - 1))
                    }
                }
            }
            _ => self.pick_field(3),
        }
    }

    fn pick_field(&mut self, arity: usize) -> String {
        self.fields_of_arity(arity).choose(&mut self.rng).unwrap().clone()
    }

    fn paren_expr(&mut self, arity: usize, depth: u32) -> String {
        format!("({})", self.expr(arity, depth))
    }
}
