//! Models whose secret paragraphs carry unique marker strings.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct CanaryModel {
    pub text: String,
    pub canaries: Vec<String>,
    /// Secret check commands, all executable through the public link.
    pub checks: Vec<String>,
    pub candidate: String,
}

fn token(rng: &mut ChaCha8Rng) -> String {
    const HEX: &[u8] = b"0123456789abcdef";
    (0..12).map(|_| HEX[rng.random_range(0..16)] as char).collect()
}

const DECLS: [&str; 3] = [
    "sig Node { adj: set Node }",
    "sig Person { spouse: lone Person, parent: set Person }",
    "abstract sig Obj {}\nsig File extends Obj {}\nsig Dir extends Obj { contents: set Obj }",
];

const SPECS: [[&str; 3]; 3] = [
    ["no n: Node | n in n.adj", "adj = ~adj", "all n: Node | Node in n.*adj"],
    ["spouse = ~spouse", "no p: Person | p in p.^parent", "no spouse & parent"],
    ["all f: File | some contents.f", "no d: Dir | d in d.^contents", "all o: Obj | lone contents.o"],
];

pub fn canary_model(seed: u64) -> CanaryModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = rng.random_range(0..DECLS.len());
    let mut canaries = Vec::new();
    let mut checks = Vec::new();
    let candidate = "Cand".to_string();
    let mut text = format!("{}\n\npred {candidate} {{\n}}\n", DECLS[domain]);
    let n = rng.random_range(1..=3);
    for i in 0..n {
        let spec = SPECS[domain].choose(&mut rng).unwrap();
        let c_name = format!("Zq{}", token(&mut rng));
        let c_comment = format!("zc{}", token(&mut rng));
        let c_var = format!("zv{}", token(&mut rng));
        // Spec body binds a throwaway variable named by a canary.
        let first_sig = DECLS[domain]
            .split_whitespace()
            .skip_while(|w| *w != "sig")
            .nth(1)
            .unwrap();
        text.push_str(&format!(
            "\n//SECRET\npred {c_name} {{\n  // {c_comment}\n  ({spec}) and (all {c_var}: {first_sig} | {c_var} in {first_sig})\n}}\n"
        ));
        let check = format!("Check{i}");
        text.push_str(&format!(
            "\n//SECRET\ncheck {check} {{ {candidate} iff {c_name} }} for 2\n"
        ));
        canaries.extend([c_name, c_comment, c_var]);
        checks.push(check);
    }
    if rng.random_bool(0.5) {
        let c = format!("zf{}", token(&mut rng));
        text.push_str(&format!("\n//SECRET\nfact {{ /* {c} */ some univ or no univ }}\n"));
        canaries.push(c);
    }
    CanaryModel {
        text,
        canaries,
        checks,
        candidate,
    }
}
