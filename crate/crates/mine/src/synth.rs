//! Seeded derivation trees with known per-session outcomes.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const SPECS: [&str; 4] = [
    "no n: Node | n in n.adj",
    "adj = ~adj",
    "all n: Node | Node in n.*adj",
    "all n: Node | lone n.adj",
];

/// A public check: executing it, even to `unsat`, never solves anything.
pub const PUBLIC_CHECK: &str = "Sanity";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    /// Solved challenge names for each leaf, by leaf id.
    pub solved_by_leaf: Vec<(String, BTreeSet<String>)>,
    pub all: usize,
    pub some: usize,
    pub none: usize,
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub document: String,
    pub challenges: Vec<String>,
    pub truth: GroundTruth,
}

/// A root model with `k` secret checks named `Inv{i}OK`.
pub fn challenge_model(k: usize) -> String {
    let mut code = String::from("sig Node { adj: set Node }\n");
    for i in 1..=k {
        code.push_str(&format!("\npred Inv{i} {{\n}}\n"));
    }
    code.push_str(&format!("\ncheck {PUBLIC_CHECK} {{ Node = Node }} for 2\n"));
    for i in 1..=k {
        code.push_str(&format!(
            "\n//SECRET\ncheck Inv{i}OK {{\n  Inv{i} iff ({})\n}} for 3\n",
            SPECS[(i - 1) % SPECS.len()]
        ));
    }
    code
}

struct Built {
    id: String,
    parent: Option<usize>,
    command: Option<String>,
    result: Option<&'static str>,
    /// Challenges solved somewhere from the root down to this node.
    solved: BTreeSet<String>,
    children: usize,
}

pub fn synthetic_tree(seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=4);
    let challenges: Vec<String> = (1..=k).map(|i| format!("Inv{i}OK")).collect();
    let root_code = challenge_model(k);
    let mut nodes = vec![Built {
        id: format!("t{seed}-root"),
        parent: None,
        command: None,
        result: None,
        solved: BTreeSet::new(),
        children: 0,
    }];
    let sessions = rng.random_range(0..=12);
    let mut commands: Vec<String> = challenges.clone();
    commands.push(PUBLIC_CHECK.to_string());
    for s in 0..sessions {
        // Branch from the root or from an inner node, so no existing leaf is lost.
        let inner: Vec<usize> = (1..nodes.len()).filter(|&i| nodes[i].children > 0).collect();
        let start = if inner.is_empty() || rng.random_bool(0.6) {
            0
        } else {
            *inner.choose(&mut rng).unwrap()
        };
        let target: Vec<&String> = challenges.iter().filter(|_| rng.random_bool(0.5)).collect();
        let mut steps: Vec<(String, &'static str)> = (0..rng.random_range(0..6))
            .map(|_| {
                let c = commands.choose(&mut rng).unwrap().clone();
                let r = if c == PUBLIC_CHECK {
                    *["sat", "unsat"].choose(&mut rng).unwrap()
                } else {
                    *["sat", "sat", "error", "limit"].choose(&mut rng).unwrap()
                };
                (c, r)
            })
            .collect();
        for c in &target {
            let at = rng.random_range(0..=steps.len());
            steps.insert(at, ((*c).clone(), "unsat"));
            if rng.random_bool(0.3) {
                // Resubmitting after solving.
                let later = rng.random_range(at + 1..=steps.len());
                steps.insert(later, ((*c).clone(), "unsat"));
            }
        }
        if steps.is_empty() {
            steps.push((commands.choose(&mut rng).unwrap().clone(), "error"));
        }
        let mut parent = start;
        for (j, (c, r)) in steps.into_iter().enumerate() {
            let mut solved = nodes[parent].solved.clone();
            if r == "unsat" && c != PUBLIC_CHECK {
                solved.insert(c.clone());
            }
            nodes[parent].children += 1;
            nodes.push(Built {
                id: format!("t{seed}-s{s}-{j}"),
                parent: Some(parent),
                command: Some(c),
                result: Some(r),
                solved,
                children: 0,
            });
            parent = nodes.len() - 1;
        }
    }

    let mut truth = GroundTruth {
        solved_by_leaf: Vec::new(),
        all: 0,
        some: 0,
        none: 0,
    };
    for n in nodes.iter().skip(1).filter(|n| n.children == 0) {
        match n.solved.len() {
            0 => truth.none += 1,
            x if x == k => truth.all += 1,
            _ => truth.some += 1,
        }
        truth.solved_by_leaf.push((n.id.clone(), n.solved.clone()));
    }

    let doc_nodes: Vec<_> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let code = if i == 0 {
                root_code.clone()
            } else {
                format!("{root_code}// attempt {i}\n")
            };
            json!({
                "id": n.id,
                "parent": n.parent.map(|p| nodes[p].id.clone()),
                "time": format!("2018-10-01T{:02}:{:02}:{:02}.{:03}Z", i / 3600 % 24, i / 60 % 60, i % 60, i % 1000),
                "code": code,
                "command": n.command,
                "result": n.result,
            })
        })
        .collect();
    Synthetic {
        document: json!({"root": nodes[0].id, "nodes": doc_nodes}).to_string(),
        challenges,
        truth,
    }
}
