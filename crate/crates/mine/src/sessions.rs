use std::collections::BTreeMap;

use a4f_core::challenge::split;
use a4f_core::lang::parse_with_limit;
use serde::Serialize;
use thiserror::Error;

use crate::tree::Tree;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChallengeProgress {
    pub attempts: u32,
    pub solved: bool,
    pub attempts_to_first_solve: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Session {
    /// Path from a child of the root down to a leaf.
    pub node_ids: Vec<String>,
    pub per_challenge: BTreeMap<String, ChallengeProgress>,
}

impl Session {
    pub fn solved_count(&self) -> usize {
        self.per_challenge.values().filter(|p| p.solved).count()
    }
}

/// Secret check commands of the tree's root model. A root that does not
/// parse has none.
pub fn challenges_of(tree: &Tree) -> Vec<String> {
    match parse_with_limit(&tree.root().code, usize::MAX) {
        Ok(m) => split(&m).challenges(),
        Err(_) => Vec::new(),
    }
}

pub fn extract_sessions(tree: &Tree) -> Vec<Session> {
    extract_sessions_for(tree, &challenges_of(tree))
}

/// One session per leaf. The root alone yields none.
pub fn extract_sessions_for(tree: &Tree, challenges: &[String]) -> Vec<Session> {
    let root = tree.root_index();
    let mut out = Vec::new();
    for leaf in (0..tree.len()).filter(|&i| i != root && tree.children_of(i).is_empty()) {
        let mut path = Vec::new();
        let mut cur = leaf;
        while cur != root {
            path.push(cur);
            cur = tree.parent_of(cur).expect("validated tree");
        }
        path.reverse();
        let mut per_challenge: BTreeMap<String, ChallengeProgress> =
            challenges.iter().map(|c| (c.clone(), ChallengeProgress::default())).collect();
        for &i in &path {
            let node = &tree.nodes()[i];
            let Some(p) = node.command.as_ref().and_then(|c| per_challenge.get_mut(c)) else {
                continue;
            };
            p.attempts += 1;
            if node.result.as_deref() == Some("unsat") && !p.solved {
                p.solved = true;
                p.attempts_to_first_solve = Some(p.attempts);
            }
        }
        out.push(Session {
            node_ids: path.iter().map(|&i| tree.nodes()[i].id.clone()).collect(),
            per_challenge,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LinkStats {
    pub link: String,
    pub challenge_count: usize,
    pub session_count: usize,
    pub all_solved: usize,
    pub some_solved: usize,
    pub none_solved: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("`{0}` is not a challenge of this model")]
    UnknownChallenge(String),
}

/// Counts sessions by how many of `challenges` they solved. Every name
/// must be a secret check of the root model.
pub fn compute_stats(tree: &Tree, link: &str, challenges: &[String]) -> Result<LinkStats, StatsError> {
    let known = challenges_of(tree);
    if let Some(c) = challenges.iter().find(|c| !known.contains(c)) {
        return Err(StatsError::UnknownChallenge(c.clone()));
    }
    let sessions = extract_sessions_for(tree, challenges);
    let mut stats = LinkStats {
        link: link.to_string(),
        challenge_count: challenges.len(),
        session_count: sessions.len(),
        all_solved: 0,
        some_solved: 0,
        none_solved: 0,
    };
    for s in &sessions {
        match s.solved_count() {
            0 => stats.none_solved += 1,
            n if n == challenges.len() => stats.all_solved += 1,
            _ => stats.some_solved += 1,
        }
    }
    Ok(stats)
}
