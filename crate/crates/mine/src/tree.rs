use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    pub parent: Option<String>,
    pub time: String,
    pub code: String,
    pub command: Option<String>,
    pub result: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    root: String,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("malformed tree document: {0}")]
    Malformed(String),
    #[error("tree has no nodes")]
    Empty,
    #[error("root `{0}` is not a node without a parent")]
    MissingRoot(String),
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("node `{node}` names unknown parent `{parent}`")]
    OrphanParent { node: String, parent: String },
    #[error("node `{0}` has no parent but is not the root")]
    ExtraRoot(String),
    #[error("parent links starting at `{0}` form a cycle")]
    Cycle(String),
}

/// A validated derivation tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    nodes: Vec<Node>,
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

const RESULTS: [&str; 4] = ["sat", "unsat", "error", "limit"];

pub fn parse_tree(text: &str) -> Result<Tree, TreeError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| TreeError::Malformed(e.to_string()))?;
    Tree::new(doc.root, doc.nodes)
}

impl Tree {
    pub fn new(root: String, nodes: Vec<Node>) -> Result<Tree, TreeError> {
        if nodes.is_empty() {
            return Err(TreeError::Empty);
        }
        let mut at: HashMap<&str, usize> = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if at.insert(n.id.as_str(), i).is_some() {
                return Err(TreeError::DuplicateId(n.id.clone()));
            }
            if let Some(r) = &n.result {
                if !RESULTS.contains(&r.as_str()) {
                    return Err(TreeError::Malformed(format!("node `{}` has result `{r}`", n.id)));
                }
            }
        }
        let root_ix = match at.get(root.as_str()) {
            Some(&i) if nodes[i].parent.is_none() => i,
            _ => return Err(TreeError::MissingRoot(root)),
        };
        let mut parent = vec![None; nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            match &n.parent {
                None if i != root_ix => return Err(TreeError::ExtraRoot(n.id.clone())),
                None => {}
                Some(p) => {
                    let &pi = at.get(p.as_str()).ok_or_else(|| TreeError::OrphanParent {
                        node: n.id.clone(),
                        parent: p.clone(),
                    })?;
                    parent[i] = Some(pi);
                    children[pi].push(i);
                }
            }
        }
        // Every chain must reach the root; 0 = unvisited, 1 = on the current walk, 2 = done.
        let mut state = vec![0u8; nodes.len()];
        state[root_ix] = 2;
        for start in 0..nodes.len() {
            let mut walk = Vec::new();
            let mut cur = start;
            while state[cur] == 0 {
                state[cur] = 1;
                walk.push(cur);
                cur = parent[cur].expect("only the root lacks a parent");
            }
            if state[cur] == 1 {
                return Err(TreeError::Cycle(nodes[start].id.clone()));
            }
            for w in walk {
                state[w] = 2;
            }
        }
        Ok(Tree {
            nodes,
            root: root_ix,
            parent,
            children,
        })
    }

    pub fn root(&self) -> &Node {
        &self.nodes[self.root]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub(crate) fn root_index(&self) -> usize {
        self.root
    }

    pub(crate) fn parent_of(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub(crate) fn children_of(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn to_json(&self) -> String {
        let doc = Document {
            root: self.root().id.clone(),
            nodes: self.nodes.clone(),
        };
        serde_json::to_string(&doc).expect("tree serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(nodes: &[(&str, Option<&str>)]) -> String {
        let nodes: Vec<_> = nodes
            .iter()
            .map(|(id, p)| {
                serde_json::json!({"id": id, "parent": p, "time": "t", "code": "", "command": null, "result": null})
            })
            .collect();
        serde_json::json!({"root": "r", "nodes": nodes}).to_string()
    }

    #[test]
    fn named_errors() {
        assert_eq!(parse_tree(&doc(&[])), Err(TreeError::Empty));
        assert!(matches!(parse_tree("{\"root\":1}"), Err(TreeError::Malformed(_))));
        assert_eq!(
            parse_tree(&doc(&[("r", None), ("a", Some("x"))])),
            Err(TreeError::OrphanParent {
                node: "a".into(),
                parent: "x".into()
            })
        );
        assert_eq!(
            parse_tree(&doc(&[("r", None), ("a", Some("b")), ("b", Some("a"))])),
            Err(TreeError::Cycle("a".into()))
        );
        assert_eq!(
            parse_tree(&doc(&[("q", None)])),
            Err(TreeError::MissingRoot("r".into()))
        );
        assert_eq!(
            parse_tree(&doc(&[("r", None), ("q", None)])),
            Err(TreeError::ExtraRoot("q".into()))
        );
        assert_eq!(
            parse_tree(&doc(&[("r", None), ("r", Some("r"))])),
            Err(TreeError::DuplicateId("r".into()))
        );
        let t = parse_tree(&doc(&[("r", None), ("a", Some("r")), ("b", Some("a"))])).unwrap();
        assert_eq!(parse_tree(&t.to_json()).unwrap(), t);
    }
}
