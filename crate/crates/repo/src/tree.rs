//! The derivation-tree download format.

use serde::{Deserialize, Serialize};

use crate::records::{ExecResult, ModelRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: String,
    pub parent: Option<String>,
    pub time: String,
    pub code: String,
    pub command: Option<String>,
    pub result: Option<ExecResult>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub root: String,
    pub nodes: Vec<TreeNode>,
}

impl From<&ModelRecord> for TreeNode {
    fn from(r: &ModelRecord) -> Self {
        TreeNode {
            id: r.id.clone(),
            parent: r.parent_id.clone(),
            time: r.time.clone(),
            code: r.code.clone(),
            command: r.command_name.clone(),
            result: r.result,
        }
    }
}

impl TreeDocument {
    /// Builds the document from records in append order. Ties in time keep
    /// that order.
    pub fn from_records<'a>(root: &str, records: impl IntoIterator<Item = &'a ModelRecord>) -> Self {
        let mut nodes: Vec<TreeNode> = records.into_iter().map(TreeNode::from).collect();
        nodes.sort_by(|a, b| a.time.cmp(&b.time));
        TreeDocument {
            root: root.to_string(),
            nodes,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serializes")
    }
}
