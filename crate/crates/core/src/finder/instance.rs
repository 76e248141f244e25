use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A satisfying assignment, named. Lists are sorted as strings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Instance {
    pub sigs: BTreeMap<String, Vec<String>>,
    pub fields: BTreeMap<String, Vec<Vec<String>>>,
    pub universe: Vec<String>,
}

impl Instance {
    pub fn sig(&self, name: &str) -> &[String] {
        self.sigs.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn field(&self, name: &str) -> &[Vec<String>] {
        self.fields.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("instance serializes")
    }

    pub(crate) fn normalize(&mut self) {
        self.universe.sort();
        for atoms in self.sigs.values_mut() {
            atoms.sort();
        }
        for tuples in self.fields.values_mut() {
            tuples.sort();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_form() {
        let mut i = Instance::default();
        i.universe = vec!["A$1".into(), "A$0".into()];
        i.sigs.insert("A".into(), vec!["A$1".into(), "A$0".into()]);
        i.fields.insert("r".into(), vec![vec!["A$0".into(), "A$1".into()]]);
        i.normalize();
        let json = i.to_json();
        assert_eq!(
            json,
            serde_json::json!({
                "sigs": {"A": ["A$0", "A$1"]},
                "fields": {"r": [["A$0", "A$1"]]},
                "universe": ["A$0", "A$1"],
            })
        );
        let back: Instance = serde_json::from_value(json).unwrap();
        assert_eq!(back, i);
    }
}
