use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecResult {
    Sat,
    Unsat,
    Error,
    Limit,
}

impl ExecResult {
    pub fn as_str(self) -> &'static str {
        match self {
            ExecResult::Sat => "sat",
            ExecResult::Unsat => "unsat",
            ExecResult::Error => "error",
            ExecResult::Limit => "limit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "sat" => ExecResult::Sat,
            "unsat" => ExecResult::Unsat,
            "error" => ExecResult::Error,
            "limit" => ExecResult::Limit,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelRecord {
    pub id: String,
    pub parent_id: Option<String>,
    pub root_link_id: String,
    pub time: String,
    pub code: String,
    pub command_name: Option<String>,
    pub result: Option<ExecResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theme: Option<Theme>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Public,
    Private,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LinkRecord {
    pub token: String,
    pub model_id: String,
    pub visibility: Visibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InstanceRecord {
    pub token: String,
    pub model_id: String,
    pub command_name: String,
    pub skip: u64,
    pub instance: serde_json::Value,
    pub theme: Theme,
    pub layout: BTreeMap<String, Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Ellipse,
    Rectangle,
    Hexagon,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigStyle {
    pub color: String,
    pub shape: Shape,
    pub visible: bool,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldStyle {
    pub color: String,
    pub visible: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Theme {
    #[serde(default)]
    pub per_sig: BTreeMap<String, SigStyle>,
    #[serde(default)]
    pub per_field: BTreeMap<String, FieldStyle>,
    #[serde(default)]
    pub projection: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThemeError {
    #[error("color `{0}` is not a #rrggbb value")]
    BadColor(String),
    #[error("projection names unknown sig `{0}`")]
    UnknownProjection(String),
}

fn hex_rgb(s: &str) -> bool {
    s.len() == 7 && s.starts_with('#') && s[1..].chars().all(|c| c.is_ascii_hexdigit())
}

impl Theme {
    /// Checks colors, and that projected sigs are among `sigs`.
    pub fn validate<'a>(&self, sigs: impl IntoIterator<Item = &'a str>) -> Result<(), ThemeError> {
        let colors = self
            .per_sig
            .values()
            .map(|s| &s.color)
            .chain(self.per_field.values().map(|f| &f.color));
        for c in colors {
            if !hex_rgb(c) {
                return Err(ThemeError::BadColor(c.clone()));
            }
        }
        let known: Vec<&str> = sigs.into_iter().collect();
        for p in &self.projection {
            if !known.contains(&p.as_str()) {
                return Err(ThemeError::UnknownProjection(p.clone()));
            }
        }
        Ok(())
    }
}

/// One line of the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Record {
    Model(ModelRecord),
    Link(LinkRecord),
    Instance(InstanceRecord),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theme_validation() {
        let mut t = Theme::default();
        t.per_sig.insert(
            "Node".into(),
            SigStyle {
                color: "#12ab9F".into(),
                shape: Shape::Hexagon,
                visible: true,
                label: "N".into(),
            },
        );
        t.projection.push("Node".into());
        assert_eq!(t.validate(["Node"]), Ok(()));
        assert!(matches!(t.validate(["Edge"]), Err(ThemeError::UnknownProjection(_))));
        t.per_sig.get_mut("Node").unwrap().color = "red".into();
        assert!(matches!(t.validate(["Node"]), Err(ThemeError::BadColor(_))));
    }

    #[test]
    fn theme_wire_names() {
        let t: Theme = serde_json::from_str(
            r##"{"perSig":{"A":{"color":"#000000","shape":"ellipse","visible":false,"label":"a"}},"perField":{"r":{"color":"#ffffff","visible":true}},"projection":["A"]}"##,
        )
        .unwrap();
        assert_eq!(t.per_field["r"].color, "#ffffff");
        assert!(serde_json::from_str::<Theme>(r##"{"perSig":{"A":{"color":"#000000","shape":"star","visible":true,"label":""}}}"##).is_err());
    }
}
