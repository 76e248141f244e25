//! Secret paragraphs: public views, merging submissions with stored secrets,
//! and grading.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finder::{enumerate, FinderError, Instance, ResourceBudget, SolveOutcome};
use crate::lang::{
    parse, parse_with_limit, resolve, text_position, CommandKind, ParagraphKind, Position, SourceModel,
    DEFAULT_MAX_SOURCE_BYTES, SECRET_MARKER,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandEntry {
    pub name: String,
    pub kind: CommandKind,
    pub secret: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretParagraph {
    /// Paragraph source, without its marker.
    pub source: String,
    pub name: String,
    pub anonymous: bool,
    pub kind: ParagraphKind,
    /// Every global name the paragraph declares.
    pub declares: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitModel {
    pub public_text: String,
    pub secret_paragraphs: Vec<SecretParagraph>,
    pub command_index: Vec<CommandEntry>,
}

impl SplitModel {
    pub fn has_secrets(&self) -> bool {
        !self.secret_paragraphs.is_empty()
    }

    pub fn command(&self, name: &str) -> Option<&CommandEntry> {
        self.command_index.iter().find(|c| c.name == name)
    }

    /// Names of secret check commands: the challenges of a model.
    pub fn challenges(&self) -> Vec<String> {
        self.command_index
            .iter()
            .filter(|c| c.secret && c.kind == CommandKind::Check)
            .map(|c| c.name.clone())
            .collect()
    }
}

pub fn split(model: &SourceModel) -> SplitModel {
    let mut public_text = String::with_capacity(model.text.len());
    let mut cursor = 0;
    let mut secret_paragraphs = Vec::new();
    for p in model.paragraphs.iter().filter(|p| p.secret) {
        let start = p.marker.map_or(p.span.start, |m| m.start);
        public_text.push_str(&model.text[cursor..start]);
        cursor = p.span.end;
        secret_paragraphs.push(SecretParagraph {
            source: model.paragraph_text(p).to_string(),
            name: p.name.clone(),
            anonymous: p.anonymous,
            kind: p.kind,
            declares: p.declared_names().into_iter().map(str::to_string).collect(),
        });
    }
    public_text.push_str(&model.text[cursor..]);
    let command_index = model
        .paragraphs
        .iter()
        .filter(|p| p.kind.is_command())
        .map(|p| CommandEntry {
            name: p.name.clone(),
            kind: if p.kind == ParagraphKind::RunCmd {
                CommandKind::Run
            } else {
                CommandKind::Check
            },
            secret: p.secret,
        })
        .collect();
    SplitModel {
        public_text,
        secret_paragraphs,
        command_index,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error(transparent)]
    Parse(#[from] crate::ParseError),
    #[error("`{name}` is already declared by a secret paragraph")]
    SecretNameClash { name: String },
}

/// A merged model and the byte offset where the secret region starts.
#[derive(Debug, Clone, PartialEq)]
pub struct Merged {
    pub model: SourceModel,
    pub secret_start: usize,
}

pub fn merge(secrets: &[SecretParagraph], submitted: &str) -> Result<Merged, MergeError> {
    let public = parse(submitted)?;
    let secret_names: HashSet<&str> = secrets
        .iter()
        .filter(|s| !s.anonymous)
        .flat_map(|s| s.declares.iter().map(String::as_str))
        .collect();
    for p in public.paragraphs.iter().filter(|p| !p.anonymous) {
        for name in p.declared_names() {
            if secret_names.contains(name) {
                return Err(MergeError::SecretNameClash { name: name.to_string() });
            }
        }
    }
    let (text, secret_start) = merged_source(secrets, submitted);
    let limit = DEFAULT_MAX_SOURCE_BYTES.max(submitted.len()) + (text.len() - secret_start);
    let mut model = parse_with_limit(&text, limit)?;
    rename_anonymous(&mut model, secret_start, secrets);
    Ok(Merged { model, secret_start })
}

/// The text of `submitted` with the secret paragraphs appended, and the
/// offset where they start. Needs no parse, so it also covers broken
/// submissions.
pub fn merged_source(secrets: &[SecretParagraph], submitted: &str) -> (String, usize) {
    let mut text = submitted.to_string();
    if !secrets.is_empty() && !text.is_empty() && !text.ends_with('\n') {
        text.push('\n');
    }
    let secret_start = text.len();
    for s in secrets {
        text.push_str(SECRET_MARKER);
        text.push('\n');
        text.push_str(&s.source);
        text.push('\n');
    }
    (text, secret_start)
}

/// Secret anonymous paragraphs keep their stored names; public ones are
/// numbered per kind in order, skipping numbers the secrets hold.
fn rename_anonymous(model: &mut SourceModel, secret_start: usize, secrets: &[SecretParagraph]) {
    let taken: HashSet<String> = secrets.iter().filter(|s| s.anonymous).map(|s| s.name.clone()).collect();
    let mut next = [0usize; 3];
    let mut secret_iter = secrets.iter();
    for p in model.paragraphs.iter_mut() {
        if p.span.start >= secret_start {
            if let Some(s) = secret_iter.next() {
                p.name = s.name.clone();
            }
            continue;
        }
        if !p.anonymous {
            continue;
        }
        let (slot, prefix) = match p.kind {
            ParagraphKind::Fact => (0, "fact"),
            ParagraphKind::RunCmd => (1, "run"),
            ParagraphKind::CheckCmd => (2, "check"),
            _ => continue,
        };
        loop {
            let candidate = format!("{prefix}${}", next[slot]);
            next[slot] += 1;
            if !taken.contains(&candidate) {
                p.name = candidate;
                break;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GradeError {
    Parse { message: String, position: Option<Position> },
    Resolve { code: String, message: String, position: Option<Position> },
    SecretNameClash { name: String },
    Analysis { message: String },
}

impl GradeError {
    pub fn code(&self) -> &str {
        match self {
            GradeError::Parse { .. } => "parse_error",
            GradeError::Resolve { code, .. } => code,
            GradeError::SecretNameClash { .. } => "secret_name_clash",
            GradeError::Analysis { .. } => "analysis_error",
        }
    }

    pub fn message(&self) -> String {
        match self {
            GradeError::Parse { message, .. }
            | GradeError::Resolve { message, .. }
            | GradeError::Analysis { message } => message.clone(),
            GradeError::SecretNameClash { name } => {
                format!("`{name}` is already declared by a secret paragraph")
            }
        }
    }

    pub fn position(&self) -> Option<Position> {
        match self {
            GradeError::Parse { position, .. } | GradeError::Resolve { position, .. } => *position,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict", content = "detail")]
pub enum Verdict {
    Solved,
    Counterexample(Instance),
    Witness(Instance),
    NoWitness,
    Error(GradeError),
    ResourceLimit,
}

impl Verdict {
    /// Stored result: `sat`, `unsat`, `error` or `limit`.
    pub fn result(&self) -> &'static str {
        match self {
            Verdict::Solved | Verdict::NoWitness => "unsat",
            Verdict::Counterexample(_) | Verdict::Witness(_) => "sat",
            Verdict::Error(_) => "error",
            Verdict::ResourceLimit => "limit",
        }
    }

    pub fn instance(&self) -> Option<&Instance> {
        match self {
            Verdict::Counterexample(i) | Verdict::Witness(i) => Some(i),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeResult {
    pub command: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    /// Stored secrets are merged into the submission.
    Public,
    /// The submission is analyzed as is.
    Private,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChallengeError {
    #[error("no command named {0}")]
    UnknownCommand(String),
}

/// Runs `command` on the submission as seen through a link, returning the
/// `(skip+1)`-th outcome.
pub fn execute_on_view(
    stored: &SplitModel,
    access: Access,
    submitted: &str,
    command: &str,
    skip: u64,
    budget: &ResourceBudget,
) -> Result<GradeResult, ChallengeError> {
    let verdict = match analyze(stored, access, submitted, command, skip, budget) {
        Ok(v) => v,
        Err(Failure::Grade(e)) => Verdict::Error(e),
        Err(Failure::UnknownCommand) => return Err(ChallengeError::UnknownCommand(command.to_string())),
    };
    Ok(GradeResult {
        command: command.to_string(),
        verdict,
    })
}

enum Failure {
    Grade(GradeError),
    UnknownCommand,
}

fn analyze(
    stored: &SplitModel,
    access: Access,
    submitted: &str,
    command: &str,
    skip: u64,
    budget: &ResourceBudget,
) -> Result<Verdict, Failure> {
    let (model, secret_start) = match access {
        Access::Public => match merge(&stored.secret_paragraphs, submitted) {
            Ok(m) => (m.model, m.secret_start),
            Err(MergeError::Parse(e)) => return Err(Failure::Grade(parse_error(&e, submitted.len()))),
            Err(MergeError::SecretNameClash { name }) => return Err(Failure::Grade(GradeError::SecretNameClash { name })),
        },
        Access::Private => match parse(submitted) {
            Ok(m) => (m, usize::MAX),
            Err(e) => return Err(Failure::Grade(parse_error(&e, usize::MAX))),
        },
    };
    let resolved = match resolve(&model) {
        Ok(r) => r,
        Err(e) => {
            let start = e.span().start;
            let err = if start < secret_start {
                GradeError::Resolve {
                    code: e.code().to_string(),
                    message: e.to_string(),
                    position: Some(text_position(&model.text, start)),
                }
            } else {
                // Only the name, never text or positions, from the secret region.
                let message = match &e {
                    crate::ResolveError::UnknownName { name, .. } => {
                        format!("unknown name `{name}` used by a secret paragraph")
                    }
                    other => format!("{} in a secret paragraph", other.code().replace('_', " ")),
                };
                GradeError::Resolve {
                    code: e.code().to_string(),
                    message,
                    position: None,
                }
            };
            return Err(Failure::Grade(err));
        }
    };
    let cmd = resolved.command(command).ok_or(Failure::UnknownCommand)?;
    let outcome = match enumerate(&resolved, cmd, skip, budget) {
        Ok(o) => o,
        Err(FinderError::ResourceLimit) => SolveOutcome::ResourceLimit,
        Err(e) => {
            return Err(Failure::Grade(GradeError::Analysis { message: e.to_string() }));
        }
    };
    Ok(match (cmd.kind, outcome) {
        (CommandKind::Check, SolveOutcome::Unsat) => Verdict::Solved,
        (CommandKind::Check, SolveOutcome::Sat(i)) => Verdict::Counterexample(i),
        (CommandKind::Run, SolveOutcome::Sat(i)) => Verdict::Witness(i),
        (CommandKind::Run, SolveOutcome::Unsat) => Verdict::NoWitness,
        (_, SolveOutcome::ResourceLimit) => Verdict::ResourceLimit,
        (_, SolveOutcome::Error(message)) => Verdict::Error(GradeError::Analysis { message }),
    })
}

fn parse_error(e: &crate::ParseError, secret_start: usize) -> GradeError {
    match e.position() {
        Some(p) if p.offset >= secret_start => GradeError::Parse {
            message: "the model could not be parsed".to_string(),
            position: None,
        },
        position => GradeError::Parse {
            message: e.to_string(),
            position,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHALLENGES_MODEL: &str = "sig Node { adj: set Node }\n\npred Inv2 {\n}\n\n//SECRET\ncheck Inv2OK {\n  Inv2 iff (all n: Node | n not in n.adj)\n} for 3\n";

    #[test]
    fn split_hides_secret_body() {
        let s = split(&parse(CHALLENGES_MODEL).unwrap());
        assert!(!s.public_text.contains("Inv2OK"));
        assert!(!s.public_text.contains("SECRET"));
        assert!(s.public_text.contains("pred Inv2"));
        assert_eq!(
            s.command_index,
            vec![CommandEntry {
                name: "Inv2OK".into(),
                kind: CommandKind::Check,
                secret: true
            }]
        );
        assert_eq!(s.secret_paragraphs.len(), 1);
    }

    #[test]
    fn no_secrets_is_identity() {
        let text = "sig A {}\nrun {} for 2\n";
        let s = split(&parse(text).unwrap());
        assert_eq!(s.public_text, text);
        assert!(s.secret_paragraphs.is_empty());
    }

    #[test]
    fn only_secret_leaves_whitespace() {
        let s = split(&parse("\n//SECRET\nfact { no none }\n").unwrap());
        assert!(s.public_text.trim().is_empty());
        assert_eq!(s.secret_paragraphs.len(), 1);
    }

    #[test]
    fn clash_is_rejected() {
        let s = split(&parse(CHALLENGES_MODEL).unwrap());
        let sub = format!("{}\ncheck Inv2OK {{ no none }}\n", s.public_text);
        assert_eq!(
            merge(&s.secret_paragraphs, &sub).unwrap_err(),
            MergeError::SecretNameClash { name: "Inv2OK".into() }
        );
    }

    #[test]
    fn secret_check_of_public_assertion_is_not_a_clash() {
        let s = split(&parse("sig A {}\nassert a { no A }\n//SECRET\ncheck a for 2\n").unwrap());
        assert!(merge(&s.secret_paragraphs, &s.public_text).is_ok());
    }

    #[test]
    fn anonymous_names_survive_merge() {
        let text = "sig A {}\nrun {}\n//SECRET\nrun { some A }\nrun { no A }\n";
        let original: Vec<String> = parse(text).unwrap().paragraphs.iter().map(|p| p.name.clone()).collect();
        let s = split(&parse(text).unwrap());
        let merged = merge(&s.secret_paragraphs, &s.public_text).unwrap();
        let mut names: Vec<String> = merged.model.paragraphs.iter().map(|p| p.name.clone()).collect();
        let mut expected = original.clone();
        names.sort();
        expected.sort();
        assert_eq!(names, expected);
    }

    #[test]
    fn grading_verdicts() {
        let s = split(&parse(CHALLENGES_MODEL).unwrap());
        let b = ResourceBudget::default();
        let empty = execute_on_view(&s, Access::Public, &s.public_text, "Inv2OK", 0, &b).unwrap();
        assert!(matches!(empty.verdict, Verdict::Counterexample(_)));
        let right = s.public_text.replace("pred Inv2 {\n}", "pred Inv2 {\n  no iden & adj\n}");
        let ok = execute_on_view(&s, Access::Public, &right, "Inv2OK", 0, &b).unwrap();
        assert_eq!(ok.verdict, Verdict::Solved);
        assert_eq!(ok.verdict.result(), "unsat");
        assert_eq!(
            execute_on_view(&s, Access::Public, &right, "Nope", 0, &b).unwrap_err(),
            ChallengeError::UnknownCommand("Nope".into())
        );
    }

    #[test]
    fn missing_sig_error_hides_secret() {
        let text = "sig A {}\nsig B {}\npred P { }\n//SECRET\ncheck C { P iff some B & A } for 2\n";
        let s = split(&parse(text).unwrap());
        let sub = "sig A {}\npred P { }\n";
        let r = execute_on_view(&s, Access::Public, sub, "C", 0, &ResourceBudget::default()).unwrap();
        let Verdict::Error(e) = r.verdict else { panic!() };
        assert!(e.message().contains("`B`"));
        assert!(!e.message().contains("some B"));
        assert_eq!(e.position(), None);
    }
}
