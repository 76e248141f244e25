use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Mutex, RwLock};

use a4f_core::challenge::{split, CommandEntry, SplitModel};
use a4f_core::finder::Instance;
use a4f_core::lang::{parse_with_limit, ParagraphBody, SourceModel};
use a4f_core::ParseError;
use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use thiserror::Error;

use crate::records::{
    ExecResult, InstanceRecord, LinkRecord, ModelRecord, Point, Record, Theme, ThemeError, Visibility,
};
use crate::store::{Store, StoreError};
use crate::token::new_token;
use crate::tree::TreeDocument;

pub const DEFAULT_MAX_CODE_BYTES: usize = 65536;

#[derive(Debug, Error)]
pub enum RepoError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("code is {size} bytes, over the {limit} byte limit")]
    CodeTooLarge { size: usize, limit: usize },
    #[error("not found")]
    NotFound,
    #[error("the tree is only available through the private link")]
    Forbidden,
    #[error("parent `{0}` belongs to a different shared model")]
    ParentMismatch(String),
    #[error("invalid theme: {0}")]
    Theme(#[from] ThemeError),
    #[error("invalid instance: {0}")]
    BadInstance(String),
    #[error("invalid layout: {0}")]
    BadLayout(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("store is unavailable after a failed write")]
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SharedLinks {
    pub public: String,
    pub private: Option<String>,
}

/// What a link shows: the public view or, for a private link, everything.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelView {
    pub code: String,
    pub command_index: Vec<CommandEntry>,
    pub theme: Option<Theme>,
    pub has_secrets: bool,
}

/// A link together with its shared model, for executing against it.
#[derive(Debug, Clone)]
pub struct LinkContext {
    pub link: LinkRecord,
    pub root: ModelRecord,
    pub split: SplitModel,
}

#[derive(Default)]
struct Index {
    models: HashMap<String, ModelRecord>,
    /// Record ids per root, in append order.
    by_root: HashMap<String, Vec<String>>,
    links: HashMap<String, LinkRecord>,
    instances: HashMap<String, InstanceRecord>,
}

impl Index {
    fn token_taken(&self, t: &str) -> bool {
        self.links.contains_key(t) || self.instances.contains_key(t)
    }

    fn apply(&mut self, record: Record) -> Result<(), String> {
        match record {
            Record::Model(m) => {
                if self.models.contains_key(&m.id) {
                    return Err(format!("duplicate model id {}", m.id));
                }
                if let Some(p) = &m.parent_id {
                    match self.models.get(p) {
                        Some(parent) if parent.root_link_id == m.root_link_id => {}
                        _ => return Err(format!("model {} has a bad parent {p}", m.id)),
                    }
                } else if m.root_link_id != m.id {
                    return Err(format!("root model {} names another root", m.id));
                }
                self.by_root.entry(m.root_link_id.clone()).or_default().push(m.id.clone());
                self.models.insert(m.id.clone(), m);
            }
            Record::Link(l) => {
                if self.token_taken(&l.token) || !self.models.contains_key(&l.model_id) {
                    return Err(format!("bad link {}", l.token));
                }
                self.links.insert(l.token.clone(), l);
            }
            Record::Instance(i) => {
                if self.token_taken(&i.token) {
                    return Err(format!("duplicate token {}", i.token));
                }
                self.instances.insert(i.token.clone(), i);
            }
        }
        Ok(())
    }
}

pub struct Repository {
    store: Box<dyn Store>,
    index: RwLock<Index>,
    writer: Mutex<()>,
    poisoned: AtomicBool,
    max_code_bytes: usize,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn sig_names(model: &SourceModel) -> Vec<&str> {
    model
        .paragraphs
        .iter()
        .filter_map(|p| match &p.body {
            ParagraphBody::Sigs(sigs) => Some(sigs.iter().map(|s| s.name.name.as_str())),
            _ => None,
        })
        .flatten()
        .collect()
}

/// The parent record id and root for an execution through `link_token`.
fn resolve_parent(index: &Index, link_token: &str, parent: Option<&str>) -> Result<(String, String), RepoError> {
    let link = index.links.get(link_token).ok_or(RepoError::NotFound)?;
    let root = index.models[&link.model_id].root_link_id.clone();
    let parent_id = match parent {
        None => link.model_id.clone(),
        Some(p) => match index.links.get(p) {
            Some(l) => l.model_id.clone(),
            None if index.models.contains_key(p) => p.to_string(),
            None => return Err(RepoError::NotFound),
        },
    };
    if index.models[&parent_id].root_link_id != root {
        return Err(RepoError::ParentMismatch(parent_id));
    }
    Ok((parent_id, root))
}

impl Repository {
    /// Opens a repository over `store`, replaying its log into memory.
    pub fn open(store: Box<dyn Store>) -> Result<Self, RepoError> {
        let mut index = Index::default();
        for (i, record) in store.load()?.into_iter().enumerate() {
            index
                .apply(record)
                .map_err(|reason| StoreError::Corrupt { line: i + 2, reason })?;
        }
        Ok(Repository {
            store,
            index: RwLock::new(index),
            writer: Mutex::new(()),
            poisoned: AtomicBool::new(false),
            max_code_bytes: DEFAULT_MAX_CODE_BYTES,
        })
    }

    pub fn in_memory() -> Self {
        Self::open(Box::new(crate::store::MemoryStore::default())).expect("empty store")
    }

    pub fn with_max_code_bytes(mut self, limit: usize) -> Self {
        self.max_code_bytes = limit;
        self
    }

    pub fn max_code_bytes(&self) -> usize {
        self.max_code_bytes
    }

    pub fn health(&self) -> Result<(), RepoError> {
        if self.poisoned.load(Ordering::SeqCst) {
            return Err(RepoError::Unavailable);
        }
        self.store.health()?;
        Ok(())
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, Index> {
        self.index.read().expect("index lock")
    }

    /// Appends records and indexes them. Callers hold the writer lock.
    fn commit(&self, records: Vec<Record>) -> Result<(), RepoError> {
        if self.poisoned.load(Ordering::SeqCst) {
            return Err(RepoError::Unavailable);
        }
        for r in &records {
            if let Err(e) = self.store.append(r) {
                self.poisoned.store(true, Ordering::SeqCst);
                return Err(e.into());
            }
        }
        let mut index = self.index.write().expect("index lock");
        for r in records {
            index.apply(r).expect("records are validated before commit");
        }
        Ok(())
    }

    fn fresh_token(&self, also_taken: &[String]) -> String {
        let index = self.read();
        loop {
            let t = new_token();
            if !index.token_taken(&t) && !also_taken.contains(&t) {
                return t;
            }
        }
    }

    fn check_size(&self, code: &str) -> Result<(), RepoError> {
        if code.len() > self.max_code_bytes {
            return Err(RepoError::CodeTooLarge {
                size: code.len(),
                limit: self.max_code_bytes,
            });
        }
        Ok(())
    }

    pub fn save_shared(&self, code: &str, theme: Option<Theme>) -> Result<SharedLinks, RepoError> {
        self.check_size(code)?;
        let model = parse_with_limit(code, self.max_code_bytes)?;
        if let Some(t) = &theme {
            t.validate(sig_names(&model))?;
        }
        let id = uuid::Uuid::new_v4().to_string();
        let _w = self.writer.lock().expect("writer lock");
        let public = self.fresh_token(&[]);
        let private = model.has_secrets().then(|| self.fresh_token(std::slice::from_ref(&public)));
        let mut records = vec![
            Record::Model(ModelRecord {
                id: id.clone(),
                parent_id: None,
                root_link_id: id.clone(),
                time: now(),
                code: code.to_string(),
                command_name: None,
                result: None,
                theme,
            }),
            Record::Link(LinkRecord {
                token: public.clone(),
                model_id: id.clone(),
                visibility: Visibility::Public,
            }),
        ];
        if let Some(p) = &private {
            records.push(Record::Link(LinkRecord {
                token: p.clone(),
                model_id: id,
                visibility: Visibility::Private,
            }));
        }
        self.commit(records)?;
        Ok(SharedLinks { public, private })
    }

    pub fn link_context(&self, token: &str) -> Result<LinkContext, RepoError> {
        let index = self.read();
        let link = index.links.get(token).ok_or(RepoError::NotFound)?.clone();
        let root = index.models[&link.model_id].clone();
        drop(index);
        let model = parse_with_limit(&root.code, usize::MAX)?;
        Ok(LinkContext {
            link,
            root,
            split: split(&model),
        })
    }

    pub fn load_by_token(&self, token: &str) -> Result<ModelView, RepoError> {
        let ctx = self.link_context(token)?;
        let code = match ctx.link.visibility {
            Visibility::Public => ctx.split.public_text.clone(),
            Visibility::Private => ctx.root.code.clone(),
        };
        Ok(ModelView {
            code,
            has_secrets: ctx.split.has_secrets(),
            command_index: ctx.split.command_index,
            theme: ctx.root.theme,
        })
    }

    pub fn model(&self, id: &str) -> Option<ModelRecord> {
        self.read().models.get(id).cloned()
    }

    /// Records an execution made through `link_token`. `parent` is a link
    /// token or record id; without one the link's model is the parent.
    pub fn record_execution(
        &self,
        link_token: &str,
        parent: Option<&str>,
        code: &str,
        command: &str,
        result: ExecResult,
    ) -> Result<String, RepoError> {
        let _w = self.writer.lock().expect("writer lock");
        let index = self.read();
        let (parent_id, root) = resolve_parent(&index, link_token, parent)?;
        let parent_rec = &index.models[&parent_id];
        let time = now().max(parent_rec.time.clone());
        drop(index);
        let id = uuid::Uuid::new_v4().to_string();
        self.commit(vec![Record::Model(ModelRecord {
            id: id.clone(),
            parent_id: Some(parent_id),
            root_link_id: root,
            time,
            code: code.to_string(),
            command_name: Some(command.to_string()),
            result: Some(result),
            theme: None,
        })])?;
        Ok(id)
    }

    /// Fails as [`Repository::record_execution`] would on a bad link or parent.
    pub fn check_parent(&self, link_token: &str, parent: Option<&str>) -> Result<(), RepoError> {
        resolve_parent(&self.read(), link_token, parent).map(|_| ())
    }

    pub fn export_tree(&self, token: &str) -> Result<TreeDocument, RepoError> {
        let index = self.read();
        let link = index.links.get(token).ok_or(RepoError::NotFound)?;
        if link.visibility == Visibility::Public {
            return Err(RepoError::Forbidden);
        }
        let root = index.models[&link.model_id].root_link_id.clone();
        let ids = &index.by_root[&root];
        Ok(TreeDocument::from_records(&root, ids.iter().map(|id| &index.models[id])))
    }

    pub fn save_instance(
        &self,
        model_id: &str,
        command: &str,
        skip: u64,
        instance: serde_json::Value,
        theme: Theme,
        layout: BTreeMap<String, Point>,
    ) -> Result<String, RepoError> {
        let record = {
            let index = self.read();
            let id = index.links.get(model_id).map_or(model_id, |l| l.model_id.as_str());
            let rec = index.models.get(id).ok_or(RepoError::NotFound)?;
            let parsed: Instance =
                serde_json::from_value(instance.clone()).map_err(|e| RepoError::BadInstance(e.to_string()))?;
            let code = parse_with_limit(&rec.code, usize::MAX)
                .or_else(|_| parse_with_limit(&index.models[&rec.root_link_id].code, usize::MAX))?;
            theme.validate(sig_names(&code))?;
            for (atom, p) in &layout {
                if !parsed.universe.contains(atom) {
                    return Err(RepoError::BadLayout(format!("`{atom}` is not an atom of the instance")));
                }
                if !p.x.is_finite() || !p.y.is_finite() {
                    return Err(RepoError::BadLayout(format!("position of `{atom}` is not finite")));
                }
            }
            InstanceRecord {
                token: String::new(),
                model_id: id.to_string(),
                command_name: command.to_string(),
                skip,
                instance,
                theme,
                layout,
            }
        };
        let _w = self.writer.lock().expect("writer lock");
        let token = self.fresh_token(&[]);
        self.commit(vec![Record::Instance(InstanceRecord {
            token: token.clone(),
            ..record
        })])?;
        Ok(token)
    }

    pub fn load_instance(&self, token: &str) -> Result<InstanceRecord, RepoError> {
        self.read().instances.get(token).cloned().ok_or(RepoError::NotFound)
    }
}
