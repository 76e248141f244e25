//! Storage for shared models, their links, executions and shared instances,
//! plus the derivation-tree export.

pub mod records;
pub mod repo;
pub mod store;
pub mod token;
pub mod tree;

pub use records::{ExecResult, InstanceRecord, LinkRecord, ModelRecord, Point, Theme, ThemeError, Visibility};
pub use repo::{LinkContext, ModelView, RepoError, Repository, SharedLinks, DEFAULT_MAX_CODE_BYTES};
pub use store::{FileStore, MemoryStore, Store, StoreError};
pub use tree::{TreeDocument, TreeNode};
