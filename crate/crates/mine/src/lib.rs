//! Offline analysis of derivation trees: sessions, per-link solving
//! statistics and reports.

pub mod report;
pub mod sessions;
pub mod synth;
pub mod tree;

pub use report::{report, Format};
pub use sessions::{
    challenges_of, compute_stats, extract_sessions, extract_sessions_for, ChallengeProgress, LinkStats, Session,
    StatsError,
};
pub use tree::{parse_tree, Node, Tree, TreeError};
