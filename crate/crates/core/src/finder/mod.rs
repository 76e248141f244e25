//! Bounded model finding: bounds, translation to a boolean circuit, a
//! built-in CDCL solver, deterministic enumeration and a brute-force oracle.

pub mod bounds;
pub mod circuit;
pub mod eval;
pub mod instance;
pub mod iso;
pub mod oracle;
pub mod sat;
pub mod translate;

use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::lang::resolve::{ResolvedCommand, ResolvedModel};

pub use bounds::{compute_bounds, Bounds, DEFAULT_MAX_SCOPE};
pub use circuit::{Circuit, NodeId};
pub use eval::{evaluate_expr, evaluate_formula, Env, TupleSet};
pub use instance::Instance;
pub use oracle::{brute_force, OracleResult, ORACLE_MAX_VARS};
pub use translate::{translate, Translation};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FinderError {
    #[error("scope {bound} for sig {sig} exceeds the maximum of {max}")]
    ScopeTooLarge { sig: String, bound: u32, max: u32 },
    #[error("no command named {0}")]
    UnknownCommand(String),
    #[error("oracle needs {vars} variables, above the cap of {cap}")]
    OracleTooLarge { vars: u32, cap: u32 },
    #[error("resource limit reached")]
    ResourceLimit,
}

/// Limits on one analysis. The deadline covers translation and solving.
#[derive(Debug, Clone)]
pub struct ResourceBudget {
    pub max_steps: u64,
    pub timeout: Duration,
    pub max_nodes: usize,
    pub max_scope: u32,
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for ResourceBudget {
    fn default() -> Self {
        ResourceBudget {
            max_steps: 10_000_000,
            timeout: Duration::from_secs(10),
            max_nodes: 4_000_000,
            max_scope: DEFAULT_MAX_SCOPE,
            cancel: None,
        }
    }
}

impl ResourceBudget {
    pub(crate) fn deadline(&self, start: Instant) -> Instant {
        start + self.timeout
    }

    pub(crate) fn cancelled(&self) -> bool {
        self.cancel
            .as_ref()
            .is_some_and(|c| c.load(std::sync::atomic::Ordering::Relaxed))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Sat(Instance),
    Unsat,
    Error(String),
    ResourceLimit,
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveOutcome::Sat(_))
    }

    pub fn instance(&self) -> Option<&Instance> {
        match self {
            SolveOutcome::Sat(i) => Some(i),
            _ => None,
        }
    }
}

/// Solves a translated command once.
pub fn solve(translation: &Translation, budget: &ResourceBudget) -> SolveOutcome {
    let mut e = sat::Enumerator::new(translation, budget.clone(), Instant::now());
    e.next_outcome()
}

/// The `(skip+1)`-th instance of a command in deterministic order.
pub fn enumerate(
    model: &ResolvedModel,
    command: &ResolvedCommand,
    skip: u64,
    budget: &ResourceBudget,
) -> Result<SolveOutcome, FinderError> {
    let start = Instant::now();
    let bounds = compute_bounds(model, &command.scope, budget.max_scope)?;
    let translation = match translate::translate_with_deadline(model, command, &bounds, budget, start) {
        Ok(t) => t,
        Err(FinderError::ResourceLimit) => return Ok(SolveOutcome::ResourceLimit),
        Err(e) => return Err(e),
    };
    let mut e = sat::Enumerator::new(&translation, budget.clone(), start);
    for _ in 0..skip {
        match e.next_outcome() {
            SolveOutcome::Sat(_) => {}
            other => return Ok(other),
        }
    }
    Ok(e.next_outcome())
}

/// Looks a command up by name and enumerates it.
pub fn run_command(
    model: &ResolvedModel,
    name: &str,
    skip: u64,
    budget: &ResourceBudget,
) -> Result<SolveOutcome, FinderError> {
    let command = model
        .command(name)
        .ok_or_else(|| FinderError::UnknownCommand(name.to_string()))?;
    enumerate(model, command, skip, budget)
}

/// Instances of a command in enumeration order, up to `limit`, with the
/// outcome that ended the run (`None` when the limit was reached).
pub fn enumerate_all(
    model: &ResolvedModel,
    command: &ResolvedCommand,
    limit: usize,
    budget: &ResourceBudget,
) -> Result<(Vec<Instance>, Option<SolveOutcome>), FinderError> {
    let start = Instant::now();
    let bounds = compute_bounds(model, &command.scope, budget.max_scope)?;
    let translation = match translate::translate_with_deadline(model, command, &bounds, budget, start) {
        Ok(t) => t,
        Err(FinderError::ResourceLimit) => return Ok((Vec::new(), Some(SolveOutcome::ResourceLimit))),
        Err(e) => return Err(e),
    };
    let mut e = sat::Enumerator::new(&translation, budget.clone(), start);
    let mut out = Vec::new();
    while out.len() < limit {
        match e.next_outcome() {
            SolveOutcome::Sat(i) => out.push(i),
            other => return Ok((out, Some(other))),
        }
    }
    Ok((out, None))
}
