use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

pub const MAX_SCOPE_CAP: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub port: u16,
    /// `None` keeps everything in memory.
    pub store_path: Option<PathBuf>,
    pub solve_timeout_ms: u64,
    pub max_scope: u32,
    pub max_code_bytes: usize,
    /// Empty allows any origin.
    pub cors_allowed_origins: Vec<String>,
    pub executes_per_minute: u32,
    pub solver_slots: usize,
    pub queue_timeout: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            port: 8080,
            store_path: None,
            solve_timeout_ms: 10_000,
            max_scope: 8,
            max_code_bytes: 65_536,
            cors_allowed_origins: Vec::new(),
            executes_per_minute: 30,
            solver_slots: std::thread::available_parallelism().map_or(1, |n| n.get()),
            queue_timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("max scope {0} is above the cap of {MAX_SCOPE_CAP}")]
    ScopeAboveCap(u32),
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let checks = [
            ("port", self.port as u64),
            ("solve timeout", self.solve_timeout_ms),
            ("max scope", self.max_scope as u64),
            ("max code bytes", self.max_code_bytes as u64),
            ("executes per minute", self.executes_per_minute as u64),
            ("solver slots", self.solver_slots as u64),
            ("queue timeout", self.queue_timeout.as_millis() as u64),
        ];
        if let Some((name, _)) = checks.iter().find(|(_, v)| *v == 0) {
            return Err(ConfigError::NotPositive(name));
        }
        if self.max_scope > MAX_SCOPE_CAP {
            return Err(ConfigError::ScopeAboveCap(self.max_scope));
        }
        Ok(())
    }

    pub fn solve_timeout(&self) -> Duration {
        Duration::from_millis(self.solve_timeout_ms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert_eq!(ServiceConfig::default().validate(), Ok(()));
    }

    #[test]
    fn rejects_bad_values() {
        let c = ServiceConfig {
            max_scope: 13,
            ..Default::default()
        };
        assert_eq!(c.validate(), Err(ConfigError::ScopeAboveCap(13)));
        let c = ServiceConfig {
            solve_timeout_ms: 0,
            ..Default::default()
        };
        assert_eq!(c.validate(), Err(ConfigError::NotPositive("solve timeout")));
    }
}
