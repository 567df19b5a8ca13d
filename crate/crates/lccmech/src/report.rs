//! Machine-readable run reports: every check carries an explicit
//! tolerance, overall pass is the conjunction, and timing fields can be
//! suppressed for byte-identical reruns.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, residual: f64, tolerance: f64) -> Check {
        Check {
            name: name.to_string(),
            residual,
            tolerance,
            pass: residual.abs() < tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub engine_version: String,
    pub model_digest: String,
    pub seed: u64,
    /// unix seconds; None under --no-timestamp (wall time goes with it so
    /// reruns stay byte-identical)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(command: &str, model_digest: &str, seed: u64) -> RunReport {
        RunReport {
            schema: 1,
            command: command.to_string(),
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            model_digest: model_digest.to_string(),
            seed,
            timestamp: None,
            wall_time_ms: None,
            checks: Vec::new(),
            notes: Vec::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn stamp(&mut self, start: std::time::Instant) {
        self.timestamp = Some(
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        );
        self.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}
