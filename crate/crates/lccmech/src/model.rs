//! Declarative model files: a single JSON document holding the chart
//! dimension, Lee-form components, Hamiltonian, and optional HJ candidate
//! and integrator settings, with every expression kept as a string and
//! compiled against the chart variable set at load time.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calculus::LeeForm;
use crate::dynamics::{LccSystem, Method};
use crate::error::Error;
use crate::expr::{self, Expr};
use crate::geometry::LccStructure;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeeSpec {
    pub psi: Vec<String>,
    pub zeta: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HjSpec {
    #[serde(rename = "S")]
    pub s: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_method() -> String {
    "rk4".to_string()
}
fn default_dt() -> f64 {
    1e-3
}
fn default_steps() -> usize {
    1000
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec {
            method: default_method(),
            dt: default_dt(),
            steps: default_steps(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    #[serde(default)]
    pub constants: HashMap<String, f64>,
    pub lee: LeeSpec,
    pub hamiltonian: String,
    #[serde(default)]
    pub hj: Option<HjSpec>,
    #[serde(default)]
    pub integrator: Option<IntegratorSpec>,
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

/// A loaded model with everything compiled: the structure, the Hamiltonian
/// system, the optional HJ generating function, and a digest of the source
/// text for report provenance.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    pub file: ModelFile,
    pub system: LccSystem,
    pub hj_s: Option<Expr>,
    pub digest: String,
}

impl CompiledModel {
    pub fn seed(&self) -> u64 {
        self.file.seed.unwrap_or(crate::tol::DEFAULT_SEED)
    }

    pub fn samples(&self) -> usize {
        self.file.samples.unwrap_or(crate::tol::DEFAULT_SAMPLES)
    }

    pub fn integrator(&self) -> IntegratorSpec {
        self.file.integrator.clone().unwrap_or_default()
    }

    pub fn method(&self) -> Result<Method, Error> {
        Method::parse(&self.integrator().method)
    }
}

/// Compiles a model from its JSON text. Schema errors name the offending
/// field; expression errors carry byte offsets within the expression.
pub fn compile(text: &str) -> Result<CompiledModel, Error> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if file.n == 0 {
        return Err(Error::Schema("n must be at least 1".to_string()));
    }
    if file.lee.psi.len() != file.n {
        return Err(Error::Schema(format!(
            "lee.psi has {} entries but n = {}",
            file.lee.psi.len(),
            file.n
        )));
    }
    if let Some(ref integ) = file.integrator {
        if integ.dt.is_nan() || integ.dt <= 0.0 {
            return Err(Error::Schema("integrator.dt must be > 0".to_string()));
        }
        if integ.steps == 0 {
            return Err(Error::Schema("integrator.steps must be >= 1".to_string()));
        }
        Method::parse(&integ.method)?;
    }
    if let Some(ref x0) = file.initial {
        if x0.len() != 2 * file.n + 1 {
            return Err(Error::Schema(format!(
                "initial point has {} coordinates, expected {}",
                x0.len(),
                2 * file.n + 1
            )));
        }
    }

    let const_names: Vec<String> = {
        let mut names: Vec<String> = file.constants.keys().cloned().collect();
        names.sort();
        names
    };
    let base_chart = crate::calculus::Chart::base(file.n);
    let psi: Vec<Expr> = file
        .lee
        .psi
        .iter()
        .map(|s| expr::parse(s, &base_chart.vars, &const_names))
        .collect::<Result<_, _>>()?;
    let zeta = expr::parse(&file.lee.zeta, &base_chart.vars, &const_names)?;
    let lee = LeeForm { psi, zeta };
    let structure = LccStructure::lcc(file.n, lee, file.constants.clone())?;
    let hamiltonian = expr::parse(&file.hamiltonian, &structure.chart.vars, &const_names)?;
    let hj_s = match &file.hj {
        Some(spec) => Some(expr::parse(&spec.s, &base_chart.vars, &const_names)?),
        None => None,
    };
    let digest = format!("{:x}", Sha256::digest(text.as_bytes()));
    Ok(CompiledModel {
        system: LccSystem::new(structure, hamiltonian),
        file,
        hj_s,
        digest,
    })
}

pub fn load_model(path: &str) -> Result<CompiledModel, Error> {
    let text = std::fs::read_to_string(path)?;
    compile(&text)
}

/// The built-in damped-oscillator demo model: n = 1, constant ψ = 0.05,
/// ζ = 0, H = p²/(2 m₀ e^{Γt}) + (m₀ e^{Γt}/2) q² with m₀ = 1, Γ = 0.1.
pub const OSCILLATOR_PRESET: &str = r#"{
  "n": 1,
  "constants": {"m0": 1.0, "G": 0.1},
  "lee": {"psi": ["0.05"], "zeta": "0"},
  "hamiltonian": "p1^2/(2*m0*exp(G*t)) + (m0*exp(G*t)/2)*q1^2",
  "hj": {"S": "q1^2/2"},
  "integrator": {"method": "rk4", "dt": 0.001, "steps": 1000},
  "initial": [1.0, 0.0, 0.0]
}"#;

pub fn preset(name: &str) -> Result<CompiledModel, Error> {
    match name {
        "oscillator" => compile(OSCILLATOR_PRESET),
        other => Err(Error::Schema(format!("unknown preset '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillator_preset_loads() {
        let m = preset("oscillator").unwrap();
        assert_eq!(m.file.n, 1);
        assert_eq!(m.system.structure.n(), 1);
        assert!(m.hj_s.is_some());
        assert_eq!(m.digest.len(), 64);
    }

    #[test]
    fn psi_length_mismatch_is_schema_error() {
        let text = r#"{"n": 1, "lee": {"psi": ["0", "0"], "zeta": "0"}, "hamiltonian": "p1"}"#;
        match compile(text) {
            Err(Error::Schema(msg)) => assert!(msg.contains("lee.psi")),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn bad_expression_reports_offset() {
        let text = r#"{"n": 1, "lee": {"psi": ["0"], "zeta": "exp("}, "hamiltonian": "p1"}"#;
        match compile(text) {
            Err(Error::Parse { offset, .. }) => assert!(offset >= 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_closed_lee_form_rejected() {
        // zeta = q1 with psi = 0 gives dTheta != 0
        let text = r#"{"n": 1, "lee": {"psi": ["0"], "zeta": "q1"}, "hamiltonian": "p1"}"#;
        assert!(matches!(compile(text), Err(Error::NonClosedLeeForm(_))));
    }
}
