//! High-level operations over a compiled model: structure validation,
//! trajectory simulation, Hamilton-Jacobi checking, and bracket
//! evaluation. The CLI binary and the C bindings are both thin shells
//! around these functions; they only add argument plumbing and output
//! routing.

use serde::Serialize;

use crate::dynamics::{self, FieldKind, Method};
use crate::error::Error;
use crate::expr;
use crate::hj;
use crate::model::CompiledModel;
use crate::report::{Check, RunReport};
use crate::tol;

/// Structure-equation, nondegeneracy, musical round-trip, and
/// closed-form-display checks over a random sample grid.
pub fn validate(m: &CompiledModel, samples: usize, seed: u64) -> Result<RunReport, Error> {
    let s = &m.system.structure;

    let mut report = RunReport::new("validate", &m.digest, seed);
    let sr = s.validate(samples, seed)?;
    report.push(Check::new(
        "lee_form_closedness",
        sr.lee_closedness,
        tol::TOL_EXACT,
    ));
    report.push(Check::new(
        "d_theta_eta_identity",
        sr.d_theta_eta,
        tol::TOL_EXACT,
    ));
    report.push(Check::new(
        "d_2theta_omega_identity",
        sr.d_2theta_omega,
        tol::TOL_EXACT,
    ));
    report.push(Check {
        name: "nondegeneracy_min_volume".to_string(),
        residual: sr.min_volume,
        tolerance: tol::TOL_NONDEGENERATE,
        pass: sr.min_volume > tol::TOL_NONDEGENERATE,
    });

    // musical round-trips and closed-form cross-checks over sample points
    let pts = s.sample(samples, seed)?;
    let dim = s.chart.dim();
    let probe: Vec<f64> = (0..dim).map(|a| 0.3 + 0.7 * a as f64).collect();
    let mut roundtrip = 0.0f64;
    let mut reeb_dev = 0.0f64;
    let reeb_cf = s.reeb_closed_form();
    for x in &pts {
        let b = s.bindings(x);
        let m_at = s.structure_matrix(x)?;
        // sharp then flat of a fixed covector
        let up = s.sharp_coeffs_at(&probe, x)?;
        let back = m_at.transpose().matvec(&up);
        for a in 0..dim {
            roundtrip = roundtrip.max((back[a] - probe[a]).abs());
        }
        // flat then sharp of a fixed vector
        let down = m_at.transpose().matvec(&probe);
        let up2 = s.sharp_coeffs_at(&down, x)?;
        for a in 0..dim {
            roundtrip = roundtrip.max((up2[a] - probe[a]).abs());
        }
        let r = s.reeb_at(x)?;
        let rf = reeb_cf.eval(&b)?;
        for a in 0..dim {
            reeb_dev = reeb_dev.max((r[a] - rf[a]).abs());
        }
    }
    report.push(Check::new("musical_round_trip", roundtrip, tol::TOL_EXACT));
    report.push(Check::new(
        "reeb_closed_form_vs_solve",
        reeb_dev,
        tol::TOL_CLOSED_FORM,
    ));

    let xh_cf = m.system.xh_closed_form();
    let eh_cf = m.system.eh_closed_form();
    let grad_cf = m.system.grad_closed_form(false);
    let mut field_dev = 0.0f64;
    for x in pts.iter().take(50) {
        let b = s.bindings(x);
        let pairs = [
            (m.system.xh_at(x)?, xh_cf.eval(&b)?),
            (m.system.eh_at(x)?, eh_cf.eval(&b)?),
            (m.system.grad_at(x)?, grad_cf.eval(&b)?),
        ];
        for (solved, displayed) in pairs {
            for a in 0..dim {
                field_dev = field_dev.max((solved[a] - displayed[a]).abs());
            }
        }
    }
    report.push(Check::new(
        "fields_closed_form_vs_solve",
        field_dev,
        tol::TOL_CLOSED_FORM,
    ));
    Ok(report)
}

fn format_csv_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// A finished simulation: the CSV trajectory, the JSON-able report, and
/// the truncation reason if the integrator hit a singular point.
pub struct Simulation {
    pub csv: String,
    pub report: RunReport,
    pub truncated: Option<String>,
}

/// Integrate the evolution field from `x0` (or the model's initial
/// point) and render the trajectory as CSV.
pub fn simulate(
    m: &CompiledModel,
    x0: Option<Vec<f64>>,
    dt: Option<f64>,
    steps: Option<usize>,
    method: Option<Method>,
    seed: u64,
) -> Result<Simulation, Error> {
    let integ = m.integrator();
    let dt = dt.unwrap_or(integ.dt);
    let steps = steps.unwrap_or(integ.steps);
    let method = match method {
        Some(mth) => mth,
        None => Method::parse(&integ.method)?,
    };
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::Schema("dt must be > 0".to_string()));
    }
    if steps == 0 {
        return Err(Error::Schema("steps must be >= 1".to_string()));
    }
    let x0: Vec<f64> =
        match x0 {
            Some(v) => v,
            None => m.file.initial.clone().ok_or_else(|| {
                Error::Schema("no initial point in model or arguments".to_string())
            })?,
        };
    let n = m.system.structure.n();
    if x0.len() != 2 * n + 1 {
        return Err(Error::Schema(format!(
            "initial point has {} coordinates, expected {}",
            x0.len(),
            2 * n + 1
        )));
    }

    let traj = dynamics::integrate(&m.system, &x0, steps, dt, method, FieldKind::Evolution)?;

    let mut csv = String::new();
    csv.push_str("tau");
    for i in 1..=n {
        csv.push_str(&format!(",q{i}"));
    }
    for i in 1..=n {
        csv.push_str(&format!(",p{i}"));
    }
    csv.push_str(",t,H,energy_residual,eta_residual\n");
    for s in &traj.samples {
        let mut row = vec![format_csv_value(s.tau)];
        row.extend(s.point.iter().map(|v| format_csv_value(*v)));
        row.push(format_csv_value(s.hamiltonian));
        row.push(format_csv_value(s.energy_residual));
        row.push(format_csv_value(s.eta_residual));
        csv.push_str(&row.join(","));
        csv.push('\n');
    }

    let mut report = RunReport::new("simulate", &m.digest, seed);
    let max_energy = traj
        .samples
        .iter()
        .fold(0.0f64, |a, s| a.max(s.energy_residual.abs()));
    let max_eta = traj
        .samples
        .iter()
        .fold(0.0f64, |a, s| a.max(s.eta_residual.abs()));
    report.push(Check::new(
        "energy_identity_along_trajectory",
        max_energy,
        tol::TOL_EXACT,
    ));
    report.push(Check::new(
        "eta_pairing_along_trajectory",
        max_eta,
        tol::TOL_EXACT,
    ));
    report.note(format!(
        "integrated {} of {} steps, dt={dt}, method={method:?}",
        traj.samples.len() - 1,
        steps
    ));
    if let Some(ref reason) = traj.truncated {
        report.note(format!("trajectory truncated: {reason}"));
    }
    Ok(Simulation {
        csv,
        report,
        truncated: traj.truncated,
    })
}

/// Hamilton-Jacobi outcome: the report, plus whether the LdR-closedness
/// prerequisite failed (which demotes the verdict regardless of the
/// other residuals).
pub struct HjOutcome {
    pub report: RunReport,
    pub closedness_failed: bool,
}

/// Evaluate the model's Hamilton-Jacobi candidate in the given regime
/// (`None` selects the regime from the Lee form).
pub fn hj_check(
    m: &CompiledModel,
    regime: Option<hj::Regime>,
    seed: u64,
) -> Result<HjOutcome, Error> {
    let s_expr = m
        .hj_s
        .clone()
        .ok_or_else(|| Error::Schema("model has no hj.S entry".to_string()))?;
    let cand = hj::build_candidate(&m.system, s_expr)?;
    let regime = regime.unwrap_or_else(|| hj::auto_regime(&m.system));
    let grid = hj::default_grid(&m.system)?;
    let rep = hj::hj_residual(&m.system, &cand, regime, &grid)?;

    let mut report = RunReport::new("hj-check", &m.digest, seed);
    report.note(format!("regime: {}", rep.regime.label()));
    report.push(Check::new(
        "ldr_closedness_prerequisite",
        rep.closedness_max,
        tol::TOL_CLOSED_FORM,
    ));
    let closedness_failed = rep.closedness_max >= tol::TOL_CLOSED_FORM;
    report.push(Check::new(
        "hj_residual_max",
        rep.max_residual,
        tol::TOL_CLOSED_FORM,
    ));
    report.push(Check::new(
        "relatedness_residual_max",
        rep.max_relatedness,
        tol::TOL_CLOSED_FORM,
    ));
    if let Some(span) = &rep.span_residuals {
        let mut dev = 0.0f64;
        for (a, b) in rep.residuals.iter().zip(span) {
            for (x, y) in a.iter().zip(b) {
                dev = dev.max((x - y).abs());
            }
        }
        report.push(Check::new(
            "span_check_agreement",
            dev,
            tol::TOL_CLOSED_FORM,
        ));
    }
    let hj_ok = rep.max_residual < tol::TOL_CLOSED_FORM;
    let rel_ok = rep.max_relatedness < tol::TOL_CLOSED_FORM;
    report.note(format!(
        "theorem equivalence verdict: {}",
        if hj_ok == rel_ok {
            "consistent"
        } else {
            "inconsistent"
        }
    ));
    report.note(format!("rms HJ residual: {:e}", rep.rms_residual));
    Ok(HjOutcome {
        report,
        closedness_failed,
    })
}

/// Bracket evaluation over a sample grid with antisymmetry and
/// (finite-difference) Jacobi-identity self-checks.
#[derive(Serialize)]
pub struct BracketOutcome {
    #[serde(flatten)]
    pub report: RunReport,
    pub samples: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl BracketOutcome {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

/// Evaluate the Jacobi bracket of `f_text` and `g_text` on a sample grid.
pub fn bracket(
    m: &CompiledModel,
    f_text: &str,
    g_text: &str,
    samples: usize,
    seed: u64,
) -> Result<BracketOutcome, Error> {
    let s = &m.system.structure;
    let const_names: Vec<String> = {
        let mut names: Vec<String> = s.constants.keys().cloned().collect();
        names.sort();
        names
    };
    let f = expr::parse(f_text, &s.chart.vars, &const_names)?;
    let g = expr::parse(g_text, &s.chart.vars, &const_names)?;

    let pts = s.sample(samples, seed)?;
    let mut values = Vec::with_capacity(pts.len());
    let mut antisym = 0.0f64;
    for x in &pts {
        let fg = dynamics::jacobi_bracket_lcc_at(s, &f, &g, x)?;
        let gf = dynamics::jacobi_bracket_lcc_at(s, &g, &f, x)?;
        antisym = antisym.max((fg + gf).abs());
        values.push(fg);
    }
    // Jacobi identity with a third function k = f*g, nested brackets by
    // finite differences (1e-6 tier), on a small subset of the grid
    let k = expr::mul(f.clone(), g.clone());
    let fe = |x: &[f64]| f.eval(&s.bindings(x));
    let ge = |x: &[f64]| g.eval(&s.bindings(x));
    let ke = |x: &[f64]| k.eval(&s.bindings(x));
    let fg_fn = |x: &[f64]| dynamics::jacobi_bracket_lcc_fn_at(s, fe, ge, x);
    let gk_fn = |x: &[f64]| dynamics::jacobi_bracket_lcc_fn_at(s, ge, ke, x);
    let kf_fn = |x: &[f64]| dynamics::jacobi_bracket_lcc_fn_at(s, ke, fe, x);
    let mut jacobi = 0.0f64;
    for x in pts.iter().take(10) {
        let j = dynamics::jacobi_bracket_lcc_fn_at(s, fg_fn, ke, x)?
            + dynamics::jacobi_bracket_lcc_fn_at(s, gk_fn, fe, x)?
            + dynamics::jacobi_bracket_lcc_fn_at(s, kf_fn, ge, x)?;
        jacobi = jacobi.max(j.abs());
    }

    let mut report = RunReport::new("bracket", &m.digest, seed);
    report.push(Check::new("antisymmetry", antisym, tol::TOL_EXACT));
    report.push(Check::new("jacobi_identity_fd", jacobi, tol::TOL_FD));
    report.note(format!(
        "jacobi identity tested with k = ({f_text})*({g_text})"
    ));
    Ok(BracketOutcome {
        report,
        samples: pts,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model;

    #[test]
    fn validate_preset_report_passes() {
        let m = model::preset("oscillator").unwrap();
        let report = validate(&m, 50, 7).unwrap();
        assert!(report.pass, "{}", report.to_json());
    }

    #[test]
    fn bracket_outcome_serializes_with_samples() {
        let m = model::preset("oscillator").unwrap();
        let out = bracket(&m, "q1", "p1", 4, 7).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.to_json()).unwrap();
        assert_eq!(v["values"].as_array().unwrap().len(), 4);
        assert_eq!(v["command"], "bracket");
    }
}
