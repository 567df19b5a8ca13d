//! Cosymplectic / LCC / LCS structures on Darboux charts, musical
//! isomorphisms, Reeb fields, symplectization, and conformal rescaling.
//!
//! Every structure stores symbolic forms; the sharp map is a pointwise
//! dense linear solve (dimension 2n+1 or 2n+2 is tiny, and a numeric solve
//! is robust where a symbolic inverse would blow up expression size).

use std::collections::HashMap;
use std::sync::Arc;

use crate::calculus::{Chart, KForm, LeeForm, VectorField};
use crate::error::Error;
use crate::expr::{self, Bindings, Expr, Func};
use crate::linalg::Matrix;
use crate::sample::sample_points;
use crate::tol::{DEFAULT_SAMPLES, TOL_DENOMINATOR, TOL_EXACT, TOL_NONDEGENERATE};

/// Residual summary from sample-point validation of a structure.
#[derive(Debug, Clone)]
pub struct StructureReport {
    /// max |dΘ| component (Lee-form closedness)
    pub lee_closedness: f64,
    /// max |d_Θ η| component
    pub d_theta_eta: f64,
    /// max |d_{2Θ} Ω| component
    pub d_2theta_omega: f64,
    /// min |coefficient of η∧Ω^n| (nondegeneracy)
    pub min_volume: f64,
    pub samples: usize,
}

impl StructureReport {
    pub fn passes(&self) -> bool {
        self.lee_closedness < TOL_EXACT
            && self.d_theta_eta < TOL_EXACT
            && self.d_2theta_omega < TOL_EXACT
            && self.min_volume > TOL_NONDEGENERATE
    }
}

/// An LCC structure (η, Ω, Θ) in Darboux coordinates [q1..qn, p1..pn, t]:
///
///   η = d_Θ t = dt − tΘ,   Ω = −d_{2Θ}Θ_Q = dq^i∧dp_i + 2 p_i Θ∧dq^i,
///
/// satisfying dη = Θ∧η and dΩ = 2Θ∧Ω. Θ = 0 is the cosymplectic case.
#[derive(Debug, Clone)]
pub struct LccStructure {
    pub chart: Arc<Chart>,
    pub lee: LeeForm,
    /// Θ as a one-form on the phase chart.
    pub theta: KForm,
    pub eta: KForm,
    pub omega: KForm,
    pub constants: HashMap<String, f64>,
}

impl LccStructure {
    /// Canonical cosymplectic structure: Θ = 0, η = dt, Ω = dq^i∧dp_i.
    pub fn cosymplectic(n: usize, constants: HashMap<String, f64>) -> LccStructure {
        LccStructure::lcc(n, LeeForm::zero(n), constants).expect("zero Lee form is closed")
    }

    /// Builds the Darboux LCC structure from a Lee form, validating its
    /// closedness at sample points.
    pub fn lcc(
        n: usize,
        lee: LeeForm,
        constants: HashMap<String, f64>,
    ) -> Result<LccStructure, Error> {
        assert_eq!(lee.n(), n);
        lee.check_base_variables()?;
        let chart = Chart::phase(n);
        let theta = lee.as_one_form(&chart);

        // closedness of Theta, checked by sampling dTheta
        let d_theta = theta.d();
        let pts = sample_points(
            chart.dim(),
            DEFAULT_SAMPLES,
            crate::tol::DEFAULT_SEED,
            |_| true,
        )?;
        for p in &pts {
            let b = Bindings::new(&chart.vars, p, &constants);
            let r = d_theta.max_abs(&b)?;
            if r >= TOL_EXACT {
                return Err(Error::NonClosedLeeForm(format!(
                    "|dTheta| = {r:.3e} at {p:?}"
                )));
            }
        }

        // eta = d_Theta t
        let eta = KForm::scalar(&chart, Expr::var("t")).ldr(&theta)?;
        // Omega = -d_{2 Theta} Theta_Q, with Theta_Q = p_i dq^i
        let mut theta_q = KForm::zero(&chart, 1);
        for i in 0..n {
            theta_q.insert(vec![chart.q_index(i)], Expr::var(&format!("p{}", i + 1)));
        }
        let two_theta = theta.scale(Expr::num(2.0));
        let omega = theta_q.ldr(&two_theta)?.scale(Expr::num(-1.0));

        Ok(LccStructure {
            chart,
            lee,
            theta,
            eta,
            omega,
            constants,
        })
    }

    pub fn n(&self) -> usize {
        self.chart.n
    }

    pub fn is_cosymplectic(&self) -> bool {
        self.lee.psi.iter().all(|c| c.is_zero()) && self.lee.zeta.is_zero()
    }

    pub fn bindings<'a>(&'a self, point: &'a [f64]) -> Bindings<'a> {
        Bindings::new(&self.chart.vars, point, &self.constants)
    }

    /// Conformal denominator 1 − tζ that controls invertibility of the
    /// structure matrix along the t-direction.
    pub fn denominator(&self) -> Expr {
        expr::sub(
            Expr::one(),
            expr::mul(Expr::var("t"), self.lee.zeta.clone()),
        )
    }

    /// True when the point stays clear of the singular locus.
    pub fn admissible(&self, point: &[f64]) -> bool {
        let b = self.bindings(point);
        self.denominator()
            .eval(&b)
            .map(|d| d.abs() > TOL_DENOMINATOR)
            .unwrap_or(false)
    }

    /// Seeded admissible sample points in [-1,1]^dim.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, Error> {
        sample_points(self.chart.dim(), count, seed, |p| self.admissible(p))
    }

    /// Structure matrix M_ab = Ω_ab + η_a η_b at a point; ♭(X)_b = X^a M_ab.
    pub fn structure_matrix(&self, point: &[f64]) -> Result<Matrix, Error> {
        let dim = self.chart.dim();
        let b = self.bindings(point);
        let mut m = Matrix::zeros(dim);
        for (k, c) in &self.omega.comps {
            let v = c.eval(&b)?;
            m.add_at(k[0], k[1], v);
            m.add_at(k[1], k[0], -v);
        }
        let eta_vals: Vec<f64> = self
            .eta
            .coeff_vector()
            .iter()
            .map(|c| c.eval(&b))
            .collect::<Result<_, _>>()?;
        for a in 0..dim {
            for bb in 0..dim {
                m.add_at(a, bb, eta_vals[a] * eta_vals[bb]);
            }
        }
        Ok(m)
    }

    /// Flat map ♭(X) = ι_XΩ + η(X)η, symbolically.
    pub fn flat(&self, x: &VectorField) -> Result<KForm, Error> {
        let i_x_omega = self.omega.interior(x)?;
        let eta_x = self.eta.pair(x)?;
        i_x_omega.add(&self.eta.scale(eta_x))
    }

    /// Sharp map at a point for numeric one-form coefficients: solves
    /// X^a M_ab = μ_b.
    pub fn sharp_coeffs_at(&self, mu: &[f64], point: &[f64]) -> Result<Vec<f64>, Error> {
        let m = self.structure_matrix(point)?;
        crate::linalg::solve(&m.transpose(), mu)
    }

    /// Sharp map at a point for a symbolic one-form.
    pub fn sharp_at(&self, mu: &KForm, point: &[f64]) -> Result<Vec<f64>, Error> {
        assert_eq!(mu.degree, 1);
        let b = self.bindings(point);
        let coeffs: Vec<f64> = mu
            .coeff_vector()
            .iter()
            .map(|c| c.eval(&b))
            .collect::<Result<_, _>>()?;
        self.sharp_coeffs_at(&coeffs, point)
    }

    /// Reeb field R = ♯(η) at a point (normative pointwise solve).
    pub fn reeb_at(&self, point: &[f64]) -> Result<Vec<f64>, Error> {
        self.sharp_at(&self.eta, point)
    }

    /// Closed-form Reeb field
    ///   R = 1/(1−tζ) ∂t + Σ_i 2 p_i ζ/(1−tζ) ∂p_i,
    /// kept as a cross-check against `reeb_at`.
    pub fn reeb_closed_form(&self) -> VectorField {
        let den = self.denominator();
        let mut r = VectorField::zero(&self.chart);
        r.comps[self.chart.t_index()] = expr::div(Expr::one(), den.clone());
        for i in 0..self.n() {
            r.comps[self.chart.p_index(i)] = expr::div(
                expr::mul(
                    expr::mul(Expr::num(2.0), Expr::var(&format!("p{}", i + 1))),
                    self.lee.zeta.clone(),
                ),
                den.clone(),
            );
        }
        r
    }

    /// Coefficient of the volume form η∧Ω^n at a point.
    pub fn volume_at(&self, point: &[f64]) -> Result<f64, Error> {
        let mut vol = self.eta.clone();
        for _ in 0..self.n() {
            vol = vol.wedge(&self.omega)?;
        }
        let full: Vec<usize> = (0..self.chart.dim()).collect();
        let b = self.bindings(point);
        vol.get(&full).eval(&b)
    }

    /// Sample-point validation of the defining identities.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<StructureReport, Error> {
        let pts = self.sample(samples, seed)?;
        let d_theta = self.theta.d();
        let d_theta_eta = self.eta.ldr(&self.theta)?;
        let two_theta = self.theta.scale(Expr::num(2.0));
        let d_2theta_omega = self.omega.ldr(&two_theta)?;
        let mut report = StructureReport {
            lee_closedness: 0.0,
            d_theta_eta: 0.0,
            d_2theta_omega: 0.0,
            min_volume: f64::INFINITY,
            samples: pts.len(),
        };
        for p in &pts {
            let b = self.bindings(p);
            report.lee_closedness = report.lee_closedness.max(d_theta.max_abs(&b)?);
            report.d_theta_eta = report.d_theta_eta.max(d_theta_eta.max_abs(&b)?);
            report.d_2theta_omega = report.d_2theta_omega.max(d_2theta_omega.max_abs(&b)?);
            report.min_volume = report.min_volume.min(self.volume_at(p)?.abs());
        }
        Ok(report)
    }

    /// Symplectization: extends the chart by s and builds
    ///   u = ds − s π*Θ,   ω̄ = π*Ω + π*η ∧ u,
    /// which satisfies dω̄ = 2π*Θ ∧ ω̄. The structural Lee form of ω̄ is
    /// therefore 2π*Θ, while the extended dynamics (lifted Hamiltonian
    /// fields that must project onto E_H) contract against d_{π*Θ}; the
    /// returned structure records both.
    pub fn symplectize(&self) -> LcsStructure {
        let ext = Chart::extended(self.n());
        // pull back: the first 2n+1 variables coincide, so components copy over
        let mut omega_pb = KForm::zero(&ext, 2);
        for (k, c) in &self.omega.comps {
            omega_pb.insert(k.clone(), c.clone());
        }
        let mut eta_pb = KForm::zero(&ext, 1);
        for (k, c) in &self.eta.comps {
            eta_pb.insert(k.clone(), c.clone());
        }
        let theta_pb = self.lee.as_one_form(&ext);
        let u = KForm::dx(&ext, ext.s_index())
            .sub(&theta_pb.scale(Expr::var("s")))
            .unwrap();
        let omega_bar = omega_pb.add(&eta_pb.wedge(&u).unwrap()).unwrap();
        LcsStructure {
            chart: ext,
            omega: omega_bar,
            lee_structural: theta_pb.scale(Expr::num(2.0)),
            lee_dynamics: theta_pb,
            u: Some(u),
            denominators: vec![self.denominator()],
            constants: self.constants.clone(),
        }
    }
}

/// An LCS structure: a nondegenerate two-form ω with dω = θ∧ω for a closed
/// Lee form θ. `lee_dynamics` is the one-form the Hamilton equation
/// ι_{X_H}ω = d_θH contracts against; it equals `lee_structural` except for
/// symplectizations of LCC structures, where the lifted dynamics use π*Θ
/// while ω̄ itself is LCS with Lee form 2π*Θ.
#[derive(Debug, Clone)]
pub struct LcsStructure {
    pub chart: Arc<Chart>,
    pub omega: KForm,
    pub lee_structural: KForm,
    pub lee_dynamics: KForm,
    /// ds − s π*Θ when the structure arises by symplectization.
    pub u: Option<KForm>,
    /// Denominator expressions whose small values mark the singular locus.
    pub denominators: Vec<Expr>,
    pub constants: HashMap<String, f64>,
}

impl LcsStructure {
    /// Generic LCS structure where the dynamics Lee form is the structural
    /// one (e.g. ω_θ = ω_Q + θ∧θ_Q charts, or plain symplectic θ = 0).
    pub fn new(
        chart: Arc<Chart>,
        omega: KForm,
        lee: KForm,
        constants: HashMap<String, f64>,
    ) -> LcsStructure {
        LcsStructure {
            chart,
            omega,
            lee_structural: lee.clone(),
            lee_dynamics: lee,
            u: None,
            denominators: vec![],
            constants,
        }
    }

    pub fn bindings<'a>(&'a self, point: &'a [f64]) -> Bindings<'a> {
        Bindings::new(&self.chart.vars, point, &self.constants)
    }

    pub fn admissible(&self, point: &[f64]) -> bool {
        let b = self.bindings(point);
        self.denominators.iter().all(|d| {
            d.eval(&b)
                .map(|v| v.abs() > TOL_DENOMINATOR)
                .unwrap_or(false)
        })
    }

    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, Error> {
        sample_points(self.chart.dim(), count, seed, |p| self.admissible(p))
    }

    /// Antisymmetric matrix ω_ab at a point.
    pub fn matrix(&self, point: &[f64]) -> Result<Matrix, Error> {
        let dim = self.chart.dim();
        let b = self.bindings(point);
        let mut m = Matrix::zeros(dim);
        for (k, c) in &self.omega.comps {
            let v = c.eval(&b)?;
            m.add_at(k[0], k[1], v);
            m.add_at(k[1], k[0], -v);
        }
        Ok(m)
    }

    /// Sharp map: solves X^a ω_ab = μ_b at the point.
    pub fn sharp_coeffs_at(&self, mu: &[f64], point: &[f64]) -> Result<Vec<f64>, Error> {
        let m = self.matrix(point)?;
        crate::linalg::solve(&m.transpose(), mu)
    }

    pub fn sharp_at(&self, mu: &KForm, point: &[f64]) -> Result<Vec<f64>, Error> {
        assert_eq!(mu.degree, 1);
        let b = self.bindings(point);
        let coeffs: Vec<f64> = mu
            .coeff_vector()
            .iter()
            .map(|c| c.eval(&b))
            .collect::<Result<_, _>>()?;
        self.sharp_coeffs_at(&coeffs, point)
    }

    /// Validates dω − θ∧ω = 0 (structural Lee form) and nondegeneracy of
    /// ω^{m} at sample points.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<StructureReport, Error> {
        let pts = self.sample(samples, seed)?;
        let residual = self.omega.ldr(&self.lee_structural)?;
        let d_lee = self.lee_structural.d();
        let m = self.chart.dim() / 2;
        let mut vol = self.omega.clone();
        for _ in 1..m {
            vol = vol.wedge(&self.omega)?;
        }
        let full: Vec<usize> = (0..self.chart.dim()).collect();
        let mut report = StructureReport {
            lee_closedness: 0.0,
            d_theta_eta: 0.0,
            d_2theta_omega: 0.0,
            min_volume: f64::INFINITY,
            samples: pts.len(),
        };
        for p in &pts {
            let b = self.bindings(p);
            report.lee_closedness = report.lee_closedness.max(d_lee.max_abs(&b)?);
            report.d_2theta_omega = report.d_2theta_omega.max(residual.max_abs(&b)?);
            report.min_volume = report.min_volume.min(vol.get(&full).eval(&b)?.abs());
        }
        Ok(report)
    }
}

// ---------------------------------------------------------------------------
// Conformal rescaling (local cosymplectic picture of an LCC structure)
// ---------------------------------------------------------------------------

/// A local conformal factor σ; between two factors the transition scalars
/// κ = e^{−Δσ} (one-forms) and λ = e^{−2Δσ} (two-forms) satisfy the cocycle
/// condition.
#[derive(Debug, Clone)]
pub struct ConformalFactor {
    pub sigma: Expr,
}

impl ConformalFactor {
    /// κ_{βα} = e^{−(σ_β − σ_α)}.
    pub fn kappa(beta: &ConformalFactor, alpha: &ConformalFactor) -> Expr {
        expr::call(
            Func::Exp,
            expr::neg(expr::sub(beta.sigma.clone(), alpha.sigma.clone())),
        )
    }

    /// λ_{βα} = e^{−2(σ_β − σ_α)}.
    pub fn lambda(beta: &ConformalFactor, alpha: &ConformalFactor) -> Expr {
        expr::call(
            Func::Exp,
            expr::mul(
                Expr::num(-2.0),
                expr::sub(beta.sigma.clone(), alpha.sigma.clone()),
            ),
        )
    }
}

/// The locally rescaled tensors on a chart where Θ = dσ:
/// η_α = e^{−σ}η, Ω_α = e^{−2σ}Ω, H_α = e^{−σ}H, X_α = e^{σ}X, R_α = e^{σ}R.
#[derive(Debug, Clone)]
pub struct RescaledData {
    pub eta: KForm,
    pub omega: KForm,
    pub hamiltonian: Expr,
    pub hamiltonian_vf: VectorField,
    pub reeb: VectorField,
}

pub fn conformal_rescale(
    s: &LccStructure,
    hamiltonian: &Expr,
    hamiltonian_vf: &VectorField,
    sigma: &ConformalFactor,
) -> RescaledData {
    let shrink = expr::call(Func::Exp, expr::neg(sigma.sigma.clone()));
    let shrink2 = expr::call(Func::Exp, expr::mul(Expr::num(-2.0), sigma.sigma.clone()));
    let grow = expr::call(Func::Exp, sigma.sigma.clone());
    let scale_vf = |v: &VectorField, f: &Expr| VectorField {
        chart: v.chart.clone(),
        comps: v
            .comps
            .iter()
            .map(|c| expr::mul(f.clone(), c.clone()))
            .collect(),
    };
    RescaledData {
        eta: s.eta.scale(shrink.clone()),
        omega: s.omega.scale(shrink2),
        hamiltonian: expr::mul(shrink, hamiltonian.clone()),
        hamiltonian_vf: scale_vf(hamiltonian_vf, &grow),
        reeb: scale_vf(&s.reeb_closed_form(), &grow),
    }
}
