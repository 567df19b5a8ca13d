//! Hamiltonian, evolution, and gradient vector fields on LCC/LCS
//! structures; Jacobi and one-form brackets; Hamilton-Poincaré forms;
//! fixed-step trajectory integration.
//!
//! The normative definition of every dynamics field is its contraction
//! identity solved pointwise through the structure matrix. Closed-form
//! coordinate displays are kept as cross-checks only: long index
//! expressions are where transcription typos live, and when the two routes
//! disagree the solve wins (see DISCREPANCIES.md at the repo root).

use std::collections::HashMap;

use crate::calculus::{KForm, VectorField};
use crate::error::Error;
use crate::expr::{self, Expr};
use crate::geometry::{LccStructure, LcsStructure};
use crate::tol::FD_STEP_SCALE;

// ---------------------------------------------------------------------------
// Finite-difference helpers for pointwise-solved fields
// ---------------------------------------------------------------------------

fn fd_step(x: f64) -> f64 {
    FD_STEP_SCALE * x.abs().max(1.0)
}

/// Central-difference gradient of a pointwise scalar function.
pub fn fd_grad<F>(f: F, x: &[f64]) -> Result<Vec<f64>, Error>
where
    F: Fn(&[f64]) -> Result<f64, Error>,
{
    let mut out = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for a in 0..x.len() {
        let h = fd_step(x[a]);
        xp[a] = x[a] + h;
        let fp = f(&xp)?;
        xp[a] = x[a] - h;
        let fm = f(&xp)?;
        xp[a] = x[a];
        out[a] = (fp - fm) / (2.0 * h);
    }
    Ok(out)
}

/// Central-difference Jacobian J[a][b] = ∂X^a/∂x^b of a pointwise vector
/// function.
pub fn fd_jacobian<F>(f: F, x: &[f64], dim_out: usize) -> Result<Vec<Vec<f64>>, Error>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, Error>,
{
    let mut j = vec![vec![0.0; x.len()]; dim_out];
    let mut xp = x.to_vec();
    for b in 0..x.len() {
        let h = fd_step(x[b]);
        xp[b] = x[b] + h;
        let fp = f(&xp)?;
        xp[b] = x[b] - h;
        let fm = f(&xp)?;
        xp[b] = x[b];
        for a in 0..dim_out {
            j[a][b] = (fp[a] - fm[a]) / (2.0 * h);
        }
    }
    Ok(j)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Ω(X, Y) at a point from the stored (a<b) components.
fn two_form_pairing(
    omega: &KForm,
    b: &crate::expr::Bindings,
    x: &[f64],
    y: &[f64],
) -> Result<f64, Error> {
    let mut acc = 0.0;
    for (k, c) in &omega.comps {
        let v = c.eval(b)?;
        acc += v * (x[k[0]] * y[k[1]] - x[k[1]] * y[k[0]]);
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// LCC Hamiltonian systems
// ---------------------------------------------------------------------------

/// A Hamiltonian function on an LCC structure.
#[derive(Debug, Clone)]
pub struct LccSystem {
    pub structure: LccStructure,
    pub hamiltonian: Expr,
}

impl LccSystem {
    pub fn new(structure: LccStructure, hamiltonian: Expr) -> LccSystem {
        LccSystem {
            structure,
            hamiltonian,
        }
    }

    /// d_ΘH = dH − HΘ as a symbolic one-form.
    pub fn d_theta_h(&self) -> KForm {
        KForm::scalar(&self.structure.chart, self.hamiltonian.clone())
            .ldr(&self.structure.theta)
            .expect("same chart")
    }

    fn d_theta_h_vals(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        let b = self.structure.bindings(x);
        self.d_theta_h()
            .coeff_vector()
            .iter()
            .map(|c| c.eval(&b))
            .collect()
    }

    /// ⟨d_ΘH, R⟩ at a point (Reeb by pointwise solve).
    pub fn reeb_pairing_at(&self, x: &[f64]) -> Result<f64, Error> {
        let mu = self.d_theta_h_vals(x)?;
        let r = self.structure.reeb_at(x)?;
        Ok(dot(&mu, &r))
    }

    /// Gradient field grad H = ♯(d_ΘH) at a point.
    pub fn grad_at(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        let mu = self.d_theta_h_vals(x)?;
        self.structure.sharp_coeffs_at(&mu, x)
    }

    /// Hamiltonian field X_H = ♯(d_ΘH) − ⟨d_ΘH,R⟩ R at a point.
    pub fn xh_at(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        let mu = self.d_theta_h_vals(x)?;
        let grad = self.structure.sharp_coeffs_at(&mu, x)?;
        let r = self.structure.reeb_at(x)?;
        let c = dot(&mu, &r);
        Ok(grad.iter().zip(&r).map(|(g, rr)| g - c * rr).collect())
    }

    /// Evolution field E_H = R + X_H at a point.
    pub fn eh_at(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        let xh = self.xh_at(x)?;
        let r = self.structure.reeb_at(x)?;
        Ok(xh.iter().zip(&r).map(|(a, b)| a + b).collect())
    }

    /// Energy identity residual ⟨d_ΘH, X_H⟩ (zero for exact dynamics).
    pub fn energy_residual_at(&self, x: &[f64]) -> Result<f64, Error> {
        let mu = self.d_theta_h_vals(x)?;
        let xh = self.xh_at(x)?;
        Ok(dot(&mu, &xh))
    }

    /// η(V) at a point for a numeric tangent vector.
    pub fn eta_pairing_at(&self, x: &[f64], v: &[f64]) -> Result<f64, Error> {
        let b = self.structure.bindings(x);
        let eta: Vec<f64> = self
            .structure
            .eta
            .coeff_vector()
            .iter()
            .map(|c| c.eval(&b))
            .collect::<Result<_, _>>()?;
        Ok(dot(&eta, v))
    }

    // -- closed-form coordinate displays (cross-checks; the solve is
    //    normative) ----------------------------------------------------------

    /// Displayed Hamiltonian field
    ///   X_H = H_{p_i}∂q^i
    ///       + (−H_{q^i} + ψ_iH/(1−tζ) + 2(p_iψ_j−p_jψ_i)/(1−tζ) H_{p_j}
    ///          − tψ_i/(1−tζ) H_t) ∂p_i
    ///       + tψ_i/(1−tζ) H_{p_i} ∂t.
    pub fn xh_closed_form(&self) -> VectorField {
        let s = &self.structure;
        let n = s.n();
        let h = &self.hamiltonian;
        let den = s.denominator();
        let ht = h.differentiate("t");
        let mut v = VectorField::zero(&s.chart);
        let mut t_comp = Expr::zero();
        for i in 0..n {
            let hpi = h.differentiate(&format!("p{}", i + 1));
            v.comps[s.chart.q_index(i)] = hpi.clone();
            let mut pc = expr::neg(h.differentiate(&format!("q{}", i + 1)));
            pc = expr::add(
                pc,
                expr::div(expr::mul(s.lee.psi[i].clone(), h.clone()), den.clone()),
            );
            for j in 0..n {
                let hpj = h.differentiate(&format!("p{}", j + 1));
                let skew = expr::sub(
                    expr::mul(Expr::var(&format!("p{}", i + 1)), s.lee.psi[j].clone()),
                    expr::mul(Expr::var(&format!("p{}", j + 1)), s.lee.psi[i].clone()),
                );
                pc = expr::add(
                    pc,
                    expr::div(expr::mul(expr::mul(Expr::num(2.0), skew), hpj), den.clone()),
                );
            }
            pc = expr::sub(
                pc,
                expr::div(
                    expr::mul(expr::mul(Expr::var("t"), s.lee.psi[i].clone()), ht.clone()),
                    den.clone(),
                ),
            );
            v.comps[s.chart.p_index(i)] = pc;
            t_comp = expr::add(
                t_comp,
                expr::div(
                    expr::mul(expr::mul(Expr::var("t"), s.lee.psi[i].clone()), hpi),
                    den.clone(),
                ),
            );
        }
        v.comps[s.chart.t_index()] = t_comp;
        v
    }

    /// Displayed evolution field: X_H plus the closed-form Reeb field, with
    /// the t-component written as (1 + tψ_i H_{p_i})/(1−tζ).
    pub fn eh_closed_form(&self) -> VectorField {
        let s = &self.structure;
        let mut v = self.xh_closed_form();
        let r = s.reeb_closed_form();
        for a in 0..s.chart.dim() {
            v.comps[a] = expr::add(v.comps[a].clone(), r.comps[a].clone());
        }
        v
    }

    /// Displayed gradient field. The cross term in the p_i row carries
    /// coefficient 4 p_i p_j ζ²/(1−tζ)²; expanding
    /// grad H = X_H + ⟨d_ΘH,R⟩R term by term gives
    ///   ⟨d_ΘH,R⟩ · R_{p_i} = 2p_iζ (H_t + 2p_jζH_{p_j} − Hζ)/(1−tζ)²,
    /// whose H_{p_j} part is 4 p_i p_j ζ². Pass `as_printed = true` to get
    /// the coefficient 2 variant instead (see DISCREPANCIES.md).
    pub fn grad_closed_form(&self, as_printed: bool) -> VectorField {
        let s = &self.structure;
        let n = s.n();
        let h = &self.hamiltonian;
        let den = s.denominator();
        let den2 = expr::mul(den.clone(), den.clone());
        let zeta = &s.lee.zeta;
        let zeta2 = expr::mul(zeta.clone(), zeta.clone());
        let ht = h.differentiate("t");
        let cross = if as_printed { 2.0 } else { 4.0 };

        let mut v = VectorField::zero(&s.chart);
        let mut t_comp = Expr::zero();
        for i in 0..n {
            let pi = Expr::var(&format!("p{}", i + 1));
            let hpi = h.differentiate(&format!("p{}", i + 1));
            v.comps[s.chart.q_index(i)] = hpi.clone();

            let mut pc = expr::neg(h.differentiate(&format!("q{}", i + 1)));
            pc = expr::add(
                pc,
                expr::div(expr::mul(s.lee.psi[i].clone(), h.clone()), den.clone()),
            );
            pc = expr::sub(
                pc,
                expr::div(
                    expr::mul(
                        expr::mul(Expr::num(2.0), expr::mul(pi.clone(), h.clone())),
                        zeta2.clone(),
                    ),
                    den2.clone(),
                ),
            );
            for j in 0..n {
                let pj = Expr::var(&format!("p{}", j + 1));
                let hpj = h.differentiate(&format!("p{}", j + 1));
                let skew = expr::sub(
                    expr::mul(pi.clone(), s.lee.psi[j].clone()),
                    expr::mul(pj.clone(), s.lee.psi[i].clone()),
                );
                let coeff = expr::add(
                    expr::div(expr::mul(Expr::num(2.0), skew), den.clone()),
                    expr::div(
                        expr::mul(
                            expr::mul(Expr::num(cross), expr::mul(pi.clone(), pj)),
                            zeta2.clone(),
                        ),
                        den2.clone(),
                    ),
                );
                pc = expr::add(pc, expr::mul(coeff, hpj));
            }
            let h_t_coeff = expr::sub(
                expr::div(
                    expr::mul(expr::mul(Expr::num(2.0), pi.clone()), zeta.clone()),
                    den2.clone(),
                ),
                expr::div(expr::mul(Expr::var("t"), s.lee.psi[i].clone()), den.clone()),
            );
            pc = expr::add(pc, expr::mul(h_t_coeff, ht.clone()));
            v.comps[s.chart.p_index(i)] = pc;

            let t_coeff = expr::add(
                expr::div(
                    expr::mul(expr::mul(Expr::num(2.0), pi), zeta.clone()),
                    den2.clone(),
                ),
                expr::div(expr::mul(Expr::var("t"), s.lee.psi[i].clone()), den.clone()),
            );
            t_comp = expr::add(t_comp, expr::mul(t_coeff, hpi));
        }
        t_comp = expr::add(t_comp, expr::div(ht, den2.clone()));
        t_comp = expr::sub(t_comp, expr::div(expr::mul(h.clone(), zeta.clone()), den2));
        v.comps[s.chart.t_index()] = t_comp;
        v
    }

    /// Lifts the system to its symplectization with H^s = π*H + s.
    pub fn extended_lift(&self) -> LcsSystem {
        let structure = self.structure.symplectize();
        let hamiltonian = expr::add(self.hamiltonian.clone(), Expr::var("s"));
        LcsSystem {
            structure,
            hamiltonian,
        }
    }
}

// ---------------------------------------------------------------------------
// LCS Hamiltonian systems
// ---------------------------------------------------------------------------

/// A Hamiltonian function on an LCS structure.
#[derive(Debug, Clone)]
pub struct LcsSystem {
    pub structure: LcsStructure,
    pub hamiltonian: Expr,
}

impl LcsSystem {
    pub fn new(structure: LcsStructure, hamiltonian: Expr) -> LcsSystem {
        LcsSystem {
            structure,
            hamiltonian,
        }
    }

    /// d_θH with θ the structure's dynamics Lee form.
    pub fn d_theta_h(&self) -> KForm {
        KForm::scalar(&self.structure.chart, self.hamiltonian.clone())
            .ldr(&self.structure.lee_dynamics)
            .expect("same chart")
    }

    /// X_H at a point: solves ι_{X_H}ω = d_θH.
    pub fn xh_at(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        self.structure.sharp_at(&self.d_theta_h(), x)
    }

    /// Lee vector field Z_θ = ω♯(θ) at a point.
    pub fn lee_vf_at(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        self.structure.sharp_at(&self.structure.lee_dynamics, x)
    }
}

// ---------------------------------------------------------------------------
// Jacobi brackets
// ---------------------------------------------------------------------------

/// Λ(μ, ν) = Ω(♯μ, ♯ν) at a point, with numeric one-form coefficients.
fn lambda_lcc_at(s: &LccStructure, mu: &[f64], nu: &[f64], x: &[f64]) -> Result<f64, Error> {
    let xm = s.sharp_coeffs_at(mu, x)?;
    let xn = s.sharp_coeffs_at(nu, x)?;
    let b = s.bindings(x);
    two_form_pairing(&s.omega, &b, &xm, &xn)
}

fn theta_coeffs_at(s: &LccStructure, x: &[f64]) -> Result<Vec<f64>, Error> {
    let b = s.bindings(x);
    s.theta.coeff_vector().iter().map(|c| c.eval(&b)).collect()
}

/// LCC Jacobi bracket at a point, pointwise-function variant (used for
/// nesting in Jacobi-identity checks; differentials by central FD):
///   {F,H}_LCC = Λ(dF,dH) + F V(H) − H V(F),   V = Λ♯(2Θ).
pub fn jacobi_bracket_lcc_fn_at<F, G>(s: &LccStructure, f: F, g: G, x: &[f64]) -> Result<f64, Error>
where
    F: Fn(&[f64]) -> Result<f64, Error>,
    G: Fn(&[f64]) -> Result<f64, Error>,
{
    let df = fd_grad(&f, x)?;
    let dg = fd_grad(&g, x)?;
    jacobi_bracket_lcc_core(s, f(x)?, &df, g(x)?, &dg, x)
}

/// LCC Jacobi bracket at a point for symbolic functions (exact
/// differentials).
pub fn jacobi_bracket_lcc_at(
    s: &LccStructure,
    f: &Expr,
    g: &Expr,
    x: &[f64],
) -> Result<f64, Error> {
    let b = s.bindings(x);
    let df: Vec<f64> = s
        .chart
        .vars
        .iter()
        .map(|v| f.differentiate(v).eval(&b))
        .collect::<Result<_, _>>()?;
    let dg: Vec<f64> = s
        .chart
        .vars
        .iter()
        .map(|v| g.differentiate(v).eval(&b))
        .collect::<Result<_, _>>()?;
    jacobi_bracket_lcc_core(s, f.eval(&b)?, &df, g.eval(&b)?, &dg, x)
}

fn jacobi_bracket_lcc_core(
    s: &LccStructure,
    f_val: f64,
    df: &[f64],
    g_val: f64,
    dg: &[f64],
    x: &[f64],
) -> Result<f64, Error> {
    let lambda = lambda_lcc_at(s, df, dg, x)?;
    let two_theta: Vec<f64> = theta_coeffs_at(s, x)?.iter().map(|v| 2.0 * v).collect();
    // V(H) = Λ(2Θ, dH)
    let v_g = lambda_lcc_at(s, &two_theta, dg, x)?;
    let v_f = lambda_lcc_at(s, &two_theta, df, x)?;
    Ok(lambda + f_val * v_g - g_val * v_f)
}

/// LCS Jacobi bracket at a point via the bivector route:
///   {F,H}_LCS = Λ(dF,dH) + F Z_θ(H) − H Z_θ(F).
pub fn jacobi_bracket_lcs_at(
    s: &LcsStructure,
    f: &Expr,
    g: &Expr,
    x: &[f64],
) -> Result<f64, Error> {
    let b = s.bindings(x);
    let df: Vec<f64> = s
        .chart
        .vars
        .iter()
        .map(|v| f.differentiate(v).eval(&b))
        .collect::<Result<_, _>>()?;
    let dg: Vec<f64> = s
        .chart
        .vars
        .iter()
        .map(|v| g.differentiate(v).eval(&b))
        .collect::<Result<_, _>>()?;
    let xf = s.sharp_coeffs_at(&df, x)?;
    let xg = s.sharp_coeffs_at(&dg, x)?;
    let lambda = two_form_pairing(&s.omega, &b, &xf, &xg)?;
    // Z_theta is taken with the structural Lee form of d omega = theta ^
    // omega; that is the theta for which the induced bracket satisfies
    // the Jacobi identity.
    let z = s.sharp_at(&s.lee_structural, x)?;
    Ok(lambda + f.eval(&b)? * dot(&z, &dg) - g.eval(&b)? * dot(&z, &df))
}

/// LCS Jacobi bracket, pointwise-function variant for nesting (central-FD
/// differentials, 1e−6 tier).
pub fn jacobi_bracket_lcs_fn_at<F, G>(s: &LcsStructure, f: F, g: G, x: &[f64]) -> Result<f64, Error>
where
    F: Fn(&[f64]) -> Result<f64, Error>,
    G: Fn(&[f64]) -> Result<f64, Error>,
{
    let df = fd_grad(&f, x)?;
    let dg = fd_grad(&g, x)?;
    let xf = s.sharp_coeffs_at(&df, x)?;
    let xg = s.sharp_coeffs_at(&dg, x)?;
    let b = s.bindings(x);
    let lambda = two_form_pairing(&s.omega, &b, &xf, &xg)?;
    let z = s.sharp_at(&s.lee_structural, x)?;
    Ok(lambda + f(x)? * dot(&z, &dg) - g(x)? * dot(&z, &df))
}

/// The other route of the same bracket: ω(X_F, X_H) with X_F = ♯(d_θF),
/// θ again the structural Lee form so the two routes use one θ
/// consistently. The defining identity says the routes agree; tests
/// exercise that.
pub fn jacobi_bracket_lcs_via_fields_at(
    s: &LcsStructure,
    f: &Expr,
    g: &Expr,
    x: &[f64],
) -> Result<f64, Error> {
    let b = s.bindings(x);
    let field = |h: &Expr| -> Result<Vec<f64>, Error> {
        let dh = KForm::scalar(&s.chart, h.clone())
            .ldr(&s.lee_structural)?
            .coeff_vector();
        let vals: Vec<f64> = dh.iter().map(|c| c.eval(&b)).collect::<Result<_, _>>()?;
        s.sharp_coeffs_at(&vals, x)
    };
    let xf = field(f)?;
    let xg = field(g)?;
    two_form_pairing(&s.omega, &b, &xf, &xg)
}

// ---------------------------------------------------------------------------
// One-form brackets (Lie algebroid structure on sections of T*M)
// ---------------------------------------------------------------------------

/// Numeric one-form value at a point.
fn eval_one_form(mu: &KForm, b: &crate::expr::Bindings) -> Result<Vec<f64>, Error> {
    mu.coeff_vector().iter().map(|c| c.eval(b)).collect()
}

/// (L_X ν)_b = X^a ∂_aν_b + ν_a ∂_b X^a with symbolic ν and a numeric field
/// X given by its value and FD Jacobian at the point.
fn lie_derivative_numeric(
    nu: &KForm,
    b: &crate::expr::Bindings,
    x_val: &[f64],
    x_jac: &[Vec<f64>],
) -> Result<Vec<f64>, Error> {
    let dim = x_val.len();
    let chart = &nu.chart;
    let nu_vals = eval_one_form(nu, b)?;
    let mut out = vec![0.0; dim];
    for bb in 0..dim {
        let mut acc = 0.0;
        for a in 0..dim {
            acc += x_val[a] * nu.get(&[bb]).differentiate(chart.var(a)).eval(b)?;
            acc += nu_vals[a] * x_jac[a][bb];
        }
        out[bb] = acc;
    }
    Ok(out)
}

/// One-form bracket for LCS structures (plain Lee form θ):
///   {μ,ν} = L_{♯μ}ν − θ(♯μ)ν − L_{♯ν}μ + θ(♯ν)μ + d_θ(ι_{♯ν}ι_{♯μ}ω),
/// evaluated at a point. Sharp images are differentiated by central finite
/// differences, so results sit in the 1e−6 tolerance tier.
pub fn oneform_bracket_lcs_at(
    s: &LcsStructure,
    mu: &KForm,
    nu: &KForm,
    x: &[f64],
) -> Result<Vec<f64>, Error> {
    let b = s.bindings(x);
    let dim = s.chart.dim();
    let sharp_mu = |pt: &[f64]| {
        let bb = s.bindings(pt);
        let coeffs: Vec<f64> = eval_one_form(mu, &bb)?;
        s.sharp_coeffs_at(&coeffs, pt)
    };
    let sharp_nu = |pt: &[f64]| {
        let bb = s.bindings(pt);
        let coeffs: Vec<f64> = eval_one_form(nu, &bb)?;
        s.sharp_coeffs_at(&coeffs, pt)
    };
    let xm = sharp_mu(x)?;
    let xn = sharp_nu(x)?;
    let jm = fd_jacobian(sharp_mu, x, dim)?;
    let jn = fd_jacobian(sharp_nu, x, dim)?;
    // the algebroid bracket is tied to the structural Lee form of
    // d omega = theta ^ omega, not the dynamics variant
    let theta_vals = eval_one_form(&s.lee_structural, &b)?;
    let theta_mu = dot(&theta_vals, &xm);
    let theta_nu = dot(&theta_vals, &xn);
    let mu_vals = eval_one_form(mu, &b)?;
    let nu_vals = eval_one_form(nu, &b)?;

    let l_mu_nu = lie_derivative_numeric(nu, &b, &xm, &jm)?;
    let l_nu_mu = lie_derivative_numeric(mu, &b, &xn, &jn)?;

    // G = ι_{♯ν}ι_{♯μ}ω = ω(♯μ, ♯ν); d_θG = dG − Gθ with dG by FD
    let g_fn = |pt: &[f64]| {
        let bb = s.bindings(pt);
        let a = sharp_mu(pt)?;
        let c = sharp_nu(pt)?;
        two_form_pairing(&s.omega, &bb, &a, &c)
    };
    let g_val = g_fn(x)?;
    let dg = fd_grad(g_fn, x)?;

    let mut out = vec![0.0; dim];
    for a in 0..dim {
        out[a] = l_mu_nu[a] - theta_mu * nu_vals[a] - l_nu_mu[a] + theta_nu * mu_vals[a] + dg[a]
            - g_val * theta_vals[a];
    }
    Ok(out)
}

/// One-form bracket for LCC structures: the LCS formula with 2Θ in place of
/// θ plus the η correction terms,
///   … + η(♯μ)(L_{♯ν}η − 2Θ(♯ν)η) − η(♯ν)(L_{♯μ}η − 2Θ(♯μ)η)
///   + (η([♯μ,♯ν]) − ♯μ(η(♯ν)) + ♯ν(η(♯μ))) η.
pub fn oneform_bracket_lcc_at(
    s: &LccStructure,
    mu: &KForm,
    nu: &KForm,
    x: &[f64],
) -> Result<Vec<f64>, Error> {
    let b = s.bindings(x);
    let dim = s.chart.dim();
    let sharp_mu = |pt: &[f64]| {
        let bb = s.bindings(pt);
        let coeffs: Vec<f64> = eval_one_form(mu, &bb)?;
        s.sharp_coeffs_at(&coeffs, pt)
    };
    let sharp_nu = |pt: &[f64]| {
        let bb = s.bindings(pt);
        let coeffs: Vec<f64> = eval_one_form(nu, &bb)?;
        s.sharp_coeffs_at(&coeffs, pt)
    };
    let xm = sharp_mu(x)?;
    let xn = sharp_nu(x)?;
    let jm = fd_jacobian(sharp_mu, x, dim)?;
    let jn = fd_jacobian(sharp_nu, x, dim)?;
    let two_theta: Vec<f64> = theta_coeffs_at(s, x)?.iter().map(|v| 2.0 * v).collect();
    let tt_mu = dot(&two_theta, &xm);
    let tt_nu = dot(&two_theta, &xn);
    let mu_vals = eval_one_form(mu, &b)?;
    let nu_vals = eval_one_form(nu, &b)?;
    let eta_vals = eval_one_form(&s.eta, &b)?;
    let eta_mu = dot(&eta_vals, &xm);
    let eta_nu = dot(&eta_vals, &xn);

    let l_mu_nu = lie_derivative_numeric(nu, &b, &xm, &jm)?;
    let l_nu_mu = lie_derivative_numeric(mu, &b, &xn, &jn)?;
    let l_mu_eta = lie_derivative_numeric(&s.eta, &b, &xm, &jm)?;
    let l_nu_eta = lie_derivative_numeric(&s.eta, &b, &xn, &jn)?;

    let g_fn = |pt: &[f64]| {
        let bb = s.bindings(pt);
        let a = sharp_mu(pt)?;
        let c = sharp_nu(pt)?;
        two_form_pairing(&s.omega, &bb, &a, &c)
    };
    let g_val = g_fn(x)?;
    let dg = fd_grad(g_fn, x)?;

    // [♯μ,♯ν] by FD Jacobians
    let mut commutator = vec![0.0; dim];
    for a in 0..dim {
        for c in 0..dim {
            commutator[a] += xm[c] * jn[a][c] - xn[c] * jm[a][c];
        }
    }
    let eta_comm = dot(&eta_vals, &commutator);
    // ♯μ(η(♯ν)) and ♯ν(η(♯μ)) — directional derivatives of scalar pairings
    let eta_of_nu = |pt: &[f64]| {
        let bb = s.bindings(pt);
        let e = eval_one_form(&s.eta, &bb)?;
        Ok(dot(&e, &sharp_nu(pt)?))
    };
    let eta_of_mu = |pt: &[f64]| {
        let bb = s.bindings(pt);
        let e = eval_one_form(&s.eta, &bb)?;
        Ok(dot(&e, &sharp_mu(pt)?))
    };
    let mu_eta_nu = dot(&xm, &fd_grad(eta_of_nu, x)?);
    let nu_eta_mu = dot(&xn, &fd_grad(eta_of_mu, x)?);
    let eta_scalar = eta_comm - mu_eta_nu + nu_eta_mu;

    let mut out = vec![0.0; dim];
    for a in 0..dim {
        out[a] = l_mu_nu[a] - tt_mu * nu_vals[a] - l_nu_mu[a] + tt_nu * mu_vals[a] + dg[a]
            - g_val * two_theta[a]
            + eta_mu * (l_nu_eta[a] - tt_nu * eta_vals[a])
            - eta_nu * (l_mu_eta[a] - tt_mu * eta_vals[a])
            + eta_scalar * eta_vals[a];
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Hamilton-Poincaré forms
// ---------------------------------------------------------------------------

/// Hamilton-Poincaré one- and two-forms of an LCC system:
///   Θ_H = Θ_Q − H d_Θt = Θ_Q − Hη,   Ω_H = Ω + d_ΘH ∧ η = −d_{2Θ}Θ_H,
/// plus the Reeb field R_H of the pair (η, Ω_H), which equals E_H.
#[derive(Debug, Clone)]
pub struct HamiltonPoincare {
    pub theta_h: KForm,
    pub omega_h: KForm,
}

pub fn hamilton_poincare(sys: &LccSystem) -> Result<HamiltonPoincare, Error> {
    let s = &sys.structure;
    let mut theta_q = KForm::zero(&s.chart, 1);
    for i in 0..s.n() {
        theta_q.insert(vec![s.chart.q_index(i)], Expr::var(&format!("p{}", i + 1)));
    }
    let theta_h = theta_q.sub(&s.eta.scale(sys.hamiltonian.clone()))?;
    let omega_h = s.omega.add(&sys.d_theta_h().wedge(&s.eta)?)?;
    Ok(HamiltonPoincare { theta_h, omega_h })
}

/// R_H at a point: the unique field with ι_{R_H}η = 1, ι_{R_H}Ω_H = 0,
/// solved through the matrix Ω_H + η⊗η (same device as the Reeb solve).
pub fn hamilton_poincare_reeb_at(
    sys: &LccSystem,
    hp: &HamiltonPoincare,
    x: &[f64],
) -> Result<Vec<f64>, Error> {
    let s = &sys.structure;
    let dim = s.chart.dim();
    let b = s.bindings(x);
    let mut m = crate::linalg::Matrix::zeros(dim);
    for (k, c) in &hp.omega_h.comps {
        let v = c.eval(&b)?;
        m.add_at(k[0], k[1], v);
        m.add_at(k[1], k[0], -v);
    }
    let eta_vals = eval_one_form(&s.eta, &b)?;
    for a in 0..dim {
        for bb in 0..dim {
            m.add_at(a, bb, eta_vals[a] * eta_vals[bb]);
        }
    }
    crate::linalg::solve(&m.transpose(), &eta_vals)
}

// ---------------------------------------------------------------------------
// Trajectory integration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Euler,
}

impl Method {
    pub fn parse(name: &str) -> Result<Method, Error> {
        match name {
            "rk4" => Ok(Method::Rk4),
            "euler" => Ok(Method::Euler),
            other => Err(Error::Schema(format!(
                "unknown integrator method '{other}' (expected rk4 or euler)"
            ))),
        }
    }
}

/// Which field drives the flow: the evolution field E_H (default; carries
/// the time coordinate along) or the Hamiltonian field X_H.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Evolution,
    Hamiltonian,
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    /// simulation parameter (not the chart coordinate t unless Θ = 0)
    pub tau: f64,
    pub point: Vec<f64>,
    pub hamiltonian: f64,
    /// ⟨d_ΘH, X_H⟩ at the sample
    pub energy_residual: f64,
    /// ι_{field}η minus its defining value (1 for E_H, 0 for X_H)
    pub eta_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub method: Method,
    pub dt: f64,
    pub steps: usize,
    /// set when integration hit a singular point before finishing
    pub truncated: Option<String>,
}

pub fn integrate(
    sys: &LccSystem,
    x0: &[f64],
    steps: usize,
    dt: f64,
    method: Method,
    field: FieldKind,
) -> Result<Trajectory, Error> {
    assert!(dt > 0.0, "dt must be positive");
    let rhs = |x: &[f64]| match field {
        FieldKind::Evolution => sys.eh_at(x),
        FieldKind::Hamiltonian => sys.xh_at(x),
    };
    let eta_target = match field {
        FieldKind::Evolution => 1.0,
        FieldKind::Hamiltonian => 0.0,
    };
    let record = |tau: f64, x: &[f64]| -> Result<TrajectorySample, Error> {
        let b = sys.structure.bindings(x);
        let v = rhs(x)?;
        Ok(TrajectorySample {
            tau,
            point: x.to_vec(),
            hamiltonian: sys.hamiltonian.eval(&b)?,
            energy_residual: sys.energy_residual_at(x)?,
            eta_residual: sys.eta_pairing_at(x, &v)? - eta_target,
        })
    };

    let mut samples = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    let mut truncated = None;
    {
        let s = record(0.0, &x)?;
        samples.push(s)
    }
    for step in 1..=steps {
        let advanced: Result<Vec<f64>, Error> = (|| match method {
            Method::Euler => {
                let k = rhs(&x)?;
                Ok(x.iter().zip(&k).map(|(a, b)| a + dt * b).collect())
            }
            Method::Rk4 => {
                let k1 = rhs(&x)?;
                let x2: Vec<f64> = x.iter().zip(&k1).map(|(a, b)| a + 0.5 * dt * b).collect();
                let k2 = rhs(&x2)?;
                let x3: Vec<f64> = x.iter().zip(&k2).map(|(a, b)| a + 0.5 * dt * b).collect();
                let k3 = rhs(&x3)?;
                let x4: Vec<f64> = x.iter().zip(&k3).map(|(a, b)| a + dt * b).collect();
                let k4 = rhs(&x4)?;
                Ok((0..x.len())
                    .map(|a| x[a] + dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]))
                    .collect())
            }
        })();
        match advanced {
            Ok(next) => {
                x = next;
                match record(step as f64 * dt, &x) {
                    Ok(s) => samples.push(s),
                    Err(e) => {
                        truncated = Some(format!("step {step}: {e}"));
                        break;
                    }
                }
            }
            Err(e) => {
                truncated = Some(format!("step {step}: {e}"));
                break;
            }
        }
    }
    Ok(Trajectory {
        samples,
        method,
        dt,
        steps,
        truncated,
    })
}

/// Convenience: a Hamiltonian system over constants, used by tests and the
/// CLI preset.
pub fn oscillator_system(psi: f64, m0: f64, gamma: f64) -> LccSystem {
    let mut constants = HashMap::new();
    constants.insert("m0".to_string(), m0);
    constants.insert("G".to_string(), gamma);
    let lee = crate::calculus::LeeForm {
        psi: vec![Expr::num(psi)],
        zeta: Expr::zero(),
    };
    let structure = LccStructure::lcc(1, lee, constants).unwrap();
    let h = crate::expr::parse(
        "p1^2/(2*m0*exp(G*t)) + (m0*exp(G*t)/2)*q1^2",
        &structure.chart.vars,
        &["m0".to_string(), "G".to_string()],
    )
    .unwrap();
    LccSystem::new(structure, h)
}
