//! Exterior calculus on a single coordinate chart.
//!
//! Forms and vector fields carry symbolic components; identities like
//! d∘d = 0 or the graded Leibniz rule are checked by evaluating both sides
//! at sampled points, since symbolic equality is undecidable without a CAS.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::Error;
use crate::expr::{self, Bindings, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    /// Phase space [q1..qn, p1..pn, t], dimension 2n+1.
    Phase,
    /// Symplectization [q1..qn, p1..pn, t, s], dimension 2n+2.
    Extended,
    /// Configuration-time space [q1..qn, t], dimension n+1.
    Base,
}

/// A coordinate chart: an ordered variable list plus degrees of freedom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    pub kind: ChartKind,
    pub n: usize,
    pub vars: Vec<String>,
}

impl Chart {
    pub fn phase(n: usize) -> Arc<Chart> {
        assert!(n >= 1);
        let mut vars: Vec<String> = (1..=n).map(|i| format!("q{i}")).collect();
        vars.extend((1..=n).map(|i| format!("p{i}")));
        vars.push("t".to_string());
        Arc::new(Chart {
            kind: ChartKind::Phase,
            n,
            vars,
        })
    }

    pub fn extended(n: usize) -> Arc<Chart> {
        let base = Chart::phase(n);
        let mut vars = base.vars.clone();
        vars.push("s".to_string());
        Arc::new(Chart {
            kind: ChartKind::Extended,
            n,
            vars,
        })
    }

    pub fn base(n: usize) -> Arc<Chart> {
        assert!(n >= 1);
        let mut vars: Vec<String> = (1..=n).map(|i| format!("q{i}")).collect();
        vars.push("t".to_string());
        Arc::new(Chart {
            kind: ChartKind::Base,
            n,
            vars,
        })
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn q_index(&self, i: usize) -> usize {
        debug_assert!(i < self.n);
        i
    }

    pub fn p_index(&self, i: usize) -> usize {
        debug_assert!(i < self.n && self.kind != ChartKind::Base);
        self.n + i
    }

    pub fn t_index(&self) -> usize {
        match self.kind {
            ChartKind::Base => self.n,
            _ => 2 * self.n,
        }
    }

    pub fn s_index(&self) -> usize {
        debug_assert_eq!(self.kind, ChartKind::Extended);
        2 * self.n + 1
    }

    pub fn var(&self, a: usize) -> &str {
        &self.vars[a]
    }
}

fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<(), Error> {
    if a.vars == b.vars {
        Ok(())
    } else {
        Err(Error::ChartMismatch(format!(
            "[{}] vs [{}]",
            a.vars.join(","),
            b.vars.join(",")
        )))
    }
}

/// Vector field X = X^a ∂/∂x^a with symbolic components.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub chart: Arc<Chart>,
    pub comps: Vec<Expr>,
}

impl VectorField {
    pub fn zero(chart: &Arc<Chart>) -> VectorField {
        VectorField {
            chart: chart.clone(),
            comps: vec![Expr::zero(); chart.dim()],
        }
    }

    /// Coordinate basis field ∂/∂x^a.
    pub fn basis(chart: &Arc<Chart>, a: usize) -> VectorField {
        let mut v = VectorField::zero(chart);
        v.comps[a] = Expr::one();
        v
    }

    pub fn eval(&self, b: &Bindings) -> Result<Vec<f64>, Error> {
        self.comps.iter().map(|c| c.eval(b)).collect()
    }

    /// Directional derivative X(F) = X^a ∂_a F.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for (a, c) in self.comps.iter().enumerate() {
            acc = expr::add(
                acc,
                expr::mul(c.clone(), f.differentiate(self.chart.var(a))),
            );
        }
        acc
    }
}

/// Jacobi-Lie bracket [X,Y]^a = X^b ∂_b Y^a − Y^b ∂_b X^a.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField, Error> {
    same_chart(&x.chart, &y.chart)?;
    let comps = (0..x.chart.dim())
        .map(|a| expr::sub(x.apply(&y.comps[a]), y.apply(&x.comps[a])))
        .collect();
    Ok(VectorField {
        chart: x.chart.clone(),
        comps,
    })
}

/// Sorts an index tuple into strictly increasing order, returning the
/// permutation sign, or None when an index repeats (the term vanishes).
fn canonicalize(mut idx: Vec<usize>) -> Option<(Vec<usize>, f64)> {
    let mut sign = 1.0;
    // insertion sort, counting swaps
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((idx, sign))
    }
}

/// Differential k-form with symbolic components, stored only on strictly
/// increasing index tuples. Degree 0 is a scalar keyed by the empty tuple.
#[derive(Debug, Clone)]
pub struct KForm {
    pub chart: Arc<Chart>,
    pub degree: usize,
    pub comps: BTreeMap<Vec<usize>, Expr>,
}

impl KForm {
    pub fn zero(chart: &Arc<Chart>, degree: usize) -> KForm {
        KForm {
            chart: chart.clone(),
            degree,
            comps: BTreeMap::new(),
        }
    }

    pub fn scalar(chart: &Arc<Chart>, f: Expr) -> KForm {
        let mut form = KForm::zero(chart, 0);
        form.insert(vec![], f);
        form
    }

    /// One-form from a full coefficient vector (one entry per chart variable).
    pub fn one_form(chart: &Arc<Chart>, coeffs: Vec<Expr>) -> KForm {
        assert_eq!(coeffs.len(), chart.dim());
        let mut form = KForm::zero(chart, 1);
        for (a, c) in coeffs.into_iter().enumerate() {
            form.insert(vec![a], c);
        }
        form
    }

    /// Basis one-form dx^a.
    pub fn dx(chart: &Arc<Chart>, a: usize) -> KForm {
        let mut form = KForm::zero(chart, 1);
        form.insert(vec![a], Expr::one());
        form
    }

    /// Adds `coeff` onto the (possibly unsorted) tuple `idx`.
    pub fn insert(&mut self, idx: Vec<usize>, coeff: Expr) {
        debug_assert_eq!(idx.len(), self.degree);
        if coeff.is_zero() {
            return;
        }
        let Some((key, sign)) = canonicalize(idx) else {
            return;
        };
        let signed = if sign < 0.0 { expr::neg(coeff) } else { coeff };
        match self.comps.remove(&key) {
            Some(old) => {
                let merged = expr::add(old, signed);
                if !merged.is_zero() {
                    self.comps.insert(key, merged);
                }
            }
            None => {
                self.comps.insert(key, signed);
            }
        }
    }

    pub fn get(&self, idx: &[usize]) -> Expr {
        self.comps.get(idx).cloned().unwrap_or_else(Expr::zero)
    }

    /// Full coefficient vector of a one-form, indexed by chart variable.
    pub fn coeff_vector(&self) -> Vec<Expr> {
        assert_eq!(self.degree, 1);
        (0..self.chart.dim()).map(|a| self.get(&[a])).collect()
    }

    pub fn add(&self, other: &KForm) -> Result<KForm, Error> {
        same_chart(&self.chart, &other.chart)?;
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (k, c) in &other.comps {
            out.insert(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &KForm) -> Result<KForm, Error> {
        self.add(&other.scale(Expr::num(-1.0)))
    }

    pub fn scale(&self, f: Expr) -> KForm {
        let mut out = KForm::zero(&self.chart, self.degree);
        for (k, c) in &self.comps {
            out.insert(k.clone(), expr::mul(f.clone(), c.clone()));
        }
        out
    }

    /// Wedge product. Degrees exceeding the chart dimension give zero.
    pub fn wedge(&self, other: &KForm) -> Result<KForm, Error> {
        same_chart(&self.chart, &other.chart)?;
        let degree = self.degree + other.degree;
        let mut out = KForm::zero(&self.chart, degree.min(self.chart.dim() + 1));
        if degree > self.chart.dim() {
            out.degree = degree;
            return Ok(out);
        }
        out.degree = degree;
        for (ka, ca) in &self.comps {
            for (kb, cb) in &other.comps {
                let mut idx = ka.clone();
                idx.extend_from_slice(kb);
                out.insert(idx, expr::mul(ca.clone(), cb.clone()));
            }
        }
        Ok(out)
    }

    /// Exterior derivative: (da) = Σ_a ∂_a(coeff) dx^a ∧ (basis tuple).
    pub fn d(&self) -> KForm {
        let mut out = KForm::zero(&self.chart, self.degree + 1);
        for (k, c) in &self.comps {
            for a in 0..self.chart.dim() {
                let dc = c.differentiate(self.chart.var(a));
                if dc.is_zero() {
                    continue;
                }
                let mut idx = vec![a];
                idx.extend_from_slice(k);
                out.insert(idx, dc);
            }
        }
        out
    }

    /// Interior product ι_X contracting the first slot.
    pub fn interior(&self, x: &VectorField) -> Result<KForm, Error> {
        same_chart(&self.chart, &x.chart)?;
        assert!(self.degree >= 1, "interior product needs degree >= 1");
        let mut out = KForm::zero(&self.chart, self.degree - 1);
        for (k, c) in &self.comps {
            for (r, &a) in k.iter().enumerate() {
                let xa = &x.comps[a];
                if xa.is_zero() {
                    continue;
                }
                let mut idx = k.clone();
                idx.remove(r);
                let mut term = expr::mul(xa.clone(), c.clone());
                if r % 2 == 1 {
                    term = expr::neg(term);
                }
                out.insert(idx, term);
            }
        }
        Ok(out)
    }

    /// Pairing ⟨a, X⟩ of a one-form with a vector field, as an expression.
    pub fn pair(&self, x: &VectorField) -> Result<Expr, Error> {
        assert_eq!(self.degree, 1);
        Ok(self.interior(x)?.get(&[]))
    }

    /// Lie derivative by Cartan's formula L_X = ι_X∘d + d∘ι_X.
    pub fn lie(&self, x: &VectorField) -> Result<KForm, Error> {
        if self.degree == 0 {
            return Ok(KForm::scalar(&self.chart, x.apply(&self.get(&[]))));
        }
        let term1 = self.d().interior(x)?;
        let term2 = self.interior(x)?.d();
        term1.add(&term2)
    }

    /// Lichnerowicz-deRham differential d_θ a = da − θ∧a.
    pub fn ldr(&self, theta: &KForm) -> Result<KForm, Error> {
        assert_eq!(theta.degree, 1);
        self.d().sub(&theta.wedge(self)?)
    }

    /// Evaluates every stored component; returns (tuple, value) pairs in
    /// canonical order.
    pub fn eval(&self, b: &Bindings) -> Result<Vec<(Vec<usize>, f64)>, Error> {
        self.comps
            .iter()
            .map(|(k, c)| Ok((k.clone(), c.eval(b)?)))
            .collect()
    }

    /// Max absolute component value at a point.
    pub fn max_abs(&self, b: &Bindings) -> Result<f64, Error> {
        let mut m: f64 = 0.0;
        for c in self.comps.values() {
            m = m.max(c.eval(b)?.abs());
        }
        Ok(m)
    }
}

// ---------------------------------------------------------------------------
// Lee form Θ = ψ_i(q,t) dq^i + ζ(q,t) dt
// ---------------------------------------------------------------------------

/// The Lee one-form of an LCC chart. Components live on configuration-time
/// space (functions of q and t only) and pull back to any chart that shares
/// those variable names.
#[derive(Debug, Clone)]
pub struct LeeForm {
    pub psi: Vec<Expr>,
    pub zeta: Expr,
}

impl LeeForm {
    pub fn zero(n: usize) -> LeeForm {
        LeeForm {
            psi: vec![Expr::zero(); n],
            zeta: Expr::zero(),
        }
    }

    pub fn n(&self) -> usize {
        self.psi.len()
    }

    /// Rejects components that mention momenta (or s); the Lee form is
    /// pulled back from configuration-time space by construction.
    pub fn check_base_variables(&self) -> Result<(), Error> {
        let mut names = Vec::new();
        for c in self.psi.iter().chain(std::iter::once(&self.zeta)) {
            c.variables(&mut names);
        }
        for name in &names {
            if name.starts_with('p') || name == "s" {
                return Err(Error::ChartMismatch(format!(
                    "Lee form component references fiber variable '{name}'"
                )));
            }
        }
        Ok(())
    }

    /// Θ as a one-form on `chart` (any chart containing q1..qn and t).
    pub fn as_one_form(&self, chart: &Arc<Chart>) -> KForm {
        let mut form = KForm::zero(chart, 1);
        for (i, psi) in self.psi.iter().enumerate() {
            form.insert(vec![chart.q_index(i)], psi.clone());
        }
        form.insert(vec![chart.t_index()], self.zeta.clone());
        form
    }
}

// ---------------------------------------------------------------------------
// LdR coefficient formulas on configuration-time space Q x R
// ---------------------------------------------------------------------------

/// Conformal denominator 1 − q^kψ_k − tζ of the d_Ψ basis on Q×ℝ.
pub fn ldr_denominator(lee: &LeeForm) -> Expr {
    let mut den = Expr::one();
    for (i, psi) in lee.psi.iter().enumerate() {
        den = expr::sub(
            den,
            expr::mul(Expr::var(&format!("q{}", i + 1)), psi.clone()),
        );
    }
    expr::sub(den, expr::mul(Expr::var("t"), lee.zeta.clone()))
}

/// Coefficients (F_{:i}, F_{:t}) of d_Ψ F in the basis
/// d_Ψ q^i = dq^i − q^i Ψ, d_Ψ t = dt − t Ψ:
///
///   F_{:i} = F_{,i} + ψ_i (q^j F_{,j} + t F_{,t} − F) / (1 − q^kψ_k − tζ)
///   F_{:t} = F_{,t} + ζ   (q^j F_{,j} + t F_{,t} − F) / (1 − q^kψ_k − tζ)
///
/// Symbolic output; evaluation near the vanishing denominator raises a
/// domain error, which callers surface as a singular point.
pub fn ldr_function_coefficients(f: &Expr, lee: &LeeForm) -> (Vec<Expr>, Expr) {
    let n = lee.n();
    let den = ldr_denominator(lee);
    // Euler-type combination q^j F_,j + t F_,t − F; vanishes for F
    // homogeneous of order 1 in (q, t).
    let mut euler = expr::neg(f.clone());
    for j in 0..n {
        let qj = format!("q{}", j + 1);
        euler = expr::add(euler, expr::mul(Expr::var(&qj), f.differentiate(&qj)));
    }
    euler = expr::add(euler, expr::mul(Expr::var("t"), f.differentiate("t")));
    let ratio = expr::div(euler, den);

    let coeff_q = (0..n)
        .map(|i| {
            expr::add(
                f.differentiate(&format!("q{}", i + 1)),
                expr::mul(lee.psi[i].clone(), ratio.clone()),
            )
        })
        .collect();
    let coeff_t = expr::add(f.differentiate("t"), expr::mul(lee.zeta.clone(), ratio));
    (coeff_q, coeff_t)
}

/// Reassembles F_{:i} d_Ψq^i + F_{:t} d_Ψt as an ordinary one-form on the
/// base chart, for reconstruction checks against d_Ψ F.
pub fn ldr_basis_reconstruction(
    coeff_q: &[Expr],
    coeff_t: &Expr,
    lee: &LeeForm,
    chart: &Arc<Chart>,
) -> KForm {
    let theta = lee.as_one_form(chart);
    let mut out = KForm::zero(chart, 1);
    for (i, c) in coeff_q.iter().enumerate() {
        let a = chart.q_index(i);
        // d_Ψ q^i = dq^i − q^i Ψ
        let basis = KForm::dx(chart, a)
            .sub(&theta.scale(Expr::var(chart.var(a))))
            .unwrap();
        out = out.add(&basis.scale(c.clone())).unwrap();
    }
    let t = chart.t_index();
    let basis_t = KForm::dx(chart, t)
        .sub(&theta.scale(Expr::var(chart.var(t))))
        .unwrap();
    out.add(&basis_t.scale(coeff_t.clone())).unwrap()
}

/// Converts the plain (bar) coefficients of a one-form
/// υ = ῡ_i dq^i + ῡ̄ dt into hat coefficients of the d_Ψ basis:
/// υ = υ̂_i d_Ψq^i + υ̂̄ d_Ψt. Round-trips with `ldr_hat_to_bar`.
pub fn ldr_bar_to_hat(bar_q: &[Expr], bar_t: &Expr, lee: &LeeForm) -> (Vec<Expr>, Expr) {
    let den = ldr_denominator(lee);
    let mut weighted = expr::mul(Expr::var("t"), bar_t.clone());
    for (j, b) in bar_q.iter().enumerate() {
        weighted = expr::add(
            weighted,
            expr::mul(Expr::var(&format!("q{}", j + 1)), b.clone()),
        );
    }
    let ratio = expr::div(weighted, den);
    let hat_q = bar_q
        .iter()
        .enumerate()
        .map(|(i, b)| expr::add(b.clone(), expr::mul(ratio.clone(), lee.psi[i].clone())))
        .collect();
    let hat_t = expr::add(bar_t.clone(), expr::mul(ratio, lee.zeta.clone()));
    (hat_q, hat_t)
}

/// Inverse of `ldr_bar_to_hat`: expands the d_Ψ basis back into dq, dt.
pub fn ldr_hat_to_bar(hat_q: &[Expr], hat_t: &Expr, lee: &LeeForm) -> (Vec<Expr>, Expr) {
    let mut weighted = expr::mul(Expr::var("t"), hat_t.clone());
    for (j, h) in hat_q.iter().enumerate() {
        weighted = expr::add(
            weighted,
            expr::mul(Expr::var(&format!("q{}", j + 1)), h.clone()),
        );
    }
    let bar_q = hat_q
        .iter()
        .enumerate()
        .map(|(i, h)| expr::sub(h.clone(), expr::mul(lee.psi[i].clone(), weighted.clone())))
        .collect();
    let bar_t = expr::sub(hat_t.clone(), expr::mul(lee.zeta.clone(), weighted));
    (bar_q, bar_t)
}

/// LdR-closedness residual expressions for a one-form given by bar
/// coefficients on the base chart:
///
///   r_{ij} = ῡ_{i,j} + ψ_i ῡ_j − ῡ_{j,i} − ψ_j ῡ_i   (i < j)
///   r_{it} = ῡ_{i,t} + ῡ̄ ψ_i − ῡ̄_{,i} − ζ ῡ_i
///
/// Callers take the max absolute value over sample points.
pub fn ldr_closedness_residuals(bar_q: &[Expr], bar_t: &Expr, lee: &LeeForm) -> Vec<Expr> {
    let n = lee.n();
    let mut out = Vec::new();
    for i in 0..n {
        let qi = format!("q{}", i + 1);
        for j in i + 1..n {
            let qj = format!("q{}", j + 1);
            out.push(expr::sub(
                expr::add(
                    bar_q[i].differentiate(&qj),
                    expr::mul(lee.psi[i].clone(), bar_q[j].clone()),
                ),
                expr::add(
                    bar_q[j].differentiate(&qi),
                    expr::mul(lee.psi[j].clone(), bar_q[i].clone()),
                ),
            ));
        }
        out.push(expr::sub(
            expr::add(
                bar_q[i].differentiate("t"),
                expr::mul(bar_t.clone(), lee.psi[i].clone()),
            ),
            expr::add(
                bar_t.differentiate(&qi),
                expr::mul(lee.zeta.clone(), bar_q[i].clone()),
            ),
        ));
    }
    out
}
