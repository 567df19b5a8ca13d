//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line. Every numeric claim is asserted, so a failing criterion
//! fails the test as well as flipping its printed verdict.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lccmech::calculus::{Chart, KForm, LeeForm};
use lccmech::dynamics::{self, fd_grad, fd_jacobian, integrate, FieldKind, LccSystem, Method};
use lccmech::expr::{self, parse, Bindings, Expr};
use lccmech::geometry::LccStructure;
use lccmech::hj;

fn verdict(id: usize, label: &str, pass: bool) {
    println!(
        "ACCEPTANCE {id:>2} {label:<28} {}",
        if pass { "pass" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {id} ({label}) failed");
}

/// Random model with Θ = dσ for a polynomial σ of degree ≤ 3 in (q, t),
/// so ψ_i, ζ are polynomials of degree ≤ 2 and Θ is closed by
/// construction. Small coefficients keep the sample box admissible.
fn random_model(n: usize, seed: u64) -> LccStructure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = Chart::base(n);
    let mut c = || Expr::num(rng.gen_range(-0.15..0.15));
    let mut sigma = Expr::zero();
    let t = Expr::var("t");
    for i in 0..n {
        let q = Expr::var(&format!("q{}", i + 1));
        sigma = expr::add(sigma, expr::mul(c(), q.clone()));
        sigma = expr::add(sigma, expr::mul(c(), expr::mul(q.clone(), t.clone())));
        sigma = expr::add(
            sigma,
            expr::mul(c(), expr::mul(q.clone(), expr::mul(q.clone(), q.clone()))),
        );
        for j in i..n {
            let qj = Expr::var(&format!("q{}", j + 1));
            sigma = expr::add(sigma, expr::mul(c(), expr::mul(q.clone(), qj)));
        }
    }
    sigma = expr::add(sigma, expr::mul(c(), t.clone()));
    sigma = expr::add(sigma, expr::mul(c(), expr::mul(t.clone(), t.clone())));
    sigma = expr::add(
        sigma,
        expr::mul(c(), expr::mul(t.clone(), expr::mul(t.clone(), t.clone()))),
    );
    let psi: Vec<Expr> = (0..n)
        .map(|i| sigma.differentiate(&format!("q{}", i + 1)))
        .collect();
    let zeta = sigma.differentiate("t");
    let _ = chart;
    LccStructure::lcc(n, LeeForm { psi, zeta }, HashMap::new()).unwrap()
}

fn random_hamiltonian(s: &LccStructure, seed: u64) -> Expr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = s.n();
    let mut h = Expr::zero();
    for i in 0..n {
        let p = Expr::var(&format!("p{}", i + 1));
        let q = Expr::var(&format!("q{}", i + 1));
        h = expr::add(h, expr::div(expr::mul(p.clone(), p), Expr::num(2.0)));
        h = expr::add(
            h,
            expr::mul(
                Expr::num(rng.gen_range(-0.5..0.5)),
                expr::mul(q.clone(), q.clone()),
            ),
        );
        h = expr::add(
            h,
            expr::mul(
                Expr::num(rng.gen_range(-0.3..0.3)),
                expr::mul(Expr::var("t"), q),
            ),
        );
    }
    h
}

fn model_set() -> Vec<LccStructure> {
    (0..20)
        .map(|k| random_model(1 + (k as usize % 3), 1000 + k))
        .collect()
}

#[test]
fn criterion_01_structure_validity() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for s in model_set() {
        let r = s.validate(100, 7).unwrap();
        worst = worst
            .max(r.lee_closedness)
            .max(r.d_theta_eta)
            .max(r.d_2theta_omega);
        assert!(r.min_volume > 1e-9);
    }
    let in_time = cfg!(debug_assertions) || start.elapsed().as_secs_f64() < 5.0;
    verdict(1, "structure validity", worst < 1e-10 && in_time);
}

#[test]
fn criterion_02_musical_round_trip() {
    let mut worst = 0.0f64;
    for s in model_set() {
        let dim = s.chart.dim();
        let probe: Vec<f64> = (0..dim).map(|a| 0.4 - 0.1 * a as f64).collect();
        for x in s.sample(20, 11).unwrap() {
            let m = s.structure_matrix(&x).unwrap();
            // sharp then flat
            let up = s.sharp_coeffs_at(&probe, &x).unwrap();
            let back = m.transpose().matvec(&up);
            // flat then sharp
            let down = m.transpose().matvec(&probe);
            let up2 = s.sharp_coeffs_at(&down, &x).unwrap();
            for a in 0..dim {
                worst = worst.max((back[a] - probe[a]).abs());
                worst = worst.max((up2[a] - probe[a]).abs());
            }
        }
    }
    verdict(2, "musical round-trip", worst < 1e-10);
}

#[test]
fn criterion_03_closed_forms_vs_solve() {
    let mut worst = 0.0f64;
    for (k, s) in model_set().into_iter().enumerate() {
        let sys = LccSystem::new(s, Expr::zero());
        let sys = LccSystem::new(
            sys.structure.clone(),
            random_hamiltonian(&sys.structure, k as u64),
        );
        let reeb_cf = sys.structure.reeb_closed_form();
        let xh_cf = sys.xh_closed_form();
        let eh_cf = sys.eh_closed_form();
        let grad_cf = sys.grad_closed_form(false);
        for x in sys.structure.sample(50, 13).unwrap() {
            let b = sys.structure.bindings(&x);
            let quads = [
                (
                    sys.structure.reeb_at(&x).unwrap(),
                    reeb_cf.eval(&b).unwrap(),
                ),
                (sys.xh_at(&x).unwrap(), xh_cf.eval(&b).unwrap()),
                (sys.eh_at(&x).unwrap(), eh_cf.eval(&b).unwrap()),
                (sys.grad_at(&x).unwrap(), grad_cf.eval(&b).unwrap()),
            ];
            for (solved, displayed) in quads {
                for a in 0..sys.structure.chart.dim() {
                    worst = worst.max((solved[a] - displayed[a]).abs());
                }
            }
        }
    }
    // the deviating gradient display term is documented
    let discrepancies = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../DISCREPANCIES.md"
    ))
    .unwrap_or_default();
    let documented = discrepancies.contains("Gradient field");
    verdict(3, "closed form vs solve", worst < 1e-8 && documented);
}

#[test]
fn criterion_04_energy_identity() {
    let mut worst = 0.0f64;
    for (k, s) in model_set().into_iter().enumerate() {
        let h = random_hamiltonian(&s, 50 + k as u64);
        let sys = LccSystem::new(s, h);
        for x in sys.structure.sample(30, 17).unwrap() {
            worst = worst.max(sys.energy_residual_at(&x).unwrap().abs());
        }
    }
    // Theta = 0 trajectory of X_H conserves H
    let sys = dynamics::oscillator_system(0.0, 1.0, 0.0);
    let traj = integrate(
        &sys,
        &[1.0, 0.0, 0.0],
        1000,
        1e-3,
        Method::Rk4,
        FieldKind::Hamiltonian,
    )
    .unwrap();
    let h0 = traj.samples[0].hamiltonian;
    let drift = traj
        .samples
        .iter()
        .fold(0.0f64, |m, s| m.max((s.hamiltonian - h0).abs()));
    verdict(4, "energy identity", worst < 1e-10 && drift < 1e-6);
}

#[test]
fn criterion_05_oscillator_golden_run() {
    let start = Instant::now();
    let sys = dynamics::oscillator_system(0.0, 1.0, 0.0);
    let traj = integrate(
        &sys,
        &[1.0, 0.0, 0.0],
        1000,
        1e-3,
        Method::Rk4,
        FieldKind::Evolution,
    )
    .unwrap();
    let err = traj
        .samples
        .iter()
        .fold(0.0f64, |m, s| m.max((s.point[0] - s.tau.cos()).abs()));
    let in_time = cfg!(debug_assertions) || start.elapsed().as_secs_f64() < 1.0;
    verdict(5, "oscillator golden run", err < 1e-8 && in_time);
}

#[test]
fn criterion_06_preset_reproduction() {
    let sys = dynamics::oscillator_system(0.05, 1.0, 0.1);
    let eh_cf = sys.eh_closed_form();
    let mut worst = 0.0f64;
    for x in sys.structure.sample(20, 23).unwrap() {
        let b = sys.structure.bindings(&x);
        let eh = sys.eh_at(&x).unwrap();
        let ef = eh_cf.eval(&b).unwrap();
        for a in 0..3 {
            worst = worst.max((eh[a] - ef[a]).abs());
        }
        // corrected t-equation (see DISCREPANCIES.md for the exponent sign)
        let tdot = 1.0 + x[2] * 0.05 * x[1] * (-0.1 * x[2]).exp();
        worst = worst.max((eh[2] - tdot).abs());
    }
    // HJ residual of the general equation matches the corrected oscillator
    // PDE reduction on the default grid
    let base = Chart::base(1);
    let s_expr = parse("q1^2/2 + 0.2*q1", &base.vars, &[]).unwrap();
    let cand = hj::build_candidate(&sys, s_expr).unwrap();
    let grid = hj::default_grid(&sys).unwrap();
    let rep = hj::hj_residual(&sys, &cand, hj::Regime::Lcc, &grid).unwrap();
    let (psi, m0, g) = (0.05, 1.0, 0.1);
    let mut pde_dev = 0.0f64;
    for (qt, row) in grid.iter().zip(&rep.residuals) {
        let (q, t) = (qt[0], qt[1]);
        let sq = q + 0.2;
        let a = sq * sq / (2.0 * m0) * (-g * t).exp();
        let bb = m0 / 2.0 * (g * t).exp() * q * q;
        let kq = sq / m0 * (-g * t).exp() + m0 * (g * t).exp() * q;
        let pde = (kq - psi * ((1.0 + g * t) * a + (1.0 - g * t) * bb)) / (1.0 - q * psi);
        pde_dev = pde_dev.max((row[0] - pde).abs());
    }
    verdict(6, "oscillator preset repro", worst < 1e-8 && pde_dev < 1e-8);
}

#[test]
fn criterion_07_hj_theorem_equivalence() {
    let start = Instant::now();
    let base = Chart::base(1);
    let mk = |h: &str| {
        let s = LccStructure::cosymplectic(1, HashMap::new());
        let h = parse(h, &s.chart.vars, &[]).unwrap();
        LccSystem::new(s, h)
    };
    let mut ok = true;
    for (h, s_text) in [
        ("p1^2/2", "q1^2/(2*t)"),
        ("(p1^2 + q1^2)/2", "(q1^2/2)*(cos(t)/sin(t))"),
    ] {
        let sys = mk(h);
        let grid = hj::default_grid(&sys).unwrap();
        let s_expr = parse(s_text, &base.vars, &[]).unwrap();
        let cand = hj::build_candidate(&sys, s_expr).unwrap();
        let rep = hj::hj_residual(&sys, &cand, hj::Regime::Cosymplectic, &grid).unwrap();
        ok &= rep.max_residual < 1e-10 && rep.max_relatedness < 1e-10;

        let perturbed = parse(&format!("{s_text} + 0.1*q1^3"), &base.vars, &[]).unwrap();
        let cand_p = hj::build_candidate(&sys, perturbed).unwrap();
        let rep_p = hj::hj_residual(&sys, &cand_p, hj::Regime::Cosymplectic, &grid).unwrap();
        ok &= rep_p.max_residual > 1e-3 && rep_p.max_relatedness > 1e-3;
    }
    let in_time = cfg!(debug_assertions) || start.elapsed().as_secs_f64() < 5.0;
    verdict(7, "HJ theorem equivalence", ok && in_time);
}

fn random_polynomial(chart: &std::sync::Arc<Chart>, rng: &mut ChaCha8Rng) -> Expr {
    let mut f = Expr::num(rng.gen_range(-1.0..1.0));
    for v in &chart.vars {
        f = expr::add(
            f,
            expr::mul(Expr::num(rng.gen_range(-1.0..1.0)), Expr::var(v)),
        );
        for w in &chart.vars {
            f = expr::add(
                f,
                expr::mul(
                    Expr::num(rng.gen_range(-0.5..0.5)),
                    expr::mul(Expr::var(v), Expr::var(w)),
                ),
            );
        }
    }
    f
}

#[test]
fn criterion_08_bracket_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    // antisymmetry and (Theta = 0) Leibniz, exact tier
    let s0 = LccStructure::cosymplectic(1, HashMap::new());
    let mut exact = 0.0f64;
    for _ in 0..5 {
        let f = random_polynomial(&s0.chart, &mut rng);
        let g = random_polynomial(&s0.chart, &mut rng);
        let k = random_polynomial(&s0.chart, &mut rng);
        let gk = expr::mul(g.clone(), k.clone());
        for x in s0.sample(10, 29).unwrap() {
            let b = s0.bindings(&x);
            let fg = dynamics::jacobi_bracket_lcc_at(&s0, &f, &g, &x).unwrap();
            let gf = dynamics::jacobi_bracket_lcc_at(&s0, &g, &f, &x).unwrap();
            exact = exact.max((fg + gf).abs());
            let lhs = dynamics::jacobi_bracket_lcc_at(&s0, &f, &gk, &x).unwrap();
            let rhs = g.eval(&b).unwrap()
                * dynamics::jacobi_bracket_lcc_at(&s0, &f, &k, &x).unwrap()
                + k.eval(&b).unwrap() * dynamics::jacobi_bracket_lcc_at(&s0, &f, &g, &x).unwrap();
            exact = exact.max((lhs - rhs).abs());
        }
    }
    // Jacobi identity, FD tier, LCC and LCS, 10 random triples
    let lee = LeeForm {
        psi: vec![Expr::num(0.1)],
        zeta: Expr::zero(),
    };
    let s = LccStructure::lcc(1, lee, HashMap::new()).unwrap();
    let lcs = s.symplectize();
    let mut fd = 0.0f64;
    let mut fd_lcs = 0.0f64;
    for _ in 0..10 {
        let f = random_polynomial(&s.chart, &mut rng);
        let g = random_polynomial(&s.chart, &mut rng);
        let k = random_polynomial(&s.chart, &mut rng);
        let fe = |x: &[f64]| f.eval(&s.bindings(x));
        let ge = |x: &[f64]| g.eval(&s.bindings(x));
        let ke = |x: &[f64]| k.eval(&s.bindings(x));
        let fg = |x: &[f64]| dynamics::jacobi_bracket_lcc_fn_at(&s, fe, ge, x);
        let gk = |x: &[f64]| dynamics::jacobi_bracket_lcc_fn_at(&s, ge, ke, x);
        let kf = |x: &[f64]| dynamics::jacobi_bracket_lcc_fn_at(&s, ke, fe, x);
        for x in s.sample(2, 31).unwrap() {
            let j = dynamics::jacobi_bracket_lcc_fn_at(&s, fg, ke, &x).unwrap()
                + dynamics::jacobi_bracket_lcc_fn_at(&s, gk, fe, &x).unwrap()
                + dynamics::jacobi_bracket_lcc_fn_at(&s, kf, ge, &x).unwrap();
            fd = fd.max(j.abs());
        }

        let f2 = random_polynomial(&lcs.chart, &mut rng);
        let g2 = random_polynomial(&lcs.chart, &mut rng);
        let k2 = random_polynomial(&lcs.chart, &mut rng);
        let fe2 = |x: &[f64]| f2.eval(&lcs.bindings(x));
        let ge2 = |x: &[f64]| g2.eval(&lcs.bindings(x));
        let ke2 = |x: &[f64]| k2.eval(&lcs.bindings(x));
        let fg2 = |x: &[f64]| dynamics::jacobi_bracket_lcs_fn_at(&lcs, fe2, ge2, x);
        let gk2 = |x: &[f64]| dynamics::jacobi_bracket_lcs_fn_at(&lcs, ge2, ke2, x);
        let kf2 = |x: &[f64]| dynamics::jacobi_bracket_lcs_fn_at(&lcs, ke2, fe2, x);
        for x in lcs.sample(2, 37).unwrap() {
            let j = dynamics::jacobi_bracket_lcs_fn_at(&lcs, fg2, ke2, &x).unwrap()
                + dynamics::jacobi_bracket_lcs_fn_at(&lcs, gk2, fe2, &x).unwrap()
                + dynamics::jacobi_bracket_lcs_fn_at(&lcs, kf2, ge2, &x).unwrap();
            fd_lcs = fd_lcs.max(j.abs());
        }
    }
    eprintln!("criterion 8 residuals: exact {exact:.3e}, fd {fd:.3e}, fd_lcs {fd_lcs:.3e}");
    verdict(
        8,
        "bracket laws",
        exact < 1e-10 && fd < 1e-6 && fd_lcs < 1e-6,
    );
}

fn random_one_form(chart: &std::sync::Arc<Chart>, rng: &mut ChaCha8Rng) -> KForm {
    let coeffs: Vec<Expr> = (0..chart.dim())
        .map(|_| {
            let mut f = Expr::num(rng.gen_range(-1.0..1.0));
            for v in &chart.vars {
                f = expr::add(
                    f,
                    expr::mul(Expr::num(rng.gen_range(-0.5..0.5)), Expr::var(v)),
                );
            }
            f
        })
        .collect();
    KForm::one_form(chart, coeffs)
}

/// (L_X ν)_b with symbolic ν and a numeric field given by value + Jacobian.
fn lie_numeric(nu: &KForm, b: &Bindings, x_val: &[f64], x_jac: &[Vec<f64>]) -> Vec<f64> {
    let dim = x_val.len();
    let nu_vals: Vec<f64> = nu
        .coeff_vector()
        .iter()
        .map(|c| c.eval(b).unwrap())
        .collect();
    let mut out = vec![0.0; dim];
    for bb in 0..dim {
        for a in 0..dim {
            out[bb] += x_val[a]
                * nu.get(&[bb])
                    .differentiate(nu.chart.var(a))
                    .eval(b)
                    .unwrap();
            out[bb] += nu_vals[a] * x_jac[a][bb];
        }
    }
    out
}

#[test]
fn criterion_09_one_form_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let lee = LeeForm {
        psi: vec![Expr::num(0.15)],
        zeta: Expr::num(0.1),
    };
    let s = LccStructure::lcc(1, lee, HashMap::new()).unwrap();
    let lcs = s.symplectize();
    let mut worst = 0.0f64;

    // anchor homomorphism + anchor-Leibniz, 10 random pairs per structure
    for _ in 0..10 {
        let mu = random_one_form(&s.chart, &mut rng);
        let nu = random_one_form(&s.chart, &mut rng);
        let f = random_polynomial(&s.chart, &mut rng);
        let f_nu = nu.scale(f.clone());
        let sharp_mu = |pt: &[f64]| {
            let b = s.bindings(pt);
            let c: Vec<f64> = mu
                .coeff_vector()
                .iter()
                .map(|e| e.eval(&b).unwrap())
                .collect();
            s.sharp_coeffs_at(&c, pt)
        };
        let sharp_nu = |pt: &[f64]| {
            let b = s.bindings(pt);
            let c: Vec<f64> = nu
                .coeff_vector()
                .iter()
                .map(|e| e.eval(&b).unwrap())
                .collect();
            s.sharp_coeffs_at(&c, pt)
        };
        for x in s.sample(3, 41).unwrap() {
            let b = s.bindings(&x);
            let bracket = dynamics::oneform_bracket_lcc_at(&s, &mu, &nu, &x).unwrap();
            let anchored = s.sharp_coeffs_at(&bracket, &x).unwrap();
            let xm = sharp_mu(&x).unwrap();
            let xn = sharp_nu(&x).unwrap();
            let jm = fd_jacobian(sharp_mu, &x, 3).unwrap();
            let jn = fd_jacobian(sharp_nu, &x, 3).unwrap();
            for a in 0..3 {
                let mut comm = 0.0;
                for c in 0..3 {
                    comm += xm[c] * jn[a][c] - xn[c] * jm[a][c];
                }
                worst = worst.max((anchored[a] - comm).abs());
            }
            // anchor-Leibniz
            let lhs = dynamics::oneform_bracket_lcc_at(&s, &mu, &f_nu, &x).unwrap();
            let plain = dynamics::oneform_bracket_lcc_at(&s, &mu, &nu, &x).unwrap();
            let df: Vec<f64> = s
                .chart
                .vars
                .iter()
                .map(|v| f.differentiate(v).eval(&b).unwrap())
                .collect();
            let xf: f64 = xm.iter().zip(&df).map(|(a, c)| a * c).sum();
            let f_val = f.eval(&b).unwrap();
            let nu_vals: Vec<f64> = nu
                .coeff_vector()
                .iter()
                .map(|e| e.eval(&b).unwrap())
                .collect();
            for a in 0..3 {
                worst = worst.max((lhs[a] - f_val * plain[a] - xf * nu_vals[a]).abs());
            }
        }
        // LCS anchor homomorphism on the symplectization
        let mu4 = random_one_form(&lcs.chart, &mut rng);
        let nu4 = random_one_form(&lcs.chart, &mut rng);
        let sharp_mu4 = |pt: &[f64]| {
            let b = lcs.bindings(pt);
            let c: Vec<f64> = mu4
                .coeff_vector()
                .iter()
                .map(|e| e.eval(&b).unwrap())
                .collect();
            lcs.sharp_coeffs_at(&c, pt)
        };
        let sharp_nu4 = |pt: &[f64]| {
            let b = lcs.bindings(pt);
            let c: Vec<f64> = nu4
                .coeff_vector()
                .iter()
                .map(|e| e.eval(&b).unwrap())
                .collect();
            lcs.sharp_coeffs_at(&c, pt)
        };
        for x in lcs.sample(3, 43).unwrap() {
            let bracket = dynamics::oneform_bracket_lcs_at(&lcs, &mu4, &nu4, &x).unwrap();
            let anchored = lcs.sharp_coeffs_at(&bracket, &x).unwrap();
            let xm = sharp_mu4(&x).unwrap();
            let xn = sharp_nu4(&x).unwrap();
            let jm = fd_jacobian(sharp_mu4, &x, 4).unwrap();
            let jn = fd_jacobian(sharp_nu4, &x, 4).unwrap();
            for a in 0..4 {
                let mut comm = 0.0;
                for c in 0..4 {
                    comm += xm[c] * jn[a][c] - xn[c] * jm[a][c];
                }
                worst = worst.max((anchored[a] - comm).abs());
            }
        }
    }

    // Theta = 0 reductions: the full formulas must match independently
    // coded symmetric variants (no Lee terms)
    let s0 = LccStructure::cosymplectic(1, HashMap::new());
    let lcs0 = s0.symplectize();
    for _ in 0..3 {
        let mu = random_one_form(&s0.chart, &mut rng);
        let nu = random_one_form(&s0.chart, &mut rng);
        let sharp_mu = |pt: &[f64]| {
            let b = s0.bindings(pt);
            let c: Vec<f64> = mu
                .coeff_vector()
                .iter()
                .map(|e| e.eval(&b).unwrap())
                .collect();
            s0.sharp_coeffs_at(&c, pt)
        };
        let sharp_nu = |pt: &[f64]| {
            let b = s0.bindings(pt);
            let c: Vec<f64> = nu
                .coeff_vector()
                .iter()
                .map(|e| e.eval(&b).unwrap())
                .collect();
            s0.sharp_coeffs_at(&c, pt)
        };
        for x in s0.sample(3, 47).unwrap() {
            let b = s0.bindings(&x);
            let full = dynamics::oneform_bracket_lcc_at(&s0, &mu, &nu, &x).unwrap();
            // symmetric variant: L_mu nu - L_nu mu + d(Omega(mu#, nu#))
            //   + eta(mu#)(L_nu# eta) - eta(nu#)(L_mu# eta)
            //   + (eta([mu#,nu#]) - mu#(eta(nu#)) + nu#(eta(mu#))) eta
            let xm = sharp_mu(&x).unwrap();
            let xn = sharp_nu(&x).unwrap();
            let jm = fd_jacobian(sharp_mu, &x, 3).unwrap();
            let jn = fd_jacobian(sharp_nu, &x, 3).unwrap();
            let l_mu_nu = lie_numeric(&nu, &b, &xm, &jm);
            let l_nu_mu = lie_numeric(&mu, &b, &xn, &jn);
            let l_mu_eta = lie_numeric(&s0.eta, &b, &xm, &jm);
            let l_nu_eta = lie_numeric(&s0.eta, &b, &xn, &jn);
            let eta_vals: Vec<f64> = s0
                .eta
                .coeff_vector()
                .iter()
                .map(|e| e.eval(&b).unwrap())
                .collect();
            let pair_omega = |pt: &[f64]| -> Result<f64, lccmech::Error> {
                let bb = s0.bindings(pt);
                let a = sharp_mu(pt)?;
                let c = sharp_nu(pt)?;
                let mut acc = 0.0;
                for (k, coeff) in &s0.omega.comps {
                    acc += coeff.eval(&bb)? * (a[k[0]] * c[k[1]] - a[k[1]] * c[k[0]]);
                }
                Ok(acc)
            };
            let dg = fd_grad(pair_omega, &x).unwrap();
            let eta_mu: f64 = eta_vals.iter().zip(&xm).map(|(a, b)| a * b).sum();
            let eta_nu: f64 = eta_vals.iter().zip(&xn).map(|(a, b)| a * b).sum();
            let mut comm = vec![0.0; 3];
            for a in 0..3 {
                for c in 0..3 {
                    comm[a] += xm[c] * jn[a][c] - xn[c] * jm[a][c];
                }
            }
            let eta_comm: f64 = eta_vals.iter().zip(&comm).map(|(a, b)| a * b).sum();
            let eta_of_nu = |pt: &[f64]| -> Result<f64, lccmech::Error> {
                let bb = s0.bindings(pt);
                let e: Vec<f64> = s0
                    .eta
                    .coeff_vector()
                    .iter()
                    .map(|c| c.eval(&bb).unwrap())
                    .collect();
                Ok(e.iter().zip(&sharp_nu(pt)?).map(|(a, b)| a * b).sum())
            };
            let eta_of_mu = |pt: &[f64]| -> Result<f64, lccmech::Error> {
                let bb = s0.bindings(pt);
                let e: Vec<f64> = s0
                    .eta
                    .coeff_vector()
                    .iter()
                    .map(|c| c.eval(&bb).unwrap())
                    .collect();
                Ok(e.iter().zip(&sharp_mu(pt)?).map(|(a, b)| a * b).sum())
            };
            let mu_eta_nu: f64 = xm
                .iter()
                .zip(&fd_grad(eta_of_nu, &x).unwrap())
                .map(|(a, b)| a * b)
                .sum();
            let nu_eta_mu: f64 = xn
                .iter()
                .zip(&fd_grad(eta_of_mu, &x).unwrap())
                .map(|(a, b)| a * b)
                .sum();
            let scalar = eta_comm - mu_eta_nu + nu_eta_mu;
            for a in 0..3 {
                let sym = l_mu_nu[a] - l_nu_mu[a] + dg[a] + eta_mu * l_nu_eta[a]
                    - eta_nu * l_mu_eta[a]
                    + scalar * eta_vals[a];
                worst = worst.max((full[a] - sym).abs());
            }
        }
        // LCS reduction on the canonical symplectization (theta = 0):
        // L_mu nu - L_nu mu + d(omega(mu#, nu#))
        let mu4 = random_one_form(&lcs0.chart, &mut rng);
        let nu4 = random_one_form(&lcs0.chart, &mut rng);
        let sharp_mu4 = |pt: &[f64]| {
            let b = lcs0.bindings(pt);
            let c: Vec<f64> = mu4
                .coeff_vector()
                .iter()
                .map(|e| e.eval(&b).unwrap())
                .collect();
            lcs0.sharp_coeffs_at(&c, pt)
        };
        let sharp_nu4 = |pt: &[f64]| {
            let b = lcs0.bindings(pt);
            let c: Vec<f64> = nu4
                .coeff_vector()
                .iter()
                .map(|e| e.eval(&b).unwrap())
                .collect();
            lcs0.sharp_coeffs_at(&c, pt)
        };
        for x in lcs0.sample(3, 53).unwrap() {
            let b = lcs0.bindings(&x);
            let full = dynamics::oneform_bracket_lcs_at(&lcs0, &mu4, &nu4, &x).unwrap();
            let xm = sharp_mu4(&x).unwrap();
            let xn = sharp_nu4(&x).unwrap();
            let jm = fd_jacobian(sharp_mu4, &x, 4).unwrap();
            let jn = fd_jacobian(sharp_nu4, &x, 4).unwrap();
            let l_mu_nu = lie_numeric(&nu4, &b, &xm, &jm);
            let l_nu_mu = lie_numeric(&mu4, &b, &xn, &jn);
            let pair_omega = |pt: &[f64]| -> Result<f64, lccmech::Error> {
                let bb = lcs0.bindings(pt);
                let a = sharp_mu4(pt)?;
                let c = sharp_nu4(pt)?;
                let mut acc = 0.0;
                for (k, coeff) in &lcs0.omega.comps {
                    acc += coeff.eval(&bb)? * (a[k[0]] * c[k[1]] - a[k[1]] * c[k[0]]);
                }
                Ok(acc)
            };
            let dg = fd_grad(pair_omega, &x).unwrap();
            for a in 0..4 {
                let sym = l_mu_nu[a] - l_nu_mu[a] + dg[a];
                worst = worst.max((full[a] - sym).abs());
            }
        }
    }
    verdict(9, "one-form algebra", worst < 1e-6);
}

#[test]
fn criterion_10_symplectization() {
    // structure equation residuals on a general model
    let s = random_model(1, 1234);
    let lcs = s.symplectize();
    let r = lcs.validate(50, 59).unwrap();
    let structural = r.lee_closedness.max(r.d_2theta_omega);
    assert!(r.min_volume > 1e-9);

    // Theta = 0 gives the canonical extended form dq^dp + dt^ds exactly
    let s0 = LccStructure::cosymplectic(1, HashMap::new());
    let lcs0 = s0.symplectize();
    let chart = &lcs0.chart;
    let expected = KForm::dx(chart, 0)
        .wedge(&KForm::dx(chart, 1))
        .unwrap()
        .add(&KForm::dx(chart, 2).wedge(&KForm::dx(chart, 3)).unwrap())
        .unwrap();
    let diff = lcs0.omega.sub(&expected).unwrap();
    let canonical = diff
        .comps
        .values()
        .all(|c| matches!(c, Expr::Num(v) if *v == 0.0))
        || diff.comps.is_empty();

    // pi-relatedness of X_{H^s} and E_H
    let h = random_hamiltonian(&s, 77);
    let sys = LccSystem::new(s, h);
    let lifted = sys.extended_lift();
    let mut related = 0.0f64;
    for x_ext in lifted.structure.sample(25, 61).unwrap() {
        let v = lifted.xh_at(&x_ext).unwrap();
        let eh = sys.eh_at(&x_ext[..3]).unwrap();
        for a in 0..3 {
            related = related.max((v[a] - eh[a]).abs());
        }
    }
    verdict(
        10,
        "symplectization",
        structural < 1e-10 && canonical && related < 1e-8,
    );
}

#[test]
fn criterion_11_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_lccmech");
    let run = |args: &[&str]| {
        std::process::Command::new(bin)
            .args(args)
            .env("LCCMECH_SEED", "7")
            .output()
            .expect("run lccmech")
    };
    let mut ok = true;
    for args in [
        vec!["validate", "--preset", "oscillator", "--no-timestamp"],
        vec![
            "simulate",
            "--preset",
            "oscillator",
            "--steps",
            "20",
            "--no-timestamp",
        ],
        vec![
            "bracket",
            "--preset",
            "oscillator",
            "--f",
            "q1",
            "--g",
            "p1",
            "--samples",
            "5",
            "--no-timestamp",
        ],
        vec!["hj-check", "--preset", "oscillator", "--no-timestamp"],
    ] {
        let a = run(&args);
        let b = run(&args);
        ok &= a.stdout == b.stdout;
    }
    verdict(11, "CLI determinism", ok);
}
