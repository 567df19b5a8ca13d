//! Dense solves for the small (2n+1 or 2n+2) structure matrices behind the
//! musical isomorphisms. LU with partial pivoting, plus an explicit residual
//! check so a silently ill-conditioned solve cannot leak into dynamics.

use crate::error::Error;
use crate::tol::{TOL_NONDEGENERATE, TOL_SOLVE};

/// Row-major square matrix.
#[derive(Debug, Clone)]
pub struct Matrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Matrix {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(j, i, self.at(i, j));
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self.at(i, j) * x[j];
            }
            y[i] = acc;
        }
        y
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves `A x = b` by LU with partial pivoting and verifies the residual
/// contract `||A x - b|| < TOL_SOLVE * ||b||` (skipped when b = 0).
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, Error> {
    let n = a.n;
    assert_eq!(b.len(), n);
    let mut lu = a.data.clone();
    let mut x: Vec<f64> = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        // pivot selection
        let mut best = col;
        let mut best_mag = lu[perm[col] * n + col].abs();
        for row in col + 1..n {
            let mag = lu[perm[row] * n + col].abs();
            if mag > best_mag {
                best = row;
                best_mag = mag;
            }
        }
        if best_mag < TOL_NONDEGENERATE {
            return Err(Error::SingularStructure(format!(
                "pivot {best_mag:.3e} in column {col} below {TOL_NONDEGENERATE:.0e}"
            )));
        }
        perm.swap(col, best);
        let piv = lu[perm[col] * n + col];
        for row in col + 1..n {
            let factor = lu[perm[row] * n + col] / piv;
            lu[perm[row] * n + col] = factor;
            for j in col + 1..n {
                lu[perm[row] * n + j] -= factor * lu[perm[col] * n + j];
            }
        }
    }

    // forward substitution on permuted rhs
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut acc = x[perm[i]];
        for j in 0..i {
            acc -= lu[perm[i] * n + j] * y[j];
        }
        y[i] = acc;
    }
    // back substitution
    for i in (0..n).rev() {
        let mut acc = y[i];
        for j in i + 1..n {
            acc -= lu[perm[i] * n + j] * x[j];
        }
        x[i] = acc / lu[perm[i] * n + i];
    }

    let b_norm = norm(b);
    if b_norm > 0.0 {
        let mut r = a.matvec(&x);
        for i in 0..n {
            r[i] -= b[i];
        }
        let rel = norm(&r) / b_norm;
        if rel >= TOL_SOLVE {
            return Err(Error::SingularStructure(format!(
                "solve residual {rel:.3e} exceeds {TOL_SOLVE:.0e}"
            )));
        }
    }
    Ok(x)
}
