//! Sparse direct solves backed by faer's supernodal LU with partial pivoting.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::Col;

use crate::error::{Error, Result};
use crate::fem::SparseSystem;

const RESIDUAL_TOL: f64 = 1e-10;
const MAX_REFINEMENT: usize = 3;

/// LU solver that reuses the symbolic factorisation while the sparsity
/// pattern stays the same.
#[derive(Default)]
pub struct DirectLu {
    cached: Option<(Vec<usize>, Vec<usize>, SymbolicLu<usize>)>,
}

impl std::fmt::Debug for DirectLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirectLu")
            .field("cached", &self.cached.is_some())
            .finish()
    }
}

fn lu_error(e: LuError) -> Error {
    match e {
        LuError::SymbolicSingular { index } => Error::SingularMatrix { row: index },
        LuError::Generic(g) => Error::LinearSolve(format!("{g:?}")),
    }
}

impl DirectLu {
    pub fn new() -> Self {
        Self::default()
    }

    /// Solves `A x = b`, checking `||Ax - b|| <= 1e-10 (||A|| ||x|| + ||b||)`
    /// in the max norm after up to three steps of iterative refinement.
    pub fn solve(&mut self, sys: &SparseSystem) -> Result<Vec<f64>> {
        let a = &sys.matrix;
        let n = a.n_rows;
        if a.n_cols != n || sys.rhs.len() != n {
            return Err(Error::LinearSolve(format!(
                "system is {}x{} with rhs of length {}",
                a.n_rows,
                a.n_cols,
                sys.rhs.len()
            )));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        if let Some(&row) = a.empty_rows().first() {
            return Err(Error::SingularMatrix { row });
        }
        // The CSR arrays of A read as CSC describe A^T; factor that and use
        // transposed solves.
        let sym = SymbolicSparseColMatRef::new_checked(n, n, &a.indptr, None, &a.indices);
        let at = SparseColMatRef::new(sym, &a.data);
        let reuse = matches!(&self.cached, Some((p, i, _)) if *p == a.indptr && *i == a.indices);
        if !reuse {
            let s = SymbolicLu::try_new(sym).map_err(|e| lu_error(e.into()))?;
            self.cached = Some((a.indptr.clone(), a.indices.clone(), s));
        }
        let symbolic = self.cached.as_ref().unwrap().2.clone();
        let lu = Lu::try_new_with_symbolic(symbolic, at).map_err(lu_error)?;

        let solve = |r: &[f64]| -> Vec<f64> {
            let mut x = Col::from_fn(n, |i| r[i]);
            lu.solve_transpose_in_place(&mut x);
            (0..n).map(|i| x[i]).collect()
        };
        let mut x = solve(&sys.rhs);
        if let Some(row) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix { row });
        }
        let norm_a = a.norm_inf();
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let norm_b = inf(&sys.rhs);
        for step in 0..=MAX_REFINEMENT {
            let r = sys.residual(&x);
            let bound = RESIDUAL_TOL * (norm_a * inf(&x) + norm_b);
            let res = inf(&r);
            if res <= bound {
                return Ok(x);
            }
            if step == MAX_REFINEMENT {
                return Err(Error::LinearSolve(format!(
                    "residual {res:.3e} exceeds {bound:.3e} after refinement"
                )));
            }
            let dx = solve(&r);
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
            if let Some(row) = x.iter().position(|v| !v.is_finite()) {
                return Err(Error::SingularMatrix { row });
            }
        }
        unreachable!()
    }
}

/// One-shot sparse LU solve.
pub fn solve_linear(sys: &SparseSystem) -> Result<Vec<f64>> {
    DirectLu::new().solve(sys)
}
