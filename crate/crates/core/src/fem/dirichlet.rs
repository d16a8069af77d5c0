//! Symmetric elimination of strongly constrained dofs.

use super::sparse::{SparseSystem, TripletMatrix};
use super::spaces::Constraints;

/// System on the free dofs, with the map back to the full numbering.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub system: SparseSystem,
    /// Full index of each reduced dof.
    pub free: Vec<usize>,
    n_full: usize,
    constraints: Constraints,
}

impl ReducedSystem {
    /// Scatters a reduced solution into a full vector with the prescribed values.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_full];
        self.constraints.impose(&mut full);
        for (k, &i) in self.free.iter().enumerate() {
            full[i] = x[k];
        }
        full
    }

    /// Gathers the free entries of a full vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }
}

/// Removes constrained rows and columns from `sys`; the known values times the
/// removed columns are moved to the right-hand side.
pub fn apply_dirichlet(sys: &SparseSystem, constraints: &Constraints) -> ReducedSystem {
    let n = sys.n_dofs();
    assert_eq!(constraints.len(), n);
    let mut reduced_index = vec![usize::MAX; n];
    let mut free = Vec::with_capacity(n - constraints.n_fixed());
    for i in 0..n {
        if !constraints.is_fixed(i) {
            reduced_index[i] = free.len();
            free.push(i);
        }
    }
    let m = free.len();
    let a = &sys.matrix;
    let mut rhs = Vec::with_capacity(m);
    let mut t = TripletMatrix::new(m, m);
    t.entries.reserve(a.nnz());
    for (r, &i) in free.iter().enumerate() {
        let mut b = sys.rhs[i];
        for (j, v) in a.row(i) {
            match constraints.get(j) {
                Some(g) => b -= v * g,
                None => t.entries.push((r, reduced_index[j], v)),
            }
        }
        rhs.push(b);
    }
    ReducedSystem {
        system: SparseSystem {
            matrix: t.to_csr(),
            rhs,
        },
        free,
        n_full: n,
        constraints: constraints.clone(),
    }
}
