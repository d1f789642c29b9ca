use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::{Error, Result};

/// Relative asymmetry accepted by [`sym_eigendecompose`].
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Default tolerance for linear least-squares solvability checks.
pub const DEFAULT_SOLVE_TOL: f64 = 1e-10;

/// Largest absolute entry.
pub fn sup_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `sup |M - M^T|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn antisymmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m - m.transpose()) * 0.5
}

/// Matrix exponential (Padé with scaling and squaring).
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.exp()
}

/// Eigendecomposition of a symmetric operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `eigenvalues`.
    pub basis: DMatrix<f64>,
}

impl SymEigen {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues));
        &self.basis * d * self.basis.transpose()
    }

    /// Orthonormal basis of the eigenspace for eigenvalues within `tol` of `value`.
    pub fn eigenspace(&self, value: f64, tol: f64) -> DMatrix<f64> {
        let cols: Vec<_> = self
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &ev)| (ev - value).abs() <= tol)
            .map(|(i, _)| self.basis.column(i).into_owned())
            .collect();
        if cols.is_empty() {
            DMatrix::zeros(self.basis.nrows(), 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }
}

pub fn sym_eigendecompose(op: &DMatrix<f64>) -> Result<SymEigen> {
    if !op.is_square() {
        return Err(Error::DimensionMismatch {
            expected: op.nrows(),
            found: op.ncols(),
        });
    }
    let defect = asymmetry(op);
    let tolerance = SYMMETRY_TOL * sup_norm(op).max(1.0);
    if defect > tolerance {
        return Err(Error::NotSymmetric {
            asymmetry: defect,
            tolerance,
        });
    }
    let eig = SymmetricEigen::new(symmetric_part(op));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<_> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    Ok(SymEigen {
        eigenvalues,
        basis: DMatrix::from_columns(&cols),
    })
}

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: DVector<f64>,
    pub residual_norm: f64,
}

/// Minimum-norm least-squares solver for a fixed linear map.
///
/// The pseudo-inverse is formed once from an SVD, singular values below
/// `max(rows, cols) * eps * sigma_max` are treated as zero.
#[derive(Debug, Clone)]
pub struct LeastSquaresSolver {
    map: DMatrix<f64>,
    pinv: DMatrix<f64>,
    rank: usize,
}

impl LeastSquaresSolver {
    pub fn new(map: DMatrix<f64>) -> Self {
        let (rows, cols) = map.shape();
        if rows == 0 || cols == 0 {
            return Self {
                pinv: DMatrix::zeros(cols, rows),
                map,
                rank: 0,
            };
        }
        let svd = SVD::new(map.clone(), true, true);
        let sigma_max = svd.singular_values.max();
        let cutoff = rows.max(cols) as f64 * f64::EPSILON * sigma_max;
        let rank = svd.rank(cutoff);
        let pinv = svd
            .pseudo_inverse(cutoff)
            .expect("both singular vector sets were computed");
        Self { map, pinv, rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn map(&self) -> &DMatrix<f64> {
        &self.map
    }

    /// Pseudo-inverse solution with one step of iterative refinement.
    pub fn solve(&self, target: &DVector<f64>) -> LeastSquares {
        let mut solution = &self.pinv * target;
        let correction = &self.pinv * (target - &self.map * &solution);
        solution += correction;
        let residual_norm = (&self.map * &solution - target).norm();
        LeastSquares {
            solution,
            residual_norm,
        }
    }
}

pub fn solve_least_squares(map: &DMatrix<f64>, target: &DVector<f64>) -> LeastSquares {
    LeastSquaresSolver::new(map.clone()).solve(target)
}

/// Modified Gram–Schmidt: orthonormalizes `candidates` against `basis` and
/// each other, dropping vectors whose remaining norm falls below `drop_tol`.
pub fn gram_schmidt(
    basis: &[DVector<f64>],
    candidates: impl IntoIterator<Item = DVector<f64>>,
    drop_tol: f64,
) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for mut v in candidates {
        for _ in 0..2 {
            for b in basis.iter().chain(out.iter()) {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm > drop_tol {
            out.push(v / norm);
        }
    }
    out
}

/// Completes the orthonormal set `basis` (vectors of length `dim`) with
/// standard basis vectors, processed in index order.
pub fn complete_orthonormal(basis: &[DVector<f64>], dim: usize) -> Vec<DVector<f64>> {
    let need = dim.saturating_sub(basis.len());
    let mut out = gram_schmidt(
        basis,
        (0..dim).map(|i| {
            let mut e = DVector::zeros(dim);
            e[i] = 1.0;
            e
        }),
        1e-6,
    );
    out.truncate(need);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{seeded_rng, standard_normal_vector};

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let v = standard_normal_vector(&mut seeded_rng(seed), rows * cols);
        DMatrix::from_column_slice(rows, cols, v.as_slice())
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let eig = sym_eigendecompose(&DMatrix::identity(6, 6)).unwrap();
        assert!(eig.eigenvalues.iter().all(|v| (v - 1.0).abs() < 1e-15));
        let gram = eig.basis.transpose() * &eig.basis;
        assert!(sup_norm(&(gram - DMatrix::identity(6, 6))) < 1e-12);
    }

    #[test]
    fn diagonal_spectrum_is_sorted() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, 3.0, -2.0]));
        let eig = sym_eigendecompose(&d).unwrap();
        assert_eq!(eig.eigenvalues, vec![-2.0, -1.0, 1.0, 3.0]);
    }

    #[test]
    fn random_symmetric_reconstructs() {
        for seed in 0..20 {
            let a = random_matrix(8, 8, seed);
            let s = &a + a.transpose();
            let eig = sym_eigendecompose(&s).unwrap();
            assert!(sup_norm(&(eig.reconstruct() - &s)) < 1e-9);
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn asymmetric_input_is_rejected_with_norm() {
        let mut m = DMatrix::identity(4, 4);
        m[(0, 1)] = 0.25;
        match sym_eigendecompose(&m) {
            Err(Error::NotSymmetric { asymmetry, .. }) => assert!((asymmetry - 0.25).abs() < 1e-15),
            other => panic!("expected NotSymmetric, got {other:?}"),
        }
    }

    #[test]
    fn invertible_square_solve_is_exact() {
        let a = random_matrix(6, 6, 3) + DMatrix::identity(6, 6) * 4.0;
        let x = standard_normal_vector(&mut seeded_rng(4), 6);
        let b = &a * &x;
        let ls = solve_least_squares(&a, &b);
        assert!(ls.residual_norm < 1e-12);
        assert!((ls.solution - x).norm() < 1e-10);
    }

    #[test]
    fn rank_deficient_column_space_target_is_hit() {
        // rank 3 map from R^7 to R^5
        let a = random_matrix(5, 3, 10) * random_matrix(3, 7, 11);
        let x0 = standard_normal_vector(&mut seeded_rng(12), 7);
        let b = &a * x0;
        let solver = LeastSquaresSolver::new(a);
        assert_eq!(solver.rank(), 3);
        assert!(solver.solve(&b).residual_norm < 1e-10);
    }

    #[test]
    fn target_orthogonal_to_column_space_gives_zero() {
        let mut a = DMatrix::zeros(3, 2);
        a[(0, 0)] = 1.0;
        a[(1, 1)] = 2.0;
        let b = DVector::from_vec(vec![0.0, 0.0, 5.0]);
        let ls = solve_least_squares(&a, &b);
        assert_eq!(ls.solution.norm(), 0.0);
        assert!((ls.residual_norm - 5.0).abs() < 1e-15);
    }

    #[test]
    fn minimum_norm_solution_is_orthogonal_to_kernel() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let ls = solve_least_squares(&a, &DVector::from_vec(vec![2.0]));
        assert!((ls.solution[0] - 1.0).abs() < 1e-14);
        assert!((ls.solution[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn completion_spans_the_space() {
        let mut v = DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]);
        v /= v.norm();
        let rest = complete_orthonormal(&[v.clone()], 4);
        assert_eq!(rest.len(), 3);
        let mut cols = vec![v];
        cols.extend(rest);
        let q = DMatrix::from_columns(&cols);
        assert!(sup_norm(&(q.transpose() * &q - DMatrix::identity(4, 4))) < 1e-14);
    }
}
