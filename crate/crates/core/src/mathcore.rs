//! Small dense linear-algebra kernel.
//!
//! Vectors are plain `nalgebra` column vectors. Symmetric matrices get a
//! newtype that enforces symmetry at construction, and [`SpdFactor`] holds a
//! Cholesky factorization so one broadcast can answer many solves and
//! Mahalanobis-norm queries without refactoring.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use thiserror::Error;

/// A `d`-dimensional real vector.
pub type Vector = DVector<f64>;

/// Absolute tolerance used when checking symmetry.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (min eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix or vector has non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A finite, symmetric `d x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Accepts `m` only if it is square, finite and symmetric within [`SYMMETRY_TOL`].
    pub fn new(m: DMatrix<f64>) -> Result<Self, LinalgError> {
        if m.nrows() != m.ncols() {
            return Err(LinalgError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let asymmetry = max_asymmetry(&m);
        if asymmetry > SYMMETRY_TOL {
            return Err(LinalgError::NotSymmetric { asymmetry });
        }
        Ok(Self(m))
    }

    pub fn zeros(d: usize) -> Self {
        Self(DMatrix::zeros(d, d))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Builds a symmetric matrix from row-major entries.
    pub fn from_rows(d: usize, entries: &[f64]) -> Result<Self, LinalgError> {
        if entries.len() != d * d {
            return Err(LinalgError::DimensionMismatch {
                expected: d * d,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(d, d, entries))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// `self + c * I`, staying exactly symmetric.
    pub fn add_scaled_identity(&self, c: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c;
        }
        Self(m)
    }

    /// Entrywise sum; symmetric inputs give an exactly symmetric output.
    pub fn add(&self, other: &SymMatrix) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        Self(&self.0 - &other.0)
    }

    /// Adds `x xᵀ` in place, writing the upper triangle and mirroring it.
    pub fn add_outer(&mut self, x: &Vector) {
        let d = self.dim();
        for i in 0..d {
            for j in i..d {
                let v = self.0[(i, j)] + x[i] * x[j];
                self.0[(i, j)] = v;
                self.0[(j, i)] = v;
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        let eig = SymmetricEigen::new(self.0.clone());
        eig.eigenvalues
            .iter()
            .fold(0.0_f64, |acc, e| acc.max(e.abs()))
    }

    /// Row-major flattening, used by the matrix geometric median.
    pub fn flatten(&self) -> Vector {
        flatten(&self.0)
    }
}

/// Largest `|a_ij - a_ji|` of a square matrix.
pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..d {
        for j in (i + 1)..d {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Row-major flattening of a square matrix into a `d²` vector.
pub fn flatten(m: &DMatrix<f64>) -> Vector {
    let (r, c) = m.shape();
    Vector::from_iterator(r * c, (0..r).flat_map(|i| (0..c).map(move |j| m[(i, j)])))
}

/// Inverse of [`flatten`].
pub fn unflatten(v: &Vector, d: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(d, d, v.as_slice())
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> SymMatrix {
    let d = a.nrows();
    let mut s = DMatrix::zeros(d, d);
    for i in 0..d {
        s[(i, i)] = a[(i, i)];
        for j in (i + 1)..d {
            let v = (a[(i, j)] + a[(j, i)]) / 2.0;
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    SymMatrix(s)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &SymMatrix) -> f64 {
    let eig = SymmetricEigen::new(a.0.clone());
    eig.eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Cholesky factor `A = L Lᵀ` of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
}

impl SpdFactor {
    pub fn new(a: &SymMatrix) -> Result<Self, LinalgError> {
        match Cholesky::new(a.as_matrix().clone()) {
            Some(chol) => Ok(Self { chol }),
            None => Err(LinalgError::NotPositiveDefinite {
                min_eig: min_eigenvalue(a),
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn solve(&self, b: &Vector) -> Vector {
        self.chol.solve(b)
    }

    /// `√(xᵀ A⁻¹ x)`, computed as `‖L⁻¹ x‖₂`.
    pub fn inv_norm(&self, x: &Vector) -> f64 {
        let l = self.chol.l_dirty();
        let y = l
            .solve_lower_triangular(x)
            .expect("cholesky factor has a positive diagonal");
        y.norm()
    }

    pub fn inverse(&self) -> SymMatrix {
        symmetrize(&self.chol.inverse())
    }
}

/// Solves `A x = b` for symmetric positive-definite `A`.
pub fn spd_solve(a: &SymMatrix, b: &Vector) -> Result<Vector, LinalgError> {
    check_len(a.dim(), b)?;
    Ok(SpdFactor::new(a)?.solve(b))
}

/// Mahalanobis norm `√(xᵀ A⁻¹ x)`.
pub fn inv_norm(a: &SymMatrix, x: &Vector) -> Result<f64, LinalgError> {
    check_len(a.dim(), x)?;
    Ok(SpdFactor::new(a)?.inv_norm(x))
}

fn check_len(d: usize, v: &Vector) -> Result<(), LinalgError> {
    if v.len() != d {
        return Err(LinalgError::DimensionMismatch {
            expected: d,
            got: v.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(d: usize, rng: &mut impl Rng) -> SymMatrix {
        let m = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let a = m.transpose() * &m + DMatrix::identity(d, d) * 0.5;
        symmetrize(&a)
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let x = spd_solve(&SymMatrix::identity(2), &Vector::from_vec(vec![3.0, -1.0])).unwrap();
        assert_eq!(x.as_slice(), &[3.0, -1.0]);
        let x = spd_solve(
            &SymMatrix::from_diagonal(&[2.0, 4.0]),
            &Vector::from_vec(vec![2.0, 4.0]),
        )
        .unwrap();
        // the residual contract, not bit equality: √2·√2 need not round to 2
        assert!((x - Vector::from_vec(vec![1.0, 1.0])).norm() <= 1e-8 * (1.0 + 20f64.sqrt()));
    }

    #[test]
    fn solve_recovers_known_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_spd(4, &mut rng);
        let truth = Vector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let b = a.as_matrix() * &truth;
        let x = spd_solve(&a, &b).unwrap();
        assert!((x - &truth).norm() < 1e-8);
        let residual = (a.as_matrix() * spd_solve(&a, &b).unwrap() - &b).norm();
        assert!(residual <= 1e-8 * (1.0 + b.norm()));
    }

    #[test]
    fn solve_rejects_indefinite() {
        let a = SymMatrix::from_diagonal(&[1.0, -1.0]);
        let err = spd_solve(&a, &Vector::from_vec(vec![1.0, 1.0])).unwrap_err();
        assert!(matches!(err, LinalgError::NotPositiveDefinite { .. }));
        let zero = SymMatrix::zeros(2);
        assert!(SpdFactor::new(&zero).is_err());
    }

    #[test]
    fn inv_norm_examples() {
        let x = Vector::from_vec(vec![3.0, 4.0]);
        assert!((inv_norm(&SymMatrix::identity(2), &x).unwrap() - 5.0).abs() < 1e-15);
        let a = SymMatrix::from_diagonal(&[1.0, 4.0]);
        let v = inv_norm(&a, &Vector::from_vec(vec![0.0, 1.0])).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        // inverse of [[2,1],[1,2]] is [[2,-1],[-1,2]]/3, so (1,1) gives 2/3
        let a = SymMatrix::from_rows(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let v = inv_norm(&a, &Vector::from_vec(vec![1.0, 1.0])).unwrap();
        assert!((v - (2.0_f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(inv_norm(&a, &Vector::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn symmetrize_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        let s = symmetrize(&a);
        assert_eq!(s.as_matrix().as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        let sym = SymMatrix::from_rows(2, &[1.0, 2.0, 2.0, 5.0]).unwrap();
        assert_eq!(symmetrize(sym.as_matrix()), sym);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-5.0..5.0));
        let s = symmetrize(&a);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(s.as_matrix()[(i, j)], (a[(i, j)] + a[(j, i)]) / 2.0);
            }
        }
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert!((min_eigenvalue(&SymMatrix::from_diagonal(&[1.0, 3.0])) - 1.0).abs() < 1e-12);
        assert!((min_eigenvalue(&SymMatrix::identity(5)) - 1.0).abs() < 1e-12);
        let a = SymMatrix::from_rows(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!((min_eigenvalue(&a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constructor_rejects_asymmetric_and_nonfinite() {
        assert!(matches!(
            SymMatrix::from_rows(2, &[1.0, 1e-6, 0.0, 1.0]),
            Err(LinalgError::NotSymmetric { .. })
        ));
        assert!(SymMatrix::from_rows(2, &[1.0, 1e-10, 0.0, 1.0]).is_ok());
        assert!(matches!(
            SymMatrix::from_rows(2, &[f64::NAN, 0.0, 0.0, 1.0]),
            Err(LinalgError::NonFinite)
        ));
    }

    #[test]
    fn outer_product_is_exactly_symmetric() {
        let mut m = SymMatrix::zeros(3);
        m.add_outer(&Vector::from_vec(vec![0.3, -0.7, 0.1]));
        m.add_outer(&Vector::from_vec(vec![0.11, 0.2, 0.9]));
        assert_eq!(max_asymmetry(m.as_matrix()), 0.0);
    }

    #[test]
    fn flatten_roundtrip() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let f = flatten(&m);
        assert_eq!(f.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(unflatten(&f, 2), m);
    }
}
