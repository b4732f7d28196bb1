//! Dense linear-algebra kernel: SVD, pseudoinverse, projectors, least squares
//! and symmetric eigendecomposition.
//!
//! Factorizations are delegated to `nalgebra`; this module owns the contracts
//! (finite entries, sorted spectra, rank thresholds) that the rest of the crate
//! relies on.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Singular values at or below `RANK_RTOL * sigma_max` count as zero.
pub const RANK_RTOL: f64 = 1e-12;

/// Symmetry tolerance accepted by [`symmetric_eigen`], relative to `max(1, max|a|)`.
pub const SYMMETRY_TOL: f64 = 1e-10;

const SVD_MAX_ITER: usize = 10_000;
const EIGEN_MAX_ITER: usize = 10_000;

/// Dense real matrix with finite entries and nonzero dimensions.
///
/// Columns are points (or basis vectors). Read access goes through `Deref` to
/// the underlying column-major `DMatrix`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat(DMatrix<f64>);

impl Mat {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::domain(format!(
                "matrix dimensions must be positive, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % m.nrows(), pos / m.nrows());
            return Err(Error::domain(format!("non-finite entry at ({r}, {c})")));
        }
        Ok(Mat(m))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Mat::new(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from equally long column vectors.
    pub fn from_columns(cols: &[DVector<f64>]) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::domain("no columns given"));
        }
        let n = cols[0].len();
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::domain("columns have different lengths"));
        }
        Mat::new(DMatrix::from_columns(cols))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Mat::new(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Mat::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Copies the listed columns, in order, into a new matrix.
    pub fn select_columns(&self, idx: &[usize]) -> Result<Mat> {
        if let Some(&bad) = idx.iter().find(|&&j| j >= self.ncols()) {
            return Err(Error::domain(format!(
                "column index {bad} out of range for {} columns",
                self.ncols()
            )));
        }
        Mat::new(self.0.select_columns(idx))
    }
}

impl Deref for Mat {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

impl AsRef<DMatrix<f64>> for Mat {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

impl TryFrom<DMatrix<f64>> for Mat {
    type Error = Error;

    fn try_from(m: DMatrix<f64>) -> Result<Self> {
        Mat::new(m)
    }
}

/// Thin SVD `A = U diag(sigma) Vᵀ` with `sigma` nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Mat,
    pub sigma: Vec<f64>,
    pub vt: Mat,
}

impl SvdResult {
    /// Number of singular values above the relative rank threshold.
    pub fn rank(&self) -> usize {
        numerical_rank(&self.sigma)
    }
}

/// Count of entries of a nonincreasing spectrum above `RANK_RTOL * sigma[0]`.
pub fn numerical_rank(sigma: &[f64]) -> usize {
    match sigma.first() {
        Some(&s0) if s0 > 0.0 => sigma.iter().take_while(|&&s| s > RANK_RTOL * s0).count(),
        _ => 0,
    }
}

pub fn svd(a: &Mat) -> Result<SvdResult> {
    let svd = nalgebra::SVD::try_new(a.0.clone(), true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Numerical(format!("SVD of {}x{} did not converge", a.nrows(), a.ncols())))?;
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Numerical("SVD returned no singular vectors".into())),
    };
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma = order.iter().map(|&i| svd.singular_values[i].max(0.0)).collect();
    let u = u.select_columns(&order);
    let vt = vt.select_rows(&order);
    Ok(SvdResult {
        u: Mat::new(u)?,
        sigma,
        vt: Mat::new(vt)?,
    })
}

/// Moore-Penrose pseudoinverse; singular values under the rank threshold stay zero.
pub fn pseudoinverse(a: &Mat) -> Result<Mat> {
    let s = svd(a)?;
    let r = s.rank();
    let mut out = DMatrix::zeros(a.ncols(), a.nrows());
    for i in 0..r {
        let v = s.vt.row(i).transpose();
        let u = s.u.column(i);
        out.ger(1.0 / s.sigma[i], &v, &u, 1.0);
    }
    Mat::new(out)
}

/// Orthogonal projector onto `range(a)`.
pub fn projector(a: &Mat) -> Result<Mat> {
    let s = svd(a)?;
    let ur = s.u.columns(0, s.rank());
    Mat::new(ur * &ur.transpose())
}

/// Minimum-norm least-squares solution of `a c ≈ y`.
pub fn lstsq(a: &Mat, y: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() != y.len() {
        return Err(Error::domain(format!(
            "lstsq: matrix has {} rows but rhs has length {}",
            a.nrows(),
            y.len()
        )));
    }
    Ok(pseudoinverse(a)?.as_matrix() * y)
}

/// Eigenvalues in nondecreasing order with matching orthonormal eigenvectors
/// as columns.
pub fn symmetric_eigen(a: &Mat) -> Result<(Vec<f64>, Mat)> {
    if a.nrows() != a.ncols() {
        return Err(Error::domain("symmetric_eigen needs a square matrix"));
    }
    let scale = a.amax().max(1.0);
    let asym = (a.as_matrix() - a.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::domain(format!("matrix is not symmetric (max |A - Aᵀ| = {asym:.3e})")));
    }
    let eig = nalgebra::SymmetricEigen::try_new(a.0.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(&order);
    Ok((values, Mat::new(vectors)?))
}
