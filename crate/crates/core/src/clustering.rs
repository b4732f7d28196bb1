//! Coefficient matrix, affinity graph, Laplacian, spectral bipartition and
//! clustering error.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{symmetric_eigen, Mat};
use crate::selection::FeatureSet;

/// Eigenvalues at or below this fraction of the largest one count as zero.
pub const ZERO_EIGEN_RTOL: f64 = 1e-8;

/// Sparse representation coefficients stacked row by row.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    pub c: Mat,
    /// Rows left at zero because their point had no selected features.
    pub empty_rows: Vec<usize>,
}

/// Row `i` holds the coefficients of point `i` at the columns it selected.
pub fn coefficient_matrix(sets: &[FeatureSet], d: usize) -> Result<CoefficientMatrix> {
    if d == 0 {
        return Err(Error::domain("no points"));
    }
    let mut c = DMatrix::zeros(d, d);
    let mut seen = vec![false; d];
    for fs in sets {
        let i = fs.point_index;
        if i >= d {
            return Err(Error::domain(format!("feature set for point {i} but only {d} points")));
        }
        if fs.selected.len() != fs.coeffs.len() {
            return Err(Error::domain(format!("point {i}: {} atoms but {} coefficients", fs.selected.len(), fs.coeffs.len())));
        }
        seen[i] = true;
        for (&j, &v) in fs.selected.iter().zip(&fs.coeffs) {
            if j >= d {
                return Err(Error::domain(format!("point {i} selects {j}, out of range")));
            }
            if j == i {
                return Err(Error::domain(format!("point {i} selects itself")));
            }
            c[(i, j)] = v;
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::domain(format!("no feature set for point {missing}")));
    }
    let empty_rows = sets.iter().filter(|fs| fs.selected.is_empty()).map(|fs| fs.point_index).collect();
    Ok(CoefficientMatrix { c: Mat::new(c)?, empty_rows })
}

/// Symmetric, nonnegative, zero-diagonal weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Affinity {
    w: Mat,
}

impl Affinity {
    pub fn w(&self) -> &Mat {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.ncols()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// `W = |C| + |Cᵀ|` with the diagonal cleared.
pub fn affinity(c: &Mat) -> Result<Affinity> {
    if c.nrows() != c.ncols() {
        return Err(Error::domain("coefficient matrix must be square"));
    }
    let d = c.ncols();
    let w = DMatrix::from_fn(d, d, |i, j| if i == j { 0.0 } else { c[(i, j)].abs() + c[(j, i)].abs() });
    Ok(Affinity { w: Mat::new(w)? })
}

/// `D − W`, or `I − D^{-1/2} W D^{-1/2}` when `normalized`. Isolated vertices
/// get identity rows in the normalized form.
pub fn graph_laplacian(w: &Affinity, normalized: bool) -> Mat {
    let w = w.w.as_matrix();
    let d = w.ncols();
    let deg: Vec<f64> = w.row_iter().map(|r| r.sum()).collect();
    let l = if normalized {
        let inv_sqrt: Vec<f64> = deg.iter().map(|&g| if g > 0.0 { 1.0 / g.sqrt() } else { 0.0 }).collect();
        DMatrix::from_fn(d, d, |i, j| {
            let off = -w[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
            if i == j { 1.0 + off } else { off }
        })
    } else {
        DMatrix::from_fn(d, d, |i, j| if i == j { deg[i] - w[(i, j)] } else { -w[(i, j)] })
    };
    Mat::new(l).expect("laplacian of a finite affinity is finite")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    num_clusters: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, num_clusters: usize) -> Result<Self> {
        if let Some(bad) = labels.iter().find(|&&l| l >= num_clusters) {
            return Err(Error::domain(format!("label {bad} outside [0, {num_clusters})")));
        }
        Ok(Partition { labels, num_clusters })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }
}

/// Connected components of the graph whose edges are the nonzero
/// off-diagonal entries of `l`, in order of their smallest vertex.
fn components(l: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let d = l.ncols();
    let mut comp = vec![usize::MAX; d];
    let mut out = Vec::new();
    for start in 0..d {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in 0..d {
                if v != u && comp[v] == usize::MAX && l[(u, v)] != 0.0 {
                    comp[v] = id;
                    members.push(v);
                    queue.push_back(v);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Two-way spectral split of a graph Laplacian.
///
/// A connected graph is split by the sign of the eigenvector of the smallest
/// nonzero eigenvalue (zero entries join the positive side). A disconnected
/// graph is split along its components: with two components they are the
/// clusters, with more they are grouped greedily into two sides of balanced
/// size, largest first.
pub fn spectral_bipartition(l: &Mat) -> Result<Partition> {
    let (vals, vecs) = symmetric_eigen(l)?;
    let d = l.ncols();
    let lmax = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if d < 2 || lmax <= f64::MIN_POSITIVE || vals.iter().all(|v| v.abs() <= ZERO_EIGEN_RTOL * lmax) {
        return Err(Error::DegenerateGraph("all Laplacian eigenvalues are numerically zero".into()));
    }
    let comps = components(l.as_matrix());
    if comps.len() > 1 {
        let mut order: Vec<usize> = (0..comps.len()).collect();
        order.sort_by(|&a, &b| comps[b].len().cmp(&comps[a].len()).then(a.cmp(&b)));
        let mut sizes = [0usize; 2];
        let mut labels = vec![0usize; d];
        for c in order {
            let side = if sizes[0] <= sizes[1] { 0 } else { 1 };
            sizes[side] += comps[c].len();
            for &v in &comps[c] {
                labels[v] = side;
            }
        }
        return Partition::new(labels, 2);
    }
    let idx = vals
        .iter()
        .position(|&v| v > ZERO_EIGEN_RTOL * lmax)
        .expect("some eigenvalue is nonzero");
    let fiedler = vecs.column(idx);
    // Fix the overall sign so that the first nonzero entry is positive.
    let flip = fiedler.iter().find(|v| **v != 0.0).is_some_and(|v| *v < 0.0);
    let labels = fiedler
        .iter()
        .map(|&v| {
            let v = if flip { -v } else { v };
            usize::from(v < 0.0)
        })
        .collect();
    Partition::new(labels, 2)
}

/// Misclassification fraction, minimized over the two label assignments.
pub fn clustering_error(predicted: &Partition, truth: &[usize]) -> Result<f64> {
    if predicted.labels.len() != truth.len() {
        return Err(Error::domain(format!(
            "{} predicted labels but {} true labels",
            predicted.labels.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::domain("no labels"));
    }
    if predicted.num_clusters != 2 {
        return Err(Error::domain(format!("expected 2 predicted clusters, got {}", predicted.num_clusters)));
    }
    let mut distinct: Vec<usize> = truth.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() > 2 {
        return Err(Error::domain(format!("expected 2 true clusters, got {}", distinct.len())));
    }
    let mismatched = predicted
        .labels
        .iter()
        .zip(truth)
        .filter(|(&p, &t)| p != usize::from(t != distinct[0]))
        .count();
    let n = truth.len();
    Ok(mismatched.min(n - mismatched) as f64 / n as f64)
}
