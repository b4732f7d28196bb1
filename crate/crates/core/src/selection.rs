//! Feature selection for each point of an ensemble: orthogonal matching
//! pursuit over the remaining points, and the nearest-neighbor baseline.

use std::borrow::Cow;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::Mat;

/// Residuals at or below this norm end the pursuit under any stopping rule.
pub const ZERO_RESIDUAL: f64 = 1e-12;
/// If every candidate correlation is below this while the residual is not
/// zero, the pursuit has stalled.
pub const STALL_CORRELATION: f64 = 1e-12;
const UNIT_NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule {
    /// Stop once this many atoms are selected.
    Sparsity(usize),
    /// Stop once the residual norm is at most this value.
    Residual(f64),
}

impl StoppingRule {
    pub fn sparsity(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("sparsity must be at least 1"));
        }
        Ok(StoppingRule::Sparsity(k))
    }

    pub fn residual(kappa: f64) -> Result<Self> {
        if kappa.is_nan() || kappa <= 0.0 || !kappa.is_finite() {
            return Err(Error::domain(format!("residual tolerance must be positive, got {kappa}")));
        }
        Ok(StoppingRule::Residual(kappa))
    }

    fn validate(&self) -> Result<()> {
        match *self {
            StoppingRule::Sparsity(k) => Self::sparsity(k).map(|_| ()),
            StoppingRule::Residual(kappa) => Self::residual(kappa).map(|_| ()),
        }
    }

    fn done(&self, selected: usize, residual: f64) -> bool {
        residual <= ZERO_RESIDUAL
            || match *self {
                StoppingRule::Sparsity(k) => selected >= k,
                StoppingRule::Residual(kappa) => residual <= kappa,
            }
    }
}

/// Result of one pursuit over a dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct Pursuit {
    /// Atom indices in selection order.
    pub selected: Vec<usize>,
    /// Least-squares coefficients aligned with `selected`.
    pub coeffs: Vec<f64>,
    /// Residual norm after each selection.
    pub residual_trace: Vec<f64>,
}

impl Pursuit {
    pub fn residual_norm(&self) -> f64 {
        self.residual_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// Feature set of one point: the other points chosen to represent it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub point_index: usize,
    pub selected: Vec<usize>,
    pub coeffs: Vec<f64>,
    pub residual_norm: f64,
}

impl FeatureSet {
    fn from_pursuit(point_index: usize, p: Pursuit) -> Self {
        FeatureSet {
            point_index,
            residual_norm: p.residual_norm(),
            selected: p.selected,
            coeffs: p.coeffs,
        }
    }

    /// A point for which no features could be selected.
    pub fn empty(point_index: usize) -> Self {
        FeatureSet {
            point_index,
            selected: Vec::new(),
            coeffs: Vec::new(),
            residual_norm: f64::NAN,
        }
    }
}

/// Squared residual norms above this come from the Gram identity
/// `‖s‖² = ‖y‖² − (Aᵀy)_Λᵀ c`; at or below it the residual is formed explicitly.
const GRAM_RESIDUAL_FLOOR: f64 = 1e-4;

/// Greedy pursuit in the Gram domain.
///
/// Correlations are updated as `Aᵀy − AᵀA_Λ c` and the coefficients come from a
/// Cholesky factor of `A_Λᵀ A_Λ` grown one row per selection. Small residuals
/// are recomputed from the atoms so that stopping decisions near zero do not
/// suffer from cancellation.
struct GramPursuit<'a, F> {
    y: &'a [f64],
    atoms: &'a DMatrix<f64>,
    corr0: &'a [f64],
    gram_col: F,
    masked: Option<usize>,
    /// Ends the pursuit early, without error, once a selected atom matches.
    reject: Option<&'a (dyn Fn(usize) -> bool + Sync)>,
}

struct Outcome {
    pursuit: Pursuit,
    rejected: bool,
}

impl<'a, F> GramPursuit<'a, F>
where
    F: FnMut(usize) -> Cow<'a, [f64]>,
{
    fn explicit_residual(&self, selected: &[usize], c: &[f64]) -> f64 {
        let mut s = self.y.to_vec();
        for (&idx, &cv) in selected.iter().zip(c) {
            for (sv, av) in s.iter_mut().zip(self.atoms.column(idx).iter()) {
                *sv -= cv * av;
            }
        }
        s.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn run(mut self, stop: StoppingRule) -> Result<Outcome> {
        let d = self.corr0.len();
        let cap = match stop {
            StoppingRule::Sparsity(k) => k.min(d),
            StoppingRule::Residual(_) => d,
        };
        let explicit_below = match stop {
            StoppingRule::Sparsity(_) => GRAM_RESIDUAL_FLOOR,
            StoppingRule::Residual(kappa) => GRAM_RESIDUAL_FLOOR.max(4.0 * kappa * kappa),
        };
        let mut selected: Vec<usize> = Vec::with_capacity(cap);
        let mut in_set = vec![false; d];
        if let Some(m) = self.masked {
            in_set[m] = true;
        }
        let mut gram_cols: Vec<Cow<'a, [f64]>> = Vec::with_capacity(cap);
        // Lower-triangular Cholesky factor of the selected Gram block, by rows.
        let mut chol: Vec<Vec<f64>> = Vec::with_capacity(cap);
        let mut corr = self.corr0.to_vec();
        let mut coeffs: Vec<f64> = Vec::new();
        let mut trace = Vec::with_capacity(cap);
        let y_norm2: f64 = self.y.iter().map(|v| v * v).sum();
        let mut residual = y_norm2.sqrt();

        if stop.done(0, residual) {
            return Ok(Outcome {
                pursuit: Pursuit {
                    selected,
                    coeffs,
                    residual_trace: vec![residual],
                },
                rejected: false,
            });
        }

        let mut rejected = false;
        loop {
            let mut best: Option<(usize, f64)> = None;
            for (j, c) in corr.iter().enumerate() {
                if in_set[j] {
                    continue;
                }
                let a = c.abs();
                if best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            let Some((j, best_corr)) = best else {
                // dictionary exhausted
                break;
            };
            if best_corr < STALL_CORRELATION {
                return Err(Error::Stall {
                    partial: selected,
                    residual_norm: residual,
                });
            }

            let gj = (self.gram_col)(j);
            let m = selected.len();
            let mut w = vec![0.0; m];
            for r in 0..m {
                let mut v = gram_cols[r][j];
                for (c, wc) in w.iter().enumerate().take(r) {
                    v -= chol[r][c] * wc;
                }
                w[r] = v / chol[r][r];
            }
            let diag2 = gj[j] - w.iter().map(|v| v * v).sum::<f64>();
            if diag2.is_nan() || diag2 <= 0.0 {
                return Err(Error::Stall {
                    partial: selected,
                    residual_norm: residual,
                });
            }
            w.push(diag2.sqrt());
            chol.push(w);
            selected.push(j);
            in_set[j] = true;
            gram_cols.push(gj);

            // Solve L Lᵀ c = (Aᵀy)_Λ.
            let m = selected.len();
            let mut z = vec![0.0; m];
            for r in 0..m {
                let mut v = self.corr0[selected[r]];
                for c in 0..r {
                    v -= chol[r][c] * z[c];
                }
                z[r] = v / chol[r][r];
            }
            let mut c = vec![0.0; m];
            for r in (0..m).rev() {
                let mut v = z[r];
                for s in r + 1..m {
                    v -= chol[s][r] * c[s];
                }
                c[r] = v / chol[r][r];
            }

            let fit: f64 = selected.iter().zip(&c).map(|(&i, cv)| self.corr0[i] * cv).sum();
            let r2 = y_norm2 - fit;
            residual = if r2 > explicit_below {
                r2.sqrt()
            } else {
                self.explicit_residual(&selected, &c)
            };
            trace.push(residual);
            coeffs = c;

            if self.reject.is_some_and(|f| f(j)) {
                rejected = true;
                break;
            }
            if stop.done(selected.len(), residual) {
                break;
            }

            corr.copy_from_slice(self.corr0);
            for (col, &cv) in gram_cols.iter().zip(&coeffs) {
                for (x, g) in corr.iter_mut().zip(col.iter()) {
                    *x -= cv * g;
                }
            }
        }
        Ok(Outcome {
            pursuit: Pursuit {
                selected,
                coeffs,
                residual_trace: trace,
            },
            rejected,
        })
    }
}

fn check_unit(v: impl Iterator<Item = f64>, what: &str) -> Result<()> {
    for (j, n) in v.enumerate() {
        if (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::domain(format!("{what} {j} has norm {n}, expected 1")));
        }
    }
    Ok(())
}

/// Orthogonal matching pursuit of `y` over the columns of `atoms`.
///
/// Each step selects the atom most correlated with the residual (ties go to
/// the lowest index), then re-projects `y` onto the orthogonal complement of
/// the selected atoms. Selected atoms are never reselected.
pub fn omp(y: &DVector<f64>, atoms: &Mat, stop: StoppingRule) -> Result<Pursuit> {
    omp_masked(y, atoms, stop, None)
}

/// [`omp`] with one atom excluded from the candidates.
pub fn omp_masked(y: &DVector<f64>, atoms: &Mat, stop: StoppingRule, masked: Option<usize>) -> Result<Pursuit> {
    stop.validate()?;
    if y.len() != atoms.nrows() {
        return Err(Error::domain(format!(
            "signal has length {} but atoms have {} rows",
            y.len(),
            atoms.nrows()
        )));
    }
    if masked.is_some_and(|m| m >= atoms.ncols()) {
        return Err(Error::domain("masked atom out of range"));
    }
    check_unit(std::iter::once(y.norm()), "signal")?;
    check_unit(atoms.column_iter().map(|c| c.norm()), "atom")?;
    let a = atoms.as_matrix();
    let corr0 = a.tr_mul(y);
    GramPursuit {
        y: y.as_slice(),
        atoms: a,
        corr0: corr0.as_slice(),
        gram_col: |j: usize| Cow::Owned(a.tr_mul(&a.column(j)).as_slice().to_vec()),
        masked,
        reject: None,
    }
    .run(stop)
    .map(|o| o.pursuit)
}

/// Endogenous pursuit for point `i`: the other points are the dictionary.
pub fn omp_endogenous(points: &Mat, i: usize, stop: StoppingRule) -> Result<FeatureSet> {
    if i >= points.ncols() {
        return Err(Error::domain(format!("point {i} out of range")));
    }
    let y = points.column(i).into_owned();
    omp_masked(&y, points, stop, Some(i))
        .map(|p| FeatureSet::from_pursuit(i, p))
        .map_err(|e| Error::at_point(i, e))
}

/// `YᵀY` through the blocked matrix product.
fn gram(y: &DMatrix<f64>) -> DMatrix<f64> {
    y.transpose() * y
}

fn batch<T: Send>(
    points: &Mat,
    stop: StoppingRule,
    reject: Option<&(dyn Fn(usize, usize) -> bool + Sync)>,
    finish: impl Fn(usize, Outcome) -> T + Sync,
) -> Result<Vec<Result<T>>> {
    stop.validate()?;
    check_unit(points.column_iter().map(|c| c.norm()), "point")?;
    let y = points.as_matrix();
    let g = gram(y);
    let d = y.ncols();
    let col = |j: usize| &g.as_slice()[j * d..(j + 1) * d];
    Ok((0..d)
        .into_par_iter()
        .map(|i| {
            let own_reject = reject.map(|f| move |j: usize| f(i, j));
            GramPursuit {
                y: &y.as_slice()[i * y.nrows()..(i + 1) * y.nrows()],
                atoms: y,
                corr0: col(i),
                gram_col: |j: usize| Cow::Borrowed(col(j)),
                masked: Some(i),
                reject: own_reject.as_ref().map(|f| f as &(dyn Fn(usize) -> bool + Sync)),
            }
            .run(stop)
            .map(|o| finish(i, o))
            .map_err(|e| Error::at_point(i, e))
        })
        .collect())
}

/// Per-point pursuit results, each point represented by all the others.
///
/// The Gram matrix of the ensemble is formed once and shared by all points.
pub fn omp_feature_sets_each(points: &Mat, stop: StoppingRule) -> Result<Vec<Result<FeatureSet>>> {
    batch(points, stop, None, |i, o| FeatureSet::from_pursuit(i, o.pursuit))
}

/// Whether each point's OMP feature set is exact, without finishing pursuits
/// that have already selected a point from another cluster.
pub fn omp_efs_flags(points: &Mat, labels: &[usize], stop: StoppingRule) -> Result<Vec<bool>> {
    if labels.len() != points.ncols() {
        return Err(Error::domain(format!("{} labels for {} points", labels.len(), points.ncols())));
    }
    let foreign = |i: usize, j: usize| labels[i] != labels[j];
    batch(points, stop, Some(&foreign), |_, o| !o.rejected && !o.pursuit.selected.is_empty())?
        .into_iter()
        .collect()
}

/// One feature set per point; the first failing point aborts the batch.
pub fn omp_feature_sets(points: &Mat, stop: StoppingRule) -> Result<Vec<FeatureSet>> {
    omp_feature_sets_each(points, stop)?.into_iter().collect()
}

/// Top-`k` points by `|⟨yᵢ, yⱼ⟩|`, `j ≠ i`; ties go to the lower index.
/// Coefficients are the signed inner products.
pub fn nn_feature_sets(points: &Mat, k: usize) -> Result<Vec<FeatureSet>> {
    let d = points.ncols();
    if k == 0 || k >= d {
        return Err(Error::domain(format!("neighbor count {k} must be in [1, {})", d)));
    }
    check_unit(points.column_iter().map(|c| c.norm()), "point")?;
    let gram = gram(points.as_matrix());
    Ok((0..d)
        .into_par_iter()
        .map(|i| {
            let col = gram.column(i);
            let mut cand: Vec<usize> = (0..d).filter(|&j| j != i).collect();
            let order = |a: &usize, b: &usize| col[*b].abs().total_cmp(&col[*a].abs()).then(a.cmp(b));
            cand.select_nth_unstable_by(k - 1, order);
            cand.truncate(k);
            cand.sort_by(order);
            FeatureSet {
                point_index: i,
                coeffs: cand.iter().map(|&j| col[j]).collect(),
                selected: cand,
                residual_norm: f64::NAN,
            }
        })
        .collect())
}

/// True when every selected point shares the label of the represented point.
pub fn efs_check(fs: &FeatureSet, labels: &[usize]) -> Result<bool> {
    if fs.selected.is_empty() {
        return Err(Error::domain(format!("point {} has no selected features", fs.point_index)));
    }
    let own = *labels
        .get(fs.point_index)
        .ok_or_else(|| Error::domain(format!("no label for point {}", fs.point_index)))?;
    fs.selected.iter().try_fold(true, |ok, &j| {
        let l = labels
            .get(j)
            .ok_or_else(|| Error::domain(format!("no label for point {j}")))?;
        Ok(ok && *l == own)
    })
}

/// Fraction of feature sets that contain exact features.
pub fn efs_rate(sets: &[FeatureSet], labels: &[usize]) -> Result<f64> {
    if sets.is_empty() {
        return Err(Error::domain("no feature sets"));
    }
    let mut hits = 0usize;
    for fs in sets {
        if efs_check(fs, labels)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / sets.len() as f64)
}
