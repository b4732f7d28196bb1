//! Geometric quantities of a union of subspaces and the sufficient conditions
//! for exact feature selection (EFS) built from them.
//!
//! Conventions:
//! * points are unit-norm columns;
//! * principal-angle cosines (the cross-spectrum) are the singular values of
//!   `Φᵢᵀ Φⱼ`, clipped to `[0, 1]`;
//! * every certificate is a strict inequality `lhs < rhs`; equality fails.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{self, Mat, RANK_RTOL};

/// Tolerance for `ΦᵀΦ = I` and for unit-norm checks.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Tolerance for "point lies in the span of a basis".
pub const SPAN_TOL: f64 = 1e-8;
/// Default number of Monte Carlo directions for covering estimates.
pub const DEFAULT_COVER_DIRS: usize = 2000;

/// `12^{1/4}`, the constant that linearizes the residual bound in the EFS conditions.
pub fn fourth_root_12() -> f64 {
    12f64.powf(0.25)
}

/// Orthonormal basis of one subspace, stored as the columns of an `n × k` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    phi: Mat,
}

impl SubspaceBasis {
    pub fn new(phi: Mat) -> Result<Self> {
        let k = phi.ncols();
        if k > phi.nrows() {
            return Err(Error::domain(format!(
                "basis has {k} columns in ambient dimension {}",
                phi.nrows()
            )));
        }
        let err = (phi.tr_mul(phi.as_matrix()) - DMatrix::identity(k, k)).amax();
        if err > ORTHONORMAL_TOL {
            return Err(Error::domain(format!("basis is not orthonormal (max |ΦᵀΦ - I| = {err:.3e})")));
        }
        Ok(SubspaceBasis { phi })
    }

    /// Orthonormal basis for `range(a)` from its left singular vectors.
    pub fn spanning(a: &Mat) -> Result<Self> {
        let s = numerics::svd(a)?;
        let r = s.rank();
        if r == 0 {
            return Err(Error::domain("cannot span a subspace from a zero matrix"));
        }
        SubspaceBasis::new(Mat::new(s.u.columns(0, r).into_owned())?)
    }

    pub fn phi(&self) -> &Mat {
        &self.phi
    }

    pub fn dim(&self) -> usize {
        self.phi.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.phi.nrows()
    }

    /// Distance from each column of `points` to the subspace.
    pub fn max_span_error(&self, points: &Mat) -> f64 {
        let coef = self.phi.tr_mul(points.as_matrix());
        (points.as_matrix() - self.phi.as_matrix() * coef)
            .column_iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Cross-spectrum of a subspace pair: the cosines of the principal angles.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSpectrum {
    /// Nonincreasing, each entry in `[0, 1]`.
    pub sigma: Vec<f64>,
    /// Overlap: number of entries above the rank threshold.
    pub q: usize,
}

impl CrossSpectrum {
    pub fn from_sigma(mut sigma: Vec<f64>) -> Result<Self> {
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0 || *s > 1.0 + ORTHONORMAL_TOL) {
            return Err(Error::domain("cross-spectrum entries must lie in [0, 1]"));
        }
        sigma.iter_mut().for_each(|s| *s = s.min(1.0));
        sigma.sort_by(|a, b| b.total_cmp(a));
        let q = cross_rank(&sigma);
        Ok(CrossSpectrum { sigma, q })
    }

    /// Cosine of the smallest principal angle (0 when the spectrum is empty).
    pub fn max_cos(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// Trace norm of `Φᵢᵀ Φⱼ`.
    pub fn l1(&self) -> f64 {
        self.sigma.iter().sum()
    }

    /// Principal angles in radians, nondecreasing.
    pub fn angles(&self) -> Vec<f64> {
        self.sigma.iter().map(|s| s.acos()).collect()
    }

    /// `q / k` for subspaces of dimension `k`.
    pub fn overlap_ratio(&self) -> f64 {
        if self.sigma.is_empty() {
            0.0
        } else {
            self.q as f64 / self.sigma.len() as f64
        }
    }
}

// Bases are orthonormal, so the spectrum lives on the unit scale: the rank
// threshold is taken relative to max(σ₁, 1) to keep orthogonal pairs at q = 0.
fn cross_rank(sigma: &[f64]) -> usize {
    let scale = sigma.first().copied().unwrap_or(0.0).max(1.0);
    sigma.iter().filter(|&&s| s > RANK_RTOL * scale).count()
}

/// Monte Carlo estimate of a covering diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveringEstimate {
    /// Estimated diameter in `[0, 2]`.
    pub diameter: f64,
    pub samples_used: usize,
    /// Sampling a finite set of directions can only under-estimate a maximum.
    pub is_lower_bound: bool,
}

impl CoveringEstimate {
    pub fn radius(&self) -> f64 {
        self.diameter / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// General condition on mutual coherence, covering diameter and minimum principal angle.
    Thm1,
    /// Disjoint subspaces: minimum principal angle against covering diameter.
    Cor1,
    /// Uniformly bounded unions: covering diameter against `γ‖σ‖₁`.
    Thm3,
}

impl Condition {
    pub fn name(&self) -> &'static str {
        match self {
            Condition::Thm1 => "thm1",
            Condition::Cor1 => "cor1",
            Condition::Thm3 => "thm3",
        }
    }
}

/// Outcome of evaluating one sufficient condition; `holds ⇔ lhs < rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfsCertificate {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub condition: Condition,
}

impl EfsCertificate {
    fn new(condition: Condition, lhs: f64, rhs: f64) -> Self {
        EfsCertificate {
            holds: lhs < rhs,
            lhs,
            rhs,
            condition,
        }
    }
}

fn check_unit_columns(y: &Mat, what: &str) -> Result<()> {
    for (j, c) in y.column_iter().enumerate() {
        let norm = c.norm();
        if (norm - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::domain(format!("{what}: column {j} has norm {norm}, expected 1")));
        }
    }
    Ok(())
}

fn check_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&v) {
        return Err(Error::domain(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(())
}

/// Largest `|⟨u, v⟩|` over `u ∈ yi`, `v ∈ yj` (columns, unit norm).
pub fn mutual_coherence(yi: &Mat, yj: &Mat) -> Result<f64> {
    if yi.nrows() != yj.nrows() {
        return Err(Error::domain("point sets live in different ambient dimensions"));
    }
    check_unit_columns(yi, "mutual_coherence")?;
    check_unit_columns(yj, "mutual_coherence")?;
    Ok(yi.tr_mul(yj.as_matrix()).amax().min(1.0))
}

/// Columns of `points` carrying label `cluster`.
pub fn cluster_columns(points: &Mat, labels: &[usize], cluster: usize) -> Result<Mat> {
    if labels.len() != points.ncols() {
        return Err(Error::domain(format!(
            "{} labels for {} points",
            labels.len(),
            points.ncols()
        )));
    }
    let idx: Vec<usize> = (0..labels.len()).filter(|&j| labels[j] == cluster).collect();
    if idx.is_empty() {
        return Err(Error::domain(format!("cluster {cluster} has no points")));
    }
    points.select_columns(&idx)
}

/// Mutual coherence between cluster `cluster` and every other cluster, maximized.
pub fn max_mutual_coherence(points: &Mat, labels: &[usize], cluster: usize) -> Result<f64> {
    let own = cluster_columns(points, labels, cluster)?;
    let mut others: Vec<usize> = labels.iter().copied().filter(|&l| l != cluster).collect();
    others.sort_unstable();
    others.dedup();
    if others.is_empty() {
        return Err(Error::domain("coherence needs at least two clusters"));
    }
    others.into_iter().try_fold(0.0f64, |acc, other| {
        let theirs = cluster_columns(points, labels, other)?;
        Ok(acc.max(mutual_coherence(&own, &theirs)?))
    })
}

/// SVD of `Φᵢᵀ Φⱼ`; the singular values are the principal-angle cosines.
fn cross_svd(phi_i: &SubspaceBasis, phi_j: &SubspaceBasis) -> Result<numerics::SvdResult> {
    if phi_i.ambient() != phi_j.ambient() {
        return Err(Error::domain(format!(
            "bases live in R^{} and R^{}",
            phi_i.ambient(),
            phi_j.ambient()
        )));
    }
    numerics::svd(&Mat::new(phi_i.phi().tr_mul(phi_j.phi().as_matrix()))?)
}

pub fn principal_angles(phi_i: &SubspaceBasis, phi_j: &SubspaceBasis) -> Result<CrossSpectrum> {
    let s = cross_svd(phi_i, phi_j)?;
    CrossSpectrum::from_sigma(s.sigma.iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// Sine of the acute angle between two nonzero vectors.
pub fn projective_distance(u: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    if u.len() != y.len() {
        return Err(Error::domain("vectors have different lengths"));
    }
    let (nu, ny) = (u.norm_squared(), y.norm_squared());
    if nu == 0.0 || ny == 0.0 {
        return Err(Error::domain("projective distance of a zero vector"));
    }
    let c2 = u.dot(y).powi(2) / (nu * ny);
    Ok((1.0 - c2).clamp(0.0, 1.0).sqrt())
}

fn cover_preconditions(cluster: &Mat, basis: &SubspaceBasis, num_dirs: usize) -> Result<()> {
    if cluster.ncols() < 2 {
        return Err(Error::domain("covering diameter needs at least two points"));
    }
    if num_dirs == 0 {
        return Err(Error::domain("covering estimate needs at least one direction"));
    }
    if cluster.nrows() != basis.ambient() {
        return Err(Error::domain("cluster and basis live in different ambient dimensions"));
    }
    let off = basis.max_span_error(cluster);
    if off > SPAN_TOL {
        return Err(Error::domain(format!("cluster leaves the subspace (distance {off:.3e})")));
    }
    Ok(())
}

/// For each sampled direction in the subspace, the largest and second-largest
/// `|cos|` to the cluster points; the worst-case direction is reported through
/// `pick`.
fn sample_cover(
    cluster: &Mat,
    basis: &SubspaceBasis,
    num_dirs: usize,
    seed: u64,
    pick: impl Fn(f64, f64) -> f64,
) -> f64 {
    let coef = basis.phi().tr_mul(cluster.as_matrix()); // k × d
    let norms: Vec<f64> = coef.column_iter().map(|c| c.norm()).collect();
    let k = basis.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..num_dirs {
        let alpha = loop {
            let a = DVector::<f64>::from_fn(k, |_, _| rng.sample(StandardNormal));
            let n = a.norm();
            if n > 1e-12 {
                break a / n;
            }
        };
        let (mut best, mut second) = (0.0f64, 0.0f64);
        for (j, c) in coef.column_iter().enumerate() {
            let cos = (alpha.dot(&c) / norms[j]).abs().min(1.0);
            if cos > best {
                second = best;
                best = cos;
            } else if cos > second {
                second = cos;
            }
        }
        worst = worst.max((1.0 - pick(best, second).powi(2)).max(0.0).sqrt());
    }
    worst
}

/// Leave-one-out covering diameter: twice the largest covering radius over the
/// sets obtained by removing a single point.
///
/// The worst removal for a direction `u` is always its nearest point, so each
/// sampled direction is scored against its second-nearest point.
pub fn covering_diameter(cluster: &Mat, basis: &SubspaceBasis, num_dirs: usize, seed: u64) -> Result<CoveringEstimate> {
    cover_preconditions(cluster, basis, num_dirs)?;
    let radius = sample_cover(cluster, basis, num_dirs, seed, |_, second| second);
    Ok(CoveringEstimate {
        diameter: (2.0 * radius).min(2.0),
        samples_used: num_dirs,
        is_lower_bound: true,
    })
}

/// Twice the covering radius of the full cluster (no point removed).
pub fn covering_diameter_full(cluster: &Mat, basis: &SubspaceBasis, num_dirs: usize, seed: u64) -> Result<CoveringEstimate> {
    cover_preconditions(cluster, basis, num_dirs)?;
    let radius = sample_cover(cluster, basis, num_dirs, seed, |best, _| best);
    Ok(CoveringEstimate {
        diameter: (2.0 * radius).min(2.0),
        samples_used: num_dirs,
        is_lower_bound: true,
    })
}

/// Data-only proxy for the covering radius: the largest projective distance
/// from a point to its nearest other point in the cluster.
pub fn nearest_neighbor_gap(cluster: &Mat) -> Result<f64> {
    if cluster.ncols() < 2 {
        return Err(Error::domain("nearest-neighbor gap needs at least two points"));
    }
    check_unit_columns(cluster, "nearest_neighbor_gap")?;
    let g = cluster.tr_mul(cluster.as_matrix());
    let d = g.ncols();
    let mut worst = 0.0f64;
    for i in 0..d {
        let best = (0..d).filter(|&j| j != i).map(|j| g[(i, j)].abs()).fold(0.0, f64::max);
        worst = worst.max((1.0 - best.min(1.0).powi(2)).sqrt());
    }
    Ok(worst)
}

/// Inradius `sqrt(1 − ε²/4)` of a cluster with covering diameter `ε`.
pub fn inradius_from_diameter(eps: f64) -> Result<f64> {
    check_range("covering diameter", eps, 0.0, 2.0)?;
    Ok((1.0 - eps * eps / 4.0).max(0.0).sqrt())
}

/// `μ_c < sqrt(1 − ε²/4) − ε·cos θ* / 12^{1/4}`.
pub fn efs_condition_thm1(mu_c: f64, eps: f64, max_cos_theta: f64) -> Result<EfsCertificate> {
    check_range("mutual coherence", mu_c, 0.0, 1.0)?;
    check_range("max cos θ", max_cos_theta, 0.0, 1.0)?;
    let rhs = inradius_from_diameter(eps)? - eps / fourth_root_12() * max_cos_theta;
    Ok(EfsCertificate::new(Condition::Thm1, mu_c, rhs))
}

/// `cos θ* < sqrt(1 − ε²/4) / (1 + ε / 12^{1/4})`, for disjoint subspaces only.
pub fn efs_condition_cor1(eps: f64, max_cos_theta: f64) -> Result<EfsCertificate> {
    check_range("max cos θ", max_cos_theta, 0.0, 1.0)?;
    if max_cos_theta >= 1.0 {
        return Err(Error::Precondition(
            "disjoint-subspace condition needs cos θ* < 1; the subspaces intersect".into(),
        ));
    }
    let rhs = inradius_from_diameter(eps)? / (1.0 + eps / fourth_root_12());
    Ok(EfsCertificate::new(Condition::Cor1, max_cos_theta, rhs))
}

/// Bounding constant `γ`: the largest `|⟨y, w⟩|` between the points of each
/// cluster and the principal vectors of its own subspace that carry a nonzero
/// principal-angle cosine. Zero for orthogonal subspaces.
pub fn bounding_constant(yi: &Mat, yj: &Mat, phi_i: &SubspaceBasis, phi_j: &SubspaceBasis) -> Result<f64> {
    check_unit_columns(yi, "bounding_constant")?;
    check_unit_columns(yj, "bounding_constant")?;
    if yi.nrows() != phi_i.ambient() || yj.nrows() != phi_j.ambient() {
        return Err(Error::domain("points and bases live in different ambient dimensions"));
    }
    let s = cross_svd(phi_i, phi_j)?;
    let q = cross_rank(&s.sigma);
    if q == 0 {
        return Ok(0.0);
    }
    let u_tilde = phi_i.phi().as_matrix() * s.u.columns(0, q);
    let v_tilde = phi_j.phi().as_matrix() * s.vt.rows(0, q).transpose();
    let gi = yi.tr_mul(&u_tilde).amax();
    let gj = yj.tr_mul(&v_tilde).amax();
    Ok(gi.max(gj))
}

/// `ε < sqrt(1 − γ²‖σ‖₁²)`, for unions with bounding constant `γ < sqrt(1/q)`.
///
/// When `γ‖σ‖₁ ≥ 1` the bound carries no information: the certificate fails
/// with `rhs = 0`.
pub fn efs_condition_thm3(eps: f64, gamma: f64, cross: &CrossSpectrum) -> Result<EfsCertificate> {
    check_range("covering diameter", eps, 0.0, 2.0)?;
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::domain(format!("bounding constant {gamma} must be nonnegative")));
    }
    if cross.q > 0 && gamma >= (1.0 / cross.q as f64).sqrt() {
        return Err(Error::Precondition(format!(
            "bounded-union condition assumes γ < sqrt(1/q); got γ = {gamma:.4} with q = {}",
            cross.q
        )));
    }
    let t = gamma * cross.l1();
    let rhs = if t >= 1.0 { 0.0 } else { (1.0 - t * t).sqrt() };
    Ok(EfsCertificate::new(Condition::Thm3, eps, rhs))
}

/// Exact recovery coefficient `max_{i ∉ Λ} ‖Φ_Λ† φᵢ‖₁`; below 1 the support Λ
/// is recovered exactly.
pub fn erc(dictionary: &Mat, support: &[usize]) -> Result<f64> {
    if support.is_empty() {
        return Err(Error::domain("ERC needs a nonempty support"));
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("support has repeated indices"));
    }
    let sub = dictionary.select_columns(support)?;
    let sv = numerics::svd(&sub)?;
    if sv.rank() < support.len() {
        return Err(Error::domain("sub-dictionary is rank deficient"));
    }
    let pinv = numerics::pseudoinverse(&sub)?;
    let mut worst = 0.0f64;
    for i in (0..dictionary.ncols()).filter(|i| sorted.binary_search(i).is_err()) {
        let c = pinv.as_matrix() * dictionary.column(i);
        worst = worst.max(c.lp_norm(1));
    }
    Ok(worst)
}

/// Both sides of `sqrt(2 − sqrt(4 − x²)) ≤ x / 12^{1/4}` on `[0, 1]`.
pub fn lemma1_gap(x: f64) -> Result<(f64, f64)> {
    check_range("x", x, 0.0, 1.0)?;
    let lhs = (2.0 - (4.0 - x * x).sqrt()).max(0.0).sqrt();
    Ok((lhs, x / fourth_root_12()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::test_util::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn basis(cols: &[&[f64]]) -> SubspaceBasis {
        let n = cols[0].len();
        let v: Vec<DVector<f64>> = cols.iter().map(|c| DVector::from_column_slice(c)).collect();
        let _ = n;
        SubspaceBasis::new(Mat::from_columns(&v).unwrap()).unwrap()
    }

    fn random_basis(n: usize, k: usize, rng: &mut impl rand::Rng) -> SubspaceBasis {
        let q = orthogonal(n, rng);
        SubspaceBasis::new(Mat::new(q.columns(0, k).into_owned()).unwrap()).unwrap()
    }

    fn unit_points(b: &SubspaceBasis, d: usize, rng: &mut impl rand::Rng) -> Mat {
        let a = gaussian(b.dim(), d, rng);
        let mut y = b.phi().as_matrix() * a.as_matrix();
        for mut c in y.column_iter_mut() {
            let n = c.norm();
            c /= n;
        }
        Mat::new(y).unwrap()
    }

    fn brute_coherence(a: &Mat, b: &Mat) -> f64 {
        let mut m = 0.0f64;
        for u in a.column_iter() {
            for v in b.column_iter() {
                m = m.max(u.dot(&v).abs());
            }
        }
        m
    }

    #[test]
    fn coherence_examples() {
        let e1 = Mat::new(DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0])).unwrap();
        let e2 = Mat::new(DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(mutual_coherence(&e1, &e1).unwrap(), 1.0);
        assert_eq!(mutual_coherence(&e1, &e2).unwrap(), 0.0);
        let mut r = rng(11);
        let b1 = random_basis(8, 3, &mut r);
        let b2 = random_basis(8, 3, &mut r);
        let (y1, y2) = (unit_points(&b1, 10, &mut r), unit_points(&b2, 10, &mut r));
        assert!((mutual_coherence(&y1, &y2).unwrap() - brute_coherence(&y1, &y2)).abs() < 1e-12);
        let bad = Mat::new(DMatrix::from_column_slice(3, 1, &[2.0, 0.0, 0.0])).unwrap();
        assert!(mutual_coherence(&bad, &e1).is_err());
    }

    #[test]
    fn max_coherence_over_clusters() {
        let pts = Mat::new(DMatrix::from_column_slice(
            3,
            4,
            &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ))
        .unwrap();
        // clusters 1 and 2 are orthogonal to each other, cluster 0 shares e1 with 1
        assert_eq!(max_mutual_coherence(&pts, &[0, 1, 2, 2], 2).unwrap(), 0.0);
        assert_eq!(max_mutual_coherence(&pts, &[0, 1, 2, 2], 0).unwrap(), 1.0);
        assert!(max_mutual_coherence(&pts, &[0, 0, 0, 0], 0).is_err());

        let mut r = rng(12);
        let bs: Vec<_> = (0..3).map(|_| random_basis(9, 2, &mut r)).collect();
        let ys: Vec<_> = bs.iter().map(|b| unit_points(b, 5, &mut r)).collect();
        let all = Mat::new(DMatrix::from_fn(9, 15, |i, j| ys[j / 5][(i, j % 5)])).unwrap();
        let labels: Vec<usize> = (0..15).map(|j| j / 5).collect();
        let want = brute_coherence(&ys[1], &ys[0]).max(brute_coherence(&ys[1], &ys[2]));
        assert!((max_mutual_coherence(&all, &labels, 1).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn principal_angles_examples() {
        let mut r = rng(13);
        let b = random_basis(6, 3, &mut r);
        let cs = principal_angles(&b, &b).unwrap();
        assert!(cs.sigma.iter().all(|s| (s - 1.0).abs() < 1e-12));
        assert_eq!(cs.q, 3);

        let x = basis(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]]);
        let y = basis(&[&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]);
        let cs = principal_angles(&x, &y).unwrap();
        assert!(cs.sigma.iter().all(|&s| s == 0.0));
        assert_eq!(cs.q, 0);

        let theta: f64 = 0.6;
        let p1 = basis(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let p2 = basis(&[&[1.0, 0.0, 0.0], &[0.0, theta.cos(), theta.sin()]]);
        let cs = principal_angles(&p1, &p2).unwrap();
        assert!((cs.sigma[0] - 1.0).abs() < 1e-12);
        assert!((cs.sigma[1] - theta.cos()).abs() < 1e-12);
        assert!((cs.angles()[1] - theta).abs() < 1e-8);

        let other = basis(&[&[1.0, 0.0]]);
        assert!(principal_angles(&p1, &other).is_err());
    }

    #[test]
    fn projective_distance_examples() {
        let u = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        assert!(projective_distance(&u, &u).unwrap() < 1e-7);
        assert!(projective_distance(&u, &(-&u)).unwrap() < 1e-7);
        let v = DVector::from_vec(vec![2.0, -1.0, 0.0]);
        assert!((projective_distance(&u, &v).unwrap() - 1.0).abs() < 1e-15);
        assert!(projective_distance(&u, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn covering_collinear_points_is_zero() {
        let b = basis(&[&[0.0, 1.0, 0.0]]);
        let pts = Mat::new(DMatrix::from_column_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0])).unwrap();
        let est = covering_diameter(&pts, &b, 50, 1).unwrap();
        assert!(est.diameter < 1e-7);
        assert!(est.is_lower_bound);
    }

    #[test]
    fn covering_two_orthogonal_points_in_a_plane() {
        let b = basis(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let pts = Mat::new(DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0])).unwrap();
        // the deep hole of {e1, e2} sits at 45°
        let full = covering_diameter_full(&pts, &b, 20_000, 3).unwrap();
        assert!((full.diameter - 2f64.sqrt()).abs() < 1e-3, "{}", full.diameter);
        assert!(full.diameter <= 2f64.sqrt() + 1e-12);
        // removing either point leaves a single line, whose orthogonal complement is the deep hole
        let loo = covering_diameter(&pts, &b, 20_000, 3).unwrap();
        assert!((loo.diameter - 2.0).abs() < 1e-3);
    }

    #[test]
    fn covering_dense_circle_is_small() {
        let mut r = rng(14);
        let b = random_basis(5, 2, &mut r);
        let pts = unit_points(&b, 500, &mut r);
        let est = covering_diameter(&pts, &b, 100_000, 9).unwrap();
        assert!(est.diameter < 0.3, "{}", est.diameter);
    }

    #[test]
    fn covering_is_monotone_in_samples() {
        let mut r = rng(15);
        let b = random_basis(7, 3, &mut r);
        let pts = unit_points(&b, 12, &mut r);
        let mut last = 0.0;
        for dirs in [1, 10, 100, 1000] {
            let e = covering_diameter(&pts, &b, dirs, 42).unwrap();
            assert!(e.diameter >= last);
            assert_eq!(e.samples_used, dirs);
            last = e.diameter;
        }
    }

    #[test]
    fn covering_preconditions() {
        let b = basis(&[&[1.0, 0.0, 0.0]]);
        let one = Mat::new(DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0])).unwrap();
        assert!(covering_diameter(&one, &b, 10, 0).is_err());
        let off = Mat::new(DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0])).unwrap();
        assert!(covering_diameter(&off, &b, 10, 0).is_err());
    }

    #[test]
    fn ring_covering_matches_closed_form() {
        // m equally spaced lines in a plane: leave-one-out diameter 2 sin(π/m)
        let b = basis(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]);
        let m = 8;
        let pts = Mat::from_fn(3, m, |i, j| {
            let a = std::f64::consts::PI * j as f64 / m as f64 + 0.1;
            match i {
                0 => a.cos(),
                2 => a.sin(),
                _ => 0.0,
            }
        })
        .unwrap();
        let eps = covering_diameter(&pts, &b, 50_000, 5).unwrap().diameter;
        let want = 2.0 * (std::f64::consts::PI / m as f64).sin();
        assert!(eps <= want + 1e-12 && want - eps < 1e-3, "{eps} vs {want}");
        let r = inradius_from_diameter(want).unwrap();
        assert!((r - (std::f64::consts::PI / m as f64).cos()).abs() < 1e-12);
    }

    #[test]
    fn nearest_neighbor_gap_examples() {
        let pts = Mat::new(DMatrix::from_column_slice(2, 3, &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0])).unwrap();
        // e2 is orthogonal to both other points
        assert!((nearest_neighbor_gap(&pts).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inradius_examples() {
        assert_eq!(inradius_from_diameter(0.0).unwrap(), 1.0);
        assert_eq!(inradius_from_diameter(2.0).unwrap(), 0.0);
        assert!((inradius_from_diameter(1.0).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(inradius_from_diameter(2.1).is_err());
        assert!(inradius_from_diameter(-0.1).is_err());
    }

    #[test]
    fn thm1_examples() {
        let c = efs_condition_thm1(0.99, 0.0, 0.7).unwrap();
        assert!(c.holds);
        assert_eq!(c.rhs, 1.0);

        let c = efs_condition_thm1(0.5, 0.5, 1.0).unwrap();
        let want = (1.0f64 - 0.0625).sqrt() - 0.5 / 12f64.powf(0.25);
        assert!((c.rhs - want).abs() < 1e-15);
        // 12^{1/4} ≈ 1.8612, the rounded 1.86 form
        assert!((fourth_root_12() - 1.86).abs() < 2e-3);
        assert!(c.holds);

        let boundary = efs_condition_thm1(want, 0.5, 1.0).unwrap();
        assert!(!boundary.holds);
        assert_eq!(boundary.condition, Condition::Thm1);
        assert!(efs_condition_thm1(1.2, 0.5, 1.0).is_err());
    }

    #[test]
    fn cor1_examples() {
        let c = efs_condition_cor1(0.0, 0.999).unwrap();
        assert_eq!(c.rhs, 1.0);
        assert!(c.holds);
        let c = efs_condition_cor1(2.0, 0.0).unwrap();
        assert_eq!(c.rhs, 0.0);
        assert!(!c.holds);
        let c = efs_condition_cor1(0.4, 0.5).unwrap();
        let want = (1.0f64 - 0.04).sqrt() / (1.0 + 0.4 / 12f64.powf(0.25));
        assert!((c.rhs - want).abs() < 1e-15);
        assert_eq!(c.holds, 0.5 < want);
        assert!(matches!(efs_condition_cor1(0.4, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn thm3_examples() {
        let orth = CrossSpectrum::from_sigma(vec![0.0; 4]).unwrap();
        let c = efs_condition_thm3(0.9, 0.7, &orth).unwrap();
        assert_eq!(c.rhs, 1.0);
        assert!(c.holds);
        assert!(!efs_condition_thm3(1.0, 0.7, &orth).unwrap().holds);

        let cs = CrossSpectrum::from_sigma(vec![0.9, 0.8, 0.5, 0.2]).unwrap();
        assert_eq!(cs.q, 4);
        let c = efs_condition_thm3(0.5, 0.3, &cs).unwrap();
        let want = (1.0f64 - 0.09 * 2.4 * 2.4).sqrt();
        assert!((c.rhs - want).abs() < 1e-12);
        assert!((2.4f64 * 2.4 - 5.76).abs() < 1e-12);

        // γ‖σ‖₁ = 1 exactly
        let cs = CrossSpectrum::from_sigma(vec![1.0, 1.0]).unwrap();
        let c = efs_condition_thm3(0.0, 0.5, &cs).unwrap();
        assert_eq!(c.rhs, 0.0);
        assert!(!c.holds);

        assert!(matches!(efs_condition_thm3(0.1, 0.5, &CrossSpectrum::from_sigma(vec![0.9, 0.8, 0.5, 0.2]).unwrap()), Err(Error::Precondition(_))));
    }

    #[test]
    fn bounding_constant_examples() {
        let x = basis(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]]);
        let y = basis(&[&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]);
        let mut r = rng(16);
        let (px, py) = (unit_points(&x, 4, &mut r), unit_points(&y, 4, &mut r));
        assert_eq!(bounding_constant(&px, &py, &x, &y).unwrap(), 0.0);

        // shared axis e1 is the only principal vector; a point on it gives γ = 1
        let x = basis(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let y = basis(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]);
        let px = Mat::new(DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.6, 0.8, 0.0])).unwrap();
        let py = Mat::new(DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0])).unwrap();
        assert!((bounding_constant(&px, &py, &x, &y).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bounding_constant_matches_brute_force() {
        let mut r = rng(17);
        for _ in 0..20 {
            let bi = random_basis(8, 3, &mut r);
            let bj = random_basis(8, 3, &mut r);
            let (yi, yj) = (unit_points(&bi, 6, &mut r), unit_points(&bj, 7, &mut r));
            let s = numerics::svd(&Mat::new(bi.phi().tr_mul(bj.phi().as_matrix())).unwrap()).unwrap();
            let q = s.rank();
            let mut want = 0.0f64;
            for m in 0..q {
                let u = bi.phi().as_matrix() * s.u.column(m);
                let v = bj.phi().as_matrix() * s.vt.row(m).transpose();
                for p in yi.column_iter() {
                    want = want.max(p.dot(&u).abs());
                }
                for p in yj.column_iter() {
                    want = want.max(p.dot(&v).abs());
                }
            }
            assert!((bounding_constant(&yi, &yj, &bi, &bj).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn erc_examples() {
        let id = Mat::identity(5).unwrap();
        assert!(erc(&id, &[0, 2]).unwrap() < 1e-14);

        let dup = Mat::new(DMatrix::from_column_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0])).unwrap();
        assert!(erc(&dup, &[0]).unwrap() >= 1.0);
        assert!(erc(&dup, &[0, 2]).is_err());
        assert!(erc(&dup, &[]).is_err());

        // direct least-squares-per-atom oracle
        let mut r = rng(18);
        let dict = gaussian(8, 12, &mut r);
        let support = [1, 5, 9];
        let sub = dict.select_columns(&support).unwrap();
        let mut want = 0.0f64;
        for i in (0..12).filter(|i| !support.contains(i)) {
            let c = numerics::lstsq(&sub, &dict.column(i).into_owned()).unwrap();
            want = want.max(c.lp_norm(1));
        }
        assert!((erc(&dict, &support).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn lemma1_examples_and_sweep() {
        assert_eq!(lemma1_gap(0.0).unwrap(), (0.0, 0.0));
        let (l, r) = lemma1_gap(1.0).unwrap();
        assert!((l - (2.0 - 3f64.sqrt()).sqrt()).abs() < 1e-15);
        assert!((l - 0.5176).abs() < 1e-4 && (r - 0.5373).abs() < 1e-4);
        for i in 0..=100 {
            let (l, r) = lemma1_gap(i as f64 / 100.0).unwrap();
            assert!(l <= r, "x = {}", i as f64 / 100.0);
        }
        assert!(lemma1_gap(1.5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn principal_angles_symmetric_and_bound_coherence(seed in any::<u64>(), k1 in 1usize..4, k2 in 1usize..4) {
            let mut r = rng(seed);
            let bi = random_basis(7, k1, &mut r);
            let bj = random_basis(7, k2, &mut r);
            let a = principal_angles(&bi, &bj).unwrap();
            let b = principal_angles(&bj, &bi).unwrap();
            prop_assert_eq!(a.sigma.len(), k1.min(k2));
            for (x, y) in a.sigma.iter().zip(&b.sigma) {
                prop_assert!((x - y).abs() < 1e-10);
            }
            let (yi, yj) = (unit_points(&bi, 5, &mut r), unit_points(&bj, 5, &mut r));
            prop_assert!(mutual_coherence(&yi, &yj).unwrap() <= a.max_cos() + 1e-8);
        }
    }
}
