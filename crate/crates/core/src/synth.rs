//! Synthetic unions of two subspaces with a prescribed cross-spectrum, and the
//! coefficient models used to sample points from them.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{principal_angles, CrossSpectrum, SubspaceBasis};
use crate::numerics::Mat;

/// Samples per block holding one pair of shifted atoms.
pub const SHIFT_BLOCK: usize = 32;
/// Width of the Lorentzian atom `1 / (1 + (t/s)²)`, in samples.
pub const LORENTZIAN_ATOM_WIDTH: f64 = 1.0;
/// Width of the exponential atom `exp(−|t|/s)`, in samples.
pub const EXPONENTIAL_ATOM_WIDTH: f64 = 1.5;
/// Leading cosine of the Lorentzian cross-spectrum.
pub const LORENTZIAN_PEAK: f64 = 0.45;
/// Decay length of the Lorentzian cross-spectrum `peak / (1 + (i/w)²)`.
pub const LORENTZIAN_DECAY: f64 = 60.0;
/// Leading cosine of the exponential cross-spectrum.
pub const EXPONENTIAL_PEAK: f64 = 0.7;
/// Decay length of the exponential cross-spectrum `peak · exp(−i/w)`.
pub const EXPONENTIAL_DECAY: f64 = 50.0;

const DEGENERATE_NORM: f64 = 1e-12;
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumShape {
    /// `q` identical atom pairs, the remaining `k − q` orthogonal.
    Orthoblock,
    /// Shifted Lorentzian atoms; cosines `peak / (1 + (i/w)²)`, slow decay.
    Lorentzian,
    /// Shifted exponential atoms; cosines `peak · exp(−i/w)`, the fastest
    /// relative decay of the shapes.
    Exponential,
    /// The first `q` cosines, given explicitly (nonincreasing, in `[0, 1]`).
    Explicit(Vec<f64>),
}

impl SpectrumShape {
    pub fn name(&self) -> &'static str {
        match self {
            SpectrumShape::Orthoblock => "orthoblock",
            SpectrumShape::Lorentzian => "lorentzian",
            SpectrumShape::Exponential => "exponential",
            SpectrumShape::Explicit(_) => "explicit",
        }
    }

    fn is_shift(&self) -> bool {
        matches!(self, SpectrumShape::Lorentzian | SpectrumShape::Exponential)
    }

    /// Target cosines for the first `q` principal directions.
    pub fn target_sigma(&self, q: usize) -> Vec<f64> {
        match self {
            SpectrumShape::Orthoblock => vec![1.0; q],
            SpectrumShape::Lorentzian => (0..q)
                .map(|i| LORENTZIAN_PEAK / (1.0 + (i as f64 / LORENTZIAN_DECAY).powi(2)))
                .collect(),
            SpectrumShape::Exponential => (0..q)
                .map(|i| EXPONENTIAL_PEAK * (-(i as f64) / EXPONENTIAL_DECAY).exp())
                .collect(),
            SpectrumShape::Explicit(s) => s.iter().take(q).copied().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientModel {
    /// Uniform on the unit sphere of the subspace.
    M1,
    /// Bounded energy: the common component carries weight `tau`.
    M2 { tau: f64 },
}

/// Parameters of a two-subspace union.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionSpec {
    /// Ambient dimension; `None` picks the smallest default that fits the shape.
    pub ambient: Option<usize>,
    /// Subspace dimension.
    pub k: usize,
    /// Overlap: number of nonzero cosines.
    pub q: usize,
    /// Points per subspace.
    pub d: usize,
    pub model: CoefficientModel,
    pub spectrum: SpectrumShape,
    pub seed: u64,
}

impl UnionSpec {
    pub fn new(k: usize, q: usize, d: usize, model: CoefficientModel, spectrum: SpectrumShape, seed: u64) -> Result<Self> {
        let s = UnionSpec {
            ambient: None,
            k,
            q,
            d,
            model,
            spectrum,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_ambient(mut self, n: usize) -> Result<Self> {
        self.ambient = Some(n);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::domain("subspace dimension k must be at least 1"));
        }
        if self.q > self.k {
            return Err(Error::domain(format!("overlap q = {} exceeds k = {}", self.q, self.k)));
        }
        if self.d == 0 {
            return Err(Error::domain("points per subspace d must be at least 1"));
        }
        if let CoefficientModel::M2 { tau } = self.model {
            if !(0.0..1.0).contains(&tau) {
                return Err(Error::domain(format!("common energy tau = {tau} outside [0, 1)")));
            }
        }
        if let SpectrumShape::Explicit(s) = &self.spectrum {
            if s.len() != self.q {
                return Err(Error::domain(format!(
                    "explicit cross-spectrum has {} entries but q = {}",
                    s.len(),
                    self.q
                )));
            }
            if s.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::domain("explicit cross-spectrum entries must lie in [0, 1]"));
            }
            if s.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::domain("explicit cross-spectrum must be nonincreasing"));
            }
            if s.contains(&0.0) {
                return Err(Error::domain("explicit cross-spectrum entries must be nonzero (zeros are implied past q)"));
            }
        }
        let n = self.ambient_dim();
        let need = self.min_ambient();
        if n < need {
            return Err(Error::domain(format!(
                "ambient dimension n = {n} too small: {} with k = {}, q = {} needs n >= {need}",
                self.spectrum.name(),
                self.k,
                self.q
            )));
        }
        Ok(())
    }

    /// Smallest ambient dimension the construction fits in.
    pub fn min_ambient(&self) -> usize {
        let (k, q) = (self.k, self.q);
        match self.spectrum {
            SpectrumShape::Orthoblock => 2 * k - q,
            SpectrumShape::Explicit(_) => 2 * k,
            SpectrumShape::Lorentzian | SpectrumShape::Exponential => (2 * k - q) * SHIFT_BLOCK,
        }
    }

    /// Ambient dimension in use: explicit, else `2·k·p` with `p = 2` subspaces
    /// (one shift block per atom for the shift constructions).
    pub fn ambient_dim(&self) -> usize {
        self.ambient.unwrap_or(if self.spectrum.is_shift() {
            2 * self.k * SHIFT_BLOCK
        } else {
            4 * self.k
        })
    }

    /// `δ = q / k`.
    pub fn overlap_ratio(&self) -> f64 {
        self.q as f64 / self.k as f64
    }

    /// `ρ = k / d`.
    pub fn oversampling_ratio(&self) -> f64 {
        self.k as f64 / self.d as f64
    }
}

/// Points of a union with their labels and generating bases.
#[derive(Debug, Clone)]
pub struct Ensemble {
    /// Unit-norm columns; subspace 0 first, then subspace 1.
    pub points: Mat,
    pub labels: Vec<usize>,
    pub bases: Vec<SubspaceBasis>,
    pub cross: CrossSpectrum,
    pub spec: UnionSpec,
    /// Mean fraction of energy in the common directions (M2 only).
    pub common_energy: Option<f64>,
}

impl Ensemble {
    /// Largest deviation from unit norm and from the labelled subspace.
    pub fn max_invariant_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (j, c) in self.points.column_iter().enumerate() {
            worst = worst.max((c.norm() - 1.0).abs());
            let phi = self.bases[self.labels[j]].phi();
            let coef = phi.tr_mul(&c);
            worst = worst.max((c - phi.as_matrix() * coef).norm());
        }
        worst
    }
}

fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

/// Discretized atom on one block, centered at `center`, unit norm.
fn atom(shape: &SpectrumShape, center: f64) -> DVector<f64> {
    let v = DVector::from_fn(SHIFT_BLOCK, |t, _| {
        let x = t as f64 - center;
        match shape {
            SpectrumShape::Lorentzian => 1.0 / (1.0 + (x / LORENTZIAN_ATOM_WIDTH).powi(2)),
            _ => (-x.abs() / EXPONENTIAL_ATOM_WIDTH).exp(),
        }
    });
    let n = v.norm();
    v / n
}

/// Atom pair at center separation `shift`, placed symmetrically in the block.
fn atom_pair(shape: &SpectrumShape, shift: f64) -> (DVector<f64>, DVector<f64>) {
    let mid = (SHIFT_BLOCK as f64 - 1.0) / 2.0;
    (atom(shape, mid - shift / 2.0), atom(shape, mid + shift / 2.0))
}

/// Center separation whose atom pair has inner product `target`, by bisection.
fn shift_for(shape: &SpectrumShape, target: f64) -> Result<f64> {
    let ip = |s: f64| {
        let (a, b) = atom_pair(shape, s);
        a.dot(&b)
    };
    if target >= 1.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, SHIFT_BLOCK as f64 - 1.0);
    if ip(hi) > target {
        return Err(Error::domain(format!(
            "cross-spectrum value {target:.3e} is below what a {}-sample {} block reaches",
            SHIFT_BLOCK,
            shape.name()
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ip(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two orthonormal bases `Ψ`, `Φ` with `ΨᵀΦ` diagonal, carrying the requested
/// cross-spectrum in the first `q` entries and zeros after.
pub fn build_subspace_pair(spec: &UnionSpec) -> Result<(SubspaceBasis, SubspaceBasis, CrossSpectrum)> {
    spec.validate()?;
    let (n, k, q) = (spec.ambient_dim(), spec.k, spec.q);
    let sigma = spec.spectrum.target_sigma(q);
    let mut psi = DMatrix::zeros(n, k);
    let mut phi = DMatrix::zeros(n, k);
    match &spec.spectrum {
        SpectrumShape::Orthoblock => {
            for i in 0..k {
                psi.set_column(i, &unit(n, i));
                phi.set_column(i, &unit(n, if i < q { i } else { k + i - q }));
            }
        }
        SpectrumShape::Explicit(_) => {
            for i in 0..q {
                let s = sigma[i];
                psi.set_column(i, &unit(n, 2 * i));
                phi.set_column(i, &(unit(n, 2 * i) * s + unit(n, 2 * i + 1) * (1.0 - s * s).max(0.0).sqrt()));
            }
            for i in q..k {
                psi.set_column(i, &unit(n, 2 * q + (i - q)));
                phi.set_column(i, &unit(n, 2 * q + (k - q) + (i - q)));
            }
        }
        shape => {
            // Block i holds ψᵢ (and φᵢ when i < q); blocks k.. hold the
            // unpaired φᵢ.
            let lone = atom(shape, (SHIFT_BLOCK as f64 - 1.0) / 2.0);
            for i in 0..k {
                let start = i * SHIFT_BLOCK;
                if i < q {
                    let (a, b) = atom_pair(shape, shift_for(shape, sigma[i])?);
                    psi.view_mut((start, i), (SHIFT_BLOCK, 1)).copy_from(&a);
                    phi.view_mut((start, i), (SHIFT_BLOCK, 1)).copy_from(&b);
                } else {
                    psi.view_mut((start, i), (SHIFT_BLOCK, 1)).copy_from(&lone);
                    let other = (k + i - q) * SHIFT_BLOCK;
                    phi.view_mut((other, i), (SHIFT_BLOCK, 1)).copy_from(&lone);
                }
            }
        }
    }
    let psi = SubspaceBasis::new(Mat::new(psi)?)?;
    let phi = SubspaceBasis::new(Mat::new(phi)?)?;
    let cross = principal_angles(&psi, &phi)?;
    Ok((psi, phi, cross))
}

fn gaussian_coeffs(k: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(k, |_, _| rng.sample(StandardNormal))
}

/// `d` points `Φα / ‖Φα‖` with `α` standard normal.
pub fn sample_m1(basis: &SubspaceBasis, d: usize, rng: &mut impl Rng) -> Result<Mat> {
    if d == 0 {
        return Err(Error::domain("need at least one point"));
    }
    let phi = basis.phi().as_matrix();
    let mut out = DMatrix::zeros(basis.ambient(), d);
    for j in 0..d {
        let y = (0..MAX_REDRAWS)
            .map(|_| phi * gaussian_coeffs(basis.dim(), rng))
            .find(|y| y.norm() >= DEGENERATE_NORM)
            .ok_or_else(|| Error::Numerical("repeated degenerate draws".into()))?;
        let nrm = y.norm();
        out.set_column(j, &(y / nrm));
    }
    Mat::new(out)
}

/// Bounded-energy points: `τ·ŷc + (1 − τ)·ŷd`, renormalized, where `ŷc` is the
/// normalized component on the first `q` basis directions and `ŷd` on the rest.
pub fn sample_m2(basis: &SubspaceBasis, d: usize, q: usize, tau: f64, rng: &mut impl Rng) -> Result<Mat> {
    let k = basis.dim();
    if d == 0 {
        return Err(Error::domain("need at least one point"));
    }
    if q == 0 || q >= k {
        return Err(Error::domain(format!("bounded-energy model needs 0 < q < k, got q = {q}, k = {k}")));
    }
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::domain(format!("common energy tau = {tau} outside [0, 1)")));
    }
    let phi = basis.phi().as_matrix();
    let mut out = DMatrix::zeros(basis.ambient(), d);
    for j in 0..d {
        let (yc, yd) = (0..MAX_REDRAWS)
            .map(|_| {
                let a = gaussian_coeffs(k, rng);
                (phi.columns(0, q) * a.rows(0, q), phi.columns(q, k - q) * a.rows(q, k - q))
            })
            .find(|(c, s)| c.norm() >= DEGENERATE_NORM && s.norm() >= DEGENERATE_NORM)
            .ok_or_else(|| Error::Numerical("repeated degenerate draws".into()))?;
        let y = yc.normalize() * tau + yd.normalize() * (1.0 - tau);
        let nrm = y.norm();
        out.set_column(j, &(y / nrm));
    }
    Mat::new(out)
}

/// Builds the pair and samples `d` points per subspace.
///
/// The bounded-energy model needs both a common and a disjoint part; with
/// `q = 0` or `q = k` it falls back to the uniform model.
pub fn generate_union(spec: &UnionSpec) -> Result<Ensemble> {
    let (psi, phi, cross) = build_subspace_pair(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (k, q, d) = (spec.k, spec.q, spec.d);
    let bounded = matches!(spec.model, CoefficientModel::M2 { .. }) && q > 0 && q < k;
    let mut blocks = Vec::with_capacity(2);
    for b in [&psi, &phi] {
        blocks.push(match spec.model {
            CoefficientModel::M2 { tau } if bounded => sample_m2(b, d, q, tau, &mut rng)?,
            _ => sample_m1(b, d, &mut rng)?,
        });
    }
    let n = spec.ambient_dim();
    let mut points = DMatrix::zeros(n, 2 * d);
    points.columns_mut(0, d).copy_from(blocks[0].as_matrix());
    points.columns_mut(d, d).copy_from(blocks[1].as_matrix());
    let common_energy = bounded.then(|| {
        let mut total = 0.0;
        for (b, y) in [&psi, &phi].iter().zip(&blocks) {
            let c = b.phi().columns(0, q).tr_mul(y.as_matrix());
            total += c.column_iter().map(|v| v.norm_squared()).sum::<f64>();
        }
        total / (2 * d) as f64
    });
    Ok(Ensemble {
        points: Mat::new(points)?,
        labels: (0..2 * d).map(|j| usize::from(j >= d)).collect(),
        bases: vec![psi, phi],
        cross,
        spec: spec.clone(),
        common_energy,
    })
}

/// Two planes in `R⁴`, each sampled by equally spaced lines, so that the
/// leave-one-out covering diameter of every cluster is known in closed form.
#[derive(Debug, Clone)]
pub struct RingPair {
    pub points: Mat,
    pub labels: Vec<usize>,
    pub bases: [SubspaceBasis; 2],
    /// Principal-angle cosines of the two planes.
    pub cosines: [f64; 2],
    /// Lines per cluster.
    pub lines: [usize; 2],
    /// Leave-one-out covering diameter `2 sin(π/m)` per cluster.
    pub eps: [f64; 2],
}

/// Leave-one-out covering diameter of `m ≥ 2` equally spaced lines in a plane.
pub fn ring_covering_diameter(m: usize) -> f64 {
    2.0 * (std::f64::consts::PI / m as f64).sin()
}

/// Random ring pair: plane 0 is `span(e₀, e₁)`, plane 1 is tilted by the
/// given principal-angle cosines. Each cluster gets a random phase and random
/// signs per line.
pub fn ring_pair(lines: [usize; 2], cosines: [f64; 2], rng: &mut impl Rng) -> Result<RingPair> {
    if lines.iter().any(|&m| m < 2) {
        return Err(Error::domain("each ring needs at least two lines"));
    }
    if cosines.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(Error::domain("cosines must lie in [0, 1]"));
    }
    let psi = DMatrix::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let (c0, c1) = (cosines[0], cosines[1]);
    let (s0, s1) = ((1.0 - c0 * c0).sqrt(), (1.0 - c1 * c1).sqrt());
    let phi = DMatrix::from_column_slice(4, 2, &[c0, 0.0, s0, 0.0, 0.0, c1, 0.0, s1]);
    let bases = [SubspaceBasis::new(Mat::new(psi)?)?, SubspaceBasis::new(Mat::new(phi)?)?];
    let total = lines[0] + lines[1];
    let mut points = DMatrix::zeros(4, total);
    let mut labels = Vec::with_capacity(total);
    let mut col = 0;
    for (c, &m) in lines.iter().enumerate() {
        let phase = rng.random_range(0.0..std::f64::consts::PI);
        let b = bases[c].phi().as_matrix();
        for j in 0..m {
            let a = phase + std::f64::consts::PI * j as f64 / m as f64;
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let v = (b.column(0) * a.cos() + b.column(1) * a.sin()) * sign;
            points.set_column(col, &v.normalize());
            labels.push(c);
            col += 1;
        }
    }
    Ok(RingPair {
        points: Mat::new(points)?,
        labels,
        bases,
        cosines,
        lines,
        eps: [ring_covering_diameter(lines[0]), ring_covering_diameter(lines[1])],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{bounding_constant, cluster_columns, covering_diameter, mutual_coherence};
    use crate::numerics::test_util::rng;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    fn spec(k: usize, q: usize, d: usize, shape: SpectrumShape) -> UnionSpec {
        UnionSpec::new(k, q, d, CoefficientModel::M1, shape, 7).unwrap()
    }

    #[test]
    fn orthoblock_cross_spectrum() {
        let (_, _, cross) = build_subspace_pair(&spec(20, 15, 10, SpectrumShape::Orthoblock)).unwrap();
        assert_eq!(cross.q, 15);
        for (i, s) in cross.sigma.iter().enumerate() {
            let want = if i < 15 { 1.0 } else { 0.0 };
            assert!((s - want).abs() < 1e-12);
        }
        assert!((cross.overlap_ratio() - 0.75).abs() < 1e-15);

        let (_, _, cross) = build_subspace_pair(&spec(5, 0, 10, SpectrumShape::Orthoblock)).unwrap();
        assert_eq!(cross.q, 0);
        assert!(cross.sigma.iter().all(|s| *s < 1e-15));
    }

    #[test]
    fn cross_gram_is_diagonal_and_matches_targets() {
        for shape in [
            SpectrumShape::Orthoblock,
            SpectrumShape::Lorentzian,
            SpectrumShape::Exponential,
            SpectrumShape::Explicit(vec![0.9, 0.5, 0.1]),
        ] {
            let s = spec(6, 3, 5, shape.clone());
            let (psi, phi, cross) = build_subspace_pair(&s).unwrap();
            let g = psi.phi().tr_mul(phi.phi().as_matrix());
            let target = shape.target_sigma(3);
            for i in 0..6 {
                for j in 0..6 {
                    let want = if i == j && i < 3 { target[i] } else { 0.0 };
                    assert!((g[(i, j)] - want).abs() < 1e-10, "{shape:?} ({i},{j}) {} vs {want}", g[(i, j)]);
                }
            }
            // analyzer recovers the generator's spectrum
            for (i, got) in cross.sigma.iter().enumerate() {
                let want = if i < 3 { target[i] } else { 0.0 };
                assert!((got - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn shifted_atoms_match_direct_inner_products() {
        let s = spec(8, 8, 5, SpectrumShape::Exponential);
        let (psi, phi, _) = build_subspace_pair(&s).unwrap();
        let target = SpectrumShape::Exponential.target_sigma(8);
        for i in 0..8 {
            let ip = psi.phi().column(i).dot(&phi.phi().column(i)).abs();
            assert!((ip - target[i]).abs() < 1e-10);
        }
        // inner product falls monotonically with the shift
        let ips: Vec<f64> = (0..20)
            .map(|s| {
                let (a, b) = atom_pair(&SpectrumShape::Lorentzian, s as f64);
                a.dot(&b)
            })
            .collect();
        assert!(ips.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn shape_decay_profiles() {
        let l = SpectrumShape::Lorentzian.target_sigma(20);
        let e = SpectrumShape::Exponential.target_sigma(20);
        // shifted atoms never coincide: the subspaces are disjoint
        assert!(l[0] < 1.0 && e[0] < 1.0);
        assert!(l.windows(2).all(|w| w[1] < w[0]) && e.windows(2).all(|w| w[1] < w[0]));
        // relative to its leading cosine, the exponential decays faster
        assert!(l.iter().zip(&e).skip(1).all(|(a, b)| b / e[0] < a / l[0]));
    }

    #[test]
    fn infeasible_dimensions_are_rejected() {
        assert!(spec(5, 2, 5, SpectrumShape::Orthoblock).with_ambient(7).is_err());
        assert!(spec(5, 2, 5, SpectrumShape::Orthoblock).with_ambient(8).is_ok());
        assert!(UnionSpec::new(5, 6, 5, CoefficientModel::M1, SpectrumShape::Orthoblock, 0).is_err());
        assert!(UnionSpec::new(5, 2, 5, CoefficientModel::M2 { tau: 1.0 }, SpectrumShape::Orthoblock, 0).is_err());
        assert!(UnionSpec::new(3, 2, 5, CoefficientModel::M1, SpectrumShape::Explicit(vec![0.2, 0.5]), 0).is_err());
    }

    #[test]
    fn m1_examples() {
        let b = SubspaceBasis::new(Mat::new(DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 0.0])).unwrap()).unwrap();
        let y = sample_m1(&b, 10, &mut rng(1)).unwrap();
        for c in y.column_iter() {
            assert!((c[1].abs() - 1.0).abs() < 1e-15);
        }
        let (psi, _, _) = build_subspace_pair(&spec(4, 0, 1, SpectrumShape::Orthoblock)).unwrap();
        let y = sample_m1(&psi, 10_000, &mut rng(2)).unwrap();
        let mean = y.column_mean();
        assert!(mean.amax() < 0.05);
        let again = sample_m1(&psi, 10_000, &mut rng(2)).unwrap();
        assert_eq!(y, again);
    }

    #[test]
    fn m2_energy_split() {
        let (psi, _, _) = build_subspace_pair(&spec(6, 2, 1, SpectrumShape::Orthoblock)).unwrap();
        let y = sample_m2(&psi, 50, 2, 0.0, &mut rng(3)).unwrap();
        assert!(psi.phi().columns(0, 2).tr_mul(y.as_matrix()).amax() < 1e-15);
        for tau in [0.2, 0.5, 0.8, 0.99] {
            let y = sample_m2(&psi, 50, 2, tau, &mut rng(4)).unwrap();
            let want = tau * tau / (tau * tau + (1.0 - tau) * (1.0 - tau));
            for c in y.column_iter() {
                assert!((c.norm() - 1.0).abs() < 1e-12);
                let e = psi.phi().columns(0, 2).tr_mul(&c).norm_squared();
                assert!((e - want).abs() < 1e-12);
            }
        }
        assert!(sample_m2(&psi, 5, 0, 0.5, &mut rng(5)).is_err());
        assert!(sample_m2(&psi, 5, 6, 0.5, &mut rng(5)).is_err());
    }

    #[test]
    fn orthogonal_union_is_incoherent() {
        let e = generate_union(&spec(20, 0, 100, SpectrumShape::Orthoblock)).unwrap();
        let a = cluster_columns(&e.points, &e.labels, 0).unwrap();
        let b = cluster_columns(&e.points, &e.labels, 1).unwrap();
        assert!(mutual_coherence(&a, &b).unwrap() < 0.5);
        assert_eq!(e.cross.q, 0);
    }

    #[test]
    fn identical_bases_at_full_overlap() {
        let e = generate_union(&spec(4, 4, 10, SpectrumShape::Orthoblock)).unwrap();
        assert_eq!(e.bases[0], e.bases[1]);
        assert!(e.cross.sigma.iter().all(|s| (s - 1.0).abs() < 1e-12));
    }

    #[test]
    fn large_ensemble_invariants() {
        let e = generate_union(&spec(50, 20, 500, SpectrumShape::Orthoblock)).unwrap();
        assert_eq!(e.points.ncols(), 1000);
        assert!(e.max_invariant_error() < 1e-10);
        let e = generate_union(&spec(10, 5, 30, SpectrumShape::Lorentzian)).unwrap();
        assert!(e.max_invariant_error() < 1e-10);
    }

    #[test]
    fn m2_falls_back_at_edge_overlaps_and_reports_energy() {
        let mk = |q, tau| UnionSpec::new(6, q, 20, CoefficientModel::M2 { tau }, SpectrumShape::Orthoblock, 3).unwrap();
        assert!(generate_union(&mk(0, 0.3)).unwrap().common_energy.is_none());
        assert!(generate_union(&mk(6, 0.3)).unwrap().common_energy.is_none());
        let e = generate_union(&mk(3, 0.3)).unwrap();
        let want = 0.09 / (0.09 + 0.49);
        assert!((e.common_energy.unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn bounding_constant_shrinks_with_tau() {
        let mut last = f64::INFINITY;
        for tau in [0.9, 0.6, 0.3, 0.1] {
            let s = UnionSpec::new(8, 4, 40, CoefficientModel::M2 { tau }, SpectrumShape::Orthoblock, 11).unwrap();
            let e = generate_union(&s).unwrap();
            let a = cluster_columns(&e.points, &e.labels, 0).unwrap();
            let b = cluster_columns(&e.points, &e.labels, 1).unwrap();
            let g = bounding_constant(&a, &b, &e.bases[0], &e.bases[1]).unwrap();
            assert!(g <= last + 1e-12);
            last = g;
        }
    }

    #[test]
    fn ring_pair_geometry() {
        let r = ring_pair([6, 9], [0.8, 0.3], &mut rng(8)).unwrap();
        let cross = principal_angles(&r.bases[0], &r.bases[1]).unwrap();
        assert!((cross.sigma[0] - 0.8).abs() < 1e-12 && (cross.sigma[1] - 0.3).abs() < 1e-12);
        for c in 0..2 {
            let pts = cluster_columns(&r.points, &r.labels, c).unwrap();
            let est = covering_diameter(&pts, &r.bases[c], 20_000, 1).unwrap().diameter;
            assert!(est <= r.eps[c] + 1e-12 && r.eps[c] - est < 5e-3);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn generation_is_deterministic_and_valid(seed in any::<u64>(), q in 0usize..6) {
            let s = UnionSpec::new(5, q, 12, CoefficientModel::M1, SpectrumShape::Orthoblock, seed).unwrap();
            let a = generate_union(&s).unwrap();
            let b = generate_union(&s).unwrap();
            prop_assert!(a.points == b.points);
            prop_assert!(a.max_invariant_error() < 1e-10);
        }
    }
}
