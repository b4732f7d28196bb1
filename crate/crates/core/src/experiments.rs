//! Monte Carlo estimates of the probability of exact feature selection over
//! grids of overlap and sampling density (or common energy).
//!
//! Every trial draws its own seed from `(base_seed, row, col, trial)`, and
//! results land in fixed slots, so a grid is bit-identical for any worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::selection::{efs_rate, nn_feature_sets, omp_efs_flags, StoppingRule};
use crate::synth::{generate_union, CoefficientModel, SpectrumShape, UnionSpec};

/// Cells with more than this fraction of failed trials are invalid.
pub const MAX_FAILED_FRACTION: f64 = 0.1;
/// Desk-scale trial count.
pub const DEFAULT_TRIALS: usize = 100;
/// Probability level that defines the phase boundary.
pub const BOUNDARY_LEVEL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Omp,
    Nn,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Omp => "omp",
            Method::Nn => "nn",
        }
    }
}

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one trial: SplitMix64 chained over the base seed, the cell
/// coordinates and the trial index.
pub fn mix64(base_seed: u64, row: u64, col: u64, trial: u64) -> u64 {
    [row, col, trial].iter().fold(splitmix(base_seed), |h, &v| splitmix(h ^ splitmix(v)))
}

/// Second grid axis.
#[derive(Debug, Clone, PartialEq)]
pub enum SecondAxis {
    /// Oversampling ratios `ρ = k/d` under the uniform model.
    Rho(Vec<f64>),
    /// Common energies `τ` under the bounded-energy model at a fixed `ρ`.
    Tau { taus: Vec<f64>, rho: f64 },
}

impl SecondAxis {
    pub fn values(&self) -> &[f64] {
        match self {
            SecondAxis::Rho(v) => v,
            SecondAxis::Tau { taus, .. } => taus,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SecondAxis::Rho(_) => "rho",
            SecondAxis::Tau { .. } => "tau",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Overlap ratios `δ = q/k`.
    pub deltas: Vec<f64>,
    pub axis: SecondAxis,
    pub k: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub method: Method,
    pub spectrum: SpectrumShape,
}

impl GridSpec {
    pub fn new(deltas: Vec<f64>, axis: SecondAxis, k: usize, trials: usize, base_seed: u64, method: Method) -> Result<Self> {
        let g = GridSpec {
            deltas,
            axis,
            k,
            trials,
            base_seed,
            method,
            spectrum: SpectrumShape::Orthoblock,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::domain("k must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        if self.deltas.is_empty() || self.axis.values().is_empty() {
            return Err(Error::domain("grid axes must be nonempty"));
        }
        if let Some(d) = self.deltas.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            return Err(Error::domain(format!("delta = {d} outside [0, 1]")));
        }
        let check_rho = |r: f64| {
            if r > 0.0 && r <= 1.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("rho = {r} outside (0, 1]")))
            }
        };
        match &self.axis {
            SecondAxis::Rho(rhos) => rhos.iter().try_for_each(|&r| check_rho(r))?,
            SecondAxis::Tau { taus, rho } => {
                check_rho(*rho)?;
                if let Some(t) = taus.iter().find(|t| !(0.0..1.0).contains(*t)) {
                    return Err(Error::domain(format!("tau = {t} outside [0, 1)")));
                }
            }
        }
        Ok(())
    }

    /// Union parameters of cell `(row, col)` with the given seed.
    pub fn cell_spec(&self, row: usize, col: usize, seed: u64) -> Result<UnionSpec> {
        let k = self.k;
        let q = overlap_from_ratio(k, self.deltas[row]);
        let (rho, model) = match &self.axis {
            SecondAxis::Rho(r) => (r[col], CoefficientModel::M1),
            SecondAxis::Tau { taus, rho } => (*rho, CoefficientModel::M2 { tau: taus[col] }),
        };
        UnionSpec::new(k, q, points_from_ratio(k, rho), model, self.spectrum.clone(), seed)
    }
}

/// `q = round(δ·k)`.
pub fn overlap_from_ratio(k: usize, delta: f64) -> usize {
    ((delta * k as f64).round() as usize).min(k)
}

/// `d = round(k/ρ)`, at least 1.
pub fn points_from_ratio(k: usize, rho: f64) -> usize {
    ((k as f64 / rho).round() as usize).max(1)
}

/// Monte Carlo estimate for one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellEstimate {
    /// Mean per-point EFS fraction over completed trials (NaN if none).
    pub p_efs: f64,
    pub completed: usize,
    pub failed: usize,
    /// First failure message, if any.
    pub diagnostic: Option<String>,
}

impl CellEstimate {
    pub fn valid(&self) -> bool {
        let total = self.completed + self.failed;
        self.completed > 0 && (self.failed as f64) <= MAX_FAILED_FRACTION * total as f64
    }

    fn from_trials(results: &[Result<f64>]) -> Self {
        let mut sum = 0.0;
        let mut completed = 0;
        let mut diagnostic = None;
        for r in results {
            match r {
                Ok(v) => {
                    sum += v;
                    completed += 1;
                }
                Err(e) => {
                    diagnostic.get_or_insert_with(|| e.to_string());
                }
            }
        }
        CellEstimate {
            p_efs: if completed > 0 { sum / completed as f64 } else { f64::NAN },
            completed,
            failed: results.len() - completed,
            diagnostic,
        }
    }
}

/// EFS fraction of one generated ensemble, for each requested method.
fn trial_rates(spec: &UnionSpec, methods: &[Method]) -> Vec<Result<f64>> {
    let ens = match generate_union(spec) {
        Ok(e) => e,
        Err(e) => return methods.iter().map(|_| Err(e.clone())).collect(),
    };
    methods
        .iter()
        .map(|m| {
            let exact = match m {
                Method::Omp => omp_efs_flags(&ens.points, &ens.labels, StoppingRule::Sparsity(spec.k))?,
                Method::Nn => {
                    let sets = nn_feature_sets(&ens.points, spec.k)?;
                    return efs_rate(&sets, &ens.labels);
                }
            };
            Ok(exact.iter().filter(|e| **e).count() as f64 / exact.len() as f64)
        })
        .collect()
}

/// Mean EFS fraction of `spec` over `trials` unions drawn with seeds
/// `mix64(base_seed, 0, 0, t)`; the seed inside `spec` is ignored.
pub fn efs_probability(spec: &UnionSpec, method: Method, trials: usize, base_seed: u64) -> Result<CellEstimate> {
    spec.validate()?;
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let results: Vec<Result<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut s = spec.clone();
            s.seed = mix64(base_seed, 0, 0, t as u64);
            trial_rates(&s, &[method]).pop().expect("one method")
        })
        .collect();
    Ok(CellEstimate::from_trials(&results))
}

/// Estimated probability of EFS over a `δ × (ρ | τ)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub deltas: Vec<f64>,
    pub axis: SecondAxis,
    pub method: Method,
    /// `cells[row][col]`, row indexing `δ`.
    pub cells: Vec<Vec<CellEstimate>>,
}

impl PhaseGrid {
    pub fn p_efs(&self, row: usize, col: usize) -> f64 {
        self.cells[row][col].p_efs
    }

    /// The probability column along `δ` for the `col`-th second-axis value.
    pub fn column(&self, col: usize) -> Vec<f64> {
        self.cells.iter().map(|r| r[col].p_efs).collect()
    }

    /// Phase boundary along `δ` for column `col`; see [`boundary`].
    pub fn boundary(&self, col: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .deltas
            .iter()
            .zip(&self.cells)
            .filter(|(_, r)| r[col].valid())
            .map(|(d, r)| (*d, r[col].p_efs))
            .collect();
        boundary(&pts)
    }
}

/// First `x` where `y` drops below [`BOUNDARY_LEVEL`], linearly interpolated
/// from the previous grid point. `None` if it never does.
pub fn boundary(points: &[(f64, f64)]) -> Option<f64> {
    let i = points.iter().position(|&(_, p)| p < BOUNDARY_LEVEL)?;
    if i == 0 {
        return Some(points[0].0);
    }
    let ((x0, y0), (x1, y1)) = (points[i - 1], points[i]);
    Some(x0 + (y0 - BOUNDARY_LEVEL) / (y0 - y1) * (x1 - x0))
}

/// Runs every `(cell, trial)` once and scores each requested method on the
/// same ensemble, so multi-method grids are paired.
pub fn run_grid(grid: &GridSpec, methods: &[Method]) -> Result<Vec<PhaseGrid>> {
    grid.validate()?;
    if methods.is_empty() {
        return Err(Error::domain("no methods requested"));
    }
    let (rows, cols, trials) = (grid.deltas.len(), grid.axis.values().len(), grid.trials);
    // Validate every cell before launching work.
    for r in 0..rows {
        for c in 0..cols {
            grid.cell_spec(r, c, 0)?;
        }
    }
    let results: Vec<Vec<Result<f64>>> = (0..rows * cols * trials)
        .into_par_iter()
        .map(|task| {
            let (cell, t) = (task / trials, task % trials);
            let (r, c) = (cell / cols, cell % cols);
            let seed = mix64(grid.base_seed, r as u64, c as u64, t as u64);
            match grid.cell_spec(r, c, seed) {
                Ok(spec) => trial_rates(&spec, methods),
                Err(e) => methods.iter().map(|_| Err(e.clone())).collect(),
            }
        })
        .collect();
    Ok(methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| {
            let cells = (0..rows)
                .map(|r| {
                    (0..cols)
                        .map(|c| {
                            let start = (r * cols + c) * trials;
                            let per_trial: Vec<Result<f64>> =
                                results[start..start + trials].iter().map(|v| v[mi].clone()).collect();
                            CellEstimate::from_trials(&per_trial)
                        })
                        .collect()
                })
                .collect();
            PhaseGrid {
                deltas: grid.deltas.clone(),
                axis: grid.axis.clone(),
                method,
                cells,
            }
        })
        .collect())
}

/// Probability-of-EFS grid for the grid's method.
pub fn phase_transition(grid: &GridSpec) -> Result<PhaseGrid> {
    Ok(run_grid(grid, &[grid.method])?.remove(0))
}

/// OMP and NN grids computed on identical ensembles.
pub fn omp_vs_nn(grid: &GridSpec) -> Result<(PhaseGrid, PhaseGrid)> {
    let mut g = run_grid(grid, &[Method::Omp, Method::Nn])?;
    let nn = g.pop().expect("two grids");
    let omp = g.pop().expect("two grids");
    Ok((omp, nn))
}

/// OMP grid over `δ × τ` under the bounded-energy model at fixed `ρ`.
pub fn bounded_energy_sweep(
    k: usize,
    rho: f64,
    deltas: Vec<f64>,
    taus: Vec<f64>,
    trials: usize,
    seed: u64,
) -> Result<PhaseGrid> {
    let grid = GridSpec::new(deltas, SecondAxis::Tau { taus, rho }, k, trials, seed, Method::Omp)?;
    phase_transition(&grid)
}
