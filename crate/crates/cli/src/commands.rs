//! Subcommands of the `ssc` binary.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ssc_core::clustering::{affinity, clustering_error, coefficient_matrix, graph_laplacian, spectral_bipartition};
use ssc_core::experiments::{boundary, run_grid, GridSpec, Method, PhaseGrid, SecondAxis};
use ssc_core::geometry::{
    bounding_constant, cluster_columns, covering_diameter, efs_condition_cor1, efs_condition_thm1, efs_condition_thm3,
    erc, max_mutual_coherence, principal_angles, DEFAULT_COVER_DIRS,
};
use ssc_core::selection::{efs_check, nn_feature_sets, omp_endogenous, omp_feature_sets_each, FeatureSet, StoppingRule};
use ssc_core::synth::{generate_union, CoefficientModel, SpectrumShape, UnionSpec};
use ssc_core::{Error, Mat, SubspaceBasis};

use crate::format::{self, ResultFile};
use crate::svg;

pub const VERSION: &str = concat!("ssc ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Parser)]
#[command(name = "ssc", version, about = "Greedy feature selection and subspace clustering experiments")]
pub struct Cli {
    /// Cap on worker threads (default: machine parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a union of two subspaces.
    Generate(GenerateArgs),
    /// Select features, build the affinity graph and bipartition it.
    Cluster(ClusterArgs),
    /// Estimate P(EFS) over an overlap × sampling (or energy) grid.
    Phase(PhaseArgs),
    /// Evaluate EFS certificates on labelled data.
    Diagnose(DiagnoseArgs),
    /// Summarize result files.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    M1,
    M2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumArg {
    Orthoblock,
    Lorentzian,
    Exponential,
}

impl SpectrumArg {
    fn shape(self) -> SpectrumShape {
        match self {
            SpectrumArg::Orthoblock => SpectrumShape::Orthoblock,
            SpectrumArg::Lorentzian => SpectrumShape::Lorentzian,
            SpectrumArg::Exponential => SpectrumShape::Exponential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Omp,
    Nn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhaseMethodArg {
    Omp,
    Nn,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LaplacianArg {
    Plain,
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditionArg {
    Thm1,
    Cor1,
    Thm3,
    Erc,
}

fn arg_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Ambient dimension (default depends on the spectrum).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub q: usize,
    /// Points per subspace.
    #[arg(long)]
    pub d: usize,
    #[arg(long, value_enum, default_value = "m1")]
    pub model: ModelArg,
    /// Common-energy weight for the bounded-energy model.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_enum, default_value = "orthoblock")]
    pub spectrum: SpectrumArg,
    #[arg(long)]
    pub seed: u64,
    /// Output directory: points.csv, labels.csv, basis0.csv, basis1.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "omp")]
    pub method: MethodArg,
    /// OMP sparsity or number of nearest neighbors.
    #[arg(long)]
    pub sparsity: usize,
    #[arg(long, value_enum, default_value = "normalized")]
    pub laplacian: LaplacianArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    #[arg(long)]
    pub k: usize,
    /// Overlap ratios: `a,b,c` or `start:step:stop`.
    #[arg(long)]
    pub delta_grid: String,
    /// Oversampling ratios k/d.
    #[arg(long, conflicts_with = "tau_grid", required_unless_present = "tau_grid")]
    pub rho_grid: Option<String>,
    /// Common energies of the bounded-energy model.
    #[arg(long)]
    pub tau_grid: Option<String>,
    /// Oversampling ratio used with `--tau-grid`.
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, value_enum, default_value = "omp")]
    pub method: PhaseMethodArg,
    #[arg(long, value_enum, default_value = "orthoblock")]
    pub spectrum: SpectrumArg,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a heatmap.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// One basis MatrixFile per cluster, in label order.
    #[arg(long, value_delimiter = ',')]
    pub bases: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub condition: ConditionArg,
    /// Directions sampled for the covering-diameter estimate.
    #[arg(long, default_value_t = DEFAULT_COVER_DIRS)]
    pub dirs: usize,
    #[arg(long)]
    pub seed: u64,
    /// OMP sparsity for the EFS and ERC checks (default: the cluster dimension).
    #[arg(long)]
    pub sparsity: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Result files written by cluster, phase or diagnose.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Phase(a) => cmd_phase(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Report(a) => cmd_report(a, &mut std::io::stdout().lock()),
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Parses `a,b,c` or an inclusive `start:step:stop` range.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| anyhow!("grid `{s}`: `{t}` is not a number"));
    let v = match parts.as_slice() {
        [list] => list.split(',').map(num).collect::<Result<Vec<_>>>()?,
        [start, step, stop] => {
            let (a, h, b) = (num(start)?, num(step)?, num(stop)?);
            if h.is_nan() || h <= 0.0 || b < a {
                bail!("grid `{s}`: need step > 0 and stop >= start");
            }
            let count = ((b - a) / h + 1e-9).floor() as usize + 1;
            // rounding keeps 0.05-steps printing as 0.35, not 0.35000000000000003
            (0..count).map(|i| ((a + i as f64 * h) * 1e12).round() / 1e12).collect()
        }
        _ => bail!("grid `{s}`: expected a comma list or start:step:stop"),
    };
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        bail!("grid `{s}` is empty or not finite");
    }
    Ok(v)
}

fn base_meta(r: &mut Vec<(String, String)>, command: String) {
    r.push(("version".into(), VERSION.into()));
    r.push(("command".into(), command));
}

fn generate_command(a: &GenerateArgs) -> String {
    let mut s = format!("ssc generate --k {} --q {} --d {}", a.k, a.q, a.d);
    if let Some(n) = a.n {
        s += &format!(" --n {n}");
    }
    s += &format!(" --model {}", arg_name(a.model));
    if let Some(t) = a.tau {
        s += &format!(" --tau {t}");
    }
    s + &format!(" --spectrum {} --seed {}", arg_name(a.spectrum), a.seed)
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let model = match (a.model, a.tau) {
        (ModelArg::M1, None) => CoefficientModel::M1,
        (ModelArg::M1, Some(_)) => bail!("--tau only applies to --model m2"),
        (ModelArg::M2, Some(tau)) => CoefficientModel::M2 { tau },
        (ModelArg::M2, None) => bail!("--model m2 needs --tau"),
    };
    let mut spec = UnionSpec::new(a.k, a.q, a.d, model, a.spectrum.shape(), a.seed)?;
    if let Some(n) = a.n {
        spec = spec.with_ambient(n)?;
    }
    let ens = generate_union(&spec)?;
    let mut meta = Vec::new();
    base_meta(&mut meta, generate_command(a));
    meta.push(("seed".into(), a.seed.to_string()));
    meta.push(("overlap".into(), ens.cross.q.to_string()));
    meta.push(("max_cos".into(), ens.cross.max_cos().to_string()));
    meta.push(("cross_spectrum".into(), join(&ens.cross.sigma)));
    meta.push(("mutual_coherence".into(), max_mutual_coherence(&ens.points, &ens.labels, 0)?.to_string()));
    if let Some(e) = ens.common_energy {
        meta.push(("common_energy".into(), e.to_string()));
    }
    format::write_file(&a.out.join("points.csv"), &format::render_matrix(&ens.points, &meta))?;
    format::write_file(&a.out.join("labels.csv"), &format::render_labels(&ens.labels))?;
    for (i, b) in ens.bases.iter().enumerate() {
        let m = [("cluster".to_string(), i.to_string())];
        format::write_file(&a.out.join(format!("basis{i}.csv")), &format::render_matrix(b.phi(), &m))?;
    }
    Ok(())
}

/// Scales every column to unit norm; ingested data need not be normalized.
fn normalize_columns(m: &Mat) -> Result<Mat> {
    let mut out = m.as_matrix().clone();
    for (j, mut c) in out.column_iter_mut().enumerate() {
        let norm = c.norm();
        if norm == 0.0 {
            bail!("point {j} is the zero vector");
        }
        c /= norm;
    }
    Ok(Mat::new(out)?)
}

fn load_points(path: &Path) -> Result<Mat> {
    normalize_columns(&format::read_matrix(path)?)
}

fn load_labels(path: &Path, points: usize) -> Result<Vec<usize>> {
    let labels = format::read_labels(path)?;
    if labels.len() != points {
        bail!("{} labels for {points} points", labels.len());
    }
    Ok(labels)
}

/// OMP feature sets; a point whose pursuit fails keeps an empty set.
fn omp_sets_lenient(points: &Mat, sparsity: usize) -> Result<(Vec<FeatureSet>, usize)> {
    let each = omp_feature_sets_each(points, StoppingRule::sparsity(sparsity)?)?;
    let mut failed = 0;
    let sets = each
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.unwrap_or_else(|_| {
                failed += 1;
                FeatureSet::empty(i)
            })
        })
        .collect();
    Ok((sets, failed))
}

fn efs_flags(sets: &[FeatureSet], labels: &[usize]) -> Result<Vec<bool>> {
    sets.iter()
        .map(|s| if s.selected.is_empty() { Ok(false) } else { Ok(efs_check(s, labels)?) })
        .collect()
}

pub fn cmd_cluster(a: &ClusterArgs) -> Result<()> {
    let points = load_points(&a.data)?;
    let labels = a.labels.as_deref().map(|p| load_labels(p, points.ncols())).transpose()?;
    let (sets, failed) = match a.method {
        MethodArg::Omp => omp_sets_lenient(&points, a.sparsity)?,
        MethodArg::Nn => (nn_feature_sets(&points, a.sparsity)?, 0),
    };
    let c = coefficient_matrix(&sets, points.ncols())?;
    let w = affinity(&c.c)?;
    let l = graph_laplacian(&w, a.laplacian == LaplacianArg::Normalized);
    let partition = spectral_bipartition(&l)?;

    let mut out = ResultFile::new(&["point", "label_pred", "label_true"]);
    let mut command = format!(
        "ssc cluster --data {} --method {} --sparsity {} --laplacian {}",
        a.data.display(),
        arg_name(a.method),
        a.sparsity,
        arg_name(a.laplacian)
    );
    if let Some(p) = &a.labels {
        command += &format!(" --labels {}", p.display());
    }
    base_meta(&mut out.meta, command);
    out.push_meta("points", points.ncols());
    out.push_meta("failed_points", failed);
    if let Some(truth) = &labels {
        out.push_meta("clustering_error", clustering_error(&partition, truth)?);
        let flags = efs_flags(&sets, truth)?;
        out.push_meta("efs_rate", flags.iter().filter(|f| **f).count() as f64 / flags.len() as f64);
    }
    for (i, p) in partition.labels().iter().enumerate() {
        let t = labels.as_ref().map(|l| l[i].to_string()).unwrap_or_default();
        out.push_row(vec![i.to_string(), p.to_string(), t]);
    }
    format::write_file(&a.out, &out.render())
}

fn phase_command(a: &PhaseArgs) -> String {
    let axis = match (&a.rho_grid, &a.tau_grid) {
        (Some(r), _) => format!("--rho-grid {r}"),
        (None, Some(t)) => format!("--tau-grid {t} --rho {}", a.rho),
        (None, None) => String::new(),
    };
    format!(
        "ssc phase --k {} --delta-grid {} {axis} --trials {} --method {} --spectrum {} --seed {}",
        a.k,
        a.delta_grid,
        a.trials,
        arg_name(a.method),
        arg_name(a.spectrum),
        a.seed
    )
}

pub fn cmd_phase(a: &PhaseArgs) -> Result<()> {
    let deltas = parse_grid(&a.delta_grid)?;
    let axis = match (&a.rho_grid, &a.tau_grid) {
        (Some(r), None) => SecondAxis::Rho(parse_grid(r)?),
        (None, Some(t)) => SecondAxis::Tau { taus: parse_grid(t)?, rho: a.rho },
        _ => bail!("give exactly one of --rho-grid and --tau-grid"),
    };
    let methods: Vec<Method> = match a.method {
        PhaseMethodArg::Omp => vec![Method::Omp],
        PhaseMethodArg::Nn => vec![Method::Nn],
        PhaseMethodArg::Both => vec![Method::Omp, Method::Nn],
    };
    let mut grid = GridSpec::new(deltas, axis, a.k, a.trials, a.seed, methods[0])?;
    grid.spectrum = a.spectrum.shape();
    grid.validate()?;
    let grids = run_grid(&grid, &methods)?;
    let out = phase_result(&grids, phase_command(a));
    format::write_file(&a.out, &out.render())?;
    if let Some(path) = &a.svg {
        let refs: Vec<&PhaseGrid> = grids.iter().collect();
        format::write_file(path, &svg::heatmap(&refs))?;
    }
    Ok(())
}

/// Long-format table; with several methods the P(EFS) columns are paired.
pub fn phase_result(grids: &[PhaseGrid], command: String) -> ResultFile {
    let g0 = &grids[0];
    let axis = g0.axis.name();
    let mut header = vec!["delta".to_string(), axis.to_string()];
    if grids.len() == 1 {
        header.push("p_efs".into());
    } else {
        header.extend(grids.iter().map(|g| format!("p_efs_{}", g.method.name())));
    }
    header.push("trials".into());
    header.push("valid".into());
    let mut out = ResultFile {
        header,
        ..Default::default()
    };
    base_meta(&mut out.meta, command);
    for g in grids {
        for (c, v) in g.axis.values().iter().enumerate() {
            let b = g.boundary(c).map_or("none".to_string(), |b| b.to_string());
            out.push_meta(format!("boundary_{}_{axis}_{v}", g.method.name()), b);
        }
    }
    for (r, d) in g0.deltas.iter().enumerate() {
        for (c, v) in g0.axis.values().iter().enumerate() {
            let mut row = vec![d.to_string(), v.to_string()];
            row.extend(grids.iter().map(|g| g.p_efs(r, c).to_string()));
            let trials = grids.iter().map(|g| g.cells[r][c].completed).min().unwrap_or(0);
            let valid = grids.iter().all(|g| g.cells[r][c].valid());
            row.push(trials.to_string());
            row.push(valid.to_string());
            out.push_row(row);
        }
    }
    out
}

fn fmt_f(v: f64) -> String {
    v.to_string()
}

pub fn cmd_diagnose(a: &DiagnoseArgs) -> Result<()> {
    let points = load_points(&a.data)?;
    let labels = load_labels(&a.labels, points.ncols())?;
    let mut clusters = labels.clone();
    clusters.sort_unstable();
    clusters.dedup();
    if clusters.len() != 2 {
        bail!("diagnose needs exactly two clusters, found {}", clusters.len());
    }
    let needs_bases = a.condition != ConditionArg::Erc;
    if needs_bases && a.bases.len() != 2 {
        bail!(
            "condition {} needs --bases with one basis file per cluster (principal angles are computed from them)",
            arg_name(a.condition)
        );
    }
    let bases: Vec<SubspaceBasis> = if a.bases.is_empty() {
        clusters
            .iter()
            .map(|&c| Ok(SubspaceBasis::spanning(&cluster_columns(&points, &labels, c)?)?))
            .collect::<Result<_>>()?
    } else {
        if a.bases.len() != 2 {
            bail!("--bases needs one file per cluster (2), got {}", a.bases.len());
        }
        a.bases
            .iter()
            .map(|p| SubspaceBasis::new(format::read_matrix(p)?).with_context(|| format!("basis {}", p.display())))
            .collect::<Result<_>>()?
    };
    let cross = principal_angles(&bases[0], &bases[1])?;
    let members: Vec<Mat> = clusters
        .iter()
        .map(|&c| cluster_columns(&points, &labels, c))
        .collect::<Result<_, Error>>()?;
    let gamma = if needs_bases {
        Some(bounding_constant(&members[0], &members[1], &bases[0], &bases[1])?)
    } else {
        None
    };

    let mut out = ResultFile::new(&[
        "cluster", "condition", "lhs", "rhs", "holds", "mu_c", "eps", "max_cos", "gamma", "efs_rate", "note",
    ]);
    let mut command = format!(
        "ssc diagnose --data {} --labels {} --condition {} --dirs {} --seed {}",
        a.data.display(),
        a.labels.display(),
        arg_name(a.condition),
        a.dirs,
        a.seed
    );
    if !a.bases.is_empty() {
        let b: Vec<String> = a.bases.iter().map(|p| p.display().to_string()).collect();
        command += &format!(" --bases {}", b.join(","));
    }
    if let Some(s) = a.sparsity {
        command += &format!(" --sparsity {s}");
    }
    base_meta(&mut out.meta, command);
    out.push_meta("cross_spectrum", join(&cross.sigma));
    out.push_meta("covering_estimate", "sampled lower bound (leave-one-out)");

    for (ci, &c) in clusters.iter().enumerate() {
        let mu = max_mutual_coherence(&points, &labels, c)?;
        let eps = covering_diameter(&members[ci], &bases[ci], a.dirs, a.seed.wrapping_add(ci as u64))?.diameter;
        let sparsity = a.sparsity.unwrap_or_else(|| bases[ci].dim());
        let idx: Vec<usize> = (0..labels.len()).filter(|&j| labels[j] == c).collect();
        let (sets, efs_rate) = cluster_efs(&points, &labels, &idx, sparsity)?;
        let cert = match a.condition {
            ConditionArg::Thm1 => efs_condition_thm1(mu, eps, cross.max_cos()).map(|c| (c.lhs, c.rhs, c.holds)),
            ConditionArg::Cor1 => efs_condition_cor1(eps, cross.max_cos()).map(|c| (c.lhs, c.rhs, c.holds)),
            ConditionArg::Thm3 => {
                efs_condition_thm3(eps, gamma.unwrap_or(0.0), &cross).map(|c| (c.lhs, c.rhs, c.holds))
            }
            ConditionArg::Erc => max_erc(&points, &labels, &sets).map(|v| (v, 1.0, v < 1.0)),
        };
        let (lhs, rhs, holds, note) = match cert {
            Ok((lhs, rhs, holds)) => (fmt_f(lhs), fmt_f(rhs), holds.to_string(), String::new()),
            // a violated hypothesis is a finding, not a failure of the command
            Err(e @ Error::Precondition(_)) => ("NaN".into(), "NaN".into(), "false".into(), e.to_string().replace(',', ";")),
            Err(e) => return Err(e.into()),
        };
        out.push_row(vec![
            c.to_string(),
            arg_name(a.condition),
            lhs,
            rhs,
            holds,
            fmt_f(mu),
            fmt_f(eps),
            fmt_f(cross.max_cos()),
            gamma.map_or("NaN".to_string(), fmt_f),
            fmt_f(efs_rate),
            note,
        ]);
    }
    format::write_file(&a.out, &out.render())
}

/// OMP feature sets of one cluster's points and their EFS fraction.
fn cluster_efs(points: &Mat, labels: &[usize], idx: &[usize], sparsity: usize) -> Result<(Vec<FeatureSet>, f64)> {
    let stop = StoppingRule::sparsity(sparsity)?;
    let sets: Vec<FeatureSet> = idx
        .iter()
        .map(|&i| omp_endogenous(points, i, stop).unwrap_or_else(|_| FeatureSet::empty(i)))
        .collect();
    let flags = efs_flags(&sets, labels)?;
    Ok((sets, flags.iter().filter(|f| **f).count() as f64 / flags.len() as f64))
}

/// Largest ERC over the points' selected supports, measured against the
/// atoms of the other clusters: `‖Φ_Λ† φ‖₁` over foreign points `φ`.
fn max_erc(points: &Mat, labels: &[usize], sets: &[FeatureSet]) -> ssc_core::Result<f64> {
    let mut worst = 0.0f64;
    for fs in sets {
        if fs.selected.is_empty() {
            return Ok(f64::INFINITY);
        }
        let own = labels[fs.point_index];
        let mut cols = fs.selected.clone();
        cols.extend((0..points.ncols()).filter(|&j| labels[j] != own));
        let support: Vec<usize> = (0..fs.selected.len()).collect();
        worst = worst.max(erc(&points.select_columns(&cols)?, &support)?);
    }
    Ok(worst)
}

pub fn cmd_report(a: &ReportArgs, w: &mut impl std::io::Write) -> Result<()> {
    for path in &a.files {
        let r = ResultFile::read(path)?;
        writeln!(w, "{}", path.display())?;
        for key in ["command", "clustering_error", "efs_rate", "failed_points"] {
            if let Some(v) = r.meta_value(key) {
                writeln!(w, "  {key}: {v}")?;
            }
        }
        writeln!(w, "  rows: {}", r.rows.len())?;
        if r.header.first().map(String::as_str) == Some("delta") {
            report_phase(&r, w)?;
        } else if r.header.first().map(String::as_str) == Some("cluster") {
            let c = r.column_index("holds").ok_or_else(|| anyhow!("diagnose file without `holds`"))?;
            for row in &r.rows {
                writeln!(w, "  cluster {}: {} holds={} (lhs {}, rhs {})", row[0], row[1], row[c], row[2], row[3])?;
            }
        }
    }
    Ok(())
}

fn report_phase(r: &ResultFile, w: &mut impl std::io::Write) -> Result<()> {
    let axis = r.header[1].clone();
    let deltas = r.numeric_column("delta")?;
    let second = r.numeric_column(&axis)?;
    for name in r.header.iter().filter(|h| h.starts_with("p_efs")) {
        let p = r.numeric_column(name)?;
        let mut values = second.clone();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for v in values {
            let curve: Vec<(f64, f64)> = (0..p.len()).filter(|&i| second[i] == v).map(|i| (deltas[i], p[i])).collect();
            let b = boundary(&curve).map_or("none".to_string(), |b| format!("{b:.4}"));
            writeln!(w, "  {name} {axis}={v}: boundary {b}")?;
        }
    }
    Ok(())
}
