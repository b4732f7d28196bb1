//! Plain-CSV interchange files: matrices, labels and result tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::DMatrix;
use ssc_core::Mat;

/// Reads a MatrixFile: rows are ambient coordinates, columns are points.
/// `#` lines are comments; a leading `# n=<rows> d=<cols>` header is checked.
pub fn read_matrix(path: &Path) -> Result<Mat> {
    let text = fs::read_to_string(path).with_context(|| format!("reading matrix {}", path.display()))?;
    parse_matrix(&text).with_context(|| format!("parsing matrix {}", path.display()))
}

pub fn parse_matrix(text: &str) -> Result<Mat> {
    let mut declared = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if lineno == 0 {
                declared = parse_shape_header(comment);
            }
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                let v: f64 = f.trim().parse().map_err(|_| anyhow!("line {}: `{}` is not a number", lineno + 1, f.trim()))?;
                if !v.is_finite() {
                    bail!("line {}: non-finite entry {v}", lineno + 1);
                }
                Ok(v)
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                bail!("line {}: {} entries, expected {}", lineno + 1, row.len(), first.len());
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("matrix has no rows");
    }
    let (n, d) = (rows.len(), rows[0].len());
    if let Some((dn, dd)) = declared {
        if (dn, dd) != (n, d) {
            bail!("header declares {dn}x{dd} but the body is {n}x{d}");
        }
    }
    let m = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
    Ok(Mat::new(m)?)
}

fn parse_shape_header(comment: &str) -> Option<(usize, usize)> {
    let mut n = None;
    let mut d = None;
    for tok in comment.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            n = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("d=") {
            d = v.parse().ok();
        }
    }
    n.zip(d)
}

/// Renders a MatrixFile with its shape header followed by `# key=value` lines.
pub fn render_matrix(m: &Mat, meta: &[(String, String)]) -> String {
    let mut s = format!("# n={} d={}\n", m.nrows(), m.ncols());
    for (k, v) in meta {
        let _ = writeln!(s, "# {k}={v}");
    }
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading labels {}", path.display()))?;
    parse_labels(&text).with_context(|| format!("parsing labels {}", path.display()))
}

pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("line {}: `{}` is not a nonnegative integer", i + 1, l.trim()))
        })
        .collect()
}

pub fn render_labels(labels: &[usize]) -> String {
    labels.iter().map(|l| format!("{l}\n")).collect()
}

/// A CSV table with `#`-prefixed `key=value` metadata lines before the header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultFile {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ResultFile {
    pub fn new(header: &[&str]) -> Self {
        ResultFile {
            meta: Vec::new(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Values of a named column parsed as `f64`.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column_index(name).ok_or_else(|| anyhow!("no column `{name}`"))?;
        self.rows
            .iter()
            .map(|r| r[c].parse::<f64>().map_err(|_| anyhow!("column `{name}`: `{}` is not a number", r[c])))
            .collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}={v}");
        }
        s.push_str(&self.header.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut out = ResultFile::default();
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut header = None;
        for (i, line) in lines.by_ref() {
            if let Some(c) = line.strip_prefix('#') {
                let (k, v) = c
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| anyhow!("line {}: metadata is not key=value", i + 1))?;
                out.meta.push((k.to_string(), v.to_string()));
            } else {
                header = Some(line);
                break;
            }
        }
        let header = header.ok_or_else(|| anyhow!("result file has no header row"))?;
        out.header = header.split(',').map(str::to_string).collect();
        for (i, line) in lines {
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            if row.len() != out.header.len() {
                bail!("line {}: {} fields, header has {}", i + 1, row.len(), out.header.len());
            }
            out.rows.push(row);
        }
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
