//! On-disk formats: JSON for point sets and embeddings (full-precision
//! floats, stable field order, trailing newline — byte-reproducible), and a
//! values-only CSV input form for uniform-weight data.

use std::path::Path;

use anyhow::{bail, Context, Result};
use lp_reduce::embed::{EmbedOperator, Embedding};
use lp_reduce::PointSet;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct PointSetFile {
    pub p: f64,
    pub weights: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl PointSetFile {
    pub fn from_core(ps: &PointSet) -> Self {
        Self {
            p: ps.p(),
            weights: ps.weights().to_vec(),
            values: ps.rows(),
        }
    }

    pub fn into_core(self) -> Result<PointSet> {
        PointSet::new(self.p, self.weights, self.values)
            .context("point-set file failed validation")
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OperatorFile {
    pub density: Vec<f64>,
    pub atoms: Vec<usize>,
    pub scale: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EmbeddingFile {
    pub p: f64,
    pub d: usize,
    pub points: Vec<Vec<f64>>,
    pub operator: OperatorFile,
    pub achieved_eps: f64,
}

impl EmbeddingFile {
    pub fn from_core(emb: &Embedding) -> Self {
        Self {
            p: emb.p,
            d: emb.d,
            points: emb.points.clone(),
            operator: OperatorFile {
                density: emb.operator.density.clone(),
                atoms: emb.operator.atoms.clone(),
                scale: emb.operator.scale,
            },
            achieved_eps: emb.achieved_eps,
        }
    }

    pub fn into_core(self) -> Embedding {
        Embedding {
            p: self.p,
            d: self.d,
            points: self.points,
            operator: EmbedOperator {
                density: self.operator.density,
                atoms: self.operator.atoms,
                scale: self.operator.scale,
            },
            achieved_eps: self.achieved_eps,
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_point_set(path: &Path, ps: &PointSet) -> Result<()> {
    write_json(path, &PointSetFile::from_core(ps))
}

pub fn write_embedding(path: &Path, emb: &Embedding) -> Result<()> {
    write_json(path, &EmbeddingFile::from_core(emb))
}

pub fn read_embedding(path: &Path) -> Result<Embedding> {
    Ok(read_json::<EmbeddingFile>(path)?.into_core())
}

/// Reads a point set from JSON, or from a values-only CSV when the caller
/// passes `--uniform-weights` and an explicit exponent.
pub fn read_point_set(
    path: &Path,
    p_flag: Option<f64>,
    uniform_weights: bool,
) -> Result<PointSet> {
    let is_csv = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("csv"))
        .unwrap_or(false);
    if is_csv {
        let Some(p) = p_flag else {
            bail!("CSV input carries no exponent; pass --p");
        };
        if !uniform_weights {
            bail!("CSV input carries no weights; pass --uniform-weights");
        }
        read_csv_values(path, p)
    } else {
        if p_flag.is_some() {
            bail!("--p applies to CSV input only; the JSON file carries its exponent");
        }
        if uniform_weights {
            bail!("--uniform-weights applies to CSV input only");
        }
        read_json::<PointSetFile>(path)?.into_core()
    }
}

fn read_csv_values(path: &Path, p: f64) -> Result<PointSet> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .with_context(|| format!("line {}: bad number {cell:?}", lineno + 1))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("CSV file {} contains no rows", path.display());
    }
    let m = rows[0].len();
    if let Some(bad) = rows.iter().position(|r| r.len() != m) {
        bail!(
            "CSV rows must all have the same length: row 1 has {m} cells, row {} has {}",
            bad + 1,
            rows[bad].len()
        );
    }
    PointSet::new(p, vec![1.0 / m as f64; m], rows).context("CSV point set failed validation")
}
