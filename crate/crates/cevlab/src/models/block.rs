//! Simulated blocks and their CSV + sidecar-JSON interchange format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::spec::ModelSpec;

/// Provenance of a block. External CSV data has no spec or seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMeta {
    pub spec: Option<ModelSpec>,
    pub seed: Option<u64>,
    pub stream_base: Option<u64>,
    pub n: usize,
    pub h: usize,
    /// Count of values clamped to the float maximum.
    pub saturation: u64,
}

/// A batch of replicates of `(X_0, ..., X_h)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBlock {
    pub meta: BlockMeta,
    pub data: Vec<f64>,
}

impl PathBlock {
    pub fn width(&self) -> usize {
        self.meta.h + 1
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.width())
    }

    /// Column `j` as an owned vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        assert!(j < self.width());
        self.rows().map(|r| r[j]).collect()
    }

    /// Builds a block from raw rows, e.g. parsed external data.
    pub fn from_rows(h: usize, data: Vec<f64>) -> Result<PathBlock> {
        let w = h + 1;
        if data.is_empty() || data.len() % w != 0 {
            return Err(Error::Domain(format!(
                "row data length {} is not a positive multiple of h+1 = {w}",
                data.len()
            )));
        }
        let n = data.len() / w;
        Ok(PathBlock {
            meta: BlockMeta { spec: None, seed: None, stream_base: None, n, h, saturation: 0 },
            data,
        })
    }
}

fn sidecar_path(csv_path: &Path) -> std::path::PathBuf {
    csv_path.with_extension("json")
}

/// Writes `x0,x1,...,xh` CSV plus a `.json` sidecar with the metadata.
/// Output is byte-deterministic: floats use the shortest round-trip form.
pub fn write_block_csv(block: &PathBlock, csv_path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(csv_path)?);
    let header: Vec<String> = (0..block.width()).map(|j| format!("x{j}")).collect();
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for row in block.rows() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v}"));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    let meta = serde_json::to_string_pretty(&block.meta)?;
    std::fs::write(sidecar_path(csv_path), meta + "\n")?;
    Ok(())
}

/// Reads a block back, picking up the sidecar metadata when present.
pub fn read_block_csv(csv_path: &Path) -> Result<PathBlock> {
    let reader = BufReader::new(File::open(csv_path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Domain("empty CSV".into()))??;
    let width = header.split(',').count();
    if width < 2 {
        return Err(Error::Domain("block CSV needs at least columns x0,x1".into()));
    }
    let mut data = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        for field in line.split(',') {
            let v: f64 = field
                .parse()
                .map_err(|e| Error::Domain(format!("bad float {field:?}: {e}")))?;
            data.push(v);
        }
    }
    let mut block = PathBlock::from_rows(width - 1, data)?;
    if let Ok(meta_str) = std::fs::read_to_string(sidecar_path(csv_path)) {
        let meta: BlockMeta = serde_json::from_str(&meta_str)?;
        if meta.n == block.meta.n && meta.h == block.meta.h {
            block.meta = meta;
        }
    }
    Ok(block)
}
