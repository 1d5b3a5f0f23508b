//! Plain-text checkpoint format for `Ψ`, `w` and `θ`.
//!
//! ```text
//! # sftransfer checkpoint v1
//! matrix psi 2 2
//! 1 0
//! 0.5 1
//! vector w 2
//! 0 1
//! ```
//!
//! Each block starts with a header giving the kind, name and dimensions,
//! followed by the values in row-major order (one line per matrix row, a
//! single line for a vector). Values use Rust's shortest round-trip float
//! formatting, so write/read is exact.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

const MAGIC: &str = "# sftransfer checkpoint v1";

#[derive(Debug, Clone, PartialEq)]
struct Block {
    name: String,
    rows: usize,
    cols: usize,
    is_vector: bool,
    /// Row-major.
    values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Checkpoint {
    blocks: Vec<Block>,
}

impl Checkpoint {
    fn insert(&mut self, block: Block) {
        self.blocks.retain(|b| b.name != block.name);
        self.blocks.push(block);
    }

    pub fn insert_matrix(&mut self, name: &str, m: &DMatrix<f64>) {
        let values = (0..m.nrows()).flat_map(|i| m.row(i).iter().copied().collect::<Vec<_>>()).collect();
        self.insert(Block { name: name.into(), rows: m.nrows(), cols: m.ncols(), is_vector: false, values });
    }

    pub fn insert_vector(&mut self, name: &str, v: &DVector<f64>) {
        self.insert(Block {
            name: name.into(),
            rows: v.len(),
            cols: 1,
            is_vector: true,
            values: v.iter().copied().collect(),
        });
    }

    fn block(&self, name: &str) -> Result<&Block> {
        self.blocks
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::Checkpoint(format!("missing block {name:?}")))
    }

    pub fn matrix(&self, name: &str) -> Result<DMatrix<f64>> {
        let b = self.block(name)?;
        Ok(DMatrix::from_row_slice(b.rows, b.cols, &b.values))
    }

    pub fn vector(&self, name: &str) -> Result<DVector<f64>> {
        let b = self.block(name)?;
        Ok(DVector::from_column_slice(&b.values))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.blocks.iter().map(|b| b.name.as_str())
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for Checkpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{MAGIC}")?;
        for b in &self.blocks {
            if b.is_vector {
                writeln!(f, "vector {} {}", b.name, b.rows)?;
                writeln!(f, "{}", join(&b.values))?;
            } else {
                writeln!(f, "matrix {} {} {}", b.name, b.rows, b.cols)?;
                for row in b.values.chunks(b.cols.max(1)) {
                    writeln!(f, "{}", join(row))?;
                }
            }
        }
        Ok(())
    }
}

fn parse_values(line: Option<&str>, expected: usize, name: &str) -> Result<Vec<f64>> {
    let line = line.ok_or_else(|| Error::Checkpoint(format!("{name}: unexpected end of input")))?;
    let values = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| Error::Checkpoint(format!("{name}: {t:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(Error::Checkpoint(format!(
            "{name}: expected {expected} values, found {}",
            values.len()
        )));
    }
    Ok(values)
}

fn parse_dim(tok: Option<&str>, name: &str) -> Result<usize> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Checkpoint(format!("{name}: bad dimension")))
}

impl FromStr for Checkpoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some(MAGIC) {
            return Err(Error::Checkpoint("missing header line".into()));
        }
        let mut ck = Checkpoint::default();
        while let Some(header) = lines.next() {
            let mut toks = header.split_whitespace();
            let kind = toks.next().unwrap_or_default();
            let name = toks
                .next()
                .ok_or_else(|| Error::Checkpoint(format!("block header {header:?} has no name")))?
                .to_string();
            match kind {
                "vector" => {
                    let n = parse_dim(toks.next(), &name)?;
                    let values = parse_values(lines.next(), n, &name)?;
                    ck.insert(Block { name, rows: n, cols: 1, is_vector: true, values });
                }
                "matrix" => {
                    let rows = parse_dim(toks.next(), &name)?;
                    let cols = parse_dim(toks.next(), &name)?;
                    let mut values = Vec::with_capacity(rows * cols);
                    for _ in 0..rows {
                        values.extend(parse_values(lines.next(), cols, &name)?);
                    }
                    ck.insert(Block { name, rows, cols, is_vector: false, values });
                }
                other => return Err(Error::Checkpoint(format!("unknown block kind {other:?}"))),
            }
        }
        Ok(ck)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_row_major() {
        let mut ck = Checkpoint::default();
        ck.insert_matrix("m", &DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
        ck.insert_vector("v", &DVector::from_vec(vec![0.25, -1.5]));
        let text = ck.to_string();
        assert_eq!(text, format!("{MAGIC}\nmatrix m 2 3\n1 2 3\n4 5 6\nvector v 2\n0.25 -1.5\n"));
        let back: Checkpoint = text.parse().unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.matrix("m").unwrap()[(1, 0)], 4.0);
    }

    #[test]
    fn truncated_input_is_an_error() {
        let text = format!("{MAGIC}\nmatrix m 2 2\n1 2\n");
        assert!(text.parse::<Checkpoint>().is_err());
        assert!("garbage".parse::<Checkpoint>().is_err());
    }
}
