//! Matrix fixture formats.
//!
//! Binary layout: the magic bytes `PQR1`, then `rows` and `cols` as 64-bit
//! little-endian signed integers, then `rows·cols` little-endian IEEE-754
//! doubles in column-major order. The text format is one matrix row per line
//! with whitespace-separated values; blank lines and lines starting with `#`
//! are ignored.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PQR1";
pub const HEADER_BYTES: usize = 4 + 16;

pub fn write_binary<W: Write>(m: &DenseMatrix, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(m.rows() as i64).to_le_bytes())?;
    out.write_all(&(m.cols() as i64).to_le_bytes())?;
    for v in m.as_slice() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<DenseMatrix> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(|_| Error::Format("missing magic".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut word = [0u8; 8];
    let mut dim = |name: &str| -> Result<usize> {
        input
            .read_exact(&mut word)
            .map_err(|_| Error::Format(format!("truncated header ({name})")))?;
        let v = i64::from_le_bytes(word);
        if v <= 0 {
            return Err(Error::Format(format!("{name} must be positive, got {v}")));
        }
        usize::try_from(v).map_err(|_| Error::Format(format!("{name} too large")))
    };
    let rows = dim("rows")?;
    let cols = dim("cols")?;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != len * 8 {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            len * 8,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let m = DenseMatrix::from_col_major(rows, cols, data)?;
    m.ensure_finite()?;
    Ok(m)
}

pub fn save_binary(m: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_binary(m, BufWriter::new(File::create(path)?))
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    read_binary(BufReader::new(File::open(path)?))
}

pub fn parse_text(text: &str) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::Format(format!("line {}: cannot parse {tok:?}", lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Format(format!(
                    "line {}: {} values, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format("no matrix rows".into()));
    }
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let m = DenseMatrix::from_rows(&refs)?;
    m.ensure_finite()?;
    Ok(m)
}

pub fn load_text(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_text(&std::fs::read_to_string(path)?)
}
