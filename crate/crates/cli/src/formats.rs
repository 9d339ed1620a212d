//! On-disk formats: JSON documents, CSV tables, the binary matrix cache and
//! run manifests.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use cmv_krylov::C64;
use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MATRIX_MAGIC: [u8; 8] = *b"CMVKMAT\0";
pub const MATRIX_VERSION: u32 = 1;
/// Magic, version, `d`, `D`.
pub const MATRIX_HEADER_LEN: usize = 8 + 4 + 8 + 8;

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

/// Dense complex matrix as nested rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<C64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<C64>) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries: (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> CliResult<DMatrix<C64>> {
        if self.entries.len() != self.rows || self.entries.iter().any(|r| r.len() != self.cols) {
            return Err(CliError::Format(format!(
                "matrix entries do not match the declared {}x{} shape",
                self.rows, self.cols
            )));
        }
        Ok(DMatrix::from_fn(self.rows, self.cols, |r, c| {
            self.entries[r][c]
        }))
    }
}

/// Binary cache of a `d × D` complex matrix (e.g. `d`-dimensional Krylov
/// vectors as columns; square operators have `d = D`): the header followed
/// by row-major little-endian `(re, im)` pairs.
pub fn encode_matrix(m: &DMatrix<C64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(MATRIX_HEADER_LEN + 16 * m.len());
    out.extend_from_slice(&MATRIX_MAGIC);
    out.extend_from_slice(&MATRIX_VERSION.to_le_bytes());
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> CliResult<DMatrix<C64>> {
    let bad = |msg: &str| CliError::Format(format!("matrix cache: {msg}"));
    if bytes.len() < MATRIX_HEADER_LEN {
        return Err(bad("truncated header"));
    }
    if bytes[..8] != MATRIX_MAGIC {
        return Err(bad("bad magic"));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let version = u32_at(8);
    if version != MATRIX_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let (rows, cols) = (u64_at(12), u64_at(20));
    let len = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(16))
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| bad("dimensions overflow"))?;
    if bytes.len() != MATRIX_HEADER_LEN + len {
        return Err(bad(&format!(
            "expected {} payload bytes for {rows}x{cols}, found {}",
            len,
            bytes.len() - MATRIX_HEADER_LEN
        )));
    }
    let (rows, cols) = (rows as usize, cols as usize);
    Ok(DMatrix::from_fn(rows, cols, |r, c| {
        let i = MATRIX_HEADER_LEN + 16 * (r * cols + c);
        C64::new(f64_at(i), f64_at(i + 8))
    }))
}

pub fn write_matrix(path: &Path, m: &DMatrix<C64>) -> CliResult<()> {
    fs::write(path, encode_matrix(m)).map_err(|e| CliError::io(path, e))
}

pub fn read_matrix(path: &Path) -> CliResult<DMatrix<C64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::io(path, e))?;
    decode_matrix(&bytes)
}

/// A table row; the writer appends a `manifest` column.
pub trait CsvRow {
    fn header() -> Vec<&'static str>;
    fn fields(&self) -> Vec<String>;
}

pub fn write_csv<R: CsvRow>(path: &Path, rows: &[R], manifest: &str) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = R::header();
    header.push("manifest");
    w.write_record(&header)?;
    for row in rows {
        let mut f = row.fields();
        f.push(manifest.to_string());
        w.write_record(&f)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Header and records of a CSV table, checking that every record has the
/// header's width and that the last column is `manifest`.
pub fn read_csv(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.last().map(String::as_str) != Some("manifest") {
        return Err(CliError::Format(format!(
            "{}: missing manifest column",
            path.display()
        )));
    }
    let records = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()?;
    Ok((header, records))
}

/// Everything needed to rerun an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub crate_version: String,
    pub seed: u64,
    pub threads: usize,
    pub tol: Option<f64>,
    /// Resolved configuration after flag overrides.
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl Manifest {
    pub fn new<C: Serialize>(
        experiment: &str,
        seed: u64,
        threads: usize,
        tol: Option<f64>,
        config: &C,
    ) -> CliResult<Self> {
        Ok(Self {
            experiment: experiment.to_string(),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            threads,
            tol,
            config: serde_json::to_value(config)?,
            outputs: Vec::new(),
        })
    }
}

/// Collects outputs under one directory and writes the manifest last.
pub struct OutputDir {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl OutputDir {
    pub fn create(dir: &Path, manifest: Manifest) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
        })
    }

    fn register(&mut self, name: &str) -> PathBuf {
        self.manifest.outputs.push(name.to_string());
        self.dir.join(name)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let path = self.register(name);
        write_json(&path, value)
    }

    pub fn csv<R: CsvRow>(&mut self, name: &str, rows: &[R]) -> CliResult<()> {
        let path = self.register(name);
        write_csv(&path, rows, MANIFEST_FILE)
    }

    pub fn text(&mut self, name: &str, body: &str) -> CliResult<()> {
        let path = self.register(name);
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))
    }

    pub fn finish(self) -> CliResult<Manifest> {
        write_json(&self.dir.join(MANIFEST_FILE), &self.manifest)?;
        Ok(self.manifest)
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.12e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_header_layout() {
        let m = DMatrix::from_fn(2, 3, |r, c| C64::new(r as f64, c as f64));
        let bytes = encode_matrix(&m);
        assert_eq!(bytes.len(), MATRIX_HEADER_LEN + 6 * 16);
        assert_eq!(&bytes[..8], b"CMVKMAT\0");
        assert_eq!(u64::from_le_bytes(bytes[12..20].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[20..28].try_into().unwrap()), 3);
        // entry (0, 1) sits second in row-major order
        let i = MATRIX_HEADER_LEN + 16;
        assert_eq!(
            f64::from_le_bytes(bytes[i + 8..i + 16].try_into().unwrap()),
            1.0
        );
        assert_eq!(decode_matrix(&bytes).unwrap(), m);
    }

    #[test]
    fn corrupt_cache_is_rejected() {
        let m = DMatrix::from_element(2, 2, C64::new(1.0, -1.0));
        let mut bytes = encode_matrix(&m);
        assert!(decode_matrix(&bytes[..bytes.len() - 1]).is_err());
        bytes[0] = b'X';
        assert!(decode_matrix(&bytes).is_err());
    }
}
