//! Raw sample records, filter coefficient files and CSV tables.
//!
//! A sample record is two files: the payload of 8-byte little-endian floats
//! and a text sidecar at `<path>.meta` holding `fs=<hz> n=<count>` and an
//! optional `note=` line.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::prefilter::{DesignMethod, FirFilter};

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub fs: f64,
    pub samples: Vec<f64>,
    pub note: Option<String>,
}

impl SampleRecord {
    pub fn new(fs: f64, samples: Vec<f64>) -> Result<Self> {
        if !(fs > 0.0) {
            return Err(Error::InvalidSignal(format!("sampling rate {fs}")));
        }
        if samples.is_empty() {
            return Err(Error::Empty("samples"));
        }
        Ok(Self { fs, samples, note: None })
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn corrupt(path: &Path, reason: impl Into<String>) -> Error {
    Error::CorruptFile { path: path.to_path_buf(), reason: reason.into() }
}

pub fn write_samples(record: &SampleRecord, path: &Path) -> Result<()> {
    let mut payload = Vec::with_capacity(record.samples.len() * 8);
    for v in &record.samples {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, payload)?;
    let mut meta = format!("fs={} n={}\n", record.fs, record.samples.len());
    if let Some(note) = &record.note {
        let _ = writeln!(meta, "note={}", note.replace('\n', " "));
    }
    fs::write(sidecar_path(path), meta)?;
    Ok(())
}

pub fn read_samples(path: &Path) -> Result<SampleRecord> {
    let meta_path = sidecar_path(path);
    let meta = fs::read_to_string(&meta_path)?;
    let mut fs_hz = None;
    let mut count = None;
    let mut note = None;
    for line in meta.lines() {
        if let Some(rest) = line.strip_prefix("note=") {
            note = Some(rest.to_string());
            continue;
        }
        for field in line.split_whitespace() {
            match field.split_once('=') {
                Some(("fs", v)) => {
                    fs_hz = Some(v.parse::<f64>().map_err(|e| corrupt(&meta_path, format!("fs: {e}")))?)
                }
                Some(("n", v)) => {
                    count = Some(v.parse::<usize>().map_err(|e| corrupt(&meta_path, format!("n: {e}")))?)
                }
                _ => return Err(corrupt(&meta_path, format!("unexpected field `{field}`"))),
            }
        }
    }
    let fs_hz = fs_hz.ok_or_else(|| corrupt(&meta_path, "missing fs"))?;
    let count = count.ok_or_else(|| corrupt(&meta_path, "missing n"))?;
    if !(fs_hz > 0.0) {
        return Err(corrupt(&meta_path, format!("sampling rate {fs_hz}")));
    }
    let bytes = fs::read(path)?;
    if bytes.is_empty() {
        return Err(corrupt(path, "empty payload"));
    }
    if bytes.len() != count * 8 {
        return Err(corrupt(
            path,
            format!("header says {count} samples, payload holds {} bytes", bytes.len()),
        ));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(SampleRecord { fs: fs_hz, samples, note })
}

/// One coefficient per line with 17 significant digits, preceded by
/// `# order=<n> fs=<hz>`.
pub fn write_coefficients(filter: &FirFilter, path: &Path) -> Result<()> {
    let mut out = format!("# order={} fs={}\n", filter.order(), filter.fs);
    for h in &filter.taps {
        let _ = writeln!(out, "{h:.16e}");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a coefficient file. The header comment is optional; without it the
/// sampling rate is `default_fs`.
pub fn read_coefficients(path: &Path, default_fs: f64) -> Result<FirFilter> {
    let text = fs::read_to_string(path)?;
    let mut fs_hz = default_fs;
    let mut order = None;
    let mut taps = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            for field in comment.split_whitespace() {
                match field.split_once('=') {
                    Some(("fs", v)) => {
                        fs_hz = v.parse().map_err(|e| corrupt(path, format!("fs: {e}")))?;
                    }
                    Some(("order", v)) => {
                        order = Some(v.parse::<usize>().map_err(|e| corrupt(path, format!("order: {e}")))?);
                    }
                    _ => {}
                }
            }
            continue;
        }
        let h: f64 = line
            .parse()
            .map_err(|e| corrupt(path, format!("line {}: {e}", no + 1)))?;
        taps.push(h);
    }
    if taps.is_empty() {
        return Err(corrupt(path, "no coefficients"));
    }
    if let Some(order) = order {
        if order + 1 != taps.len() {
            return Err(corrupt(path, format!("order {order} but {} coefficients", taps.len())));
        }
    }
    Ok(FirFilter { taps, fs: fs_hz, method: DesignMethod::External })
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Num(v) => format_sci(*v),
            Field::Int(v) => v.to_string(),
            Field::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Num(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as i64)
    }
}

impl From<i64> for Field {
    fn from(v: i64) -> Self {
        Field::Int(v)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Int(v as i64)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_string())
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Text(v)
    }
}

/// Scientific notation with 12 significant digits.
pub fn format_sci(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        v.to_string()
    }
}

/// Header plus rows, written in order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Field::render))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }
}
