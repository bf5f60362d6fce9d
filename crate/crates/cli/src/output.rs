//! CSV and JSON writers with a fixed, byte-reproducible layout.

use std::fs;
use std::io;
use std::path::Path;

use accelmap_core::Complex64;
use serde::Serialize;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comma-separated rows with a header and LF line endings, buffered in memory
/// and written in one go.
pub struct Csv {
    writer: csv::Writer<Vec<u8>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    /// Panics if the width differs from the header's.
    pub fn row(&mut self, fields: &[String]) {
        self.writer.write_record(fields).expect("CSV row width mismatch");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }

    pub fn write(self, path: &Path) -> io::Result<()> {
        fs::write(path, self.into_bytes())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// `[[re, im], ...]` rows of a 4×4 complex matrix.
pub fn matrix_json(m: &[[Complex64; 4]; 4]) -> Vec<Vec<[f64; 2]>> {
    m.iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}
