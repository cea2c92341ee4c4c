//! Artifact writers. Every file opens with `#` comment lines naming the tool
//! version and the exact invocation; numbers are printed with 17 significant
//! digits so they round-trip, and records end in a bare LF.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

pub const DETERMINISM_NOTE: &str =
    "no random seed is involved; rerunning this command reproduces the numeric payload byte for byte";

/// Comment lines shared by every artifact.
pub fn header_lines(invocation: &str) -> Vec<String> {
    vec![
        format!("qwalk {}", env!("CARGO_PKG_VERSION")),
        format!("command: {invocation}"),
        DETERMINISM_NOTE.to_string(),
    ]
}

/// Round-trip representation of a float.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn ensure_dir(dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)
}

/// Writes a CSV file: comment header, column names, then `rows`.
pub fn write_csv<I>(
    path: &Path,
    header: &[String],
    columns: &[&str],
    rows: I,
) -> std::io::Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut file = BufWriter::new(File::create(path)?);
    for line in header {
        writeln!(file, "# {line}")?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Provenance block leading every JSON document.
#[derive(Debug, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub note: &'static str,
}

impl Provenance {
    pub fn new(invocation: &str) -> Self {
        Self {
            tool: "qwalk".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: invocation.into(),
            note: DETERMINISM_NOTE,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data always serializes");
    s.push('\n');
    s
}
