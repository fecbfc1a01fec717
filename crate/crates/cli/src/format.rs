//! File formats.
//!
//! CSV files are comma-separated with a header row. Metadata sits above the
//! header as `# key = value` comment lines. Floats are written with 17
//! significant digits so every value parses back to the same `f64`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

/// Output file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Opt-in run metadata. Off by default so repeated runs give identical
/// bytes.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub arguments: Vec<String>,
    pub unix_time: u64,
}

impl Provenance {
    pub fn capture() -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            arguments: std::env::args().collect(),
            unix_time: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    fn comment_lines(&self) -> Vec<(String, String)> {
        vec![
            ("provenance.tool".into(), self.tool.clone()),
            ("provenance.version".into(), self.version.clone()),
            ("provenance.arguments".into(), self.arguments.join(" ")),
            ("provenance.unix_time".into(), self.unix_time.to_string()),
        ]
    }
}

/// Where a command writes and how.
#[derive(Debug, Clone)]
pub struct Sink {
    pub dir: PathBuf,
    pub stem: String,
    pub format: Format,
    pub provenance: Option<Provenance>,
}

impl Sink {
    pub fn path(&self, suffix: &str, extension: &str) -> PathBuf {
        let name = if suffix.is_empty() {
            format!("{}.{extension}", self.stem)
        } else {
            format!("{}_{suffix}.{extension}", self.stem)
        };
        self.dir.join(name)
    }

    fn ensure_dir(&self) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))
    }

    /// Writes `table` to `<stem>_<suffix>.csv` and returns the path.
    pub fn write_csv(&self, suffix: &str, table: &Table) -> Result<PathBuf> {
        self.write_csv_rows(
            suffix,
            &table.metadata,
            &table.header,
            table.rows.iter().cloned(),
        )
    }

    /// Streams rows to `<stem>_<suffix>.csv` without holding them in memory.
    pub fn write_csv_rows<S: AsRef<str>>(
        &self,
        suffix: &str,
        metadata: &[(String, String)],
        header: &[S],
        rows: impl Iterator<Item = Vec<Cell>>,
    ) -> Result<PathBuf> {
        self.ensure_dir()?;
        let path = self.path(suffix, "csv");
        let mut metadata = metadata.to_vec();
        if let Some(p) = &self.provenance {
            metadata.extend(p.comment_lines());
        }
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        encode(&metadata, header, rows, io::BufWriter::new(file))
            .map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    /// Writes `value` as pretty JSON to `<stem>[_<suffix>].json`, adding a
    /// `provenance` member when enabled.
    pub fn write_json<T: Serialize>(&self, suffix: &str, value: &T) -> Result<PathBuf> {
        self.ensure_dir()?;
        let path = self.path(suffix, "json");
        let mut json = serde_json::to_value(value).expect("serializable report");
        if let (Some(p), Some(obj)) = (&self.provenance, json.as_object_mut()) {
            obj.insert(
                "provenance".into(),
                serde_json::to_value(p).expect("serializable"),
            );
        }
        let mut text = serde_json::to_string_pretty(&json).expect("serializable report");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Text of a float with 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => float(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

/// A CSV document in memory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            metadata: Vec::new(),
            header: header.iter().map(|h| (*h).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn meta_float(&mut self, key: &str, value: f64) -> &mut Self {
        self.meta(key, float(value))
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        encode(
            &self.metadata,
            &self.header,
            self.rows.iter().cloned(),
            &mut out,
        )
        .expect("write to memory");
        out
    }
}

fn encode<S: AsRef<str>>(
    metadata: &[(String, String)],
    header: &[S],
    rows: impl Iterator<Item = Vec<Cell>>,
    mut out: impl Write,
) -> io::Result<()> {
    for (k, v) in metadata {
        writeln!(out, "# {k} = {v}")?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header.iter().map(AsRef::as_ref))?;
    for row in rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()
}

/// A parsed CSV file: metadata plus text fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTable {
    pub path: PathBuf,
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ParsedTable {
    fn error(&self, message: String) -> CliError {
        CliError::Parse {
            path: self.path.clone(),
            message,
        }
    }

    /// Value of a `# key = value` line.
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Column `name` parsed as floats.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| self.error(format!("missing column `{name}`")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(line, row)| {
                row[idx].trim().parse::<f64>().map_err(|_| {
                    self.error(format!(
                        "row {}: column `{name}`: cannot parse `{}` as a number",
                        line + 1,
                        row[idx]
                    ))
                })
            })
            .collect()
    }
}

/// Reads a CSV file written in this crate's dialect.
pub fn read_csv(path: &Path) -> Result<ParsedTable> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let parse_error = |message: String| CliError::Parse {
        path: path.to_owned(),
        message,
    };
    let metadata = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| parse_error(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let rows = reader
        .records()
        .map(|r| {
            r.map(|r| r.iter().map(str::to_owned).collect())
                .map_err(|e| parse_error(e.to_string()))
        })
        .collect::<Result<_>>()?;
    Ok(ParsedTable {
        path: path.to_owned(),
        metadata,
        header,
        rows,
    })
}

/// Reads and deserializes a JSON file.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, -2.84, 6.02214076e23, 5e-324, f64::MAX] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let sink = Sink {
            dir: dir.path().to_owned(),
            stem: "t".into(),
            format: Format::Csv,
            provenance: None,
        };
        let mut t = Table::new(&["n", "p"]);
        t.meta("state", "a, b").meta_float("x", 0.1);
        t.push(vec![0usize.into(), (1.0 / 3.0).into()]);
        t.push(vec![1usize.into(), 0.25.into()]);
        let path = sink.write_csv("demo", &t).unwrap();
        assert!(path.ends_with("t_demo.csv"));
        let back = read_csv(&path).unwrap();
        assert_eq!(back.meta("state"), Some("a, b"));
        assert_eq!(back.meta("x").unwrap().parse::<f64>().unwrap(), 0.1);
        assert_eq!(back.column("p").unwrap(), vec![1.0 / 3.0, 0.25]);
        assert_eq!(back.column("n").unwrap(), vec![0.0, 1.0]);
        assert!(matches!(back.column("q"), Err(CliError::Parse { .. })));
    }
}
