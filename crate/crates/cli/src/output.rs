use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// Version tag of every JSON document.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'a str,
    version: u32,
    #[serde(flatten)]
    body: &'a T,
}

pub fn json<T: Serialize>(schema: &str, body: &T) -> Result<String, CliError> {
    let doc = Envelope {
        schema,
        version: SCHEMA_VERSION,
        body,
    };
    let mut s = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Numeric(format!("JSON encoding failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// CSV text with `#`-prefixed metadata lines before the header row.
pub struct Table {
    meta: Vec<String>,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(command: &str, header: &[&str]) -> Result<Self, CliError> {
        let mut t = Table {
            meta: vec![
                format!("qgnls {}", env!("CARGO_PKG_VERSION")),
                format!("command: {command}"),
            ],
            writer: csv::Writer::from_writer(Vec::new()),
        };
        t.row(header.iter().map(|s| s.to_string()))?;
        Ok(t)
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.meta.push(format!("{key}: {value}"));
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .map_err(|e| CliError::Numeric(format!("CSV encoding failed: {e}")))
    }

    pub fn finish(self) -> Result<String, CliError> {
        let body = self
            .writer
            .into_inner()
            .map_err(|e| CliError::Numeric(format!("CSV encoding failed: {e}")))?;
        let mut out: String = self.meta.iter().map(|m| format!("# {m}\n")).collect();
        out.push_str(&String::from_utf8_lossy(&body));
        Ok(out)
    }
}

/// Shortest representation that round-trips.
pub fn num(x: f64) -> String {
    x.to_string()
}

pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Config(format!("cannot write to standard output: {e}"))),
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Records of a CSV file written by this tool, with metadata lines skipped.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let text = read(path)?;
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let bad = |e: csv::Error| CliError::Config(format!("{}: {e}", path.display()));
    let header = r
        .headers()
        .map_err(bad)?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = r
        .records()
        .map(|rec| {
            rec.map(|r| r.iter().map(str::to_string).collect())
                .map_err(bad)
        })
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}
