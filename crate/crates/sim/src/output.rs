//! CSV files with a leading `# key=value ...` metadata line.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use hll_core::SketchConfig;

use crate::{Result, SimError, GENERATOR};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    /// Seed, generator, crate version and sketch parameters.
    pub fn new(seed: u64, config: SketchConfig) -> Self {
        Self::default()
            .with("seed", seed)
            .with("generator", GENERATOR)
            .with("version", env!("CARGO_PKG_VERSION"))
            .with("p", config.p())
            .with("q", config.q())
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    fn line(&self) -> String {
        let fields: Vec<String> = self.entries.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("# {}\n", fields.join(" "))
    }

    fn parse(line: &str) -> Result<Self> {
        let body = line
            .trim_end()
            .strip_prefix('#')
            .ok_or_else(|| SimError::InvalidArgument("missing metadata line".into()))?;
        let entries = body
            .split_whitespace()
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.to_owned(), v.to_owned()))
                    .ok_or_else(|| SimError::InvalidArgument(format!("bad metadata field {kv:?}")))
            })
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }
}

/// Writes the metadata line, the header and every row. Floats should be
/// formatted with `Display`, which round-trips.
pub fn write_csv<W, H, R>(mut out: W, meta: &Metadata, header: &[H], rows: R) -> Result<()>
where
    W: Write,
    H: AsRef<str>,
    R: IntoIterator<Item = Vec<String>>,
{
    out.write_all(meta.line().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header.iter().map(AsRef::as_ref))?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file<H, R>(path: &Path, meta: &Metadata, header: &[H], rows: R) -> Result<()>
where
    H: AsRef<str>,
    R: IntoIterator<Item = Vec<String>>,
{
    write_csv(std::io::BufWriter::new(File::create(path)?), meta, header, rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub metadata: Metadata,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Values of column `name` parsed as `f64`.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column(name).ok_or_else(|| SimError::InvalidArgument(format!("no column {name:?}")))?;
        self.rows
            .iter()
            .map(|r| r[i].parse().map_err(|_| SimError::InvalidArgument(format!("not a number: {:?}", r[i]))))
            .collect()
    }
}

pub fn read_csv<R: Read>(input: R) -> Result<CsvTable> {
    let mut input = BufReader::new(input);
    let mut first = String::new();
    input.read_line(&mut first)?;
    let metadata = Metadata::parse(&first)?;
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok(CsvTable { metadata, header, rows })
}

pub fn read_csv_file(path: &Path) -> Result<CsvTable> {
    read_csv(File::open(path)?)
}
