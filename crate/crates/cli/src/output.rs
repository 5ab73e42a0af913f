use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use weakbmo::verify::Tolerances;
use weakbmo::{doubling_constant, MetricMeasureSpace};

/// Spaces above this size get no doubling constant in report headers.
pub const DOUBLING_LIMIT: usize = 4096;

#[derive(Debug)]
pub enum CliError {
    /// Exit code 1.
    Violation(String),
    /// Exit code 2.
    Input(String),
}

impl From<weakbmo::Error> for CliError {
    fn from(e: weakbmo::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, contents: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write(path, &text)
}

#[derive(Debug, Serialize)]
pub struct Header {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub atoms: usize,
    pub doubling: Option<f64>,
}

impl Header {
    pub fn new(command: &'static str, space: &MetricMeasureSpace, seed: Option<u64>, tolerances: Tolerances) -> Header {
        let doubling = (space.len() <= DOUBLING_LIMIT).then(|| doubling_constant(space));
        Header { version: env!("CARGO_PKG_VERSION"), command, seed, tolerances, atoms: space.len(), doubling }
    }
}

/// CSV with a header row; numbers in shortest round-trip form.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Csv {
        Csv { text: format!("{}\n", columns.join(",")) }
    }

    pub fn row(&mut self, cells: &[f64]) {
        let line: Vec<String> = cells.iter().map(|c| if c.is_nan() { String::new() } else { c.to_string() }).collect();
        let _ = writeln!(self.text, "{}", line.join(","));
    }

    pub fn finish(self) -> String {
        self.text
    }
}
