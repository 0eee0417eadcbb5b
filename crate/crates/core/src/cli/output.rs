//! Output files and numeric input tables.
//!
//! Every output starts with a `#` header naming the command, the seed and
//! every resolved configuration value. Numbers are written as
//! `{:.14e}`, lines end in LF.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::CliError;
use super::config::RunConfig;

/// Scientific notation with 15 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.14e}")
}

fn header(command: &str, seed: u64, config: &RunConfig) -> String {
    let mut s = String::new();
    writeln!(s, "# gravsim {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(s, "# command = {command}").unwrap();
    writeln!(s, "# seed = {seed}").unwrap();
    for (k, v) in config.resolved() {
        writeln!(s, "# {k} = {v}").unwrap();
    }
    s
}

/// Accumulates the files one command writes.
pub struct Output {
    dir: PathBuf,
    command: String,
    seed: u64,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, command: &str, seed: u64) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            seed,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: &str, config: &RunConfig) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let text = header(&self.command, self.seed, config) + body;
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Table with one header row of column names.
    pub fn csv(
        &mut self,
        name: &str,
        columns: &[&str],
        rows: impl IntoIterator<Item = Vec<f64>>,
        config: &RunConfig,
    ) -> Result<PathBuf, CliError> {
        let mut body = columns.join(",");
        body.push('\n');
        for row in rows {
            debug_assert_eq!(row.len(), columns.len());
            let cells: Vec<String> = row.into_iter().map(num).collect();
            body.push_str(&cells.join(","));
            body.push('\n');
        }
        self.write(name, &body, config)
    }

    /// Flat `key: value` block.
    pub fn summary(&mut self, name: &str, summary: &Summary, config: &RunConfig) -> Result<PathBuf, CliError> {
        self.write(name, &summary.render(), config)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

#[derive(Debug, Default, Clone)]
pub struct Summary {
    lines: Vec<(String, String)>,
}

impl Summary {
    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.lines.push((key.into(), num(v)));
        self
    }

    pub fn int(&mut self, key: &str, v: u64) -> &mut Self {
        self.lines.push((key.into(), v.to_string()));
        self
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) -> &mut Self {
        self.lines.push((key.into(), v.into()));
        self
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Numeric table: `#` comments and blank lines skipped, cells split on
/// commas or whitespace, a leading non-numeric row taken as column names.
pub fn read_table(path: &Path, expected_cols: &[usize]) -> Result<Vec<Vec<f64>>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let parsed: Result<Vec<f64>, _> = cells.iter().map(|c| c.parse::<f64>()).collect();
        let row = match parsed {
            Ok(r) => r,
            Err(_) if rows.is_empty() && width.is_none() => {
                // Column-name row.
                width = Some(cells.len());
                continue;
            }
            Err(_) => {
                return Err(CliError::Data(format!(
                    "{}:{}: non-numeric value in '{line}'",
                    path.display(),
                    i + 1
                )));
            }
        };
        if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
            return Err(CliError::Data(format!("{}:{}: non-finite value {bad}", path.display(), i + 1)));
        }
        let w = *width.get_or_insert(row.len());
        if row.len() != w || !expected_cols.contains(&w) {
            return Err(CliError::Data(format!(
                "{}:{}: expected {} column(s), found {}",
                path.display(),
                i + 1,
                expected_cols.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" or "),
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}
