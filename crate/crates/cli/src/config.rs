use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use hoqmc::netgen::DIRECTION_NUMBERS_ENV;
use hoqmc::{Error, Result, FORMAT_VERSION};
use serde::Serialize;
use serde_json::Value;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Everything that determines a run's output, echoed into every artifact.
/// The thread count is left out on purpose: it never changes the output.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    /// Absent when a run mixes bases.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_range: Option<[u32; 2]>,
    pub s: usize,
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scramble: Option<String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrand: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub format: String,
    /// `bundled` or the file named by the direction-number environment variable.
    pub direction_numbers: String,
    /// Command-specific settings.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn new(command: &str, b: Option<u32>, format: &str, output: Option<&Path>) -> Self {
        Self {
            command: command.to_string(),
            b,
            format: format.to_string(),
            output: output.map(|p| p.display().to_string()),
            direction_numbers: std::env::var(DIRECTION_NUMBERS_ENV).unwrap_or_else(|_| "bundled".into()),
            ..Self::default()
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params
            .insert(key.to_string(), serde_json::to_value(value).expect("plain data serializes"));
        self
    }
}

/// One failed check; printed as `FAIL <id> <detail>` on stderr.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub id: String,
    pub detail: String,
}

impl Failure {
    pub fn new(id: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            detail: detail.into(),
        }
    }
}

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: u32,
    pub format_version: &'static str,
    pub config: &'a RunConfig,
    pub passed: bool,
    pub failures: &'a [Failure],
    pub report: &'a T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(config: &'a RunConfig, failures: &'a [Failure], report: &'a T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            format_version: FORMAT_VERSION,
            config,
            passed: failures.is_empty(),
            failures,
            report,
        }
    }
}

/// Runs `body` against the file at `path`, or stdout when `None`.
pub fn with_output(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    with_output(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(Error::from)?;
        writeln!(w)?;
        Ok(())
    })
}

/// JSON companion of a CSV file: `table.csv` -> `table.json`.
pub fn companion_path(csv: &Path) -> PathBuf {
    if csv.extension().is_some_and(|e| e == "json") {
        let mut p = csv.as_os_str().to_owned();
        p.push(".meta.json");
        PathBuf::from(p)
    } else {
        csv.with_extension("json")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn companion_names() {
        assert_eq!(companion_path(Path::new("out/t.csv")), PathBuf::from("out/t.json"));
        assert_eq!(companion_path(Path::new("t")), PathBuf::from("t.json"));
        assert_eq!(companion_path(Path::new("t.json")), PathBuf::from("t.json.meta.json"));
    }

    #[test]
    fn params_are_sorted() {
        let c = RunConfig::new("x", Some(2), "json", None).param("zeta", 1).param("alpha", 2);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.find("alpha").unwrap() < text.find("zeta").unwrap());
    }
}
