//! Number formatting, CSV/JSON writers and the run manifest.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Shortest decimal string for `x` rounded to 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 || !r.is_finite() || (1e-5..1e15).contains(&r.abs()) {
        r.to_string()
    } else {
        format!("{r:e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Formats an integer list as `[a b c]`.
pub fn fmt_list(v: &[usize]) -> String {
    let inner: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", inner.join(" "))
}

/// Recursively rounds every number in a JSON value.
pub fn round_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) => {
            if n.is_f64() {
                if let Some(x) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x))) {
                    *n = x;
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_json),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidSpec(format!("unknown format `{other}` (expected csv or json)"))),
        }
    }
}

/// A table destined for CSV, with a JSON document for the other format.
pub struct Output {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub json: serde_json::Value,
}

impl Output {
    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                w.into_inner().map_err(|e| Error::Io(e.into_error()))
            }
            Format::Json => {
                let mut v = self.json.clone();
                round_json(&mut v);
                let mut bytes = serde_json::to_vec_pretty(&v)?;
                bytes.push(b'\n');
                Ok(bytes)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub schemes: Vec<String>,
    pub outputs: Vec<String>,
    pub version: String,
    pub seed: Option<u64>,
    pub started_unix: f64,
    pub elapsed_seconds: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        Self {
            command: command.to_string(),
            inputs: Vec::new(),
            schemes: Vec::new(),
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            started_unix,
            elapsed_seconds: 0.0,
            notes: Vec::new(),
        }
    }
}

/// Sidecar path for an output file: `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes `output` to `out` (or stdout) and its manifest next to it (or to
/// stderr when writing to stdout).
pub fn emit(
    output: &Output,
    format: Format,
    out: Option<&Path>,
    mut manifest: RunManifest,
    started: Instant,
) -> Result<RunManifest> {
    let bytes = output.render(format)?;
    if let Some(path) = out {
        manifest.outputs.push(path.display().to_string());
    }
    manifest.elapsed_seconds = started.elapsed().as_secs_f64();
    let manifest_json = serde_json::to_string_pretty(&manifest)?;
    match out {
        Some(path) => {
            File::create(path)?.write_all(&bytes)?;
            std::fs::write(manifest_path(path), manifest_json + "\n")?;
        }
        None => {
            io::stdout().write_all(&bytes)?;
            eprintln!("{manifest_json}");
        }
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_num(0.921318112345678), "0.921318112346");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(-1.0e-20 / 3.0), "-3.33333333333e-21");
        assert_eq!(fmt_opt(None), "");
        assert_eq!(fmt_list(&[1, 2, 3]), "[1 2 3]");
    }

    #[test]
    fn manifest_sidecar() {
        assert_eq!(manifest_path(Path::new("/tmp/a.csv")), PathBuf::from("/tmp/a.csv.manifest.json"));
    }

    #[test]
    fn csv_render() {
        let o = Output {
            header: vec!["a".into(), "b".into()],
            rows: vec![vec!["1".into(), "x,y".into()]],
            json: serde_json::json!({"a": 0.1234567890123456}),
        };
        assert_eq!(String::from_utf8(o.render(Format::Csv).unwrap()).unwrap(), "a,b\n1,\"x,y\"\n");
        let j = String::from_utf8(o.render(Format::Json).unwrap()).unwrap();
        assert!(j.contains("0.123456789012"), "{j}");
    }
}
