//! Run manifests and deterministic output writers.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_sha256: Option<String>,
    pub parameters: serde_json::Value,
    pub outputs: Vec<PathBuf>,
    pub version: &'static str,
    pub wall_time_s: f64,
}

/// Collects what a run produced and writes one manifest at the end.
pub struct Recorder {
    command: String,
    config_sha256: Option<String>,
    parameters: serde_json::Value,
    outputs: Vec<PathBuf>,
    started: Instant,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Recorder {
    pub fn new(command: &str, parameters: serde_json::Value) -> Self {
        Recorder {
            command: command.to_string(),
            config_sha256: None,
            parameters,
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn hash_config(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.config_sha256 = Some(sha256_hex(&bytes));
        Ok(())
    }

    /// Writes `text` to `path`, or to stdout when `path` is `None`.
    pub fn emit(&mut self, path: Option<&Path>, text: &str) -> Result<()> {
        match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                }
                std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
                self.outputs.push(p.to_path_buf());
            }
            None => print!("{text}"),
        }
        Ok(())
    }

    /// Writes the manifest next to the primary output, or as
    /// `<command>.manifest.json` in `workdir` when output went to stdout.
    pub fn finish(self, workdir: &Path, primary: Option<&Path>) -> Result<PathBuf> {
        let path = match primary {
            Some(p) => {
                let mut s = p.as_os_str().to_owned();
                s.push(".manifest.json");
                PathBuf::from(s)
            }
            None => workdir.join(format!("{}.manifest.json", self.command)),
        };
        let manifest = RunManifest {
            command: self.command,
            config_sha256: self.config_sha256,
            parameters: self.parameters,
            outputs: self.outputs,
            version: env!("CARGO_PKG_VERSION"),
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Pretty JSON with a trailing newline. Object keys come out sorted, so equal
/// values give byte-identical text.
pub fn json_text<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(&serde_json::to_value(value)?)? + "\n")
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [std::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
