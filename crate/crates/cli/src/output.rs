use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::ValueEnum;
use shiftstab::io::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Where results go: files in `--out-dir`, or stdout. Every emitted
/// artifact is recorded in the run manifest.
pub struct Sink {
    out_dir: Option<PathBuf>,
    pub format: Format,
    manifest: RunManifest,
}

impl Sink {
    pub fn new(out_dir: Option<PathBuf>, format: Format, manifest: RunManifest) -> Result<Self> {
        if let Some(dir) = &out_dir {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(Sink { out_dir, format, manifest })
    }

    pub fn parameter(&mut self, key: &str, value: impl serde::Serialize) {
        let value = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.manifest.parameters.insert(key.to_string(), value);
        self.manifest.hash = self.manifest.compute_hash();
    }

    pub fn has_out_dir(&self) -> bool {
        self.out_dir.is_some()
    }

    /// Table result: a file named `name` under the out-dir, else stdout.
    pub fn primary(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        self.write(name, contents, false)
    }

    /// Report result: always printed to stdout, and also saved under the
    /// out-dir when one is given.
    pub fn report(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        std::io::stdout().write_all(contents)?;
        if self.out_dir.is_some() {
            self.write(name, contents, false)
        } else {
            self.manifest.outputs.push("stdout".to_string());
            self.manifest.hash = self.manifest.compute_hash();
            Ok(())
        }
    }

    /// Secondary result: a file under the out-dir, else stderr.
    pub fn secondary(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        self.write(name, contents, true)
    }

    fn write(&mut self, name: &str, contents: &[u8], secondary: bool) -> Result<()> {
        let target = match &self.out_dir {
            Some(dir) => {
                let path = dir.join(name);
                fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
                name.to_string()
            }
            None if secondary => {
                std::io::stderr().write_all(contents)?;
                "stderr".to_string()
            }
            None => {
                std::io::stdout().write_all(contents)?;
                "stdout".to_string()
            }
        };
        self.manifest.outputs.push(target);
        self.manifest.hash = self.manifest.compute_hash();
        Ok(())
    }

    /// Writes `manifest.json` to the out-dir, or to stderr.
    pub fn finish(self) -> Result<()> {
        let mut text = self.manifest.to_json();
        text.push('\n');
        match &self.out_dir {
            Some(dir) => {
                let path = dir.join("manifest.json");
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            None => std::io::stderr().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

pub fn json_bytes(value: &impl serde::Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}
