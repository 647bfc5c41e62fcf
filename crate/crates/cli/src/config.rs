use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

/// Number or string, so angles can be written as `4.71` or `"3pi/2"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NumOrText {
    Num(f64),
    Text(String),
}

impl NumOrText {
    pub fn into_text(self) -> String {
        match self {
            NumOrText::Num(v) => v.to_string(),
            NumOrText::Text(s) => s,
        }
    }
}

/// TOML run configuration. Every key is optional and command-line flags win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub n: Option<String>,
    pub space: Option<String>,
    pub source: Option<String>,
    pub target: Option<String>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub method: Option<String>,
    pub family: Option<String>,
    pub samples: Option<usize>,
    pub kinds: Option<String>,
    pub function: Option<String>,
    pub omega: Option<NumOrText>,
    pub m: Option<u32>,
    pub cutoff: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub dim: Option<u32>,
    pub level: Option<u32>,
    pub wavelet: Option<String>,
    pub t_nominal: Option<f64>,
    pub min_gap: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        // relative paths in the file are relative to the file
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.input, &mut cfg.out, &mut cfg.json].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}
