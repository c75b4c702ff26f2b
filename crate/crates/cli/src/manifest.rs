use std::path::{Path, PathBuf};

use fmds_core::{FitConfig, Metric};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    /// One row per object, one column per time point.
    WideCsv,
    /// Long rows `t,i,j,d`.
    TensorCsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Dissim,
    Cmds,
    Fmds,
}

/// Everything needed to reproduce a run. Written next to the outputs and
/// hashed into each of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub format_version: u32,
    pub command: Command,
    pub input: PathBuf,
    pub format: InputFormat,
    /// Only used for wide CSV input.
    pub metric: Metric,
    pub window: usize,
    pub stride: usize,
    pub fit: FitConfig,
    pub out: PathBuf,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let manifest: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Config(format!(
                "unsupported manifest format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.window == 0 || self.stride == 0 {
            return Err(CliError::Config("window and stride must be at least 1".into()));
        }
        self.fit.validate().map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// Hex SHA-256 of the pretty JSON form.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_json().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunManifest {
        RunManifest {
            format_version: FORMAT_VERSION,
            command: Command::Fmds,
            input: "data/tensor.csv".into(),
            format: InputFormat::TensorCsv,
            metric: Metric::Euclidean,
            window: 1,
            stride: 1,
            fit: FitConfig::default(),
            out: "out".into(),
        }
    }

    #[test]
    fn json_round_trip() {
        let m = sample();
        let back: RunManifest = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.hash(), m.hash());
        assert_eq!(m.hash().len(), 64);
    }

    #[test]
    fn hash_tracks_content() {
        let mut other = sample();
        other.fit.seed = 1;
        assert_ne!(other.hash(), sample().hash());
    }

    #[test]
    fn zero_epochs_rejected() {
        let mut m = sample();
        m.fit.max_epochs = 0;
        let err = m.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(sample().validate().is_ok());
    }
}
