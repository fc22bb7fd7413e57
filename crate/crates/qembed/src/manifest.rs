//! Run manifests: the resolved configuration of a command, written next
//! to its outputs so the run can be replayed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{IoContext, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub subcommand: String,
    /// Every setting of the subcommand after defaults were applied.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub threads: usize,
    /// Not reproducible; ignored on replay.
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").at(path)?;
        let back = Self::load(path)?;
        if back.config != self.config || back.subcommand != self.subcommand {
            return Err(crate::Error::Format(format!(
                "{}: manifest did not read back",
                path.display()
            )));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).at(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// `<output>.manifest.json`.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = RunManifest {
            version: "0.1.0".into(),
            subcommand: "vocab".into(),
            config: serde_json::json!({"min_count": 5}),
            seed: None,
            inputs: vec!["c.txt".into()],
            outputs: vec!["v.txt".into()],
            threads: 1,
            wall_clock_seconds: 0.5,
        };
        let p = manifest_path_for(&dir.path().join("v.txt"));
        assert!(p.to_str().unwrap().ends_with("v.txt.manifest.json"));
        m.save(&p).unwrap();
        assert_eq!(RunManifest::load(&p).unwrap(), m);
    }
}
