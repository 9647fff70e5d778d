//! Run configuration loaded from a JSON file (`--config`).

use prokex_core::backend::BackendConfig;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    pub max_retries: Option<u32>,
    /// Overrides the backend's request timeout.
    pub timeout_seconds: Option<f64>,
}

/// The `--config` file. Everything is optional; defaults are the heuristic
/// backend with the compiled-in prompts, assets and lexicons.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub backend: Option<BackendConfig>,
    pub prompts_dir: Option<PathBuf>,
    pub assets_dir: Option<PathBuf>,
    pub terms_file: Option<PathBuf>,
    pub lexicons_dir: Option<PathBuf>,
    #[serde(default)]
    pub limits: Limits,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| format!("invalid config {}: {e}", path.display()))?;
        config.check_paths()?;
        Ok(config)
    }

    /// Configured paths must exist at load time.
    fn check_paths(&self) -> Result<(), String> {
        let dirs = [
            ("prompts_dir", &self.prompts_dir),
            ("assets_dir", &self.assets_dir),
            ("lexicons_dir", &self.lexicons_dir),
        ];
        for (name, dir) in dirs {
            if let Some(dir) = dir {
                if !dir.is_dir() {
                    return Err(format!("{name} {} is not a directory", dir.display()));
                }
            }
        }
        if let Some(file) = &self.terms_file {
            if !file.is_file() {
                return Err(format!("terms_file {} does not exist", file.display()));
            }
        }
        if let Some(max_retries) = self.limits.max_retries {
            // u32 is already non-negative; reject absurd values early
            if max_retries > 100 {
                return Err(format!("limits.max_retries {max_retries} is unreasonably large"));
            }
        }
        Ok(())
    }
}
