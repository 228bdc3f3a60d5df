use std::path::{Path, PathBuf};

use serde::Deserialize;

use gesturelog_core::dataset::SyntheticParams;
use gesturelog_core::raster::RasterSpec;
use gesturelog_core::{LabelMapping, SegmenterConfig, TrainingConfig};

use crate::ToolError;

/// Contents of a `--config` TOML file. Every table is optional; command-line
/// flags override anything set here.
///
/// ```toml
/// seed = 7
///
/// [training]
/// learning_rate = 0.05
/// max_epochs = 2000
///
/// [synthetic]
/// per_class = 200
///
/// [raster]
/// style = "type2"
///
/// [segmenter]
/// confidence_threshold = 0.7
///
/// [mapping]
/// fist = "boring"
///
/// [server]
/// port = 8080
/// log_dir = "sessions"
/// ```
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    pub seed: Option<u64>,
    pub training: TrainingConfig,
    pub synthetic: SyntheticParams,
    pub raster: RasterSpec,
    pub segmenter: SegmenterConfig,
    pub mapping: Option<LabelMapping>,
    pub server: ServerSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerSection {
    pub host: Option<String>,
    pub port: Option<u16>,
    pub model: Option<PathBuf>,
    pub log_dir: Option<PathBuf>,
}

impl ToolConfig {
    pub fn parse(text: &str) -> Result<Self, ToolError> {
        toml::from_str(text).map_err(|e| ToolError::invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ToolError> {
        let text = std::fs::read_to_string(path).map_err(|e| ToolError::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text)
    }

    pub fn load_opt(path: Option<&Path>) -> Result<Self, ToolError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}
