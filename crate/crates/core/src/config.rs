//! Pipeline configuration, read from TOML. Every section and key is
//! optional; missing values take the defaults below and unknown keys are
//! rejected.
//!
//! ```toml
//! [crop]
//! mode = "auto"          # auto | none | manual
//! margin_px = 8
//!
//! [imaging]
//! kernel_divisor = 40
//!
//! [hough]
//! rho_resolution = 1.0
//! theta_resolution_deg = 1.0
//! angle_tolerance_deg = 5.0
//! vote_threshold = 50
//! max_gap = 5
//! seed = 0
//!
//! [consolidate]
//! gap_tol = 20.0
//! offset_tol = 3.0
//!
//! [layout]
//! snap_tol = 4.0
//!
//! [ocr]
//! backend = "tesseract"  # tesseract | mock
//! languages = ["vie", "en"]
//! engine_mode = 1
//! segmentation_mode = 6
//! timeout_s = 30.0
//! cell_margin_px = 2
//!
//! [correction]
//! thres = 5
//! max_window = 4
//! min_window = 2
//! unresolved = "advance" # advance | try_shorter
//!
//! [pipeline]
//! correct = true
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corrector::CorrectionConfig;
use crate::geometry::HoughParams;
use crate::imaging::{CropConfig, CropMode, DEFAULT_KERNEL_DIVISOR};
use crate::layout::DEFAULT_SNAP_TOL;
use crate::ocr::OcrConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("bad configuration: {0}")]
    Parse(String),
    #[error("invalid [{section}] setting: {message}")]
    Invalid { section: &'static str, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImagingSection {
    pub kernel_divisor: usize,
}

impl Default for ImagingSection {
    fn default() -> Self {
        ImagingSection {
            kernel_divisor: DEFAULT_KERNEL_DIVISOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsolidateSection {
    pub gap_tol: f64,
    pub offset_tol: f64,
}

impl Default for ConsolidateSection {
    fn default() -> Self {
        ConsolidateSection {
            gap_tol: 20.0,
            offset_tol: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutSection {
    pub snap_tol: f64,
}

impl Default for LayoutSection {
    fn default() -> Self {
        LayoutSection {
            snap_tol: DEFAULT_SNAP_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    /// Run the corrector over recognized text.
    pub correct: bool,
    /// Pages processed at once; `None` uses every logical CPU.
    pub parallelism: Option<usize>,
}

impl Default for PipelineSection {
    fn default() -> Self {
        PipelineSection {
            correct: true,
            parallelism: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub crop: CropConfig,
    pub imaging: ImagingSection,
    pub hough: HoughParams,
    pub consolidate: ConsolidateSection,
    pub layout: LayoutSection,
    pub ocr: OcrConfig,
    pub correction: CorrectionConfig,
    pub pipeline: PipelineSection,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |section: &'static str, message: String| Err(ConfigError::Invalid { section, message });
        if self.crop.mode == CropMode::Manual {
            match self.crop.rect {
                None => return invalid("crop", "manual mode needs `rect`".into()),
                Some(r) if r.is_empty() => return invalid("crop", format!("empty rectangle {r:?}")),
                _ => {}
            }
        }
        if self.imaging.kernel_divisor == 0 {
            return invalid("imaging", "kernel_divisor must be at least 1".into());
        }
        if let Err(m) = self.hough.validate() {
            return invalid("hough", m);
        }
        let c = &self.consolidate;
        if !(c.gap_tol >= 0.0 && c.gap_tol.is_finite() && c.offset_tol >= 0.0 && c.offset_tol.is_finite()) {
            return invalid("consolidate", "tolerances must be finite and non-negative".into());
        }
        if !(self.layout.snap_tol >= 0.0 && self.layout.snap_tol.is_finite()) {
            return invalid("layout", "snap_tol must be finite and non-negative".into());
        }
        if let Err(e) = self.ocr.validate() {
            return invalid("ocr", e.to_string());
        }
        if let Err(e) = self.correction.validate() {
            return invalid("correction", e.to_string());
        }
        if self.pipeline.parallelism == Some(0) {
            return invalid("pipeline", "parallelism must be at least 1".into());
        }
        Ok(())
    }
}
