//! Text recognition backends: an external engine run as a subprocess, and a
//! fixture-driven mock keyed by region content.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::imaging::{save_gray, GrayImage, ImagingError, Rect};
use crate::layout::Cell;

#[derive(Debug, thiserror::Error)]
pub enum OcrError {
    #[error("OCR region is empty")]
    EmptyRegion,
    #[error("OCR engine `{program}` could not be started: {reason}")]
    BackendUnavailable { program: String, reason: String },
    #[error("OCR engine failed ({status}): {stderr}")]
    BackendFailure { status: String, stderr: String },
    #[error("OCR engine exceeded {seconds} s")]
    BackendTimeout { seconds: f64 },
    #[error("no fixture for region {0}")]
    UnknownRegion(String),
    #[error("bad fixture file: {0}")]
    Fixture(String),
    #[error("invalid OCR configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    TableCell,
    Block,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcrRequest {
    image: GrayImage,
    kind: RegionKind,
}

impl OcrRequest {
    pub fn new(image: GrayImage, kind: RegionKind) -> Result<Self, OcrError> {
        if image.is_empty() {
            return Err(OcrError::EmptyRegion);
        }
        Ok(OcrRequest { image, kind })
    }

    pub fn image(&self) -> &GrayImage {
        &self.image
    }

    pub fn kind(&self) -> RegionKind {
        self.kind
    }

    /// Hex SHA-256 over width, height (little-endian u64) and pixels.
    pub fn content_key(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.image.width() as u64).to_le_bytes());
        h.update((self.image.height() as u64).to_le_bytes());
        h.update(self.image.data());
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Tesseract,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OcrConfig {
    pub backend: BackendKind,
    pub program: PathBuf,
    /// Mock backend fixture file (JSON object of content key to text).
    pub fixtures: Option<PathBuf>,
    /// Mock backend: unknown regions are errors rather than empty text.
    pub strict: bool,
    pub languages: Vec<String>,
    pub engine_mode: u8,
    pub segmentation_mode: u8,
    pub timeout_s: f64,
    /// Worker threads; `None` uses every logical CPU.
    pub parallelism: Option<usize>,
    pub cell_margin_px: usize,
}

impl Default for OcrConfig {
    fn default() -> Self {
        OcrConfig {
            backend: BackendKind::Tesseract,
            program: PathBuf::from("tesseract"),
            fixtures: None,
            strict: false,
            languages: vec!["vie".into(), "en".into()],
            engine_mode: 1,
            segmentation_mode: 6,
            timeout_s: 30.0,
            parallelism: None,
            cell_margin_px: 2,
        }
    }
}

impl OcrConfig {
    pub fn validate(&self) -> Result<(), OcrError> {
        let bad = |m: String| Err(OcrError::Config(m));
        if self.languages.is_empty() {
            return bad("languages must not be empty".into());
        }
        if let Some(l) = self
            .languages
            .iter()
            .find(|l| l.is_empty() || !l.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
        {
            return bad(format!("bad language code {l:?}"));
        }
        if self.engine_mode > 3 {
            return bad(format!("engine_mode must be 0..=3, got {}", self.engine_mode));
        }
        if self.segmentation_mode > 13 {
            return bad(format!("segmentation_mode must be 0..=13, got {}", self.segmentation_mode));
        }
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return bad(format!("timeout_s must be positive, got {}", self.timeout_s));
        }
        if self.parallelism == Some(0) {
            return bad("parallelism must be at least 1".into());
        }
        if self.backend == BackendKind::Mock && self.fixtures.is_none() && self.strict {
            return bad("strict mock backend needs a fixture file".into());
        }
        Ok(())
    }

    /// Engine options: `-l vie+en --oem 1 --psm 6` with the defaults.
    pub fn engine_args(&self) -> Vec<String> {
        vec![
            "-l".into(),
            self.languages.join("+"),
            "--oem".into(),
            self.engine_mode.to_string(),
            "--psm".into(),
            self.segmentation_mode.to_string(),
        ]
    }

    pub fn build_backend(&self) -> Result<Box<dyn OcrBackend>, OcrError> {
        self.validate()?;
        Ok(match self.backend {
            BackendKind::Tesseract => Box::new(TesseractBackend::new(self)),
            BackendKind::Mock => {
                let mock = match &self.fixtures {
                    Some(p) => MockBackend::load(p)?,
                    None => MockBackend::default(),
                };
                Box::new(mock.strict(self.strict))
            }
        })
    }
}

pub trait OcrBackend: Send + Sync {
    /// Text for the region with trailing whitespace removed.
    fn recognize(&self, req: &OcrRequest) -> Result<String, OcrError>;
}

pub fn recognize(backend: &dyn OcrBackend, req: &OcrRequest) -> Result<String, OcrError> {
    backend.recognize(req)
}

/// Runs `<program> <image.png> stdout <engine args>` once per region.
#[derive(Debug, Clone)]
pub struct TesseractBackend {
    program: PathBuf,
    args: Vec<String>,
    timeout: Duration,
}

impl TesseractBackend {
    pub fn new(cfg: &OcrConfig) -> Self {
        TesseractBackend {
            program: cfg.program.clone(),
            args: cfg.engine_args(),
            timeout: Duration::from_secs_f64(cfg.timeout_s),
        }
    }

    pub fn command_line(&self, image: &Path) -> Vec<String> {
        let mut v = vec![
            self.program.display().to_string(),
            image.display().to_string(),
            "stdout".to_string(),
        ];
        v.extend(self.args.iter().cloned());
        v
    }
}

fn drain(mut r: impl Read + Send + 'static) -> std::thread::JoinHandle<Vec<u8>> {
    std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        buf
    })
}

impl OcrBackend for TesseractBackend {
    fn recognize(&self, req: &OcrRequest) -> Result<String, OcrError> {
        let tmp = tempfile::Builder::new().prefix("region-").suffix(".png").tempfile()?;
        save_gray(&req.image, tmp.path())?;
        let mut child = Command::new(&self.program)
            .arg(tmp.path())
            .arg("stdout")
            .args(&self.args)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| OcrError::BackendUnavailable {
                program: self.program.display().to_string(),
                reason: e.to_string(),
            })?;
        let out = drain(child.stdout.take().expect("piped stdout"));
        let err = drain(child.stderr.take().expect("piped stderr"));
        let deadline = Instant::now() + self.timeout;
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break status;
            }
            if Instant::now() >= deadline {
                let _ = child.kill();
                let _ = child.wait();
                return Err(OcrError::BackendTimeout {
                    seconds: self.timeout.as_secs_f64(),
                });
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        let stdout = out.join().unwrap_or_default();
        let stderr = err.join().unwrap_or_default();
        if !status.success() {
            return Err(OcrError::BackendFailure {
                status: status.to_string(),
                stderr: String::from_utf8_lossy(&stderr).trim().to_string(),
            });
        }
        let text = String::from_utf8(stdout).map_err(|e| OcrError::BackendFailure {
            status: status.to_string(),
            stderr: format!("output is not UTF-8: {e}"),
        })?;
        Ok(text.trim_end().to_string())
    }
}

/// Looks regions up by [`OcrRequest::content_key`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MockBackend {
    table: BTreeMap<String, String>,
    strict: bool,
}

impl MockBackend {
    pub fn new(table: BTreeMap<String, String>) -> Self {
        MockBackend { table, strict: false }
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn from_json(s: &str) -> Result<Self, OcrError> {
        serde_json::from_str(s)
            .map(MockBackend::new)
            .map_err(|e| OcrError::Fixture(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, OcrError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.table).expect("string map serializes")
    }

    pub fn insert(&mut self, req: &OcrRequest, text: impl Into<String>) {
        self.table.insert(req.content_key(), text.into());
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl OcrBackend for MockBackend {
    fn recognize(&self, req: &OcrRequest) -> Result<String, OcrError> {
        let key = req.content_key();
        match self.table.get(&key) {
            Some(t) => Ok(t.trim_end().to_string()),
            None if self.strict => Err(OcrError::UnknownRegion(key)),
            None => Ok(String::new()),
        }
    }
}

/// Pixels handed to the engine for `cell`: its box shrunk by `margin` on
/// every side so the rules around it stay out.
pub fn cell_region(page: &GrayImage, cell: &Cell, margin: usize) -> Result<GrayImage, OcrError> {
    let rect = cell
        .bbox(page.bounds())
        .and_then(|r: Rect| r.inset(margin))
        .ok_or(OcrError::EmptyRegion)?;
    Ok(page.crop(rect)?)
}

pub fn thread_pool(parallelism: Option<usize>) -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = parallelism {
        b = b.num_threads(n);
    }
    b.build().expect("thread pool")
}

/// Recognizes every cell independently; the result has one entry per input
/// cell, in input order, with failures kept in place. Without a configured
/// parallelism the surrounding worker pool is used.
pub fn recognize_cells(
    page: &GrayImage,
    cells: &[Cell],
    backend: &dyn OcrBackend,
    cfg: &OcrConfig,
) -> Vec<(Cell, Result<String, OcrError>)> {
    use rayon::prelude::*;
    let one = |cell: &Cell| {
        let text = cell_region(page, cell, cfg.cell_margin_px)
            .and_then(|img| OcrRequest::new(img, RegionKind::TableCell))
            .and_then(|req| backend.recognize(&req));
        (*cell, text)
    };
    match cfg.parallelism {
        Some(n) => thread_pool(Some(n)).install(|| cells.par_iter().map(one).collect()),
        None => cells.par_iter().map(one).collect(),
    }
}
