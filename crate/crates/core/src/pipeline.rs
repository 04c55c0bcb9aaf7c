//! Page extraction end to end, plus the lexicon-building and standalone
//! correction entry points used by the command line.
//!
//! A page goes through: crop, Otsu binarization, horizontal and vertical
//! line masks, Hough detection and consolidation, skew estimation from the
//! longest vertical rule, rotation, a second rule-detection pass on the
//! straightened page, grid and cells, the band split, OCR of every cell and
//! of the text above and below the table, and correction.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize, Serializer};

use crate::config::PipelineConfig;
use crate::corrector::Corrector;
use crate::geometry::{consolidate, detect_segments, rotate_gray, skew_angle, LineSegment, Orientation};
use crate::imaging::{
    binarize, compute_histogram, extract_line_mask, find_crop, line_element_length, load_gray,
    otsu_threshold, GrayImage, ImagingError, Rect,
};
use crate::layout::{assign_row_col, build_grid, detect_cells, split_regions, Cell, PageRegions};
use crate::lexicon::{ingest_reader, BuildSummary, Lexicon};
use crate::ocr::{recognize_cells, thread_pool, OcrBackend, OcrRequest, RegionKind};

/// Skews smaller than this (radians) are left alone.
pub const MIN_DESKEW: f64 = 0.05 * std::f64::consts::PI / 180.0;

#[derive(Debug, thiserror::Error)]
pub enum PageError {
    #[error("cannot read {path}: {source}")]
    Input { path: String, source: ImagingError },
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}

/// `v` with exactly `places` decimals; negative zero prints as zero.
pub fn fixed_decimal(v: f64, places: usize) -> String {
    let s = format!("{v:.places$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn raw_number<S: Serializer>(text: String, s: S) -> Result<S::Ok, S::Error> {
    let raw = serde_json::value::RawValue::from_string(text).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

pub(crate) fn ser_angle<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    raw_number(fixed_decimal(*v, 3), s)
}

/// Edges found in one detection pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Edges {
    pub horizontal: Vec<LineSegment>,
    pub vertical: Vec<LineSegment>,
}

/// Geometry of one page, before any text recognition.
#[derive(Debug, Clone)]
pub struct PageLayout {
    pub crop: Rect,
    /// Estimated skew that was removed (the page was turned by its negative).
    pub skew: f64,
    /// Cropped and straightened page.
    pub image: GrayImage,
    pub edges: Option<Edges>,
    pub cells: Vec<Cell>,
    pub regions: PageRegions,
}

/// Binarize, extract line masks, detect and consolidate. `None` when the page
/// has no usable contrast or is too small for line elements.
pub fn detect_edges(img: &GrayImage, cfg: &PipelineConfig) -> Result<Option<Edges>, ImagingError> {
    let hist = compute_histogram(img)?;
    let t = match otsu_threshold(&hist) {
        Ok(r) => r.threshold,
        Err(ImagingError::DegenerateHistogram(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let bin = binarize(img, t, true);
    let divisor = cfg.imaging.kernel_divisor;
    let mut out = Edges::default();
    for orientation in [Orientation::Horizontal, Orientation::Vertical] {
        let mask = match extract_line_mask(&bin, orientation, divisor) {
            Ok(m) => m,
            Err(ImagingError::ElementTooSmall { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let mut params = cfg.hough;
        if params.min_length.is_none() {
            params.min_length = Some(line_element_length(&bin, orientation, divisor)?);
        }
        let raw = detect_segments(&mask, orientation, &params);
        let merged = consolidate(
            &raw,
            orientation,
            cfg.consolidate.gap_tol,
            cfg.consolidate.offset_tol,
        );
        match orientation {
            Orientation::Vertical => out.vertical = merged,
            _ => out.horizontal = merged,
        }
    }
    Ok(Some(out))
}

/// Skew of the longest vertical edge, or 0 without one.
pub fn estimate_skew(edges: &Edges) -> f64 {
    edges
        .vertical
        .iter()
        .max_by(|a, b| a.length().total_cmp(&b.length()))
        .and_then(|s| skew_angle(s).ok())
        .map_or(0.0, |a| a.radians())
}

pub fn analyze_page(gray: &GrayImage, cfg: &PipelineConfig) -> Result<PageLayout, ImagingError> {
    let crop = match find_crop(gray, &cfg.crop) {
        Ok(r) => r,
        Err(ImagingError::NoContent) => gray.bounds(),
        Err(e) => return Err(e),
    };
    let page = gray.crop(crop)?;
    let first = detect_edges(&page, cfg)?;
    let estimated = first.as_ref().map_or(0.0, estimate_skew);
    let (skew, image, edges) = if estimated.abs() >= MIN_DESKEW {
        let straightened = rotate_gray(&page, -estimated);
        let edges = detect_edges(&straightened, cfg)?;
        (estimated, straightened, edges)
    } else {
        (0.0, page, first)
    };
    let tol = cfg.layout.snap_tol;
    let cells = match &edges {
        Some(e) => {
            let grid = build_grid(&e.horizontal, &e.vertical, tol, image.bounds());
            assign_row_col(&detect_cells(&grid), tol)
        }
        None => Vec::new(),
    };
    let regions = split_regions(image.width(), image.height(), &cells);
    Ok(PageLayout {
        crop,
        skew,
        image,
        edges,
        cells,
        regions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDocument {
    pub row: usize,
    pub col: usize,
    pub bbox: Rect,
    pub raw_text: String,
    pub corrected_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDocument {
    pub bbox: Rect,
    pub rows: Vec<Vec<CellDocument>>,
}

impl TableDocument {
    pub fn cell_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Above,
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDocument {
    pub kind: BlockKind,
    pub bbox: Rect,
    pub raw_text: String,
    pub corrected_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionError {
    pub region: String,
    pub message: String,
}

/// Structured result for one page. Boxes are in the coordinates of the
/// cropped, straightened page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageDocument {
    pub source: String,
    pub crop: Rect,
    #[serde(serialize_with = "ser_angle")]
    pub skew_correction: f64,
    pub table: Option<TableDocument>,
    pub blocks: Vec<BlockDocument>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<RegionError>,
}

impl PageDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("page document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Reading-order text: the block above, table rows (cells separated by
    /// tabs), then the block below.
    pub fn text(&self, corrected: bool) -> String {
        let pick = |raw: &String, fixed: &String| if corrected { fixed.clone() } else { raw.clone() };
        let mut lines = Vec::new();
        for b in self.blocks.iter().filter(|b| b.kind == BlockKind::Above) {
            lines.push(pick(&b.raw_text, &b.corrected_text));
        }
        if let Some(t) = &self.table {
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(|c| pick(&c.raw_text, &c.corrected_text)).collect();
                lines.push(cells.join("\t"));
            }
        }
        for b in self.blocks.iter().filter(|b| b.kind == BlockKind::Below) {
            lines.push(pick(&b.raw_text, &b.corrected_text));
        }
        lines.join("\n")
    }
}

/// What extraction needs besides the page: configuration, an OCR backend and
/// (optionally) a corrector.
pub struct ExtractContext<'a> {
    pub config: &'a PipelineConfig,
    pub backend: &'a dyn OcrBackend,
    pub corrector: Option<&'a Corrector>,
}

impl ExtractContext<'_> {
    fn correct(&self, raw: &str) -> String {
        match self.corrector {
            Some(c) if self.config.pipeline.correct => c.correct_text(raw),
            _ => raw.to_string(),
        }
    }
}

/// Runs recognition and correction over an analyzed page.
pub fn document_page(source: &str, layout: &PageLayout, ctx: &ExtractContext) -> PageDocument {
    let bounds = layout.image.bounds();
    let mut errors = Vec::new();

    let table = layout.regions.table.as_ref().map(|region| {
        let results = recognize_cells(&layout.image, &region.cells, ctx.backend, &ctx.config.ocr);
        let mut rows: Vec<Vec<CellDocument>> = Vec::new();
        for (cell, text) in results {
            let raw = text.unwrap_or_else(|e| {
                errors.push(RegionError {
                    region: format!("cell r{} c{}", cell.row_index, cell.col_index),
                    message: e.to_string(),
                });
                String::new()
            });
            if rows.len() <= cell.row_index {
                rows.resize_with(cell.row_index + 1, Vec::new);
            }
            rows[cell.row_index].push(CellDocument {
                row: cell.row_index,
                col: cell.col_index,
                bbox: cell.bbox(bounds).unwrap_or(Rect::new(0, 0, 0, 0)),
                corrected_text: ctx.correct(&raw),
                raw_text: raw,
            });
        }
        TableDocument {
            bbox: region.band,
            rows,
        }
    });

    let mut blocks = Vec::new();
    for (kind, rect) in [
        (BlockKind::Above, layout.regions.above),
        (BlockKind::Below, layout.regions.below),
    ] {
        let Some(rect) = rect else { continue };
        let raw = layout
            .image
            .crop(rect)
            .map_err(Into::into)
            .and_then(|img| OcrRequest::new(img, RegionKind::Block))
            .and_then(|req| ctx.backend.recognize(&req))
            .unwrap_or_else(|e| {
                errors.push(RegionError {
                    region: format!("{kind:?} block").to_lowercase(),
                    message: e.to_string(),
                });
                String::new()
            });
        blocks.push(BlockDocument {
            kind,
            bbox: rect,
            corrected_text: ctx.correct(&raw),
            raw_text: raw,
        });
    }

    PageDocument {
        source: source.to_string(),
        crop: layout.crop,
        skew_correction: layout.skew,
        table,
        blocks,
        errors,
    }
}

fn source_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn extract_page(path: &Path, ctx: &ExtractContext) -> Result<PageDocument, PageError> {
    let gray = load_gray(path).map_err(|source| PageError::Input {
        path: path.display().to_string(),
        source,
    })?;
    let layout = analyze_page(&gray, ctx.config)?;
    Ok(document_page(&source_name(path), &layout, ctx))
}

#[derive(Debug)]
pub struct PageOutcome {
    pub source: PathBuf,
    pub result: Result<PageDocument, PageError>,
}

/// Processes pages independently on a worker pool; results keep input order.
pub fn run_extract(images: &[PathBuf], ctx: &ExtractContext) -> Vec<PageOutcome> {
    use rayon::prelude::*;
    thread_pool(ctx.config.pipeline.parallelism).install(|| {
        images
            .par_iter()
            .map(|p| PageOutcome {
                source: p.clone(),
                result: extract_page(p, ctx),
            })
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PageStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub source: String,
    pub status: PageStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub pages: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn failed(&self) -> usize {
        self.pages.iter().filter(|p| p.status == PageStatus::Failed).count()
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes `<stem>.json` per successful page and `manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, outcomes: &[PageOutcome]) -> io::Result<Manifest> {
    fs::create_dir_all(dir)?;
    let mut used = BTreeSet::new();
    let mut pages = Vec::new();
    for o in outcomes {
        let source = o.source.display().to_string();
        match &o.result {
            Ok(doc) => {
                let stem = o
                    .source
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "page".into());
                let mut name = format!("{stem}.json");
                let mut k = 2;
                while !used.insert(name.clone()) {
                    name = format!("{stem}-{k}.json");
                    k += 1;
                }
                fs::write(dir.join(&name), doc.to_json())?;
                pages.push(ManifestEntry {
                    source,
                    status: PageStatus::Ok,
                    output: Some(name),
                    error: None,
                });
            }
            Err(e) => pages.push(ManifestEntry {
                source,
                status: PageStatus::Failed,
                output: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let manifest = Manifest { pages };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(manifest)
}

/// Builds a lexicon from vocabulary files (one entry per line) and saves it.
pub fn run_build_lexicon(
    vocab_files: &[PathBuf],
    out: &Path,
    mut lexicon: Lexicon,
) -> Result<BuildSummary, crate::lexicon::LexiconError> {
    let mut entries = 0;
    for f in vocab_files {
        let reader = io::BufReader::new(fs::File::open(f)?);
        entries += ingest_reader(&mut lexicon, reader)?;
    }
    lexicon.save(out)?;
    Ok(BuildSummary {
        entries,
        words: lexicon.word_count(),
        clusters: lexicon.cluster_count(),
    })
}

/// Corrects a text stream line by line; line breaks come through unchanged.
pub fn run_correct<R: BufRead, W: Write>(mut input: R, mut output: W, corrector: &Corrector) -> io::Result<()> {
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        let body = line.trim_end_matches(['\n', '\r']);
        let ending = &line[body.len()..];
        output.write_all(corrector.correct_text(body).as_bytes())?;
        output.write_all(ending.as_bytes())?;
    }
    output.flush()
}
