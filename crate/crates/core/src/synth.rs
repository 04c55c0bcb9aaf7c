//! Synthetic bordered-table pages with known geometry and text.
//!
//! The table is drawn upright on a light canvas, the canvas is turned with
//! [`rotate_gray`] so the vertical rules have the requested skew, and
//! salt-and-pepper noise goes on last. Words are drawn as rows of small
//! random glyph blocks, short enough that no line element mistakes them for
//! rules. Because recognition is mocked by pixel content, [`mock_fixtures`]
//! runs the same layout analysis as extraction and records the text each
//! detected region should read as.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::PipelineConfig;
use crate::geometry::rotate_gray;
use crate::imaging::{save_gray, CropMode, GrayImage, ImagingError, Rect};
use crate::ocr::{cell_region, BackendKind, MockBackend, OcrError, OcrRequest, RegionKind};
use crate::pipeline::analyze_page;

const PAPER: u8 = 240;
const INK: u8 = 25;
const GLYPH_W: usize = 4;
const GLYPH_H: usize = 7;
const GLYPH_GAP: usize = 2;
const WORD_GAP: usize = 7;
const LINE_PITCH: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid table spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Ocr(#[from] OcrError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableSpec {
    pub width: usize,
    pub height: usize,
    pub rows: usize,
    pub cols: usize,
    /// Rule thickness in pixels.
    pub line_width: usize,
    /// Skew of the vertical rules, degrees.
    pub skew_deg: f64,
    /// Fraction of pixels replaced by pure black or white.
    pub noise: f64,
    /// Draw words in the cells and above and below the table.
    pub text: bool,
    pub seed: u64,
}

impl Default for TableSpec {
    fn default() -> Self {
        TableSpec {
            width: 560,
            height: 640,
            rows: 3,
            cols: 4,
            line_width: 1,
            skew_deg: 0.0,
            noise: 0.0,
            text: true,
            seed: 0,
        }
    }
}

impl TableSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Spec(m));
        if self.width < 160 || self.height < 160 {
            return bad(format!("page {}x{} is smaller than 160x160", self.width, self.height));
        }
        if self.rows == 0 || self.cols == 0 {
            return bad("need at least one row and one column".into());
        }
        if !(1..=5).contains(&self.line_width) {
            return bad(format!("line width {} outside 1..=5", self.line_width));
        }
        if !(self.skew_deg.abs() < 45.0) {
            return bad(format!("skew {} must be under 45 degrees", self.skew_deg));
        }
        if !(0.0..=0.5).contains(&self.noise) {
            return bad(format!("noise {} outside [0, 0.5]", self.noise));
        }
        let (table, _, _) = self.table_geometry();
        if table.height / self.rows < GLYPH_H + 2 * self.line_width + 4 || table.width / self.cols < 12 {
            return bad(format!("{}x{} cells do not fit the page", self.rows, self.cols));
        }
        Ok(())
    }

    /// Table box in the upright frame and the rule positions (top or left
    /// pixel of each rule).
    fn table_geometry(&self) -> (Rect, Vec<usize>, Vec<usize>) {
        let left = (self.width as f64 * 0.08).round() as usize;
        let right = (self.width as f64 * 0.92).round() as usize;
        let top = (self.height as f64 * 0.25).round() as usize;
        let bottom = (self.height as f64 * 0.75).round() as usize;
        let rules = |a: usize, b: usize, n: usize| -> Vec<usize> {
            (0..=n)
                .map(|k| a + ((b - a) as f64 * k as f64 / n as f64).round() as usize)
                .collect()
        };
        let w = self.line_width;
        (
            Rect::new(left, top, right - left + w, bottom - top + w),
            rules(top, bottom, self.rows),
            rules(left, right, self.cols),
        )
    }
}

/// A rendered page and everything drawn on it.
#[derive(Debug, Clone)]
pub struct SyntheticPage {
    pub spec: TableSpec,
    pub image: GrayImage,
    /// Table box before skewing.
    pub table: Rect,
    pub row_rules: Vec<usize>,
    pub col_rules: Vec<usize>,
    /// Words per cell, `[row][col]`.
    pub cells: Vec<Vec<Vec<String>>>,
    /// Lines of words above and below the table.
    pub above: Vec<Vec<String>>,
    pub below: Vec<Vec<String>>,
}

impl SyntheticPage {
    pub fn expected_cells(&self) -> usize {
        self.spec.rows * self.spec.cols
    }

    /// Reading-order text with the same layout as a page document's text.
    pub fn truth_text(&self) -> String {
        let mut lines = Vec::new();
        if !self.above.is_empty() {
            lines.push(join_lines(&self.above));
        }
        for row in &self.cells {
            lines.push(row.iter().map(|c| c.join(" ")).collect::<Vec<_>>().join("\t"));
        }
        if !self.below.is_empty() {
            lines.push(join_lines(&self.below));
        }
        lines.join("\n")
    }

    /// Truth cell under a point of the upright frame.
    pub fn cell_at(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let find = |rules: &[usize], v: f64| rules.windows(2).position(|w| (w[0] as f64) < v && v < w[1] as f64);
        Some((find(&self.row_rules, y)?, find(&self.col_rules, x)?))
    }
}

fn join_lines(lines: &[Vec<String>]) -> String {
    lines.iter().map(|l| l.join(" ")).collect::<Vec<_>>().join("\n")
}

struct Canvas {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Canvas {
    fn fill(&mut self, x0: usize, y0: usize, w: usize, h: usize) {
        for y in y0..(y0 + h).min(self.height) {
            for x in x0..(x0 + w).min(self.width) {
                self.data[y * self.width + x] = INK;
            }
        }
    }

    fn glyph(&mut self, x0: usize, y0: usize, rng: &mut ChaCha8Rng) {
        for dy in 0..GLYPH_H {
            for dx in 0..GLYPH_W {
                if rng.random_bool(0.6) {
                    self.fill(x0 + dx, y0 + dy, 1, 1);
                }
            }
        }
    }

    /// Draws `word` at `(x, y)` and returns the x just past it.
    fn word(&mut self, word: &str, x: usize, y: usize, rng: &mut ChaCha8Rng) -> usize {
        let n = crate::text::graphemes(word).len();
        for i in 0..n {
            self.glyph(x + i * (GLYPH_W + GLYPH_GAP), y, rng);
        }
        x + word_width(word)
    }
}

fn word_width(word: &str) -> usize {
    let n = crate::text::graphemes(word).len();
    n * (GLYPH_W + GLYPH_GAP) - GLYPH_GAP
}

fn pick<'a>(vocabulary: &'a [String], rng: &mut ChaCha8Rng) -> &'a str {
    &vocabulary[rng.random_range(0..vocabulary.len())]
}

/// Lays words left to right from `x0` while they end before `x1`.
fn text_line(
    canvas: &mut Canvas,
    vocabulary: &[String],
    max_words: usize,
    (x0, x1, y): (usize, usize, usize),
    rng: &mut ChaCha8Rng,
) -> Vec<String> {
    let mut words = Vec::new();
    let mut x = x0;
    for _ in 0..max_words {
        let w = pick(vocabulary, rng);
        if x + word_width(w) > x1 {
            break;
        }
        x = canvas.word(w, x, y, rng) + WORD_GAP;
        words.push(w.to_string());
    }
    words
}

fn text_block(canvas: &mut Canvas, vocabulary: &[String], x: (usize, usize), y: (usize, usize), rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let mut lines = Vec::new();
    let mut top = y.0;
    while top + GLYPH_H <= y.1 {
        let line = text_line(canvas, vocabulary, usize::MAX, (x.0, x.1, top), rng);
        if !line.is_empty() {
            lines.push(line);
        }
        top += LINE_PITCH;
    }
    lines
}

pub fn render_page(spec: &TableSpec, vocabulary: &[String]) -> Result<SyntheticPage, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (table, row_rules, col_rules) = spec.table_geometry();
    let lw = spec.line_width;
    let mut canvas = Canvas {
        width: spec.width,
        height: spec.height,
        data: vec![PAPER; spec.width * spec.height],
    };
    for &y in &row_rules {
        canvas.fill(table.x, y, table.width, lw);
    }
    for &x in &col_rules {
        canvas.fill(x, table.y, lw, table.height);
    }

    let text = spec.text && !vocabulary.is_empty();
    let mut cells = vec![vec![Vec::new(); spec.cols]; spec.rows];
    let (mut above, mut below) = (Vec::new(), Vec::new());
    if text {
        for (r, row) in cells.iter_mut().enumerate() {
            let y = (row_rules[r] + lw + row_rules[r + 1]) / 2 - GLYPH_H / 2;
            for (c, cell) in row.iter_mut().enumerate() {
                let max_words = rng.random_range(1..=2);
                let span = (col_rules[c] + lw + 5, col_rules[c + 1].saturating_sub(5), y);
                *cell = text_line(&mut canvas, vocabulary, max_words, span, &mut rng);
            }
        }
        let margin = LINE_PITCH;
        let x = (table.x, table.right());
        above = text_block(&mut canvas, vocabulary, x, (margin, table.y.saturating_sub(margin)), &mut rng);
        below = text_block(&mut canvas, vocabulary, x, (table.bottom() + margin, spec.height - margin), &mut rng);
    }

    let upright = GrayImage::new(spec.width, spec.height, canvas.data)?;
    let mut image = rotate_gray(&upright, spec.skew_deg.to_radians());
    if spec.noise > 0.0 {
        image = GrayImage::from_fn(spec.width, spec.height, |x, y| {
            if rng.random_bool(spec.noise) {
                if rng.random_bool(0.5) { 0 } else { 255 }
            } else {
                image.get(x, y)
            }
        });
    }
    Ok(SyntheticPage {
        spec: spec.clone(),
        image,
        table,
        row_rules,
        col_rules,
        cells,
        above,
        below,
    })
}

/// Word list of plausible syllables over the default alphabet, no repeats.
pub fn synthetic_vocabulary(count: usize, seed: u64) -> Vec<String> {
    const ONSETS: &[&str] = &[
        "b", "ƀ", "p", "m", "k", "h", "r", "l", "n", "t", "đ", "g", "j", "ch", "ng", "kh", "pl", "kr", "br", "tr", "s", "d", "y",
    ];
    const NUCLEI: &[&str] = &["a", "ă", "â", "e", "ĕ", "ê", "i", "ĭ", "o", "ŏ", "ô", "ơ", "u", "ŭ", "ư", "ia", "uô"];
    const CODAS: &[&str] = &["", "", "n", "ng", "m", "k", "t", "p", "h", "l", "r", "i", "ch"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let syllable = |rng: &mut ChaCha8Rng| {
        format!(
            "{}{}{}",
            ONSETS[rng.random_range(0..ONSETS.len())],
            NUCLEI[rng.random_range(0..NUCLEI.len())],
            CODAS[rng.random_range(0..CODAS.len())]
        )
    };
    let mut out: Vec<String> = Vec::new();
    let mut guard = 0;
    while out.len() < count && guard < count * 100 {
        guard += 1;
        let w = if rng.random_bool(0.35) {
            format!("{}{}", syllable(&mut rng), syllable(&mut rng))
        } else {
            syllable(&mut rng)
        };
        let w = crate::text::canonical(&w);
        if crate::text::graphemes(&w).len() >= 2 && !out.contains(&w) {
            out.push(w);
        }
    }
    out
}

/// Typical recognition slip: one diacritic-bearing letter read as its base
/// letter, with probability `rate` per word.
pub fn ocr_slip(word: &str, rate: f64, rng: &mut impl Rng) -> String {
    const BASE: &[(&str, &str)] = &[
        ("ă", "a"), ("â", "a"), ("ĕ", "e"), ("ê", "e"), ("ĭ", "i"), ("ŏ", "o"), ("ô", "o"), ("ơ", "o"), ("ŭ", "u"),
        ("ư", "u"), ("đ", "d"), ("ƀ", "b"),
    ];
    let mut g = crate::text::graphemes(word);
    let spots: Vec<usize> = (0..g.len()).filter(|&i| BASE.iter().any(|(from, _)| *from == g[i])).collect();
    if spots.is_empty() || !rng.random_bool(rate) {
        return word.to_string();
    }
    let i = spots[rng.random_range(0..spots.len())];
    let to = BASE.iter().find(|(from, _)| *from == g[i]).map(|(_, to)| *to).unwrap_or("");
    g[i] = to.to_string();
    g.concat()
}

/// How well fixture generation matched the drawn page.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixtureReport {
    pub expected_cells: usize,
    pub detected_cells: usize,
    /// Cells whose centre fell inside a drawn cell and got its text.
    pub labelled_cells: usize,
    pub skew_deg: f64,
}

/// Adds to `mock` the text every detected region of `page` should read as.
/// `recognized` turns each drawn word into what the engine is supposed to
/// have returned for it.
pub fn mock_fixtures(
    page: &SyntheticPage,
    cfg: &PipelineConfig,
    mock: &mut MockBackend,
    mut recognized: impl FnMut(&str) -> String,
) -> Result<FixtureReport, SynthError> {
    let layout = analyze_page(&page.image, cfg)?;
    let mut read = |words: &[String]| words.iter().map(|w| recognized(w)).collect::<Vec<_>>().join(" ");
    let mut labelled = 0;
    if let Some(region) = &layout.regions.table {
        let (ox, oy) = (layout.crop.x as f64, layout.crop.y as f64);
        for cell in &region.cells {
            let cx = (cell.top_left.x + cell.bottom_right.x) / 2.0 + ox;
            let cy = (cell.top_left.y + cell.bottom_right.y) / 2.0 + oy;
            let Some((r, c)) = page.cell_at(cx, cy) else { continue };
            let Ok(img) = cell_region(&layout.image, cell, cfg.ocr.cell_margin_px) else { continue };
            mock.insert(&OcrRequest::new(img, RegionKind::TableCell)?, read(&page.cells[r][c]));
            labelled += 1;
        }
    }
    let blocks = [(layout.regions.above, &page.above), (layout.regions.below, &page.below)];
    for (rect, lines) in blocks {
        let Some(rect) = rect else { continue };
        let text = lines.iter().map(|l| read(l)).collect::<Vec<_>>().join("\n");
        mock.insert(&OcrRequest::new(layout.image.crop(rect)?, RegionKind::Block)?, text);
    }
    Ok(FixtureReport {
        expected_cells: page.expected_cells(),
        detected_cells: layout.cells.len(),
        labelled_cells: labelled,
        skew_deg: layout.skew.to_degrees(),
    })
}

/// What [`write_corpus`] produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub pages: u64,
    pub vocabulary: usize,
    pub fixtures: usize,
    /// Pages where some drawn cell got no fixture: name, labelled, expected.
    pub partial_pages: Vec<(String, usize, usize)>,
}

pub const CORPUS_CONFIG: &str = "config.toml";
pub const CORPUS_FIXTURES: &str = "fixtures.json";
pub const CORPUS_VOCABULARY: &str = "vocabulary.txt";

/// Writes a ready-to-run corpus into `dir`: `page-NN.png` with matching
/// `page-NN.truth.txt`, the mock fixtures, a vocabulary file listing every
/// word `thres` times, and a configuration that points at the fixtures.
/// Table shapes, rule widths and skews cycle with the page number.
pub fn write_corpus(dir: &Path, pages: u64, seed: u64, slip_rate: f64) -> Result<CorpusSummary, SynthError> {
    fs::create_dir_all(dir)?;
    let vocabulary = synthetic_vocabulary(80, seed);
    let mut cfg = PipelineConfig::default();
    cfg.crop.mode = CropMode::None;
    cfg.ocr.backend = BackendKind::Mock;
    cfg.ocr.fixtures = Some(PathBuf::from(CORPUS_FIXTURES));

    let mut mock = MockBackend::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut partial_pages = Vec::new();
    for i in 0..pages {
        let spec = TableSpec {
            rows: 2 + (i % 4) as usize,
            cols: 2 + (i % 3) as usize,
            line_width: 1 + (i % 3) as usize,
            skew_deg: [0.0, 2.0, -1.5, 3.0][(i % 4) as usize],
            noise: 0.002,
            seed: seed.wrapping_mul(1000).wrapping_add(i),
            ..TableSpec::default()
        };
        let page = render_page(&spec, &vocabulary)?;
        let name = format!("page-{:02}", i + 1);
        save_gray(&page.image, dir.join(format!("{name}.png")))?;
        fs::write(dir.join(format!("{name}.truth.txt")), page.truth_text() + "\n")?;
        let report = mock_fixtures(&page, &cfg, &mut mock, |w| ocr_slip(w, slip_rate, &mut rng))?;
        if report.labelled_cells != report.expected_cells {
            partial_pages.push((name, report.labelled_cells, report.expected_cells));
        }
    }
    fs::write(dir.join(CORPUS_FIXTURES), mock.to_json() + "\n")?;
    let mut vocab = String::new();
    for w in &vocabulary {
        for _ in 0..cfg.correction.thres {
            vocab.push_str(w);
            vocab.push('\n');
        }
    }
    fs::write(dir.join(CORPUS_VOCABULARY), vocab)?;
    fs::write(dir.join(CORPUS_CONFIG), cfg.to_toml())?;
    Ok(CorpusSummary {
        pages,
        vocabulary: vocabulary.len(),
        fixtures: mock.len(),
        partial_pages,
    })
}
