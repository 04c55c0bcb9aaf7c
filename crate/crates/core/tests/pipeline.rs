use std::fs;
use std::path::PathBuf;

use dictscan::config::PipelineConfig;
use dictscan::eval::{run_evaluate, EvalMode};
use dictscan::imaging::{save_gray, CropMode};
use dictscan::ocr::MockBackend;
use dictscan::pipeline::{
    analyze_page, document_page, run_extract, write_outputs, ExtractContext, PageDocument, PageStatus,
};
use dictscan::synth::{mock_fixtures, render_page, synthetic_vocabulary, write_corpus, TableSpec};

fn config() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.crop.mode = CropMode::None;
    cfg
}

fn extract_synthetic(spec: &TableSpec) -> (dictscan::synth::SyntheticPage, PageDocument) {
    let cfg = config();
    let page = render_page(spec, &synthetic_vocabulary(40, 11)).unwrap();
    let mut mock = MockBackend::default().strict(true);
    mock_fixtures(&page, &cfg, &mut mock, str::to_string).unwrap();
    let layout = analyze_page(&page.image, &cfg).unwrap();
    let ctx = ExtractContext {
        config: &cfg,
        backend: &mock,
        corrector: None,
    };
    let doc = document_page("synthetic.png", &layout, &ctx);
    (page, doc)
}

#[test]
fn three_by_four_table_round_trips() {
    let (page, doc) = extract_synthetic(&TableSpec {
        rows: 3,
        cols: 4,
        ..TableSpec::default()
    });
    assert!(doc.errors.is_empty(), "{:?}", doc.errors);
    let table = doc.table.as_ref().unwrap();
    assert_eq!(table.cell_count(), 12);
    assert_eq!(table.rows.len(), 3);
    for (r, row) in table.rows.iter().enumerate() {
        let indices: Vec<_> = row.iter().map(|c| (c.row, c.col)).collect();
        assert_eq!(indices, (0..4).map(|c| (r, c)).collect::<Vec<_>>());
        for cell in row {
            assert_eq!(cell.raw_text, page.cells[r][cell.col].join(" "));
            assert_eq!(cell.corrected_text, cell.raw_text);
        }
    }
    assert_eq!(doc.blocks.len(), 2);
    assert_eq!(doc.text(false), page.truth_text());
    let score = run_evaluate(&doc.text(false), &page.truth_text(), EvalMode::Before).unwrap();
    assert_eq!(score.accuracy(EvalMode::Before).unwrap(), "1.0000");
}

#[test]
fn skewed_page_is_straightened() {
    let (_, doc) = extract_synthetic(&TableSpec {
        rows: 3,
        cols: 4,
        skew_deg: 3.0,
        seed: 5,
        ..TableSpec::default()
    });
    assert!((doc.skew_correction.to_degrees() - 3.0).abs() < 0.5, "{}", doc.skew_correction);
    assert_eq!(doc.table.as_ref().unwrap().cell_count(), 12);
    assert!(doc.errors.is_empty(), "{:?}", doc.errors);
}

#[test]
fn negative_skew_and_thick_rules() {
    let (_, doc) = extract_synthetic(&TableSpec {
        rows: 5,
        cols: 3,
        line_width: 3,
        skew_deg: -2.5,
        noise: 0.005,
        seed: 21,
        ..TableSpec::default()
    });
    assert!((doc.skew_correction.to_degrees() + 2.5).abs() < 0.5);
    assert_eq!(doc.table.unwrap().cell_count(), 15);
}

#[test]
fn auto_crop_keeps_the_table() {
    let mut cfg = config();
    cfg.crop.mode = CropMode::Auto;
    let page = render_page(&TableSpec::default(), &synthetic_vocabulary(40, 2)).unwrap();
    let layout = analyze_page(&page.image, &cfg).unwrap();
    assert_eq!(layout.cells.len(), 12);
    assert!(layout.crop.width < page.image.width());
}

#[test]
fn failed_page_leaves_others_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    write_corpus(&corpus, 3, 4, 0.3).unwrap();
    let mut cfg = PipelineConfig::load(corpus.join("config.toml")).unwrap();
    cfg.ocr.fixtures = Some(corpus.join("fixtures.json"));
    let backend = cfg.ocr.build_backend().unwrap();
    let ctx = ExtractContext {
        config: &cfg,
        backend: backend.as_ref(),
        corrector: None,
    };
    let bad = corpus.join("broken.png");
    fs::write(&bad, b"not an image").unwrap();
    let page = |i: usize| corpus.join(format!("page-{i:02}.png"));
    let all: Vec<PathBuf> = vec![page(1), bad.clone(), page(2), page(3)];
    let good: Vec<PathBuf> = vec![page(1), page(2), page(3)];

    let with_bad = write_outputs(&dir.path().join("a"), &run_extract(&all, &ctx)).unwrap();
    let without = write_outputs(&dir.path().join("b"), &run_extract(&good, &ctx)).unwrap();
    assert_eq!(with_bad.failed(), 1);
    assert_eq!(with_bad.pages[1].status, PageStatus::Failed);
    assert!(with_bad.pages[1].error.as_ref().unwrap().contains("broken.png"));
    assert_eq!(without.failed(), 0);
    for i in 1..=3 {
        let name = format!("page-{i:02}.json");
        let a = fs::read(dir.path().join("a").join(&name)).unwrap();
        let b = fs::read(dir.path().join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn blank_and_tiny_pages_have_no_table() {
    let dir = tempfile::tempdir().unwrap();
    let blank = dir.path().join("blank.png");
    let tiny = dir.path().join("tiny.png");
    save_gray(&dictscan::imaging::GrayImage::filled(400, 500, 255), &blank).unwrap();
    save_gray(&dictscan::imaging::GrayImage::from_fn(30, 30, |x, _| (x * 8) as u8), &tiny).unwrap();
    let cfg = PipelineConfig::default();
    let mock = MockBackend::default();
    let ctx = ExtractContext {
        config: &cfg,
        backend: &mock,
        corrector: None,
    };
    for outcome in run_extract(&[blank, tiny], &ctx) {
        let doc = outcome.result.unwrap();
        assert!(doc.table.is_none());
        assert_eq!(doc.blocks.len(), 1);
        assert_eq!(doc.skew_correction, 0.0);
    }
}
