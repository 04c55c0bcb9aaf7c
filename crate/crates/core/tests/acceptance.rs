//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Every oracle here is written independently of the code
//! under test.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dictscan::config::PipelineConfig;
use dictscan::corrector::{Alphabet, CorrectionConfig, Corrector, GeneralCharMap};
use dictscan::geometry::{intersect, GeometryError, LineSegment, Orientation, Point};
use dictscan::imaging::{otsu_threshold, CropMode, Histogram};
use dictscan::layout::{assign_row_col, detect_cells, GridPoints, DEFAULT_SNAP_TOL};
use dictscan::lexicon::Lexicon;
use dictscan::pipeline::{analyze_page, run_correct};
use dictscan::synth::{render_page, synthetic_vocabulary, write_corpus, TableSpec};
use dictscan::text::graphemes;

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(limit: Duration, took: Duration) -> bool {
    took <= limit
}

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

// 1. Intersection against an exact Cramer solve of the two line equations.
fn criterion_intersection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let (mut pairs, mut worst, mut worst_float_solve) = (0, 0.0f64, 0.0f64);
    while pairs < 10_000 {
        let mut p = || Point::new(rng.random_range(-1000.0..1000.0), rng.random_range(-1000.0..1000.0));
        let (a1, a2, b1, b2) = (p(), p(), p(), p());
        let (Ok(a), Ok(b)) = (
            LineSegment::new(a1, a2, Orientation::Free),
            LineSegment::new(b1, b2, Orientation::Free),
        ) else {
            continue;
        };
        let got = match intersect(&a, &b) {
            Ok(q) => q,
            Err(GeometryError::Parallel) => continue,
            Err(e) => panic!("{e}"),
        };
        pairs += 1;
        // A x + B y = C for each line
        let line = |p: Point, q: Point| {
            let (a, b) = (exact(q.y) - exact(p.y), exact(p.x) - exact(q.x));
            let c = &a * exact(p.x) + &b * exact(p.y);
            (a, b, c)
        };
        let (a_1, b_1, c_1) = line(a1, a2);
        let (a_2, b_2, c_2) = line(b1, b2);
        let det = &a_1 * &b_2 - &a_2 * &b_1;
        assert!(!det.is_zero());
        let x = ((&c_1 * &b_2 - &c_2 * &b_1) / &det).to_f64().unwrap();
        let y = ((&a_1 * &c_2 - &a_2 * &c_1) / &det).to_f64().unwrap();
        worst = worst.max((got.x - x).abs()).max((got.y - y).abs());

        // for the record: how far a plain floating-point solve strays
        let fl = |p: Point, q: Point| (q.y - p.y, p.x - q.x, (q.y - p.y) * p.x + (p.x - q.x) * p.y);
        let ((fa1, fb1, fc1), (fa2, fb2, fc2)) = (fl(a1, a2), fl(b1, b2));
        let fdet = fa1 * fb2 - fa2 * fb1;
        let (fx, fy) = ((fc1 * fb2 - fc2 * fb1) / fdet, (fa1 * fc2 - fa2 * fc1) / fdet);
        worst_float_solve = worst_float_solve.max((fx - x).abs()).max((fy - y).abs());
    }
    let took = start.elapsed();
    Outcome {
        pass: worst <= 1e-9 && within(Duration::from_secs(5), took),
        detail: format!(
            "{pairs} pairs, max deviation {worst:.3e} (plain f64 solve: {worst_float_solve:.3e}), {:.2?}",
            took
        ),
    }
}

// 2. Otsu against exhaustive exact evaluation of class weights, class means
// and between-class variance at every threshold.
fn criterion_otsu() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut tested = 0;
    while tested < 1000 {
        let mut counts = [0u64; 256];
        match tested % 4 {
            0 => counts.iter_mut().for_each(|c| *c = rng.random_range(0..1000)),
            1 => {
                for _ in 0..rng.random_range(2..6) {
                    counts[rng.random_range(0..256)] += rng.random_range(1..5000);
                }
            }
            2 => {
                // two modes
                let (m1, m2) = (rng.random_range(20..100), rng.random_range(150..240));
                for i in 0..256i64 {
                    let d = (i - m1).abs().min((i - m2).abs());
                    counts[i as usize] = (2000 / (1 + d * d)) as u64 + rng.random_range(0..3);
                }
            }
            _ => {
                // two equal spikes: a plateau of tied thresholds
                let lo = rng.random_range(0..128);
                let hi = rng.random_range(lo + 1..256);
                let c = rng.random_range(1..100);
                counts[lo] = c;
                counts[hi] = c;
            }
        }
        if counts.iter().filter(|&&c| c > 0).count() < 2 {
            continue;
        }
        tested += 1;
        let hist = Histogram::from_counts(counts).unwrap();
        let got = otsu_threshold(&hist).unwrap();

        // class masses and level sums carried along t; each equation then
        // evaluated exactly from them
        let n: u64 = counts.iter().sum();
        let total_sum: u64 = counts.iter().enumerate().map(|(i, &c)| i as u64 * c).sum();
        let ratio = |a: u64, b: u64| BigRational::new(BigInt::from(a), BigInt::from(b));
        let (mut mass, mut level_sum) = (0u64, 0u64);
        let mut best: Option<(u8, BigRational)> = None;
        for t in 0..255usize {
            mass += counts[t];
            level_sum += t as u64 * counts[t];
            if mass == 0 || mass == n {
                continue;
            }
            let w0 = ratio(mass, n);
            let w1 = ratio(n - mass, n);
            let mu0 = ratio(level_sum, n) / &w0;
            let mu1 = ratio(total_sum - level_sum, n) / &w1;
            let d = &mu0 - &mu1;
            let var = &w0 * &w1 * &d * &d;
            if best.as_ref().is_none_or(|(_, b)| var > *b) {
                best = Some((t as u8, var));
            }
        }
        let (t, var) = best.unwrap();
        if got.threshold != t || got.between_class_variance != var.to_f64().unwrap() {
            mismatches.push((got.threshold, t));
        }
    }
    let took = start.elapsed();
    Outcome {
        pass: mismatches.is_empty() && within(Duration::from_secs(5), took),
        detail: format!("{tested} histograms, {} mismatches, {took:.2?}", mismatches.len()),
    }
}

/// Rectangles whose four corners are grid points with no grid point between
/// the top corners or between the left corners.
fn minimal_rectangles(points: &BTreeSet<(i32, i32)>) -> BTreeSet<((i32, i32), (i32, i32))> {
    let mut out = BTreeSet::new();
    for &(x0, y0) in points {
        let right = points.iter().filter(|&&(x, y)| y == y0 && x > x0).map(|p| p.0).min();
        let below = points.iter().filter(|&&(x, y)| x == x0 && y > y0).map(|p| p.1).min();
        if let (Some(x1), Some(y1)) = (right, below) {
            if points.contains(&(x1, y1)) {
                out.insert(((x0, y0), (x1, y1)));
            }
        }
    }
    out
}

// 3. Cells from point spreading against brute-force enumeration.
fn criterion_cells() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spacing = 10;
    let mut failures = 0;
    for _ in 0..500 {
        let n = rng.random_range(0..=30);
        let lattice: BTreeSet<(i32, i32)> = (0..n).map(|_| (rng.random_range(0..8), rng.random_range(0..8))).collect();
        // jitter within the snapping tolerance, in shuffled order
        let mut jittered: Vec<(Point, (i32, i32))> = lattice
            .iter()
            .map(|&(i, j)| {
                let x = (i * spacing) as f64 + rng.random_range(-1.5..1.5);
                let y = (j * spacing) as f64 + rng.random_range(-1.5..1.5);
                (Point::new(x, y), (i, j))
            })
            .collect();
        jittered.shuffle(&mut rng);
        let grid = GridPoints::snapped(jittered.iter().map(|p| p.0), DEFAULT_SNAP_TOL);
        let to_lattice = |p: Point| {
            jittered
                .iter()
                .find(|(q, _)| *q == p)
                .map(|(_, ij)| *ij)
                .expect("isolated points are left as they are")
        };
        let got: BTreeSet<_> = detect_cells(&grid)
            .iter()
            .map(|c| (to_lattice(c.top_left), to_lattice(c.bottom_right)))
            .collect();
        if got != minimal_rectangles(&lattice) || got.len() != detect_cells(&grid).len() {
            failures += 1;
        }
    }
    let mut grid_failures = Vec::new();
    for r in 2..=8 {
        for c in 2..=8 {
            let pts = (0..r).flat_map(|i| (0..c).map(move |j| Point::new(30.0 * j as f64, 25.0 * i as f64)));
            let cells = assign_row_col(&detect_cells(&GridPoints::snapped(pts, DEFAULT_SNAP_TOL)), DEFAULT_SNAP_TOL);
            let indices_ok = cells
                .iter()
                .enumerate()
                .all(|(k, cell)| (cell.row_index, cell.col_index) == (k / (c - 1), k % (c - 1)));
            if cells.len() != (r - 1) * (c - 1) || !indices_ok {
                grid_failures.push((r, c));
            }
        }
    }
    Outcome {
        pass: failures == 0 && grid_failures.is_empty(),
        detail: format!(
            "500 random sets, {failures} mismatches; complete grids 2..=8 x 2..=8, {} wrong",
            grid_failures.len()
        ),
    }
}

// 4. Rendered tables through layout analysis.
fn criterion_synthetic_geometry() -> Outcome {
    let vocabulary = synthetic_vocabulary(60, 4);
    let mut cfg = PipelineConfig::default();
    cfg.crop.mode = CropMode::None;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = Instant::now();
    let trials = 200;
    let (mut exact_cells, mut skew_ok, mut worst_skew) = (0, 0, 0.0f64);
    for seed in 0..trials {
        let spec = TableSpec {
            rows: rng.random_range(2..=6),
            cols: rng.random_range(2..=5),
            line_width: rng.random_range(1..=3),
            skew_deg: [-3.0, 0.0, 3.0][rng.random_range(0..3)],
            noise: rng.random_range(0.0..=0.01),
            seed,
            ..TableSpec::default()
        };
        let page = render_page(&spec, &vocabulary).unwrap();
        let layout = analyze_page(&page.image, &cfg).unwrap();
        if layout.cells.len() == page.expected_cells() {
            exact_cells += 1;
        }
        let err = (layout.skew.to_degrees() - spec.skew_deg).abs();
        worst_skew = worst_skew.max(err);
        if err < 0.5 {
            skew_ok += 1;
        }
    }
    let took = start.elapsed();
    Outcome {
        pass: exact_cells * 100 >= 95 * trials && skew_ok == trials && within(Duration::from_secs(60), took),
        detail: format!(
            "exact cell count {exact_cells}/{trials}, skew within 0.5 deg {skew_ok}/{trials} (worst {worst_skew:.3} deg), {took:.2?}"
        ),
    }
}

fn windows_ok(lexicon: &Lexicon, word: &[String], thres: u64) -> bool {
    let n = lexicon.length_of(word);
    (2..=4).all(|j| {
        word.windows(j)
            .all(|w| lexicon.count(&w.concat(), n) >= thres)
    })
}

// 5. Lexicon round trip: corrupt one grapheme, correct, compare.
fn criterion_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let start = Instant::now();
    let alphabet = Alphabet::default();
    let lower: Vec<String> = alphabet
        .graphemes()
        .iter()
        .filter(|g| g.chars().next().is_some_and(char::is_lowercase))
        .cloned()
        .collect();
    let mut words = BTreeSet::new();
    while words.len() < 500 {
        let len = rng.random_range(4..=8);
        words.insert((0..len).map(|_| lower[rng.random_range(0..lower.len())].clone()).collect::<String>());
    }
    let mut lexicon = Lexicon::default();
    for w in &words {
        for _ in 0..5 {
            lexicon.ingest(w);
        }
    }
    let cfg = CorrectionConfig::default();
    let thres = cfg.thres;
    let corrector = Corrector::new(lexicon.clone(), alphabet, GeneralCharMap::default(), cfg).unwrap();

    let false_corrections = words.iter().filter(|w| corrector.correct_word(w) != **w).count();

    let (mut eligible, mut restored, mut oracle_disagree) = (0, 0, 0);
    for w in &words {
        let g = graphemes(w);
        let k = rng.random_range(0..g.len());
        let mut bad = g.clone();
        while bad[k] == g[k] {
            bad[k] = lower[rng.random_range(0..lower.len())].clone();
        }
        if windows_ok(&lexicon, &bad, thres) {
            continue;
        }
        eligible += 1;
        // brute force: every single substitution that leaves all windows valid
        let mut repairs = BTreeSet::new();
        for pos in 0..bad.len() {
            for letter in &lower {
                let mut cand = bad.clone();
                cand[pos] = letter.clone();
                if windows_ok(&lexicon, &cand, thres) {
                    repairs.insert(cand.concat());
                }
            }
        }
        let fixed = corrector.correct_word(&bad.concat());
        if fixed == *w {
            restored += 1;
        }
        if repairs.contains(&fixed) != (fixed == *w) && repairs.len() == 1 {
            oracle_disagree += 1;
        }
    }
    let took = start.elapsed();
    Outcome {
        pass: restored * 10 >= eligible * 9
            && false_corrections == 0
            && oracle_disagree == 0
            && within(Duration::from_secs(30), took),
        detail: format!(
            "restored {restored}/{eligible} flagged words, {false_corrections} false corrections on 500 clean words, {oracle_disagree} disagreements with the single-substitution oracle, {took:.2?}"
        ),
    }
}

const TABLE_ROWS: [(&str, &str); 10] = [
    ("kơkăc\u{306}", "kơkăš"),
    ("sŏk", "sốk"),
    ("kơŏơ\u{306}", "kơšđ"),
    ("ƀôñ", "bôñ"),
    ("phơ\u{306}k", "phỡk"),
    ("tơxĭ", "tơxï"),
    ("hơtŭt", "hơtũt"),
    ("pơñan", "poñan"),
    ("pơđôr", "pođØr"),
    ("Nơ\u{306}r", "Nốr"),
];

// 6. The published before/after pairs through the line corrector.
fn criterion_published_pairs() -> Outcome {
    let mut lexicon = Lexicon::default();
    for (truth, _) in TABLE_ROWS {
        for _ in 0..5 {
            lexicon.ingest(truth);
        }
    }
    let corrector = Corrector::new(
        lexicon,
        Alphabet::default(),
        GeneralCharMap::default(),
        CorrectionConfig::default(),
    )
    .unwrap();
    let input: String = TABLE_ROWS.iter().map(|(_, before)| format!("{before}\n")).collect();
    let mut out = Vec::new();
    run_correct(input.as_bytes(), &mut out, &corrector).unwrap();
    let out = String::from_utf8(out).unwrap();
    let canon = dictscan::text::canonical;
    let mut missed = Vec::new();
    let mut hits = 0;
    for ((truth, before), got) in TABLE_ROWS.iter().zip(out.lines()) {
        if canon(got) == canon(truth) {
            hits += 1;
        } else {
            missed.push(format!("{before} -> {got}"));
        }
    }
    Outcome {
        pass: hits >= 8,
        detail: format!("{hits}/10 rows restored; unresolved: {}", missed.join(", ")),
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_dictscan")
}

// 7. Word accuracy arithmetic through the evaluate command.
fn criterion_accuracy_arithmetic(dir: &Path) -> Outcome {
    let truth: Vec<String> = (0..969).map(|i| format!("tơ{i}")).collect();
    let hyp = |matches: usize| {
        truth
            .iter()
            .enumerate()
            .map(|(i, w)| if i < matches { w.clone() } else { format!("{w}x") })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let (t, b, a) = (dir.join("truth.txt"), dir.join("before.txt"), dir.join("after.txt"));
    std::fs::write(&t, truth.join("\n")).unwrap();
    std::fs::write(&b, hyp(706)).unwrap();
    std::fs::write(&a, hyp(768)).unwrap();
    let out = Command::new(bin())
        .args(["evaluate", "--truth"])
        .arg(&t)
        .arg("--hyp")
        .arg(&b)
        .arg("--corrected")
        .arg(&a)
        .output()
        .unwrap();
    let json = String::from_utf8_lossy(&out.stdout).to_string();
    let before_ok = json.contains("\"accuracy_before\": 0.7286");
    let after_ok = json.contains("\"accuracy_after\": 0.7926");
    let total_ok = json.contains("\"total_words\": 969");
    Outcome {
        pass: out.status.success() && before_ok && after_ok && total_ok,
        detail: format!(
            "969 tokens, 706 and 768 matches -> before {} after {}",
            if before_ok { "0.7286" } else { "wrong" },
            if after_ok { "0.7926" } else { "wrong" }
        ),
    }
}

fn dir_bytes(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p.file_name().unwrap().into(), bytes)
        })
        .collect()
}

// 8. Two extractions of the same corpus with mock recognition.
fn criterion_determinism(dir: &Path) -> Outcome {
    let corpus = dir.join("corpus");
    write_corpus(&corpus, 6, 8, 0.3).unwrap();
    let lexicon = dir.join("lexicon.json");
    let status = Command::new(bin())
        .args(["build-lexicon", "--out"])
        .arg(&lexicon)
        .arg(corpus.join("vocabulary.txt"))
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let mut pages: Vec<PathBuf> = std::fs::read_dir(&corpus)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .collect();
    pages.sort();
    let run = |out: &Path| {
        Command::new(bin())
            .arg("--config")
            .arg(corpus.join("config.toml"))
            .arg("extract")
            .arg("--out")
            .arg(out)
            .arg("--lexicon")
            .arg(&lexicon)
            .args(&pages)
            .output()
            .unwrap()
            .status
            .success()
    };
    let (first, second) = (dir.join("run1"), dir.join("run2"));
    let ok = run(&first) && run(&second);
    let (a, b) = (dir_bytes(&first), dir_bytes(&second));
    let files = a.len();
    Outcome {
        pass: ok && files == pages.len() + 1 && a == b,
        detail: format!("{} pages, {files} output files, identical: {}", pages.len(), a == b),
    }
}

fn main() {
    let scratch = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("intersection oracle", Box::new(criterion_intersection)),
        ("otsu oracle", Box::new(criterion_otsu)),
        ("cell-detection oracle", Box::new(criterion_cells)),
        ("synthetic end-to-end geometry", Box::new(criterion_synthetic_geometry)),
        ("corrector round trip", Box::new(criterion_round_trip)),
        ("published correction pairs", Box::new(criterion_published_pairs)),
        ("evaluation arithmetic", Box::new(|| criterion_accuracy_arithmetic(scratch.path()))),
        ("determinism", Box::new(|| criterion_determinism(scratch.path()))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("{} {}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
