use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dictscan::config::{ConfigError, PipelineConfig};
use dictscan::corrector::{Alphabet, Corrector, GeneralCharMap};
use dictscan::eval::{run_evaluate, EvalMode};
use dictscan::lexicon::Lexicon;
use dictscan::pipeline::{run_build_lexicon, run_correct, run_extract, write_outputs, ExtractContext, PageDocument};
use dictscan::synth::write_corpus;

#[derive(Parser)]
#[command(name = "dictscan", version, about = "Table-aware OCR and post-correction for scanned dictionary pages")]
struct Cli {
    /// Pipeline configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract tables and text from page images into one JSON file per page.
    Extract {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        correction: CorrectionArgs,
        #[arg(required = true)]
        images: Vec<PathBuf>,
    },
    /// Build a cluster lexicon from vocabulary files, one entry per line.
    BuildLexicon {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        vocab: Vec<PathBuf>,
    },
    /// Correct a text file (or stdin) line by line.
    Correct {
        #[command(flatten)]
        correction: CorrectionArgs,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Word accuracy of a hypothesis against ground truth.
    Evaluate {
        #[arg(long)]
        truth: PathBuf,
        /// Plain text, or a page document (scores raw and corrected text).
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long, value_enum, default_value = "before")]
        mode: ModeArg,
        /// Corrected text to score alongside a plain-text hypothesis.
        #[arg(long)]
        corrected: Option<PathBuf>,
    },
    /// Render synthetic table pages with mock recognition fixtures.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        pages: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Chance that a drawn word comes back with one diacritic missing.
        #[arg(long, default_value_t = 0.3)]
        slip_rate: f64,
    },
}

#[derive(clap::Args)]
struct CorrectionArgs {
    /// Lexicon JSON; extraction without one skips correction.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Substitution alphabet, whitespace separated; bundled one by default.
    #[arg(long)]
    alphabet: Option<PathBuf>,
    /// Extra tab-separated character mappings added to the bundled ones.
    #[arg(long)]
    general_map: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Before,
    After,
}

/// Bad input from the user: exit status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    let Some(path) = path else {
        return Ok(PipelineConfig::default());
    };
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(f) = cfg.ocr.fixtures.as_mut() {
        if f.is_relative() {
            *f = path.parent().unwrap_or(Path::new(".")).join(&*f);
        }
    }
    Ok(cfg)
}

fn build_corrector(args: &CorrectionArgs, cfg: &PipelineConfig) -> Result<Option<Corrector>> {
    let Some(lexicon) = &args.lexicon else {
        return Ok(None);
    };
    let lexicon = Lexicon::load(lexicon).with_context(|| format!("loading {}", lexicon.display()))?;
    let alphabet = match &args.alphabet {
        Some(p) => Alphabet::load(p)?,
        None => Alphabet::default(),
    };
    let mut map = GeneralCharMap::default();
    if let Some(p) = &args.general_map {
        map = map.extended_with(&GeneralCharMap::load(p)?)?;
    }
    Ok(Some(Corrector::new(lexicon, alphabet, map, cfg.correction)?))
}

fn extract(cfg: &PipelineConfig, out: &Path, correction: &CorrectionArgs, images: &[PathBuf]) -> Result<ExitCode> {
    let backend = cfg.ocr.build_backend().map_err(|e| UsageError(e.to_string()))?;
    let corrector = build_corrector(correction, cfg)?;
    let ctx = ExtractContext {
        config: cfg,
        backend: backend.as_ref(),
        corrector: corrector.as_ref(),
    };
    let outcomes = run_extract(images, &ctx);
    let manifest = write_outputs(out, &outcomes).with_context(|| format!("writing {}", out.display()))?;
    for page in manifest.pages.iter().filter(|p| p.error.is_some()) {
        eprintln!("error: {}: {}", page.source, page.error.as_deref().unwrap_or(""));
    }
    let failed = manifest.failed();
    eprintln!("{} pages, {} failed", manifest.pages.len(), failed);
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn evaluate(truth: &Path, hyp: &Path, mode: ModeArg, corrected: Option<&Path>) -> Result<()> {
    let truth = fs::read_to_string(truth).with_context(|| format!("reading {}", truth.display()))?;
    let text = fs::read_to_string(hyp).with_context(|| format!("reading {}", hyp.display()))?;
    let report = if let Ok(doc) = PageDocument::from_json(&text) {
        run_evaluate(&doc.text(false), &truth, EvalMode::Before)?
            .merge(run_evaluate(&doc.text(true), &truth, EvalMode::After)?)
    } else {
        let mode = match mode {
            ModeArg::Before => EvalMode::Before,
            ModeArg::After => EvalMode::After,
        };
        let mut report = run_evaluate(&text, &truth, mode)?;
        if let Some(c) = corrected {
            let fixed = fs::read_to_string(c).with_context(|| format!("reading {}", c.display()))?;
            report = report.merge(run_evaluate(&fixed, &truth, EvalMode::After)?);
        }
        report
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", report.to_json());
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Extract { out, correction, images } => return extract(&cfg, &out, &correction, &images),
        Command::BuildLexicon { out, vocab } => {
            let summary = run_build_lexicon(&vocab, &out, Lexicon::default())?;
            if summary.words == 0 {
                eprintln!("warning: vocabulary produced no usable words");
            }
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Correct { correction, input, output } => {
            let Some(corrector) = build_corrector(&correction, &cfg)? else {
                return Err(UsageError("correct needs --lexicon".into()).into());
            };
            let input: Box<dyn io::BufRead> = match input {
                Some(p) => Box::new(BufReader::new(
                    fs::File::open(&p).with_context(|| format!("opening {}", p.display()))?,
                )),
                None => Box::new(io::stdin().lock()),
            };
            let output: Box<dyn Write> = match output {
                Some(p) => Box::new(BufWriter::new(fs::File::create(&p)?)),
                None => Box::new(BufWriter::new(io::stdout().lock())),
            };
            run_correct(input, output, &corrector)?;
        }
        Command::Evaluate { truth, hyp, mode, corrected } => evaluate(&truth, &hyp, mode, corrected.as_deref())?,
        Command::Synth { out, pages, seed, slip_rate } => {
            if !(0.0..=1.0).contains(&slip_rate) {
                return Err(UsageError(format!("slip rate {slip_rate} outside [0, 1]")).into());
            }
            let summary = write_corpus(&out, pages, seed, slip_rate)?;
            for (name, labelled, expected) in &summary.partial_pages {
                eprintln!("warning: {name}: {labelled} of {expected} cells labelled");
            }
            eprintln!("wrote {} pages to {}", summary.pages, out.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.is::<ConfigError>() || e.is::<UsageError>();
            if usage {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

