use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand};
use log::{info, warn};

use geotag::data::{Dataset, ModalityCombo};
use geotag::eval::{
    dataset_stats, enforce_min_one_tag, f1_scores, predict, subset_accuracy, write_metric_report,
    write_submission,
};
use geotag::heads::{read_checkpoint, write_checkpoint, Checkpoint};
use geotag::ingest::{
    join_sources, load_embeddings, parse_label_file, parse_metadata_csv, read_package,
    split_train_val, synth_dataset, write_package,
};
use geotag::rng::{derive_seed, stream, DEFAULT_SEED};
use geotag::sweep::{run_sweep, GridSelector};
use geotag::train::{fit, TrainConfig, TrainError};
use geotag::TagVocabulary;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

/// Multi-label tagging of geolocated photographs from frozen embeddings.
///
/// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
#[derive(Debug, Parser)]
#[command(name = "geotag", version)]
struct Cli {
    /// Log progress (info level) to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Join metadata, labels and embedding files into a packaged dataset.
    Prepare {
        /// Metadata CSV (image_id,title,grid_reference,tags[,easting,northing]).
        #[arg(long)]
        metadata: PathBuf,
        /// Optional label file (image_id,label_bits); wins over metadata tags.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Image embeddings (GEOEMB, dim 512).
        #[arg(long)]
        image_emb: PathBuf,
        /// Title embeddings (GEOEMB, dim 512).
        #[arg(long)]
        title_emb: PathBuf,
        /// Output dataset directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one head and write its best checkpoint and history CSV.
    Train {
        /// Packaged dataset directory.
        #[arg(long)]
        data: PathBuf,
        /// Run config (key = value); defaults apply for missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Checkpoint path.
        #[arg(long)]
        out: PathBuf,
        /// History CSV path [default: <out>.history.csv].
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Score a checkpoint on a labeled dataset and write the metric report.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Metric report CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a submission CSV with at least one tag per image.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Submission CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the modality x head x MixUp grid.
    Sweep {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for sweep.csv and sweep.txt.
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated combos to run (e.g. image,image+location).
        #[arg(long)]
        combos: Option<String>,
        /// Comma-separated heads (linear,mlp).
        #[arg(long)]
        heads: Option<String>,
        /// Comma-separated MixUp settings (off,on).
        #[arg(long)]
        mixup: Option<String>,
        /// Cells trained at once.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Generate a packaged synthetic dataset.
    Synth {
        /// Number of samples.
        #[arg(long)]
        n: usize,
        /// Probability of flipping each label bit.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Number of active labels (1..=49).
        #[arg(long, default_value_t = 49)]
        labels: usize,
        /// Leave the labels out (test-set style).
        #[arg(long)]
        unlabeled: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tag histogram, tag frequencies and title lengths of a dataset.
    Stats {
        #[arg(long)]
        data: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

type CmdResult = Result<(), Failure>;

trait Classify<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
    fn data(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code,
            error: e.into(),
        })
    }

    fn data(self) -> Result<T, Failure> {
        self.code(EXIT_DATA)
    }
}

fn fail<T>(code: u8, msg: impl Display) -> Result<T, Failure> {
    Err(Failure {
        code,
        error: anyhow!("{msg}"),
    })
}

fn train_error(e: TrainError) -> Failure {
    let code = match e {
        TrainError::Config(_) => EXIT_USAGE,
        TrainError::Diverged { .. }
        | TrainError::Head(_)
        | TrainError::ShapeMismatch { .. }
        | TrainError::OptimizerShape { .. } => EXIT_INTERNAL,
        _ => EXIT_DATA,
    };
    Failure {
        code,
        error: e.into(),
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<TrainConfig, Failure> {
    let mut cfg = match path {
        Some(p) => TrainConfig::load(p).code(EXIT_USAGE)?,
        None => TrainConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn load_dataset(dir: &Path) -> Result<Dataset, Failure> {
    let (ds, _) = read_package(dir).data()?;
    if ds.is_empty() {
        return fail(EXIT_DATA, format!("{}: dataset is empty", dir.display()));
    }
    Ok(ds)
}

fn check_combo(ds: &Dataset, combo: ModalityCombo) -> CmdResult {
    for m in combo.modalities() {
        if let Some(s) = ds.samples().iter().find(|s| !s.has(*m)) {
            return fail(
                EXIT_DATA,
                format!("combo mismatch: checkpoint needs {m} but sample {} lacks it", s.id),
            );
        }
    }
    Ok(())
}

fn split(ds: &Dataset, cfg: &TrainConfig) -> Result<(Dataset, Dataset), Failure> {
    if !ds.is_labeled() {
        return fail(EXIT_DATA, "training needs a fully labeled dataset");
    }
    split_train_val(ds, cfg.val_fraction, derive_seed(cfg.seed, &[stream::SPLIT])).data()
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text)
        .map_err(|e| anyhow!("{}: {e}", path.display()))
        .data()
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Prepare {
            metadata,
            labels,
            image_emb,
            title_emb,
            out,
        } => {
            let records = parse_metadata_csv(&metadata).data()?;
            let labels = labels.map(|p| parse_label_file(&p)).transpose().data()?;
            let image = load_embeddings(&image_emb, Some(512)).data()?;
            let title = load_embeddings(&title_emb, Some(512)).data()?;
            let (ds, summary) = join_sources(&records, labels.as_ref(), &image, &title)
                .map_err(|e| anyhow!("{}: {e}", metadata.display()))
                .data()?;
            let manifest = write_package(&out, &ds).data()?;
            println!(
                "packaged {} of {} metadata rows into {} ({} labeled)",
                summary.joined,
                summary.metadata_rows,
                out.display(),
                manifest.labeled
            );
            println!(
                "dropped {}: {} without image embedding, {} without title embedding",
                summary.dropped(),
                summary.missing_image.len(),
                summary.missing_title.len()
            );
            for id in summary.missing_image.iter().chain(&summary.missing_title) {
                info!("dropped image {id}");
            }
            println!(
                "unmatched ids: {} in embedding files, {} in label file; {} label conflicts",
                summary.unmatched_embedding_ids, summary.unmatched_label_ids, summary.label_conflicts
            );
            Ok(())
        }
        Command::Train {
            data,
            config,
            seed,
            out,
            history,
        } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let ds = load_dataset(&data)?;
            let (train, val) = split(&ds, &cfg)?;
            let outcome = fit(&train, &val, &cfg).map_err(train_error)?;
            write_checkpoint(&out, &outcome.checkpoint).data()?;
            let history = history.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".history.csv");
                p.into()
            });
            outcome.report.write_csv(&history).map_err(train_error)?;
            let r = &outcome.report;
            println!(
                "best val subset accuracy {:.4} (macro-F1 {:.4}) at epoch {} of {}; {:.1}s",
                r.best_val_subset_acc,
                r.best_val_macro_f1,
                r.best_epoch,
                r.history.len(),
                r.seconds
            );
            println!("checkpoint {}, history {}", out.display(), history.display());
            Ok(())
        }
        Command::Evaluate {
            checkpoint,
            data,
            out,
        } => {
            let ckpt = read_checkpoint(&checkpoint).data()?;
            let ds = load_dataset(&data)?;
            check_combo(&ds, ckpt.combo)?;
            if !ds.is_labeled() {
                return fail(EXIT_DATA, "evaluate needs a fully labeled dataset");
            }
            let pred = predict(&ckpt.head, ds.samples(), ckpt.combo).data()?;
            let report = f1_scores(&pred, &ds.truth()).code(EXIT_INTERNAL)?;
            write_metric_report(&out, &report, &TagVocabulary::builtin()).data()?;
            println!(
                "subset accuracy {:.4}, macro-F1 {:.4} on {} samples; report {}",
                report.subset_accuracy,
                report.macro_f1,
                report.n_samples,
                out.display()
            );
            Ok(())
        }
        Command::Predict {
            checkpoint,
            data,
            out,
        } => {
            let ckpt: Checkpoint = read_checkpoint(&checkpoint).data()?;
            let ds = load_dataset(&data)?;
            check_combo(&ds, ckpt.combo)?;
            let raw = predict(&ckpt.head, ds.samples(), ckpt.combo).data()?;
            let pred = enforce_min_one_tag(&raw);
            write_submission(&pred, &out).code(EXIT_INTERNAL)?;
            let filled = raw.decisions.iter().filter(|d| d.is_empty()).count();
            println!(
                "wrote {} rows to {} ({} filled by the one-tag rule)",
                pred.len(),
                out.display(),
                filled
            );
            if ds.is_labeled() {
                let truth = ds.truth();
                println!(
                    "subset accuracy {:.4} thresholded, {:.4} after the one-tag rule",
                    subset_accuracy(&raw, &truth).code(EXIT_INTERNAL)?,
                    subset_accuracy(&pred, &truth).code(EXIT_INTERNAL)?
                );
            }
            Ok(())
        }
        Command::Sweep {
            data,
            config,
            seed,
            out,
            combos,
            heads,
            mixup,
            workers,
        } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let selector = GridSelector::parse(combos.as_deref(), heads.as_deref(), mixup.as_deref())
                .map_err(|e| anyhow!(e))
                .code(EXIT_USAGE)?;
            if selector.cells().is_empty() {
                return fail(EXIT_USAGE, "grid selection is empty");
            }
            let ds = load_dataset(&data)?;
            let (train, val) = split(&ds, &cfg)?;
            let table = run_sweep(&train, &val, &cfg, &selector, workers);
            fs::create_dir_all(&out)
                .map_err(|e| anyhow!("{}: {e}", out.display()))
                .data()?;
            write_text(&out.join("sweep.csv"), &table.to_csv())?;
            let text = table.render_text();
            write_text(&out.join("sweep.txt"), &text)?;
            print!("{text}");
            let failed = table.results.iter().filter(|r| r.outcome.is_err()).count();
            if failed > 0 {
                for r in table.results.iter() {
                    if let Err(e) = &r.outcome {
                        warn!("{} mixup={} {}: {e}", r.cell.combo, r.cell.mixup, r.cell.head);
                    }
                }
                return fail(EXIT_DATA, format!("{failed} sweep cells failed"));
            }
            Ok(())
        }
        Command::Synth {
            n,
            noise,
            seed,
            labels,
            unlabeled,
            out,
        } => {
            let mut ds = synth_dataset(n, labels, noise, seed).code(EXIT_USAGE)?.dataset;
            if unlabeled {
                let mut samples = ds.into_samples();
                for x in &mut samples {
                    x.labels = None;
                }
                ds = Dataset::new(samples).code(EXIT_INTERNAL)?;
            }
            let manifest = write_package(&out, &ds).data()?;
            println!(
                "wrote {} synthetic samples ({} labeled) to {}",
                manifest.count,
                manifest.labeled,
                out.display()
            );
            Ok(())
        }
        Command::Stats { data, out } => {
            let ds = load_dataset(&data)?;
            let text = dataset_stats(&ds).data()?.render(&TagVocabulary::builtin());
            match out {
                Some(p) => write_text(&p, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
