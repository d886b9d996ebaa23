use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use syllo::io::{read_json, read_jsonl, write_json, write_jsonl, JsonlWriter};
use syllo::pipeline::{self, BuildConfig, PipelineError, VocabSpec};
use syllo::records::{DatasetRecord, EpisodeRecord, GoldRecord, InferenceRecord, KbRecord, PredictionRecord};
use syllo::DataError;
use syllo_core::kbgen::KbStream;
use syllo_core::oracle::Oracle;
use syllo_core::{compare_reports, Experiment, GenConfig, KnowledgeBase, MetricsReport, Purpose, VocabularyKind};

const EXIT_USAGE: u8 = 2;
const EXIT_PARTIAL: u8 = 3;
const EXIT_DATA: u8 = 4;

#[derive(Parser)]
#[command(name = "syllo", version, about = "Syllogistic premise-selection datasets and scoring")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate knowledge bases for one purpose.
    GenKbs {
        #[arg(long, value_enum)]
        purpose: PurposeArg,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Enumerate every minimal inference of each knowledge base.
    Enum {
        #[arg(long)]
        kbs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build every split of one experiment: knowledge bases, episodes and
    /// baseline datapoints.
    BuildDataset {
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build the episodes of a single split.
    Episodes {
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long, value_enum)]
        split: PurposeArg,
        #[arg(long)]
        out: PathBuf,
        /// Also write the knowledge bases the episodes refer to.
        #[arg(long)]
        kbs_out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Turn episodes into deduplicated baseline datapoints.
    FlattenBaseline {
        #[arg(long)]
        episodes: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Baseline file to compare against as a set.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Cross-check the syntactic procedures against the model-checking oracle.
    Oracle {
        /// Knowledge bases to check; those above --max-terms are skipped.
        #[arg(long, conflicts_with = "random")]
        kbs: Option<PathBuf>,
        /// Number of random small knowledge bases to check instead.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        max_terms: u32,
        #[arg(long, default_value_t = 8)]
        max_premises: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Score predictions against gold episodes or datapoints.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Where to write the metrics report; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-prediction labels.
        #[arg(long)]
        scored: Option<PathBuf>,
        /// Reference report; a difference beyond --tol exits with status 3.
        #[arg(long)]
        expected: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Type-by-length statistics of a knowledge-base file.
    Stats {
        #[arg(long)]
        kbs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PurposeArg {
    Train,
    Val,
    Test,
}

impl From<PurposeArg> for Purpose {
    fn from(p: PurposeArg) -> Self {
        match p {
            PurposeArg::Train => Purpose::Train,
            PurposeArg::Val => Purpose::Val,
            PurposeArg::Test => Purpose::Test,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Core,
    #[value(name = "short2long")]
    ShortToLong,
    #[value(name = "long2short")]
    LongToShort,
}

#[derive(Clone, Copy, ValueEnum)]
enum VocabArg {
    Syllable,
    Symbolic,
    File,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum, default_value = "core")]
    experiment: ExperimentArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Train on one tenth of the usual per-cell quota.
    #[arg(long)]
    limited: bool,
    #[arg(long, value_enum, default_value = "syllable")]
    vocab: VocabArg,
    /// Word list for --vocab file.
    #[arg(long)]
    vocab_file: Option<PathBuf>,
    /// Seed of the pseudoword draw; defaults to --seed.
    #[arg(long)]
    vocab_seed: Option<u64>,
    /// Words that must not be used, one per line.
    #[arg(long)]
    exclude_vocab: Option<PathBuf>,
    /// Syllable inventory replacing the bundled one.
    #[arg(long)]
    syllables: Option<PathBuf>,
    /// Knowledge bases drawn per split before giving up on a quota.
    #[arg(long)]
    max_kbs: Option<usize>,
}

enum Failure {
    Usage(String),
    Partial(String),
    Data(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

impl BuildArgs {
    fn config(&self) -> Result<BuildConfig, Failure> {
        let experiment = match self.experiment {
            ExperimentArg::Core => Experiment::Core,
            ExperimentArg::ShortToLong => Experiment::ShortToLong,
            ExperimentArg::LongToShort => Experiment::LongToShort,
        };
        let mut cfg = BuildConfig::new(experiment, self.seed, self.limited);
        if let Some(m) = self.max_kbs {
            cfg.spec.max_kbs = m;
        }
        let mut vocab = VocabSpec::pseudowords(self.vocab_seed.unwrap_or(self.seed));
        match self.vocab {
            VocabArg::Syllable => {}
            VocabArg::Symbolic => vocab.kind = VocabularyKind::SymbolicConstants,
            VocabArg::File => {
                if self.vocab_file.is_none() {
                    return Err(Failure::Usage("--vocab file needs --vocab-file".into()));
                }
                vocab.kind = VocabularyKind::ExternalFile;
            }
        }
        vocab.file = self.vocab_file.clone();
        vocab.exclude = self.exclude_vocab.clone();
        vocab.syllables = self.syllables.clone();
        cfg.vocab = vocab;
        Ok(cfg)
    }
}

fn report<T: Serialize>(path: &Option<PathBuf>, value: &T) -> Result<(), Failure> {
    match path {
        Some(p) => Ok(write_json(p, value)?),
        None => Ok(()),
    }
}

fn load_kbs(path: &Path) -> Result<Vec<KnowledgeBase>, Failure> {
    read_jsonl::<KbRecord>(path)?
        .iter()
        .map(|r| r.to_kb().map_err(|e| Failure::Data(format!("{}: {e}", path.display()))))
        .collect()
}

#[derive(Serialize)]
struct GenSummary {
    purpose: Purpose,
    seed: u64,
    count: usize,
    generator: syllo_core::GenReport,
}

fn run(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::GenKbs { purpose, count, seed, out, report: rep } => {
            let purpose = Purpose::from(purpose);
            let mut cfg = GenConfig::for_purpose(purpose, seed);
            cfg.target_premises = purpose.default_premises();
            let mut stream = KbStream::new(cfg, purpose).map_err(|e| Failure::Usage(e.to_string()))?;
            let mut w = JsonlWriter::create(&out)?;
            let mut failure = None;
            while stream.emitted() < count {
                match stream.next_kb() {
                    Ok(kb) => w.write(&KbRecord::new(&kb, purpose))?,
                    Err(e) => {
                        failure = Some(e.to_string());
                        break;
                    }
                }
            }
            w.finish()?;
            let summary = GenSummary { purpose, seed, count: stream.emitted(), generator: stream.report().clone() };
            report(&rep, &summary)?;
            failure.map_or(Ok(()), |e| Err(Failure::Partial(e)))
        }
        Cmd::Enum { kbs, out, report: rep } => {
            let kbs = load_kbs(&kbs)?;
            let all = pipeline::enumerate_all(&kbs)?;
            let mut w = JsonlWriter::create(&out)?;
            for (kb, infs) in kbs.iter().zip(&all) {
                for inf in infs {
                    w.write(&InferenceRecord::new(kb, inf))?;
                }
            }
            let n = w.finish()?;
            report(&rep, &serde_json::json!({ "kbs": kbs.len(), "inferences": n }))
        }
        Cmd::BuildDataset { build, out_dir, report: rep } => {
            let cfg = build.config()?;
            let summary = pipeline::build_dataset(&cfg, &out_dir)?;
            report(&rep, &summary)?;
            if summary.is_complete() {
                Ok(())
            } else {
                Err(Failure::Partial("quota shortfall or baseline mismatch; see the report".into()))
            }
        }
        Cmd::Episodes { build, split, out, kbs_out, report: rep } => {
            let cfg = build.config()?;
            let vocab = pipeline::load_vocabulary(&cfg.vocab)?;
            let built = cfg.builder().build(split.into()).map_err(PipelineError::from)?;
            write_jsonl(&out, &pipeline::render_episodes(&built, &vocab, cfg.seed)?)?;
            if let Some(p) = kbs_out {
                write_jsonl(&p, &pipeline::kb_records(&built))?;
            }
            report(&rep, &built.report)?;
            if built.report.is_complete() {
                Ok(())
            } else {
                Err(Failure::Partial(format!("{} datapoints short of quota", built.report.shortfall)))
            }
        }
        Cmd::FlattenBaseline { episodes, out, baseline, report: rep } => {
            let eps: Vec<EpisodeRecord> = read_jsonl(&episodes)?;
            let flat = pipeline::flatten_records(&eps)?;
            write_jsonl(&out, &flat)?;
            let mut summary = pipeline::FlattenSummary {
                episodes: eps.len(),
                pairs: flat.len(),
                baseline_pairs: None,
                baseline_equal: None,
            };
            if let Some(b) = baseline {
                let base: Vec<DatasetRecord> = read_jsonl(&b)?;
                summary.baseline_pairs = Some(base.len());
                summary.baseline_equal = Some(pipeline::same_pairs(&flat, &base));
            }
            report(&rep, &summary)?;
            match summary.baseline_equal {
                Some(false) => Err(Failure::Partial("flattened episodes differ from the baseline".into())),
                _ => Ok(()),
            }
        }
        Cmd::Oracle { kbs, random, seed, max_terms, max_premises, report: rep } => {
            let kbs = match (kbs, random) {
                (Some(p), _) => load_kbs(&p)?,
                (None, Some(n)) => pipeline::random_small_kbs(n, seed, max_terms, max_premises),
                (None, None) => return Err(Failure::Usage("oracle needs --kbs or --random".into())),
            };
            let oracle = Oracle { max_terms: max_terms.max(Oracle::default().max_terms) };
            let r = pipeline::oracle_check(&kbs, &oracle)?;
            match &rep {
                Some(_) => report(&rep, &r)?,
                None => write_json(Path::new("-"), &r)?,
            }
            if r.agrees() {
                Ok(())
            } else {
                Err(Failure::Partial("oracle disagreement".into()))
            }
        }
        Cmd::Eval { gold, pred, out, scored, expected, tol, report: rep } => {
            let gold: Vec<GoldRecord> = read_jsonl(&gold)?;
            let preds: Vec<PredictionRecord> = read_jsonl(&pred)?;
            let result = pipeline::evaluate(&gold, &preds)?;
            write_json(out.as_deref().unwrap_or(Path::new("-")), &result.report)?;
            if let Some(p) = scored {
                write_jsonl(&p, &result.scored)?;
            }
            let diff = match expected {
                Some(p) => Some(compare_reports(&read_json::<MetricsReport>(&p)?, &result.report, tol)),
                None => None,
            };
            report(&rep, &serde_json::json!({ "unpredicted": result.unpredicted, "diff": diff }))?;
            if diff.is_some_and(|d| !d.passes()) {
                return Err(Failure::Partial("report differs from the expected one".into()));
            }
            if result.unpredicted > 0 {
                return Err(Failure::Partial(format!("{} gold records have no prediction", result.unpredicted)));
            }
            Ok(())
        }
        Cmd::Stats { kbs, out, report: rep } => {
            let kbs = load_kbs(&kbs)?;
            let s = pipeline::stats(&kbs)?;
            write_json(out.as_deref().unwrap_or(Path::new("-")), &s)?;
            report(&rep, &s)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = pipeline::init_threads() {
        eprintln!("syllo: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("syllo: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Partial(m)) => {
            eprintln!("syllo: incomplete: {m}");
            ExitCode::from(EXIT_PARTIAL)
        }
        Err(Failure::Data(m)) => {
            eprintln!("syllo: {m}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
