use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use morphotok::bpe::{self, TrainerConfig};
use morphotok::corpus::NormalizeConfig;
use morphotok::metrics;
use morphotok::pipeline::{self, CorpusFormat, ExperimentConfig, LoadedCorpus};
use morphotok::stats::{generate_typology_corpus, TypologyGenConfig, TypologyKind};

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Parser)]
#[command(name = "morphotok", version, about = "BPE subword measurements across morphological typologies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus file.
    corpus: PathBuf,
    /// Language code attached to the corpus.
    #[arg(long, default_value = "und")]
    lang: String,
    #[arg(long, default_value = "plaintext", value_parser = parse_format)]
    format: CorpusFormat,
    /// Seed (accepted for uniformity; these operations are deterministic).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl CorpusArgs {
    fn load(&self) -> Result<LoadedCorpus, BoxError> {
        Ok(pipeline::load_corpus(&self.corpus, &self.lang, self.format, &NormalizeConfig::default())?)
    }
}

fn parse_format(s: &str) -> Result<CorpusFormat, String> {
    s.parse()
}

fn parse_kind(s: &str) -> Result<TypologyKind, String> {
    s.parse().map_err(|e: morphotok::stats::StatsError| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline from a TOML config.
    Run {
        config: PathBuf,
        /// Overrides the config seed and the sampling seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train a tokenizer and write merges.txt, vocab.tsv and ledger.tsv.
    TrainBpe {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        merges: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a corpus with a trained tokenizer, one line per document.
    Encode {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        tokenizer: PathBuf,
        /// Print token ids instead of `@@`-joined tokens.
        #[arg(long)]
        ids: bool,
    },
    /// Print mean productivity over the given merge counts.
    Productivity {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_delimiter = ',', default_value = "300,400,500")]
        merges: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        min_subword_len: usize,
    },
    /// Print the log-log rank-frequency fit of the top subwords.
    Slopes {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, default_value_t = metrics::DEFAULT_TOP_N)]
        top: usize,
        #[arg(long, default_value_t = 500)]
        merges: usize,
    },
    /// Print group comparisons for a config without writing outputs.
    Compare {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print a synthetic typology corpus.
    GenCorpus {
        #[arg(long, value_parser = parse_kind)]
        kind: TypologyKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        words: usize,
        #[arg(long, default_value_t = 20)]
        words_per_line: usize,
    },
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, BoxError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
        cfg.schedule.seed = seed;
    }
    Ok(cfg)
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), BoxError> {
    match command {
        Command::Run { config, seed } => {
            let cfg = load_config(&config, seed)?;
            pipeline::run(&cfg)?;
            writeln!(out, "{}", cfg.output_dir.join("report.json").display())?;
        }
        Command::TrainBpe { corpus, merges, out: dir } => {
            let table = bpe::train(&corpus.load()?.stream(), &TrainerConfig::with_merges(merges))?;
            bpe::export_tokenizer(&table, &dir)?;
            writeln!(out, "{} merges, vocab {}", table.len(), table.vocab_size())?;
        }
        Command::Encode { corpus, tokenizer, ids } => {
            let table = bpe::import_tokenizer(&tokenizer)?;
            let docs = corpus.load()?.documents;
            if ids {
                bpe::write_id_corpus(&mut *out, &docs, &table)?;
            } else {
                for doc in &docs {
                    let enc = bpe::encode(doc, &table)?;
                    let words: Vec<String> = enc.words().map(|w| w.join("@@ ")).collect();
                    writeln!(out, "{}", words.join(" "))?;
                }
            }
        }
        Command::Productivity {
            corpus,
            merges,
            min_subword_len,
        } => {
            let r = metrics::productivity_rounds(
                &corpus.load()?.stream(),
                &merges,
                &TrainerConfig::default(),
                min_subword_len,
            )?;
            writeln!(out, "{:.6}", r.mean_rho)?;
        }
        Command::Slopes { corpus, top, merges } => {
            let stream = corpus.load()?.stream();
            let table = bpe::train(&stream, &TrainerConfig::with_merges(merges))?;
            let index = metrics::index_stream(&stream, &table, 1)?;
            let curve = metrics::frequency_curve(&index, &corpus.lang, top)?;
            let fit = pipeline::decay_fit(&curve, top)?;
            writeln!(out, "slope {:.6}\nr {:.6}\nr2 {:.6}", fit.slope, fit.r, fit.r_squared)?;
        }
        Command::Compare { config, seed } => {
            let cfg = load_config(&config, seed)?;
            let analysis = pipeline::analyze(&cfg)?;
            writeln!(out, "metric\tmean_synthetic\tmean_analytic\tdelta\tsigma_synthetic\tsigma_analytic\tp\tp_adjusted")?;
            for c in &analysis.comparisons {
                let (p, pa) = c
                    .test
                    .map(|t| (format!("{:.6}", t.p_value), format!("{:.6}", t.p_adjusted)))
                    .unwrap_or(("-".into(), "-".into()));
                writeln!(
                    out,
                    "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{p}\t{pa}",
                    c.metric_name, c.mean_a, c.mean_b, c.delta, c.sigma_a, c.sigma_b
                )?;
            }
            if let Some(a) = analysis.anova {
                writeln!(out, "language_anova\tF={:.6}\tp={:.6}", a.statistic, a.p_value)?;
            }
        }
        Command::GenCorpus {
            kind,
            seed,
            words,
            words_per_line,
        } => {
            let stream = generate_typology_corpus(&TypologyGenConfig::preset(kind, seed, words))?;
            for line in stream.words().chunks(words_per_line.max(1)) {
                writeln!(out, "{}", line.join(" "))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = pipeline::thread_count()
        .map_err(BoxError::from)
        .and_then(|n| Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?))
        .and_then(|()| execute(cli.command, &mut out))
        .and_then(|()| Ok(out.flush()?));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
