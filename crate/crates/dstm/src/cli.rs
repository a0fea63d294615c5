//! The `dstm` command line.
//!
//! Exit codes: 0 on success, 1 when a command fails while running, 2 for
//! usage errors (bad flags, inconsistent parameters). Progress, traces and
//! timings go to standard error; results go to files or standard output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use dstm_core::eval::compare;
use dstm_core::structure::{extract_graph, ExtractOptions};
use dstm_core::synth::{generate, GeneratorSpec, GroundTruth};
use dstm_core::fit::fit_with;
use dstm_core::{Corpus, ModelConfig, ModelKind, Vocabulary};
use serde::{Deserialize, Serialize};

use crate::graph_io::{write_graph, GraphFormat};
use crate::model_io::{read_model, write_model, WriteOptions};
use crate::report::{summary_table, write_reports};
use crate::trials::{run_trials_parallel, TrialPlan};
use crate::uci::{load_uci_bow, read_vocabulary, write_uci_bow, CorpusFiles};
use crate::{config_file, snapshot, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "dstm", version, about = "Dynamic and static topic model")]
#[command(args_override_self = true)]
pub struct Cli {
    /// More log output (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a UCI bag-of-words corpus, report its size and optionally save a snapshot.
    Ingest(IngestArgs),
    /// Fit one model and write the model file.
    Fit(FitArgs),
    /// Compare models by held-out perplexity over random token splits.
    Eval(EvalArgs),
    /// Sample a synthetic corpus with known parameters.
    Generate(GenerateArgs),
    /// Extract the topic-structure graph of a fitted model.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// UCI docword file (header D, V, NNZ then `doc word count` triples).
    #[arg(long, value_name = "PATH", required_unless_present = "snapshot")]
    pub docword: Option<PathBuf>,
    /// Vocabulary, one term per line.
    #[arg(long, value_name = "PATH", required_unless_present = "snapshot")]
    pub vocab: Option<PathBuf>,
    /// Epoch map, one `docID label` pair per line.
    #[arg(long, value_name = "PATH", required_unless_present = "snapshot")]
    pub epoch_map: Option<PathBuf>,
    /// Corpus snapshot written by `ingest --out` (replaces the three files above).
    #[arg(long, value_name = "PATH", conflicts_with_all = ["docword", "vocab", "epoch_map"])]
    pub snapshot: Option<PathBuf>,
}

impl CorpusArgs {
    pub fn load(&self) -> Result<Corpus> {
        if let Some(p) = &self.snapshot {
            return snapshot::read_snapshot(p);
        }
        let (Some(d), Some(v), Some(e)) = (&self.docword, &self.vocab, &self.epoch_map) else {
            return Err(Error::Invalid("corpus files missing".into()));
        };
        let (corpus, report) = load_uci_bow(d, v, e)?;
        log::info!(
            "loaded {} documents, {} terms, {} tokens in {} epochs",
            report.num_docs,
            report.vocab_size,
            report.num_tokens,
            report.num_epochs
        );
        Ok(corpus)
    }
}

/// Inference settings shared by `fit` and `eval`. Unset values take the
/// defaults of the model kind.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Number of subtopics.
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    /// Number of supertopics (hierarchical kinds only).
    #[arg(long, default_value_t = 3)]
    pub s: usize,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2_init: Option<f64>,
    #[arg(long)]
    pub beta_diag: Option<f64>,
    #[arg(long)]
    pub beta_offdiag: Option<f64>,
    /// Symmetric word prior of the static kinds.
    #[arg(long)]
    pub static_beta: Option<f64>,
    /// Gibbs sweeps per epoch.
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// Sweeps before the first M-step.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Sweeps between M-steps.
    #[arg(long)]
    pub interval: Option<usize>,
    #[arg(long)]
    pub fp_max_iters: Option<usize>,
    #[arg(long)]
    pub fp_tol: Option<f64>,
    #[arg(long)]
    pub floor: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ModelArgs {
    pub fn config(&self, kind: ModelKind) -> Result<ModelConfig> {
        let mut c = ModelConfig::for_kind(kind, self.k, self.s).with_seed(self.seed);
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut c.alpha1, self.alpha1);
        set(&mut c.alpha2_init, self.alpha2_init);
        set(&mut c.beta_diag_init, self.beta_diag);
        set(&mut c.beta_offdiag_init, self.beta_offdiag);
        set(&mut c.static_beta, self.static_beta);
        set(&mut c.fp_rel_tol, self.fp_tol);
        set(&mut c.param_floor, self.floor);
        c.gibbs_sweeps = self.sweeps.unwrap_or(c.gibbs_sweeps);
        c.burn_in_sweeps = self.burn_in.unwrap_or(c.burn_in_sweeps);
        c.m_step_interval = self.interval.unwrap_or(c.m_step_interval);
        c.fp_max_iters = self.fp_max_iters.unwrap_or(c.fp_max_iters);
        c.validate().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Write a corpus snapshot here.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// dstm, drtm, pam or lda.
    #[arg(long, default_value = "dstm")]
    pub model: ModelKind,
    #[command(flatten)]
    pub params: ModelArgs,
    /// Model file to write.
    #[arg(long, value_name = "PATH", default_value = "model.json")]
    pub out: PathBuf,
    /// Keep only the N most probable words per topic (the file then cannot be reloaded).
    #[arg(long, value_name = "N")]
    pub phi_top_n: Option<usize>,
    /// Include the per-document estimates.
    #[arg(long)]
    pub with_theta: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Kinds to compare, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "dstm,drtm,pam,lda")]
    pub models: Vec<ModelKind>,
    #[command(flatten)]
    pub params: ModelArgs,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Fraction of each document's tokens used for training.
    #[arg(long, default_value_t = 0.9)]
    pub ratio: f64,
    /// Seed of the first split; trial j uses split-seed + j.
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
    /// Model the t-tests compare against.
    #[arg(long, default_value = "dstm")]
    pub reference: String,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Directory for trials.csv, summary.csv and summary.txt.
    #[arg(long, value_name = "DIR", default_value = "eval-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Epochs.
    #[arg(long, default_value_t = 3)]
    pub t: usize,
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    #[arg(long, default_value_t = 200)]
    pub v: usize,
    /// Documents per epoch.
    #[arg(long, default_value_t = 100)]
    pub docs: usize,
    /// Tokens per document.
    #[arg(long, default_value_t = 50)]
    pub doc_len: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Parameter file (JSON generator spec) replacing the planted defaults;
    /// the size flags and seed above are then ignored.
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,
    /// Output directory for docword.txt, vocab.txt, epochs.txt and truth.json.
    #[arg(long, value_name = "DIR", default_value = "synthetic")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Model file written by `fit`.
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Vocabulary for the keyword lists (generic names are used without it).
    #[arg(long, value_name = "PATH", conflicts_with = "snapshot")]
    pub vocab: Option<PathBuf>,
    /// Take the vocabulary from a corpus snapshot.
    #[arg(long, value_name = "PATH")]
    pub snapshot: Option<PathBuf>,
    #[arg(long, default_value_t = 200.0)]
    pub beta_threshold: f64,
    #[arg(long, default_value_t = 3)]
    pub static_top_m: usize,
    #[arg(long, default_value_t = 8)]
    pub top_words: usize,
    /// Subtopic display names, one `index label` pair per line.
    #[arg(long, value_name = "PATH")]
    pub labels: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub dot: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

/// Ground truth file written by `generate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub spec: GeneratorSpec,
    pub truth: GroundTruth,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(m) => Failure::Usage(m),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let args = match config_file::expand(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    let outcome = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Fit(a) => fit_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Generate(a) => generate_cmd(a),
        Command::Export(a) => export_cmd(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            1
        }
    }
}

fn runtime(e: Error) -> Failure {
    Failure::Runtime(e.to_string())
}

fn ingest(a: IngestArgs) -> std::result::Result<(), Failure> {
    let corpus = a.corpus.load().map_err(runtime)?;
    println!("documents\t{}", corpus.num_docs());
    println!("vocabulary\t{}", corpus.vocab_size());
    println!("tokens\t{}", corpus.num_tokens());
    println!("epochs\t{}", corpus.epochs().len());
    for e in corpus.epochs() {
        println!("epoch {}\t{} documents", e.label, e.docs.len());
    }
    if let Some(out) = &a.out {
        snapshot::write_snapshot(&corpus, out).map_err(runtime)?;
    }
    Ok(())
}

fn fit_cmd(a: FitArgs) -> std::result::Result<(), Failure> {
    let config = a.params.config(a.model)?;
    let corpus = a.corpus.load().map_err(runtime)?;
    let start = Instant::now();
    let mut last = Instant::now();
    let model = fit_with(&corpus, &config, false, |t, e| {
        let trace: Vec<String> = e.trace.iter().map(|p| format!("{}:{:.3}", p.sweep, p.ln_evidence)).collect();
        eprintln!(
            "epoch {} ({}): {} M-steps, {:.2}s, ln evidence {}",
            t + 1,
            e.label,
            e.m_steps,
            last.elapsed().as_secs_f64(),
            trace.join(" ")
        );
        last = Instant::now();
    })
    .map_err(|e| runtime(e.into()))?;
    eprintln!("fitted {} in {:.2}s", config.kind, start.elapsed().as_secs_f64());
    let opts = WriteOptions {
        phi_top_n: a.phi_top_n,
        with_theta: a.with_theta,
    };
    write_model(&model, &a.out, opts).map_err(runtime)?;
    Ok(())
}

fn eval_cmd(a: EvalArgs) -> std::result::Result<(), Failure> {
    if a.models.is_empty() {
        return Err(Failure::Usage("--models needs at least one kind".into()));
    }
    if a.trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    if !(a.ratio > 0.0 && a.ratio < 1.0) {
        return Err(Failure::Usage("--ratio must lie strictly between 0 and 1".into()));
    }
    let configs = a
        .models
        .iter()
        .map(|&k| a.params.config(k))
        .collect::<Result<Vec<_>>>()?;
    let corpus = a.corpus.load().map_err(runtime)?;
    let start = Instant::now();
    let plan = TrialPlan {
        n_trials: a.trials,
        base_seed: a.split_seed,
        ratio: a.ratio,
        jobs: a.jobs,
    };
    let results = run_trials_parallel(&corpus, &configs, plan).map_err(runtime)?;
    let names = dstm_core::eval::model_names(&configs);
    let reference = names.contains(&a.reference).then_some(a.reference.as_str());
    if reference.is_none() {
        log::warn!("reference model {} not among the compared models; no t-tests", a.reference);
    }
    let report = compare(&results, &configs, reference).map_err(|e| runtime(e.into()))?;
    write_reports(&results, &report, &a.out_dir).map_err(runtime)?;
    print!("{}", summary_table(&report));
    eprintln!("{} fits in {:.2}s", results.len(), start.elapsed().as_secs_f64());
    Ok(())
}

fn generate_cmd(a: GenerateArgs) -> std::result::Result<(), Failure> {
    let spec = match &a.spec {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| runtime(Error::io(p, e)))?;
            serde_json::from_str(&text).map_err(|source| runtime(Error::Json { path: p.clone(), source }))?
        }
        None => GeneratorSpec::planted(a.t, a.k, a.s, a.v, a.docs, a.doc_len, a.seed),
    };
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let (corpus, truth) = generate(&spec).map_err(|e| runtime(e.into()))?;
    fs::create_dir_all(&a.out_dir).map_err(|e| runtime(Error::io(&a.out_dir, e)))?;
    write_uci_bow(&corpus, &CorpusFiles::in_dir(&a.out_dir)).map_err(runtime)?;
    let path = a.out_dir.join("truth.json");
    let mut text = serde_json::to_string_pretty(&TruthFile { spec, truth }).expect("truth serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| runtime(Error::io(&path, e)))?;
    eprintln!(
        "wrote {} documents, {} tokens to {}",
        corpus.num_docs(),
        corpus.num_tokens(),
        a.out_dir.display()
    );
    Ok(())
}

fn read_labels(path: &Path) -> Result<BTreeMap<usize, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, name) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::parse(path, i + 1, "expected `index label`"))?;
        let k: usize = k.parse().map_err(|_| Error::parse(path, i + 1, format!("bad topic index {k:?}")))?;
        labels.insert(k, name.trim().to_string());
    }
    Ok(labels)
}

fn export_cmd(a: ExportArgs) -> std::result::Result<(), Failure> {
    if !(a.beta_threshold >= 0.0) {
        return Err(Failure::Usage("--beta-threshold must be nonnegative".into()));
    }
    let model = read_model(&a.model).map_err(runtime)?;
    let vocab = match (&a.vocab, &a.snapshot) {
        (Some(p), _) => read_vocabulary(p).map_err(runtime)?,
        (None, Some(p)) => snapshot::read_snapshot(p).map_err(runtime)?.vocabulary().clone(),
        (None, None) => Vocabulary::synthetic(model.vocab_size),
    };
    let opts = ExtractOptions {
        beta_threshold: a.beta_threshold,
        static_top_m: a.static_top_m,
        top_words: a.top_words,
        labels: match &a.labels {
            Some(p) => read_labels(p).map_err(runtime)?,
            None => BTreeMap::new(),
        },
    };
    let graph = extract_graph(&model, &vocab, &opts).map_err(|e| runtime(e.into()))?;
    eprintln!(
        "{} nodes, {} dynamic edges, {} static edges",
        graph.nodes.len(),
        graph.dynamic_edges.len(),
        graph.static_edges.len()
    );
    if a.dot.is_none() && a.json.is_none() {
        print!("{}", crate::graph_io::to_dot(&graph));
    }
    if let Some(p) = &a.dot {
        write_graph(&graph, p, GraphFormat::Dot).map_err(runtime)?;
    }
    if let Some(p) = &a.json {
        write_graph(&graph, p, GraphFormat::Json).map_err(runtime)?;
    }
    Ok(())
}

/// Truth file reader used by tests and scripts.
pub fn read_truth(path: &Path) -> Result<TruthFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
}

