//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Set `DSTM_NIPS_DIR` to a directory holding `docword.nips.txt`,
//! `vocab.nips.txt` and `epochs.txt` (one `docID year` line per document) to
//! include the ingestion check; without it that check is skipped.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::{
    alpha2_recovery, beta_recovery, check_conditional, enumerate_marginals, median, random_matrix,
    random_simplex_rows, random_state, tiny_problem,
};
use dstm::core::eval::{compare, perplexity};
use dstm::core::mstep::{alpha2_ln_evidence, alpha2_pass, beta_ln_evidence, beta_pass};
use dstm::core::sampler::{gibbs_sweep, Priors, WordPrior};
use dstm::core::structure::{align_topics, extract_graph, ExtractOptions};
use dstm::core::synth::{generate, GeneratorSpec, GroundTruth};
use dstm::core::{fit, rng_for, Corpus, Document, EpochParams, EpochState, Matrix, ModelConfig, ModelKind};
use dstm::trials::{run_trials_parallel, TrialPlan};
use dstm::uci::load_uci_bow;
use rand::Rng;

enum Status {
    Pass,
    Fail,
    Skip,
}

type Criterion<'a> = (&'static str, Option<Duration>, Box<dyn FnOnce() -> Outcome + 'a>);

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Outcome {
            status: if ok { Status::Pass } else { Status::Fail },
            detail,
        }
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    match limit {
        Some(l) => {
            out.detail = format!("{}; {:.1}s (limit {}s)", out.detail, took.as_secs_f64(), l.as_secs());
            if took > l {
                out.status = Status::Fail;
            }
        }
        None => out.detail = format!("{}; {:.1}s", out.detail, took.as_secs_f64()),
    }
    out
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn sampler_oracle() -> Outcome {
    let p = tiny_problem();
    let exact = enumerate_marginals(&p);
    let priors = Priors::new(p.alpha1, &p.alpha2, WordPrior::Dynamic { beta: &p.beta, prior_phi: &p.prior_phi }, p.v).unwrap();
    let docs: Vec<Document> = p.tokens.iter().enumerate().map(|(d, t)| Document::new(d as u64, t.clone())).collect();
    let mut rng = rng_for(2024, 0);
    let mut state = EpochState::random(&docs, p.s, p.k, p.v, &mut rng).unwrap();
    for _ in 0..2000 {
        gibbs_sweep(&mut state, &priors, &mut rng);
    }
    let n = 200_000;
    let mut freq = vec![vec![0u64; p.s * p.k]; exact.len()];
    for _ in 0..n {
        gibbs_sweep(&mut state, &priors, &mut rng);
        let mut t = 0;
        for d in 0..state.num_docs() {
            for i in 0..state.tokens()[d].len() {
                freq[t][state.supertopics()[d][i] as usize * p.k + state.subtopics()[d][i] as usize] += 1;
                t += 1;
            }
        }
    }
    let worst = freq
        .iter()
        .zip(&exact)
        .map(|(f, e)| f.iter().zip(e).map(|(&c, &q)| (c as f64 / n as f64 - q).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    Outcome::check(
        worst < 0.02,
        format!("max per-token L1 to enumerated posterior {worst:.4} over {n} states (limit 0.02)"),
    )
}

fn conditional_oracle() -> Outcome {
    let (mut sum_err, mut rel_err) = (0.0_f64, 0.0_f64);
    for seed in 0..10_000 {
        let (s, r) = check_conditional(seed);
        sum_err = sum_err.max(s);
        rel_err = rel_err.max(r);
    }
    Outcome::check(
        sum_err < 1e-12 && rel_err < 1e-12,
        format!("10000 states: max |sum-1| {sum_err:.1e}, max rel err {rel_err:.1e} (limit 1e-12)"),
    )
}

fn count_consistency() -> Outcome {
    let mut bad = 0;
    for seed in 0..20 {
        let mut rng = rng_for(seed, 0);
        let (s, k, v) = (rng.random_range(1..5), rng.random_range(1..8), rng.random_range(5..40));
        let docs: Vec<Document> = (0..rng.random_range(5..30))
            .map(|d| Document::new(d, (0..rng.random_range(1..60)).map(|_| rng.random_range(0..v as u32)).collect()))
            .collect();
        let alpha2 = random_matrix(&mut rng, s, k, 0.05, 3.0);
        let beta = random_matrix(&mut rng, k, k, 0.1, 200.0);
        let phi = random_simplex_rows(&mut rng, k, v);
        let priors = Priors::new(0.1, &alpha2, WordPrior::Dynamic { beta: &beta, prior_phi: &phi }, v).unwrap();
        let mut state = EpochState::random(&docs, s, k, v, &mut rng).unwrap();
        for _ in 0..100 {
            gibbs_sweep(&mut state, &priors, &mut rng);
        }
        if state.counts() != state.recount() {
            bad += 1;
        }
    }
    Outcome::check(bad == 0, format!("{bad} of 20 corpora with mismatched tables after 100 sweeps"))
}

fn monotonicity() -> Outcome {
    let (mut worst_a, mut worst_b) = (f64::INFINITY, f64::INFINITY);
    for seed in 0..100 {
        let mut rng = rng_for(seed, 1);
        let (s, k) = (rng.random_range(1..4), rng.random_range(1..5));
        let state = random_state(&mut rng, s, k, 6);
        let a = random_matrix(&mut rng, s, k, 0.05, 10.0);
        let (next, _) = alpha2_pass(&state, &a, 1e-6);
        worst_a = worst_a.min(alpha2_ln_evidence(&state, &next) - alpha2_ln_evidence(&state, &a));

        let (k, v) = (rng.random_range(1..5), rng.random_range(2..12));
        let state = random_state(&mut rng, 1, k, v);
        let b = random_matrix(&mut rng, k, k, 0.1, 200.0);
        let phi = random_simplex_rows(&mut rng, k, v);
        let (next, _) = beta_pass(&state, &b, &phi, 1e-6);
        worst_b = worst_b.min(beta_ln_evidence(&state, &next, &phi) - beta_ln_evidence(&state, &b, &phi));
    }
    Outcome::check(
        worst_a >= -1e-9 && worst_b >= -1e-9,
        format!("smallest evidence change over 100 instances: alpha2 {worst_a:.3e}, beta {worst_b:.3e} (limit -1e-9)"),
    )
}

fn recovery() -> Outcome {
    let runs: Vec<[f64; 2]> = (0..20).map(|seed| alpha2_recovery([2.0, 0.5], 500, 50, seed)).collect();
    let a0 = median(runs.iter().map(|r| r[0]).collect());
    let a1 = median(runs.iter().map(|r| r[1]).collect());
    let (mut diag, mut off) = (0.0, 0.0);
    for seed in 0..20 {
        let (d, o) = beta_recovery(80.0, 5.0, seed);
        diag += (d[0] + d[1]) / 40.0;
        off += (o[0] + o[1]) / 40.0;
    }
    let ok = (a0 - 2.0).abs() <= 0.5
        && (a1 - 0.5).abs() <= 0.125
        && (diag - 80.0).abs() <= 24.0
        && (off - 5.0).abs() <= 1.5;
    Outcome::check(
        ok,
        format!("alpha2 median ({a0:.3}, {a1:.3}) vs (2, 0.5) within 25%; beta mean diag {diag:.2} off {off:.2} vs (80, 5) within 30%"),
    )
}

fn normalization(corpus: &Corpus) -> Outcome {
    let mut worst = 0.0_f64;
    for kind in ModelKind::ALL {
        let model = fit(corpus, &ModelConfig::for_kind(kind, 6, 2).with_seed(3)).unwrap();
        for e in &model.epochs {
            let p = &e.params;
            worst = worst
                .max(p.phi_hat.max_row_sum_error())
                .max(p.theta1_hat.max_row_sum_error())
                .max(p.theta2_hat.max_row_sum_error());
        }
    }
    let v = 37;
    let uniform = EpochParams {
        alpha2: Matrix::filled(2, 3, 1.0),
        beta: None,
        phi_hat: Matrix::uniform(3, v),
        theta1_hat: Matrix::uniform(4, 2),
        theta2_hat: Matrix::uniform(8, 3),
    };
    let mut rng = rng_for(1, 0);
    let docs: Vec<Document> = (0..4).map(|d| Document::new(d, (0..9).map(|_| rng.random_range(0..v as u32)).collect())).collect();
    let ppl = perplexity(&uniform, &docs).unwrap();
    let rel = (ppl - v as f64).abs() / v as f64;
    Outcome::check(
        worst < 1e-10 && rel < 1e-9,
        format!("max row-sum error {worst:.1e} over all four kinds (limit 1e-10); uniform PPL {ppl} for V={v} (rel err {rel:.1e})"),
    )
}

fn ordering(corpus: &Corpus) -> Outcome {
    let configs: Vec<ModelConfig> = ModelKind::ALL.iter().map(|&k| ModelConfig::for_kind(k, 6, 2)).collect();
    let plan = TrialPlan { n_trials: 10, base_seed: 100, ratio: 0.9, jobs: 0 };
    let results = run_trials_parallel(corpus, &configs, plan).unwrap();
    let report = compare(&results, &configs, Some("dstm")).unwrap();
    let get = |name: &str| report.models.iter().find(|m| m.model == name).unwrap();
    let (dstm, drtm, lda) = (get("dstm"), get("drtm"), get("lda"));
    let p_lda = lda.vs_reference.map(|t| t.p_value).unwrap_or(1.0);
    let means: Vec<String> = report.models.iter().map(|m| format!("{} {:.2}", m.model, m.mean)).collect();
    Outcome::check(
        dstm.mean < drtm.mean && dstm.mean < lda.mean && p_lda < 0.05,
        format!("mean PPL over 10 trials: {}; DSTM vs LDA p = {p_lda:.2e} (limit 0.05)", means.join(", ")),
    )
}

fn structure_recovery(corpus: &Corpus, truth: &GroundTruth) -> Outcome {
    let model = fit(corpus, &ModelConfig::dstm(6, 2).with_seed(11)).unwrap();
    let align: Vec<Vec<usize>> = model
        .epochs
        .iter()
        .zip(&truth.epochs)
        .map(|(e, t)| align_topics(&e.params.phi_hat, &t.phi))
        .collect();
    let (mut planted, mut found, mut extracted) = (0, 0, 0);
    for t in 1..model.epochs.len() {
        let beta = model.epochs[t].params.beta.as_ref().unwrap();
        // Per-epoch threshold: the mean fitted weight.
        let threshold = beta.as_slice().iter().sum::<f64>() / beta.as_slice().len() as f64;
        let opts = ExtractOptions { beta_threshold: threshold, ..Default::default() };
        let graph = extract_graph(&model, corpus.vocabulary(), &opts).unwrap();
        let edges: Vec<(usize, usize)> = graph
            .dynamic_edges
            .iter()
            .filter_map(|e| {
                let (from, to) = (graph.node(&e.from)?, graph.node(&e.to)?);
                (to.epoch == t).then(|| (align[t - 1][from.index], align[t][to.index]))
            })
            .collect();
        extracted += edges.len();
        let tb = &truth.epochs[t].beta;
        let tmean = tb.as_slice().iter().sum::<f64>() / tb.as_slice().len() as f64;
        for k in 0..tb.rows() {
            for kp in 0..tb.cols() {
                if tb[(k, kp)] > tmean {
                    planted += 1;
                    if edges.contains(&(kp, k)) {
                        found += 1;
                    }
                }
            }
        }
    }
    let recall = found as f64 / planted as f64;
    Outcome::check(
        recall >= 0.8,
        format!("recovered {found} of {planted} planted dynamic edges ({:.0}%, limit 80%); {extracted} edges extracted", recall * 100.0),
    )
}

fn nips_ingestion() -> Outcome {
    let Some(dir) = std::env::var_os("DSTM_NIPS_DIR").map(PathBuf::from) else {
        return Outcome { status: Status::Skip, detail: "DSTM_NIPS_DIR not set".into() };
    };
    let files = [dir.join("docword.nips.txt"), dir.join("vocab.nips.txt"), dir.join("epochs.txt")];
    if let Some(missing) = files.iter().find(|f| !f.exists()) {
        return Outcome { status: Status::Skip, detail: format!("{} not found", missing.display()) };
    }
    match load_uci_bow(&files[0], &files[1], &files[2]) {
        Ok((c, _)) => Outcome::check(
            (c.num_docs(), c.vocab_size(), c.num_tokens()) == (1740, 11_443, 2_271_087),
            format!("{} documents, {} terms, {} tokens, {} epochs", c.num_docs(), c.vocab_size(), c.num_tokens(), c.epochs().len()),
        ),
        Err(e) => Outcome::check(false, format!("load failed: {e}")),
    }
}

fn run_cli(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_dstm"))
        .args(args)
        .current_dir(dir)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    if !run_cli(d, &["generate", "--seed", "4", "--docs", "40", "--out-dir", "syn"]) {
        return Outcome::check(false, "generate failed".into());
    }
    let corpus = ["--docword", "syn/docword.txt", "--vocab", "syn/vocab.txt", "--epoch-map", "syn/epochs.txt"];
    let mut same = true;
    for run in ["1", "2"] {
        let model = format!("m{run}.json");
        let out = format!("ev{run}");
        let mut fit = vec!["fit", "--k", "6", "--s", "2", "--seed", "7", "--with-theta", "--out", model.as_str()];
        fit.extend(corpus);
        let mut eval = vec!["eval", "--k", "6", "--s", "2", "--sweeps", "100", "--burn-in", "20", "--trials", "3", "--seed", "7", "--split-seed", "3", "--out-dir", out.as_str()];
        eval.extend(corpus);
        same &= run_cli(d, &fit) && run_cli(d, &eval);
    }
    let files = ["m{}.json", "ev{}/trials.csv", "ev{}/summary.csv", "ev{}/summary.txt"];
    let mut differing = Vec::new();
    for f in files {
        let a = fs::read(d.join(f.replace("{}", "1")));
        let b = fs::read(d.join(f.replace("{}", "2")));
        match (a, b) {
            (Ok(a), Ok(b)) if a == b => {}
            _ => differing.push(f.replace("{}", "N")),
        }
    }
    Outcome::check(
        same && differing.is_empty(),
        if differing.is_empty() {
            "fit model file and eval reports byte-identical across two runs".into()
        } else {
            format!("differing or missing: {}", differing.join(", "))
        },
    )
}

fn main() {
    let (corpus, truth) = generate(&GeneratorSpec::planted(3, 6, 2, 200, 100, 50, 1)).unwrap();
    let criteria: Vec<Criterion> = vec![
        ("sampler matches exact posterior", secs(60), Box::new(sampler_oracle)),
        ("conditional matches direct product", secs(10), Box::new(conditional_oracle)),
        ("count tables stay consistent", secs(30), Box::new(count_consistency)),
        ("fixed-point passes are monotone", secs(30), Box::new(monotonicity)),
        ("hyperparameter recovery", secs(120), Box::new(recovery)),
        ("normalization", None, Box::new(|| normalization(&corpus))),
        ("perplexity ordering on synthetic data", secs(600), Box::new(|| ordering(&corpus))),
        ("dynamic structure recovery", None, Box::new(|| structure_recovery(&corpus, &truth))),
        ("NIPS ingestion counts", None, Box::new(nips_ingestion)),
        ("CLI determinism", None, Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let out = timed(limit, f);
        let tag = match out.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Skip => "SKIP",
        };
        println!("[{tag}] {name}: {}", out.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria met");
}
