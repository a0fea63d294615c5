//! Held-out perplexity, repeated train/test trials and paired t-tests.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::split_tokens;
use crate::math::{exp, ln, ln_gamma, sqrt};
use crate::{fit, Corpus, Document, EpochParams, Error, FittedModel, ModelConfig, ModelKind, Result, SplitCorpus};

/// Sum of held-out log predictive probabilities and the token count.
///
/// `test_docs[d]` must be the held-out part of the document that produced
/// row `d` of the estimates. Each token scores
/// `sum_k w[d][k] * phi_hat[k][v]` with `w` from
/// [`EpochParams::doc_topic_weights`].
pub fn held_out_ln_likelihood(params: &EpochParams, test_docs: &[Document]) -> Result<(f64, usize)> {
    if test_docs.len() != params.num_docs() {
        return Err(Error::DimensionMismatch {
            what: "held-out documents",
            expected: format!("{}", params.num_docs()),
            actual: format!("{}", test_docs.len()),
        });
    }
    let nv = params.phi_hat.cols();
    let mut total = 0.0;
    let mut count = 0;
    for (d, doc) in test_docs.iter().enumerate() {
        if doc.is_empty() {
            continue;
        }
        let weights = params.doc_topic_weights(d);
        for &v in &doc.tokens {
            let v = v as usize;
            if v >= nv {
                return Err(Error::InvalidArgument(format!("word id {v} outside vocabulary of size {nv}")));
            }
            let p: f64 = weights.iter().enumerate().map(|(k, &w)| w * params.phi_hat[(k, v)]).sum();
            total += ln(p);
        }
        count += doc.len();
    }
    Ok((total, count))
}

/// `exp(-sum log p(w) / N_test)` over all held-out tokens of one epoch.
pub fn perplexity(params: &EpochParams, test_docs: &[Document]) -> Result<f64> {
    let (ll, n) = held_out_ln_likelihood(params, test_docs)?;
    if n == 0 {
        return Err(Error::NoTestTokens);
    }
    Ok(exp(-ll / n as f64))
}

/// Perplexity of every epoch of `model` on the matching epoch of `test`.
pub fn epoch_perplexities(model: &FittedModel, test: &Corpus) -> Result<Vec<f64>> {
    if model.epochs.len() != test.epochs().len() {
        return Err(Error::DimensionMismatch {
            what: "epochs",
            expected: format!("{}", model.epochs.len()),
            actual: format!("{}", test.epochs().len()),
        });
    }
    model
        .epochs
        .iter()
        .zip(test.epochs())
        .map(|(fit, epoch)| perplexity(&fit.params, &epoch.docs))
        .collect()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); `None` below two values.
pub fn sample_std(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    Some(sqrt(ss / (xs.len() - 1) as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub model: String,
    pub kind: ModelKind,
    pub trial: usize,
    pub split_seed: u64,
    pub per_epoch: Vec<f64>,
    /// Unweighted mean of `per_epoch`.
    pub epoch_averaged: f64,
}

/// Display names for a list of configurations: the kind, disambiguated by
/// K and S when a kind repeats.
pub fn model_names(configs: &[ModelConfig]) -> Vec<String> {
    configs
        .iter()
        .map(|c| {
            let repeats = configs.iter().filter(|o| o.kind == c.kind).count() > 1;
            if repeats {
                format!("{}-k{}-s{}", c.kind, c.num_topics, c.num_supertopics)
            } else {
                String::from(c.kind.as_str())
            }
        })
        .collect()
}

/// Seed of the split used by trial `trial`.
pub fn trial_split_seed(base_seed: u64, trial: usize) -> u64 {
    base_seed.wrapping_add(trial as u64)
}

/// Fits `config` (seeded per trial) on the train side and scores the test side.
pub fn evaluate_on_split(split: &SplitCorpus, config: &ModelConfig, name: &str, trial: usize) -> Result<TrialResult> {
    let cfg = config.clone().with_seed(config.seed.wrapping_add(trial as u64));
    let model = fit(&split.train, &cfg)?;
    let per_epoch = epoch_perplexities(&model, &split.test)?;
    Ok(TrialResult {
        model: String::from(name),
        kind: config.kind,
        trial,
        split_seed: split.seed,
        epoch_averaged: mean(&per_epoch),
        per_epoch,
    })
}

/// Runs `n_trials` random token splits; within one trial every model sees
/// the same split. Results are ordered by trial, then by `configs` order.
pub fn run_trials(
    corpus: &Corpus,
    configs: &[ModelConfig],
    n_trials: usize,
    base_seed: u64,
    ratio: f64,
) -> Result<Vec<TrialResult>> {
    if n_trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let names = model_names(configs);
    let mut out = Vec::with_capacity(n_trials * configs.len());
    for trial in 0..n_trials {
        let split = split_tokens(corpus, ratio, trial_split_seed(base_seed, trial))?;
        for (config, name) in configs.iter().zip(&names) {
            out.push(evaluate_on_split(&split, config, name, trial)?);
        }
    }
    Ok(out)
}

/// Degenerate cases of the paired test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestFlag {
    Regular,
    /// Every difference equal and nonzero: `t` is infinite, `p` is 0.
    ZeroVariance,
    /// Every difference zero: `t` is 0, `p` is 1.
    AllZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTTest {
    pub t: f64,
    pub p_value: f64,
    pub df: usize,
    pub flag: TTestFlag,
}

/// Two-sided paired t-test on `a[i] - b[i]` with `n - 1` degrees of freedom.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            what: "paired samples",
            expected: format!("{}", a.len()),
            actual: format!("{}", b.len()),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidArgument("paired t-test needs at least two pairs".into()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len();
    let df = n - 1;
    let m = mean(&diffs);
    let sd = sample_std(&diffs).unwrap_or(0.0);
    if sd == 0.0 {
        return Ok(if m == 0.0 {
            PairedTTest { t: 0.0, p_value: 1.0, df, flag: TTestFlag::AllZero }
        } else {
            PairedTTest {
                t: if m > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY },
                p_value: 0.0,
                df,
                flag: TTestFlag::ZeroVariance,
            }
        });
    }
    let t = m / (sd / sqrt(n as f64));
    Ok(PairedTTest {
        t,
        p_value: student_t_two_sided(t, df as f64),
        df,
        flag: TTestFlag::Regular,
    })
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(x, 0.5 * df, 0.5).clamp(0.0, 1.0)
}

/// Regularized incomplete beta `I_x(a, b)` via its continued fraction
/// (modified Lentz), using the symmetry `I_x(a, b) = 1 - I_{1-x}(b, a)`
/// where the fraction converges faster.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * ln(x) + b * ln(1.0 - x);
    if x < (a + 1.0) / (a + b + 2.0) {
        exp(ln_front) * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - exp(ln_front) * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let fix = |v: f64| if libm::fabs(v) < TINY { TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / fix(1.0 - (a + b) * x / (a + 1.0));
    let mut h = d;
    for m in 1..500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let even = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 / fix(1.0 + even * d);
        c = fix(1.0 + even / c);
        h *= d * c;
        let odd = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 / fix(1.0 + odd * d);
        c = fix(1.0 + odd / c);
        let delta = d * c;
        h *= delta;
        if libm::fabs(delta - 1.0) < EPS {
            break;
        }
    }
    h
}

/// Per-model aggregate over trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: String,
    pub kind: ModelKind,
    pub num_topics: usize,
    pub num_supertopics: usize,
    pub trials: usize,
    /// Mean over trials of the epoch-averaged perplexity.
    pub mean: f64,
    /// Standard deviation over trials of the epoch-averaged perplexity.
    pub std_across_trials: Option<f64>,
    /// Mean over trials of the standard deviation across epochs.
    pub std_across_epochs: Option<f64>,
    /// Paired test of the reference model against this one.
    pub vs_reference: Option<PairedTTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub reference: Option<String>,
    pub models: Vec<ModelSummary>,
}

/// Aggregates trial results per model, in first-seen order, and pairs each
/// model with `reference` by trial index (reference minus model).
pub fn compare(results: &[TrialResult], configs: &[ModelConfig], reference: Option<&str>) -> Result<ComparisonReport> {
    let names = model_names(configs);
    let by_model = |name: &str| -> Vec<&TrialResult> {
        let mut rs: Vec<&TrialResult> = results.iter().filter(|r| r.model == name).collect();
        rs.sort_by_key(|r| r.trial);
        rs
    };
    let reference_runs = reference.map(by_model);
    let mut models = Vec::with_capacity(configs.len());
    for (config, name) in configs.iter().zip(&names) {
        let runs = by_model(name);
        if runs.is_empty() {
            continue;
        }
        let averaged: Vec<f64> = runs.iter().map(|r| r.epoch_averaged).collect();
        let epoch_stds: Vec<f64> = runs.iter().filter_map(|r| sample_std(&r.per_epoch)).collect();
        let vs_reference = match (&reference_runs, reference) {
            (Some(base), Some(rname)) if rname != name.as_str() && base.len() == runs.len() && runs.len() >= 2 => {
                let base: Vec<f64> = base.iter().map(|r| r.epoch_averaged).collect();
                Some(paired_t_test(&base, &averaged)?)
            }
            _ => None,
        };
        models.push(ModelSummary {
            model: name.clone(),
            kind: config.kind,
            num_topics: config.num_topics,
            num_supertopics: config.num_supertopics,
            trials: runs.len(),
            mean: mean(&averaged),
            std_across_trials: sample_std(&averaged),
            std_across_epochs: (!epoch_stds.is_empty()).then(|| mean(&epoch_stds)),
            vs_reference,
        });
    }
    Ok(ComparisonReport {
        reference: reference.map(String::from),
        models,
    })
}
