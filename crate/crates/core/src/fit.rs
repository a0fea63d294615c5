//! Per-epoch stochastic EM and the sequential fit over all epochs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::estimate::{compute_theta_hats, phi_hat_from_priors};
use crate::mstep::{joint_ln_evidence, update_alpha2, update_beta};
use crate::sampler::{gibbs_sweep, Priors};
use crate::{rng_for, Corpus, Document, EpochState, Error, Matrix, ModelConfig, ModelKind, Result};

/// Hyperparameters and estimates of one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochParams {
    /// Subtopic priors, S x K. For flat kinds this is the 1 x K fixed prior.
    pub alpha2: Matrix,
    /// Dynamic weights, K x K; absent for static kinds.
    pub beta: Option<Matrix>,
    /// Word distributions, K x V.
    pub phi_hat: Matrix,
    /// Document-supertopic estimates, D x S.
    pub theta1_hat: Matrix,
    /// Supertopic-subtopic estimates, (D * S) x K with row `d * S + s`.
    pub theta2_hat: Matrix,
}

impl EpochParams {
    /// Mixture weight of subtopic `k` in document `d`:
    /// `sum_s theta1[d][s] * theta2[d][s][k]`.
    pub fn doc_topic_weights(&self, d: usize) -> Vec<f64> {
        let (ns, nk) = self.alpha2.shape();
        let mut w = alloc::vec![0.0; nk];
        for s in 0..ns {
            let t1 = self.theta1_hat[(d, s)];
            for (acc, &t2) in w.iter_mut().zip(self.theta2_hat.row(d * ns + s)) {
                *acc += t1 * t2;
            }
        }
        w
    }

    pub fn num_docs(&self) -> usize {
        self.theta1_hat.rows()
    }
}

/// Collapsed log joint recorded after an M-step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub sweep: usize,
    pub ln_evidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochFit {
    pub label: String,
    pub params: EpochParams,
    pub m_steps: usize,
    pub trace: Vec<TracePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<EpochState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub kind: ModelKind,
    pub config: ModelConfig,
    pub vocab_size: usize,
    pub epochs: Vec<EpochFit>,
}

impl FittedModel {
    pub fn epoch_labels(&self) -> Vec<String> {
        self.epochs.iter().map(|e| e.label.clone()).collect()
    }

    /// Checks that every epoch's parameters have the configured shapes.
    pub fn validate(&self) -> Result<()> {
        let k = self.config.num_topics;
        let s = self.config.num_supertopics;
        for (t, e) in self.epochs.iter().enumerate() {
            let p = &e.params;
            let d = p.theta1_hat.rows();
            let beta_ok = match &p.beta {
                Some(b) => self.kind.is_dynamic() && b.shape() == (k, k),
                None => !self.kind.is_dynamic(),
            };
            let ok = p.alpha2.shape() == (s, k)
                && beta_ok
                && p.phi_hat.shape() == (k, self.vocab_size)
                && p.theta1_hat.shape() == (d, s)
                && p.theta2_hat.shape() == (d * s, k);
            if !ok {
                return Err(Error::DimensionMismatch {
                    what: "epoch parameters",
                    expected: format!("K={k}, S={s}, V={}", self.vocab_size),
                    actual: format!("epoch {t}"),
                });
            }
        }
        Ok(())
    }
}

/// Random initial assignments plus the configured initial hyperparameters.
pub fn init_epoch<R: Rng + ?Sized>(
    docs: &[Document],
    config: &ModelConfig,
    prior_phi: &Matrix,
    rng: &mut R,
) -> Result<(EpochState, Matrix, Option<Matrix>)> {
    config.validate()?;
    let (k, s) = (config.num_topics, config.num_supertopics);
    if prior_phi.rows() != k || prior_phi.cols() == 0 {
        return Err(Error::DimensionMismatch {
            what: "prior word distribution",
            expected: format!("{k} rows"),
            actual: format!("{}x{}", prior_phi.rows(), prior_phi.cols()),
        });
    }
    let state = EpochState::random(docs, s, k, prior_phi.cols(), rng)?;
    let alpha2 = Matrix::filled(s, k, config.alpha2_init);
    let beta = config
        .learns_beta()
        .then(|| Matrix::diagonal(k, config.beta_diag_init, config.beta_offdiag_init));
    Ok((state, alpha2, beta))
}

/// Stochastic EM for one epoch.
///
/// After `burn_in_sweeps` sweeps, and then every `m_step_interval` sweeps
/// plus once after the last sweep, the learnable hyperparameters are
/// refitted on the current state. The estimates come from the final state.
pub fn fit_epoch<R: Rng + ?Sized>(
    docs: &[Document],
    config: &ModelConfig,
    prior_phi: &Matrix,
    rng: &mut R,
) -> Result<EpochFit> {
    let (mut state, mut alpha2, mut beta) = init_epoch(docs, config, prior_phi, rng)?;
    let mut priors = Priors::for_config(config, &alpha2, beta.as_ref(), prior_phi)?;
    let mut trace = Vec::new();
    let mut m_steps = 0;
    for sweep in 1..=config.gibbs_sweeps {
        gibbs_sweep(&mut state, &priors, rng);
        if !config.m_step_after(sweep) {
            continue;
        }
        if config.learns_alpha2() {
            alpha2 = update_alpha2(&state, &alpha2, config).value;
        }
        if let Some(b) = beta.as_mut() {
            *b = update_beta(&state, b, prior_phi, config).value;
        }
        priors = Priors::for_config(config, &alpha2, beta.as_ref(), prior_phi)?;
        m_steps += 1;
        trace.push(TracePoint {
            sweep,
            ln_evidence: joint_ln_evidence(&state, &priors),
        });
    }
    let phi_hat = phi_hat_from_priors(&state, &priors);
    let (theta1_hat, theta2_hat) = compute_theta_hats(&state, config.alpha1, &alpha2);
    Ok(EpochFit {
        label: String::new(),
        params: EpochParams {
            alpha2,
            beta,
            phi_hat,
            theta1_hat,
            theta2_hat,
        },
        m_steps,
        trace,
        state: Some(state),
    })
}

/// Fits every epoch in order. Dynamic kinds feed each epoch's word
/// distributions forward as the next epoch's prior, starting from the
/// uniform matrix; static kinds fit each epoch independently.
/// Final sampler states are dropped.
pub fn fit(corpus: &Corpus, config: &ModelConfig) -> Result<FittedModel> {
    fit_with(corpus, config, false, |_, _| {})
}

/// Like [`fit`], keeping each epoch's final state and calling `on_epoch`
/// after each epoch completes.
pub fn fit_with(
    corpus: &Corpus,
    config: &ModelConfig,
    keep_states: bool,
    mut on_epoch: impl FnMut(usize, &EpochFit),
) -> Result<FittedModel> {
    config.validate()?;
    let v = corpus.vocab_size();
    let mut prior_phi = Matrix::uniform(config.num_topics, v);
    let mut epochs = Vec::with_capacity(corpus.epochs().len());
    for (t, epoch) in corpus.epochs().iter().enumerate() {
        let mut rng = rng_for(config.seed, t as u64);
        let mut fitted = fit_epoch(&epoch.docs, config, &prior_phi, &mut rng)?;
        fitted.label = epoch.label.clone();
        if config.learns_beta() {
            prior_phi = fitted.params.phi_hat.clone();
        }
        if !keep_states {
            fitted.state = None;
        }
        on_epoch(t, &fitted);
        epochs.push(fitted);
    }
    Ok(FittedModel {
        kind: config.kind,
        config: config.clone(),
        vocab_size: v,
        epochs,
    })
}
