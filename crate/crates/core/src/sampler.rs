//! Collapsed Gibbs E-step over joint (supertopic, subtopic) assignments.
//!
//! The conditional of one token factorizes into a document-supertopic term,
//! a supertopic-subtopic term and a word term. The word term is where the
//! model kinds differ, so it is supplied as a [`WordPrior`]: either the
//! `beta`-weighted mixture of the previous epoch's word distributions or a
//! symmetric static value.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::{EpochState, Error, Matrix, ModelConfig, Result};

/// Word-side prior of the subtopics.
#[derive(Debug, Clone, Copy)]
pub enum WordPrior<'a> {
    /// Prior mass `sum_k' beta[k][k'] * prior_phi[k'][v]` with total `sum_k' beta[k][k']`.
    Dynamic { beta: &'a Matrix, prior_phi: &'a Matrix },
    /// Prior mass `beta` for every word, total `V * beta`.
    Static(f64),
}

/// Dirichlet pseudo-counts of one epoch, precomputed for sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct Priors {
    alpha1: f64,
    alpha1_sum: f64,
    alpha2: Matrix,
    alpha2_sum: Vec<f64>,
    word_prior: Matrix,
    word_prior_sum: Vec<f64>,
}

impl Priors {
    pub fn new(alpha1: f64, alpha2: &Matrix, word: WordPrior<'_>, vocab_size: usize) -> Result<Self> {
        let (num_supertopics, num_topics) = alpha2.shape();
        let (word_prior, word_prior_sum) = match word {
            WordPrior::Dynamic { beta, prior_phi } => {
                check_shape("beta", beta, num_topics, num_topics)?;
                check_shape("prior word distribution", prior_phi, num_topics, vocab_size)?;
                dynamic_word_prior(beta, prior_phi)
            }
            WordPrior::Static(b) => (
                Matrix::filled(num_topics, vocab_size, b),
                vec![b * vocab_size as f64; num_topics],
            ),
        };
        Ok(Priors {
            alpha1,
            alpha1_sum: alpha1 * num_supertopics as f64,
            alpha2: alpha2.clone(),
            alpha2_sum: alpha2.row_sums(),
            word_prior,
            word_prior_sum,
        })
    }

    /// Priors of `config`'s kind given current hyperparameters.
    pub fn for_config(
        config: &ModelConfig,
        alpha2: &Matrix,
        beta: Option<&Matrix>,
        prior_phi: &Matrix,
    ) -> Result<Self> {
        let word = match (config.learns_beta(), beta) {
            (true, Some(beta)) => WordPrior::Dynamic { beta, prior_phi },
            (true, None) => {
                return Err(Error::InvalidArgument(
                    "dynamic model requires a beta matrix".into(),
                ))
            }
            (false, _) => WordPrior::Static(config.static_beta),
        };
        Priors::new(config.alpha1, alpha2, word, prior_phi.cols())
    }

    pub fn num_supertopics(&self) -> usize {
        self.alpha2.rows()
    }

    pub fn num_topics(&self) -> usize {
        self.alpha2.cols()
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> &Matrix {
        &self.alpha2
    }

    /// K x V word pseudo-counts.
    pub fn word_prior(&self) -> &Matrix {
        &self.word_prior
    }

    pub fn word_prior_sum(&self) -> &[f64] {
        &self.word_prior_sum
    }

    /// Unnormalized conditional of token `(d, i)` written into `out`
    /// (length S*K, supertopic-major); returns the total mass.
    ///
    /// The token must already be removed from `state`'s counts.
    #[inline]
    pub fn conditional_into(&self, state: &EpochState, d: usize, i: usize, out: &mut [f64]) -> f64 {
        let (ns, nk) = (self.num_supertopics(), self.num_topics());
        let v = state.word(d, i) as usize;
        let n_d = state.doc_len(d) as f64;
        let doc_denom = n_d + self.alpha1_sum;
        let mut total = 0.0;
        for s in 0..ns {
            let n_ds = state.n_ds(d, s) as f64;
            let doc_factor = (n_ds + self.alpha1) / doc_denom;
            let sub_denom = n_ds + self.alpha2_sum[s];
            let counts = state.n_dsk_row(d, s);
            let a2 = self.alpha2.row(s);
            let cells = &mut out[s * nk..(s + 1) * nk];
            for k in 0..nk {
                let sub_factor = (counts[k] as f64 + a2[k]) / sub_denom;
                let word_factor = (state.n_kv(k, v) as f64 + self.word_prior[(k, v)])
                    / (state.n_k(k) as f64 + self.word_prior_sum[k]);
                let p = doc_factor * sub_factor * word_factor;
                cells[k] = p;
                total += p;
            }
        }
        total
    }
}

fn dynamic_word_prior(beta: &Matrix, prior_phi: &Matrix) -> (Matrix, Vec<f64>) {
    let (k_n, v_n) = prior_phi.shape();
    let mut prior = Matrix::zeros(k_n, v_n);
    for k in 0..k_n {
        let out = prior.row_mut(k);
        for (kp, &b) in beta.row(k).iter().enumerate() {
            for (o, &p) in out.iter_mut().zip(prior_phi.row(kp)) {
                *o += b * p;
            }
        }
    }
    (prior, beta.row_sums())
}

fn check_shape(what: &'static str, m: &Matrix, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::DimensionMismatch {
            what,
            expected: format!("{rows}x{cols}"),
            actual: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    Ok(())
}

/// Normalized S*K conditional of token `(d, i)`, supertopic-major.
///
/// Follows the "excluding token i" convention: `(d, i)` must already be
/// removed from `state`'s counts.
pub fn conditional_distribution(state: &EpochState, priors: &Priors, d: usize, i: usize) -> Vec<f64> {
    let mut out = vec![0.0; priors.num_supertopics() * priors.num_topics()];
    let total = priors.conditional_into(state, d, i, &mut out);
    for p in &mut out {
        *p /= total;
    }
    out
}

/// Index drawn from unnormalized weights with known `total`.
#[inline]
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (idx, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return idx;
        }
    }
    // u landed in the rounding gap at the top; take the last live cell
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Visits every token in document then position order, resampling its
/// (supertopic, subtopic) pair jointly from the collapsed conditional.
pub fn gibbs_sweep<R: Rng + ?Sized>(state: &mut EpochState, priors: &Priors, rng: &mut R) {
    let nk = priors.num_topics();
    let mut buf = vec![0.0; priors.num_supertopics() * nk];
    for d in 0..state.num_docs() {
        for i in 0..state.tokens()[d].len() {
            state.remove(d, i);
            let total = priors.conditional_into(state, d, i, &mut buf);
            let cell = sample_index(&buf, total, rng);
            state.assign(d, i, cell / nk, cell % nk);
        }
    }
}
