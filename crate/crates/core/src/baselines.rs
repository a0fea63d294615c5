//! Comparison models built on the same sampler and schedule.
//!
//! * LDA: flat symmetric document prior, symmetric static word prior.
//! * PAM: supertopic hierarchy with learned subtopic priors, static word prior.
//! * DRTM: flat document prior with the dynamic word prior.
//!
//! LDA and PAM are fitted independently per epoch; DRTM is sequential.

use core::fmt;

use serde::{Deserialize, Serialize};

use crate::{fit, fit_epoch, rng_for, Corpus, Document, EpochFit, FittedModel, Matrix, ModelConfig, ModelKind, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BaselineKind {
    Lda,
    Pam,
    Drtm,
}

impl BaselineKind {
    pub fn model_kind(self) -> ModelKind {
        match self {
            BaselineKind::Lda => ModelKind::Lda,
            BaselineKind::Pam => ModelKind::Pam,
            BaselineKind::Drtm => ModelKind::Drtm,
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineKind::Lda => "LDA",
            BaselineKind::Pam => "PAM",
            BaselineKind::Drtm => "DRTM",
        })
    }
}

/// Collapsed Gibbs LDA on one epoch with `alpha = beta = 0.1` and 500 sweeps.
pub fn fit_lda_epoch(docs: &[Document], vocab_size: usize, num_topics: usize, seed: u64) -> Result<EpochFit> {
    fit_static_epoch(docs, vocab_size, &ModelConfig::lda(num_topics).with_seed(seed))
}

/// PAM on one epoch: `alpha1 = 0.1`, `alpha2` starting at 1.0 and learned,
/// static word prior 0.1.
pub fn fit_pam_epoch(
    docs: &[Document],
    vocab_size: usize,
    num_topics: usize,
    num_supertopics: usize,
    seed: u64,
) -> Result<EpochFit> {
    fit_static_epoch(docs, vocab_size, &ModelConfig::pam(num_topics, num_supertopics).with_seed(seed))
}

/// Runs a static-prior configuration on one epoch. The prior matrix is only
/// used for its shape.
pub fn fit_static_epoch(docs: &[Document], vocab_size: usize, config: &ModelConfig) -> Result<EpochFit> {
    let mut rng = rng_for(config.seed, 0);
    fit_epoch(docs, config, &Matrix::uniform(config.num_topics, vocab_size), &mut rng)
}

/// DRTM over the whole corpus: flat `alpha = 0.1`, beta starting at
/// 100 on the diagonal and 0.1 elsewhere.
pub fn fit_drtm(corpus: &Corpus, num_topics: usize, seed: u64) -> Result<FittedModel> {
    fit(corpus, &ModelConfig::drtm(num_topics).with_seed(seed))
}
