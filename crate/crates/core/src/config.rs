//! Model kinds and their hyperparameter settings.

use alloc::format;
use alloc::string::ToString;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which model family a configuration describes.
///
/// The four kinds share one sampler. They differ in two switches:
/// whether documents mix supertopics with learned subtopic priors or mix
/// subtopics directly under a fixed symmetric prior, and whether subtopic
/// word priors come from the previous epoch (with learned weights) or are a
/// fixed symmetric value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Supertopic hierarchy and dynamic word priors.
    Dstm,
    /// Dynamic word priors, flat document-topic mixture.
    Drtm,
    /// Supertopic hierarchy, static symmetric word prior.
    Pam,
    /// Flat mixture, static symmetric word prior.
    Lda,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Dstm, ModelKind::Drtm, ModelKind::Pam, ModelKind::Lda];

    pub fn is_hierarchical(self) -> bool {
        matches!(self, ModelKind::Dstm | ModelKind::Pam)
    }

    pub fn is_dynamic(self) -> bool {
        matches!(self, ModelKind::Dstm | ModelKind::Drtm)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Dstm => "dstm",
            ModelKind::Drtm => "drtm",
            ModelKind::Pam => "pam",
            ModelKind::Lda => "lda",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dstm" => Ok(ModelKind::Dstm),
            "drtm" => Ok(ModelKind::Drtm),
            "pam" => Ok(ModelKind::Pam),
            "lda" => Ok(ModelKind::Lda),
            other => Err(Error::InvalidArgument(format!(
                "unknown model kind {other:?} (expected dstm, drtm, pam or lda)"
            ))),
        }
    }
}

/// Hyperparameters and schedule for one model.
///
/// For the flat kinds (`Drtm`, `Lda`) `num_supertopics` is 1 and
/// `alpha2_init` is the fixed symmetric document-topic prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub num_topics: usize,
    pub num_supertopics: usize,
    /// Symmetric supertopic prior weight, never optimized.
    pub alpha1: f64,
    /// Initial value of every subtopic prior weight.
    pub alpha2_init: f64,
    pub beta_diag_init: f64,
    pub beta_offdiag_init: f64,
    /// Symmetric word prior of the static kinds.
    pub static_beta: f64,
    pub gibbs_sweeps: usize,
    pub burn_in_sweeps: usize,
    pub m_step_interval: usize,
    pub fp_max_iters: usize,
    pub fp_rel_tol: f64,
    pub param_floor: f64,
    pub seed: u64,
}

impl ModelConfig {
    /// Settings shared by every kind, before the kind-specific adjustments.
    fn base(kind: ModelKind, num_topics: usize, num_supertopics: usize) -> Self {
        ModelConfig {
            kind,
            num_topics,
            num_supertopics,
            alpha1: 0.1,
            alpha2_init: 1.0,
            beta_diag_init: 100.0,
            beta_offdiag_init: 0.1,
            static_beta: 0.1,
            gibbs_sweeps: 500,
            burn_in_sweeps: 100,
            m_step_interval: 20,
            fp_max_iters: 100,
            fp_rel_tol: 1e-5,
            param_floor: 1e-6,
            seed: 0,
        }
    }

    pub fn dstm(num_topics: usize, num_supertopics: usize) -> Self {
        Self::base(ModelKind::Dstm, num_topics, num_supertopics)
    }

    pub fn pam(num_topics: usize, num_supertopics: usize) -> Self {
        Self::base(ModelKind::Pam, num_topics, num_supertopics)
    }

    /// Flat document-topic prior `alpha = 0.1`.
    pub fn drtm(num_topics: usize) -> Self {
        ModelConfig {
            alpha2_init: 0.1,
            ..Self::base(ModelKind::Drtm, num_topics, 1)
        }
    }

    pub fn lda(num_topics: usize) -> Self {
        ModelConfig {
            alpha2_init: 0.1,
            ..Self::base(ModelKind::Lda, num_topics, 1)
        }
    }

    /// Default configuration of `kind`; `num_supertopics` is ignored by the
    /// flat kinds.
    pub fn for_kind(kind: ModelKind, num_topics: usize, num_supertopics: usize) -> Self {
        match kind {
            ModelKind::Dstm => Self::dstm(num_topics, num_supertopics),
            ModelKind::Pam => Self::pam(num_topics, num_supertopics),
            ModelKind::Drtm => Self::drtm(num_topics),
            ModelKind::Lda => Self::lda(num_topics),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_schedule(mut self, sweeps: usize, burn_in: usize, interval: usize) -> Self {
        self.gibbs_sweeps = sweeps;
        self.burn_in_sweeps = burn_in;
        self.m_step_interval = interval;
        self
    }

    /// Whether the M-step touches the subtopic priors.
    pub fn learns_alpha2(&self) -> bool {
        self.kind.is_hierarchical()
    }

    /// Whether the M-step touches the dynamic weights.
    pub fn learns_beta(&self) -> bool {
        self.kind.is_dynamic()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.num_topics == 0 {
            return fail("number of subtopics must be at least 1");
        }
        if self.num_supertopics == 0 {
            return fail("number of supertopics must be at least 1");
        }
        if !self.kind.is_hierarchical() && self.num_supertopics != 1 {
            return Err(Error::InvalidConfig(format!(
                "{} has no supertopics; num_supertopics must be 1",
                self.kind
            )));
        }
        let positive = [
            ("alpha1", self.alpha1),
            ("alpha2_init", self.alpha2_init),
            ("beta_diag_init", self.beta_diag_init),
            ("beta_offdiag_init", self.beta_offdiag_init),
            ("static_beta", self.static_beta),
            ("fp_rel_tol", self.fp_rel_tol),
            ("param_floor", self.param_floor),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if self.burn_in_sweeps == 0 || self.burn_in_sweeps > self.gibbs_sweeps {
            return fail("burn-in sweeps must satisfy 0 < burn_in <= gibbs_sweeps");
        }
        if self.m_step_interval == 0 {
            return fail("M-step interval must be at least 1");
        }
        if self.fp_max_iters == 0 {
            return fail("fixed-point iteration cap must be at least 1");
        }
        Ok(())
    }

    /// Whether an M-step follows sweep `sweep` (1-based).
    pub fn m_step_after(&self, sweep: usize) -> bool {
        sweep == self.gibbs_sweeps
            || (sweep >= self.burn_in_sweeps && (sweep - self.burn_in_sweeps) % self.m_step_interval == 0)
    }

    pub fn m_step_count(&self) -> usize {
        (1..=self.gibbs_sweeps).filter(|&s| self.m_step_after(s)).count()
    }
}
