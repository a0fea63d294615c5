//! Forward sampling from the generative process with known parameters.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::math::{exp, ln};
use crate::sampler::sample_index;
use crate::{rng_for, Corpus, Document, Epoch, EpochState, Error, Matrix, Result, Vocabulary};

/// Sizes and true parameters of a synthetic corpus.
///
/// `alpha2` and `beta` hold one matrix per epoch, or a single matrix used
/// for every epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub num_epochs: usize,
    pub num_topics: usize,
    pub num_supertopics: usize,
    pub vocab_size: usize,
    pub docs_per_epoch: usize,
    pub doc_len: usize,
    /// Symmetric supertopic prior.
    pub alpha1: f64,
    pub alpha2: Vec<Matrix>,
    pub beta: Vec<Matrix>,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Planted structure: sparse first-epoch topics, strongly
    /// diagonal dynamics afterwards, and supertopics that each favour the
    /// subtopics `k` with `k % S == s` (weight 1 against 0.01 elsewhere).
    pub fn planted(
        num_epochs: usize,
        num_topics: usize,
        num_supertopics: usize,
        vocab_size: usize,
        docs_per_epoch: usize,
        doc_len: usize,
        seed: u64,
    ) -> Self {
        let mut alpha2 = Matrix::filled(num_supertopics, num_topics, 0.01);
        for s in 0..num_supertopics {
            for k in (s..num_topics).step_by(num_supertopics.max(1)) {
                alpha2[(s, k)] = 1.0;
            }
        }
        // First epoch: per-word prior mass around 0.1 keeps topics distinct.
        let first = Matrix::diagonal(num_topics, 0.1 * vocab_size as f64, 0.5);
        let later = Matrix::diagonal(num_topics, 300.0, 0.5);
        let mut beta = vec![first];
        beta.extend((1..num_epochs).map(|_| later.clone()));
        GeneratorSpec {
            num_epochs,
            num_topics,
            num_supertopics,
            vocab_size,
            docs_per_epoch,
            doc_len,
            alpha1: 0.1,
            alpha2: vec![alpha2],
            beta,
            seed,
        }
    }

    pub fn alpha2_at(&self, t: usize) -> &Matrix {
        &self.alpha2[if self.alpha2.len() == 1 { 0 } else { t }]
    }

    pub fn beta_at(&self, t: usize) -> &Matrix {
        &self.beta[if self.beta.len() == 1 { 0 } else { t }]
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = [
            self.num_epochs,
            self.num_topics,
            self.num_supertopics,
            self.vocab_size,
            self.docs_per_epoch,
            self.doc_len,
        ];
        if sizes.contains(&0) {
            return Err(Error::InvalidArgument("generator sizes must be at least 1".into()));
        }
        if !(self.alpha1 > 0.0) {
            return Err(Error::InvalidArgument("alpha1 must be positive".into()));
        }
        let counts_ok = |n: usize| n == 1 || n == self.num_epochs;
        if !counts_ok(self.alpha2.len()) || !counts_ok(self.beta.len()) {
            return Err(Error::InvalidArgument(
                "alpha2 and beta need one matrix, or one per epoch".into(),
            ));
        }
        let (s, k) = (self.num_supertopics, self.num_topics);
        for m in &self.alpha2 {
            if m.shape() != (s, k) || m.as_slice().iter().any(|&x| !(x > 0.0)) {
                return Err(Error::InvalidArgument(format!("alpha2 must be a positive {s}x{k} matrix")));
            }
        }
        for m in &self.beta {
            if m.shape() != (k, k) || m.as_slice().iter().any(|&x| !(x > 0.0)) {
                return Err(Error::InvalidArgument(format!("beta must be a positive {k}x{k} matrix")));
            }
        }
        Ok(())
    }
}

/// True latent variables and parameters of one synthetic epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthEpoch {
    pub label: String,
    pub phi: Matrix,
    pub beta: Matrix,
    pub alpha2: Matrix,
    /// D x S.
    pub theta1: Matrix,
    /// (D * S) x K, row `d * S + s`.
    pub theta2: Matrix,
    pub y: Vec<Vec<u32>>,
    pub z: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub alpha1: Vec<f64>,
    pub epochs: Vec<TruthEpoch>,
}

impl GroundTruth {
    /// Count tables of epoch `t` built from the recorded assignments.
    pub fn state(&self, corpus: &Corpus, t: usize) -> Result<EpochState> {
        let e = &self.epochs[t];
        let tokens = corpus.epochs()[t].docs.iter().map(|d| d.tokens.clone()).collect();
        EpochState::from_assignments(
            tokens,
            e.theta1.cols(),
            e.phi.rows(),
            e.phi.cols(),
            e.y.clone(),
            e.z.clone(),
        )
    }
}

/// Draws from `Dirichlet(params)`, normalizing per-coordinate Gamma draws.
///
/// Works in log space so that very small shapes do not underflow to an
/// all-zero vector. Zero shapes give zero coordinates.
pub fn sample_dirichlet<R: Rng + ?Sized>(params: &[f64], rng: &mut R) -> Vec<f64> {
    let mut logs: Vec<f64> = params
        .iter()
        .map(|&a| {
            if !(a > 0.0) {
                return f64::NEG_INFINITY;
            }
            // Gamma(a) = Gamma(a + 1) * U^(1/a)
            let g = Gamma::new(a + 1.0, 1.0).expect("positive shape").sample(rng);
            let u: f64 = 1.0 - rng.random::<f64>();
            ln(g) + ln(u) / a
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        // degenerate parameters: fall back to a point mass on a random coordinate
        let mut out = vec![0.0; params.len()];
        out[rng.random_range(0..params.len())] = 1.0;
        return out;
    }
    let mut total = 0.0;
    for l in &mut logs {
        *l = exp(*l - top);
        total += *l;
    }
    logs.iter_mut().for_each(|x| *x /= total);
    logs
}

/// Samples a corpus and its latent variables epoch by epoch.
///
/// Within each document tokens are stored sorted by word id.
///
/// Epoch 1 draws each topic around the uniform word distribution with
/// concentration `sum_k' beta[k][k']`; later epochs draw topic `k` from
/// `Dirichlet(sum_k' beta[k][k'] * phi_prev[k'])`. Documents then draw a
/// supertopic mixture, one subtopic mixture per supertopic, and for each
/// token a supertopic, a subtopic and a word.
pub fn generate(spec: &GeneratorSpec) -> Result<(Corpus, GroundTruth)> {
    spec.validate()?;
    let (nk, ns, nv) = (spec.num_topics, spec.num_supertopics, spec.vocab_size);
    let mut rng = rng_for(spec.seed, 0);
    let mut prev_phi = Matrix::uniform(nk, nv);
    let mut epochs = Vec::with_capacity(spec.num_epochs);
    let mut truth = Vec::with_capacity(spec.num_epochs);
    let mut doc_id = 1u64;
    let alpha1 = vec![spec.alpha1; ns];
    for t in 0..spec.num_epochs {
        let beta = spec.beta_at(t);
        let alpha2 = spec.alpha2_at(t);
        let mut phi = Matrix::zeros(nk, nv);
        let mut mass = vec![0.0; nv];
        for k in 0..nk {
            mass.iter_mut().for_each(|m| *m = 0.0);
            for (kp, &b) in beta.row(k).iter().enumerate() {
                for (m, &p) in mass.iter_mut().zip(prev_phi.row(kp)) {
                    *m += b * p;
                }
            }
            phi.row_mut(k).copy_from_slice(&sample_dirichlet(&mass, &mut rng));
        }
        let mut docs = Vec::with_capacity(spec.docs_per_epoch);
        let mut theta1 = Matrix::zeros(spec.docs_per_epoch, ns);
        let mut theta2 = Matrix::zeros(spec.docs_per_epoch * ns, nk);
        let (mut ys, mut zs) = (Vec::new(), Vec::new());
        for d in 0..spec.docs_per_epoch {
            theta1.row_mut(d).copy_from_slice(&sample_dirichlet(&alpha1, &mut rng));
            for s in 0..ns {
                theta2
                    .row_mut(d * ns + s)
                    .copy_from_slice(&sample_dirichlet(alpha2.row(s), &mut rng));
            }
            let mut draws: Vec<(u32, u32, u32)> = (0..spec.doc_len)
                .map(|_| {
                    let s = sample_index(theta1.row(d), 1.0, &mut rng);
                    let k = sample_index(theta2.row(d * ns + s), 1.0, &mut rng);
                    let w = sample_index(phi.row(k), 1.0, &mut rng);
                    (w as u32, s as u32, k as u32)
                })
                .collect();
            // Tokens are exchangeable; word order makes the bag-of-words
            // file form reproduce positions exactly.
            draws.sort_by_key(|&(w, _, _)| w);
            let tokens = draws.iter().map(|t| t.0).collect();
            let yd = draws.iter().map(|t| t.1).collect();
            let zd = draws.iter().map(|t| t.2).collect();
            docs.push(Document::new(doc_id, tokens));
            doc_id += 1;
            ys.push(yd);
            zs.push(zd);
        }
        let label = format!("{}", t + 1);
        epochs.push(Epoch { label: label.clone(), docs });
        truth.push(TruthEpoch {
            label,
            phi: phi.clone(),
            beta: beta.clone(),
            alpha2: alpha2.clone(),
            theta1,
            theta2,
            y: ys,
            z: zs,
        });
        prev_phi = phi;
    }
    let corpus = Corpus::new(Vocabulary::synthetic(nv), epochs)?;
    Ok((corpus, GroundTruth { alpha1, epochs: truth }))
}
