//! Point estimates of the word and document distributions from counts.

use crate::sampler::{Priors, WordPrior};
use crate::{EpochState, Matrix, Result};

/// `phi_hat[k][v] = (n_{k,v} + prior[k][v]) / (n_k + prior_sum[k])`.
pub fn phi_hat_from_priors(state: &EpochState, priors: &Priors) -> Matrix {
    let (nk, nv) = (priors.num_topics(), state.vocab_size());
    let word = priors.word_prior();
    let sums = priors.word_prior_sum();
    let mut phi = Matrix::zeros(nk, nv);
    for k in 0..nk {
        let denom = state.n_k(k) as f64 + sums[k];
        let counts = state.n_kv_row(k);
        for (v, out) in phi.row_mut(k).iter_mut().enumerate() {
            *out = (counts[v] as f64 + word[(k, v)]) / denom;
        }
    }
    phi
}

/// Word distributions of a dynamic model: counts smoothed by the
/// `beta`-weighted mixture of the previous epoch's distributions.
pub fn compute_phi_hat(state: &EpochState, alpha1: f64, alpha2: &Matrix, beta: &Matrix, prior_phi: &Matrix) -> Result<Matrix> {
    let priors = Priors::new(alpha1, alpha2, WordPrior::Dynamic { beta, prior_phi }, state.vocab_size())?;
    Ok(phi_hat_from_priors(state, &priors))
}

/// Document-supertopic (D x S) and supertopic-subtopic estimates. The
/// second matrix has one row per `(d, s)` pair at index `d * S + s`.
pub fn compute_theta_hats(state: &EpochState, alpha1: f64, alpha2: &Matrix) -> (Matrix, Matrix) {
    let (ns, nk) = alpha2.shape();
    let nd = state.num_docs();
    let a1_sum = alpha1 * ns as f64;
    let mut theta1 = Matrix::zeros(nd, ns);
    let mut theta2 = Matrix::zeros(nd * ns, nk);
    for d in 0..nd {
        let n_d = state.doc_len(d) as f64;
        for s in 0..ns {
            theta1[(d, s)] = (state.n_ds(d, s) as f64 + alpha1) / (n_d + a1_sum);
            let counts = state.n_dsk_row(d, s);
            let a2 = alpha2.row(s);
            let denom: f64 = counts.iter().zip(a2).map(|(&c, &a)| c as f64 + a).sum();
            for (k, out) in theta2.row_mut(d * ns + s).iter_mut().enumerate() {
                *out = (counts[k] as f64 + a2[k]) / denom;
            }
        }
    }
    (theta1, theta2)
}
