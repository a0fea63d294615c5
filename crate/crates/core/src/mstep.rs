//! Fixed-point M-step for the subtopic priors and the dynamic weights.
//!
//! Both updates are Minka's multiplicative digamma iteration for
//! Dirichlet-multinomial evidence. One pass rescales a whole parameter row
//! from its old values; each pass never lowers the evidence of that row.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{digamma, dirichlet_multinomial_ln_evidence, ln_gamma};
use crate::sampler::Priors;
use crate::{EpochState, Matrix, ModelConfig};

/// Outcome of an iterated update.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub value: Matrix,
    pub passes: usize,
    pub converged: bool,
    /// Rows left untouched because they carried no evidence.
    pub skipped_rows: Vec<usize>,
}

/// One pass over every row of the subtopic priors `alpha2` (S x K).
///
/// Rows whose denominator is not positive (no document uses supertopic
/// `s`) are returned unchanged and listed in the second element.
pub fn alpha2_pass(state: &EpochState, alpha2: &Matrix, floor: f64) -> (Matrix, Vec<usize>) {
    let (ns, nk) = alpha2.shape();
    let mut next = alpha2.clone();
    let mut skipped = Vec::new();
    let mut numer = vec![0.0; nk];
    for s in 0..ns {
        let row = alpha2.row(s);
        let row_sum: f64 = row.iter().sum();
        let psi_row_sum = digamma(row_sum);
        let psi_row: Vec<f64> = row.iter().map(|&a| digamma(a)).collect();
        numer.iter_mut().for_each(|x| *x = 0.0);
        let mut denom = 0.0;
        for d in 0..state.num_docs() {
            let n_ds = state.n_ds(d, s);
            if n_ds == 0 {
                continue;
            }
            denom += digamma(n_ds as f64 + row_sum) - psi_row_sum;
            for (k, &c) in state.n_dsk_row(d, s).iter().enumerate() {
                if c > 0 {
                    numer[k] += digamma(c as f64 + row[k]) - psi_row[k];
                }
            }
        }
        if !(denom > 0.0) {
            skipped.push(s);
            continue;
        }
        for (k, out) in next.row_mut(s).iter_mut().enumerate() {
            *out = (row[k] * numer[k] / denom).max(floor);
        }
    }
    (next, skipped)
}

/// One pass over every row of the dynamic weights `beta` (K x K) given the
/// previous epoch's word distributions `prior_phi` (K x V).
///
/// Rows of topics holding no tokens are returned unchanged.
pub fn beta_pass(state: &EpochState, beta: &Matrix, prior_phi: &Matrix, floor: f64) -> (Matrix, Vec<usize>) {
    let nk = beta.rows();
    let mut next = beta.clone();
    let mut skipped = Vec::new();
    let mut numer = vec![0.0; nk];
    for k in 0..nk {
        let row = beta.row(k);
        let row_sum: f64 = row.iter().sum();
        let n_k = state.n_k(k) as f64;
        let denom = digamma(n_k + row_sum) - digamma(row_sum);
        if !(denom > 0.0) {
            skipped.push(k);
            continue;
        }
        numer.iter_mut().for_each(|x| *x = 0.0);
        // The B term vanishes for words topic k never emits.
        for (v, &c) in state.n_kv_row(k).iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mass: f64 = row.iter().enumerate().map(|(kp, &b)| b * prior_phi[(kp, v)]).sum();
            let b_term = digamma(c as f64 + mass) - digamma(mass);
            for (kp, acc) in numer.iter_mut().enumerate() {
                *acc += prior_phi[(kp, v)] * b_term;
            }
        }
        for (kp, out) in next.row_mut(k).iter_mut().enumerate() {
            *out = (row[kp] * numer[kp] / denom).max(floor);
        }
    }
    (next, skipped)
}

fn iterate(
    start: &Matrix,
    config: &ModelConfig,
    mut pass: impl FnMut(&Matrix) -> (Matrix, Vec<usize>),
) -> FixedPoint {
    let mut current = start.clone();
    let mut skipped = Vec::new();
    for n in 1..=config.fp_max_iters {
        let (next, skip) = pass(&current);
        let change = current
            .as_slice()
            .iter()
            .zip(next.as_slice())
            .map(|(&old, &new)| libm::fabs(new - old) / old)
            .fold(0.0, f64::max);
        current = next;
        skipped = skip;
        if change < config.fp_rel_tol {
            return FixedPoint {
                value: current,
                passes: n,
                converged: true,
                skipped_rows: skipped,
            };
        }
    }
    FixedPoint {
        value: current,
        passes: config.fp_max_iters,
        converged: false,
        skipped_rows: skipped,
    }
}

/// Iterates [`alpha2_pass`] until the largest relative change drops below
/// `fp_rel_tol` or `fp_max_iters` passes ran.
pub fn update_alpha2(state: &EpochState, alpha2: &Matrix, config: &ModelConfig) -> FixedPoint {
    iterate(alpha2, config, |a| alpha2_pass(state, a, config.param_floor))
}

/// Iterates [`beta_pass`] with the same stopping rule as [`update_alpha2`].
pub fn update_beta(state: &EpochState, beta: &Matrix, prior_phi: &Matrix, config: &ModelConfig) -> FixedPoint {
    iterate(beta, config, |b| beta_pass(state, b, prior_phi, config.param_floor))
}

/// `sum_{d,s} ln B(n_{d,s,.} + alpha2_s) - ln B(alpha2_s)`.
pub fn alpha2_ln_evidence(state: &EpochState, alpha2: &Matrix) -> f64 {
    let mut acc = 0.0;
    for d in 0..state.num_docs() {
        for s in 0..alpha2.rows() {
            acc += dirichlet_multinomial_ln_evidence(state.n_dsk_row(d, s), alpha2.row(s));
        }
    }
    acc
}

/// `sum_k ln B(n_{k,.} + a_k) - ln B(a_k)` with `a_k = sum_k' beta[k][k'] prior_phi[k']`.
pub fn beta_ln_evidence(state: &EpochState, beta: &Matrix, prior_phi: &Matrix) -> f64 {
    let mut acc = 0.0;
    let mut mass = vec![0.0; prior_phi.cols()];
    for k in 0..beta.rows() {
        mass.iter_mut().for_each(|m| *m = 0.0);
        for (kp, &b) in beta.row(k).iter().enumerate() {
            for (m, &p) in mass.iter_mut().zip(prior_phi.row(kp)) {
                *m += b * p;
            }
        }
        acc += dirichlet_multinomial_ln_evidence(state.n_kv_row(k), &mass);
    }
    acc
}

/// Collapsed log joint `ln p(w, y, z)` of the whole epoch under `priors`.
pub fn joint_ln_evidence(state: &EpochState, priors: &Priors) -> f64 {
    let ns = priors.num_supertopics();
    let a1 = priors.alpha1();
    let a1_sum = a1 * ns as f64;
    let mut acc = 0.0;
    for d in 0..state.num_docs() {
        // Row n_{d,.} under the symmetric supertopic prior
        acc += ln_gamma(a1_sum) - ln_gamma(state.doc_len(d) as f64 + a1_sum);
        for s in 0..ns {
            let c = state.n_ds(d, s);
            if c > 0 {
                acc += ln_gamma(c as f64 + a1) - ln_gamma(a1);
            }
            acc += dirichlet_multinomial_ln_evidence(state.n_dsk_row(d, s), priors.alpha2().row(s));
        }
    }
    let word = priors.word_prior();
    for k in 0..priors.num_topics() {
        acc += dirichlet_multinomial_ln_evidence(state.n_kv_row(k), word.row(k));
    }
    acc
}
