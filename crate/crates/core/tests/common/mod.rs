//! Reference computations that work from raw assignment lists and never
//! touch the library's count tables or special functions.

#![allow(dead_code, clippy::needless_range_loop)]

use dstm_core::mstep::{update_alpha2, update_beta};
use dstm_core::sampler::{conditional_distribution, Priors, WordPrior};
use dstm_core::synth::{generate, GeneratorSpec};
use dstm_core::{rng_for, Document, EpochState, Matrix, ModelConfig, ModelRng};
use rand::Rng;

/// Hyperparameters of a small hand-built problem.
pub struct Problem {
    pub tokens: Vec<Vec<u32>>,
    pub s: usize,
    pub k: usize,
    pub v: usize,
    pub alpha1: f64,
    pub alpha2: Matrix,
    pub beta: Matrix,
    pub prior_phi: Matrix,
}

/// `m[k][v] = sum_k' beta[k][k'] * prior_phi[k'][v]`, spelled out.
pub fn word_prior(beta: &Matrix, prior_phi: &Matrix) -> Vec<Vec<f64>> {
    let (k_n, v_n) = (beta.rows(), prior_phi.cols());
    let mut m = vec![vec![0.0; v_n]; k_n];
    for k in 0..k_n {
        for v in 0..v_n {
            for kp in 0..k_n {
                m[k][v] += beta[(k, kp)] * prior_phi[(kp, v)];
            }
        }
    }
    m
}

/// Unnormalized three-factor conditional of token `(d, i)` with every
/// count taken by scanning the assignment lists, skipping `(d, i)`.
/// Supertopic-major, length `S * K`.
pub fn direct_conditional(
    p: &Problem,
    word: &[Vec<f64>],
    y: &[Vec<u32>],
    z: &[Vec<u32>],
    d: usize,
    i: usize,
) -> Vec<f64> {
    let w = p.tokens[d][i] as usize;
    let others = |dd: usize, ii: usize| !(dd == d && ii == i);
    let mut out = vec![0.0; p.s * p.k];
    for s in 0..p.s {
        for k in 0..p.k {
            let mut n_d = 0.0;
            let mut n_ds = 0.0;
            let mut n_dsk = 0.0;
            for ii in 0..p.tokens[d].len() {
                if !others(d, ii) {
                    continue;
                }
                n_d += 1.0;
                if y[d][ii] as usize == s {
                    n_ds += 1.0;
                    if z[d][ii] as usize == k {
                        n_dsk += 1.0;
                    }
                }
            }
            let mut n_k = 0.0;
            let mut n_kv = 0.0;
            for dd in 0..p.tokens.len() {
                for ii in 0..p.tokens[dd].len() {
                    if others(dd, ii) && z[dd][ii] as usize == k {
                        n_k += 1.0;
                        if p.tokens[dd][ii] as usize == w {
                            n_kv += 1.0;
                        }
                    }
                }
            }
            let a2_sum: f64 = (0..p.k).map(|kk| p.alpha2[(s, kk)]).sum();
            let wsum: f64 = word[k].iter().sum();
            let f1 = (n_ds + p.alpha1) / (n_d + p.s as f64 * p.alpha1);
            let f2 = (n_dsk + p.alpha2[(s, k)]) / (n_ds + a2_sum);
            let f3 = (n_kv + word[k][w]) / (n_k + wsum);
            out[s * p.k + k] = f1 * f2 * f3;
        }
    }
    out
}

/// Collapsed joint `p(w, y, z)` as a product of predictive probabilities,
/// adding tokens one at a time (Polya urn form).
fn urn_joint(p: &Problem, word: &[Vec<f64>], cells: &[usize]) -> f64 {
    let mut n_ds = vec![vec![0.0; p.s]; p.tokens.len()];
    let mut n_dsk = vec![vec![vec![0.0; p.k]; p.s]; p.tokens.len()];
    let mut n_kv = vec![vec![0.0; p.v]; p.k];
    let mut n_k = vec![0.0; p.k];
    let a2_sum: Vec<f64> = (0..p.s).map(|s| (0..p.k).map(|k| p.alpha2[(s, k)]).sum()).collect();
    let wsum: Vec<f64> = word.iter().map(|r| r.iter().sum()).collect();
    let mut prob = 1.0;
    let mut pos = 0;
    for (d, doc) in p.tokens.iter().enumerate() {
        for (i, &w) in doc.iter().enumerate() {
            let (s, k, w) = (cells[pos] / p.k, cells[pos] % p.k, w as usize);
            prob *= (n_ds[d][s] + p.alpha1) / (i as f64 + p.s as f64 * p.alpha1);
            prob *= (n_dsk[d][s][k] + p.alpha2[(s, k)]) / (n_ds[d][s] + a2_sum[s]);
            prob *= (n_kv[k][w] + word[k][w]) / (n_k[k] + wsum[k]);
            n_ds[d][s] += 1.0;
            n_dsk[d][s][k] += 1.0;
            n_kv[k][w] += 1.0;
            n_k[k] += 1.0;
            pos += 1;
        }
    }
    prob
}

/// Exact posterior marginal of every token over the `S * K` cells, by
/// enumerating all `(S K)^N` joint assignments.
pub fn enumerate_marginals(p: &Problem) -> Vec<Vec<f64>> {
    let word = word_prior(&p.beta, &p.prior_phi);
    let n: usize = p.tokens.iter().map(Vec::len).sum();
    let c = p.s * p.k;
    let mut marg = vec![vec![0.0; c]; n];
    let mut cells = vec![0usize; n];
    let mut total = 0.0;
    loop {
        let pr = urn_joint(p, &word, &cells);
        total += pr;
        for (t, &cell) in cells.iter().enumerate() {
            marg[t][cell] += pr;
        }
        // odometer increment
        let mut idx = 0;
        while idx < n {
            cells[idx] += 1;
            if cells[idx] < c {
                break;
            }
            cells[idx] = 0;
            idx += 1;
        }
        if idx == n {
            break;
        }
    }
    for row in &mut marg {
        for x in row.iter_mut() {
            *x /= total;
        }
    }
    marg
}

/// The fixed sampler-check problem: two documents of four tokens, V = 3,
/// S = 2, K = 2, with asymmetric priors throughout.
pub fn tiny_problem() -> Problem {
    Problem {
        tokens: vec![vec![0, 1, 2, 0], vec![2, 2, 1, 0]],
        s: 2,
        k: 2,
        v: 3,
        alpha1: 0.5,
        alpha2: Matrix::from_rows(&[vec![1.0, 0.3], vec![0.4, 2.0]]).unwrap(),
        beta: Matrix::from_rows(&[vec![2.0, 0.5], vec![0.3, 1.5]]).unwrap(),
        prior_phi: Matrix::from_rows(&[vec![0.5, 0.3, 0.2], vec![0.1, 0.3, 0.6]]).unwrap(),
    }
}

/// Configuration that runs the fixed-point iteration to convergence.
pub fn converging_config() -> ModelConfig {
    let mut cfg = ModelConfig::dstm(2, 1);
    cfg.fp_max_iters = 5000;
    cfg.fp_rel_tol = 1e-10;
    cfg
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Subtopic-prior estimate from true assignments of generated data with
/// S = 1, K = 2 and `alpha2 = truth`, starting from all ones.
pub fn alpha2_recovery(truth: [f64; 2], docs: usize, doc_len: usize, seed: u64) -> [f64; 2] {
    let spec = GeneratorSpec {
        num_epochs: 1,
        num_topics: 2,
        num_supertopics: 1,
        vocab_size: 2,
        docs_per_epoch: docs,
        doc_len,
        alpha1: 1.0,
        alpha2: vec![Matrix::from_rows(&[truth.to_vec()]).unwrap()],
        beta: vec![Matrix::diagonal(2, 1.0, 1.0)],
        seed,
    };
    let (corpus, gt) = generate(&spec).unwrap();
    let state = gt.state(&corpus, 0).unwrap();
    let fp = update_alpha2(&state, &Matrix::filled(1, 2, 1.0), &converging_config());
    [fp.value[(0, 0)], fp.value[(0, 1)]]
}

/// Beta estimate on the second epoch of generated data with
/// `beta^2 = [[diag, off], [off, diag]]`, V = 50, using the true first-epoch
/// topics as the prior. Returns `(diagonal entries, off-diagonal entries)`.
pub fn beta_recovery(diag: f64, off: f64, seed: u64) -> ([f64; 2], [f64; 2]) {
    let spec = GeneratorSpec {
        num_epochs: 2,
        num_topics: 2,
        num_supertopics: 1,
        vocab_size: 50,
        docs_per_epoch: 100,
        doc_len: 100,
        alpha1: 1.0,
        alpha2: vec![Matrix::filled(1, 2, 10.0)],
        beta: vec![Matrix::diagonal(2, 5.0, 0.01), Matrix::diagonal(2, diag, off)],
        seed,
    };
    let (corpus, gt) = generate(&spec).unwrap();
    let state = gt.state(&corpus, 1).unwrap();
    let fp = update_beta(&state, &Matrix::diagonal(2, 100.0, 0.1), &gt.epochs[0].phi, &converging_config());
    (
        [fp.value[(0, 0)], fp.value[(1, 1)]],
        [fp.value[(0, 1)], fp.value[(1, 0)]],
    )
}

pub fn random_problem(seed: u64) -> (Problem, Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let mut rng = rng_for(seed, 99);
    let s = rng.random_range(1..=3);
    let k = rng.random_range(1..=4);
    let v = rng.random_range(1..=6);
    let docs = rng.random_range(1..=4);
    let tokens: Vec<Vec<u32>> = (0..docs)
        .map(|_| (0..rng.random_range(1..=7)).map(|_| rng.random_range(0..v as u32)).collect())
        .collect();
    let y = tokens.iter().map(|d| d.iter().map(|_| rng.random_range(0..s as u32)).collect()).collect();
    let z = tokens.iter().map(|d| d.iter().map(|_| rng.random_range(0..k as u32)).collect()).collect();
    let pos = |rng: &mut ModelRng| rng.random_range(0.05..5.0);
    let alpha2 = Matrix::from_vec(s, k, (0..s * k).map(|_| pos(&mut rng)).collect()).unwrap();
    let beta = Matrix::from_vec(k, k, (0..k * k).map(|_| pos(&mut rng) * 20.0).collect()).unwrap();
    let mut phi = Matrix::from_vec(k, v, (0..k * v).map(|_| pos(&mut rng)).collect()).unwrap();
    for r in 0..k {
        let sum: f64 = phi.row(r).iter().sum();
        phi.row_mut(r).iter_mut().for_each(|x| *x /= sum);
    }
    let p = Problem {
        tokens,
        s,
        k,
        v,
        alpha1: pos(&mut rng),
        alpha2,
        beta,
        prior_phi: phi,
    };
    (p, y, z)
}

/// Compares the library conditional of one random token with the direct
/// product; returns `(|sum - 1|, max relative error)`.
pub fn check_conditional(seed: u64) -> (f64, f64) {
    let (p, y, z) = random_problem(seed);
    let priors = Priors::new(
        p.alpha1,
        &p.alpha2,
        WordPrior::Dynamic { beta: &p.beta, prior_phi: &p.prior_phi },
        p.v,
    )
    .unwrap();
    let word = word_prior(&p.beta, &p.prior_phi);
    let mut rng = rng_for(seed, 7);
    let d = rng.random_range(0..p.tokens.len());
    let i = rng.random_range(0..p.tokens[d].len());
    let mut state = EpochState::from_assignments(p.tokens.clone(), p.s, p.k, p.v, y.clone(), z.clone()).unwrap();
    state.remove(d, i);

    let mut raw = vec![0.0; p.s * p.k];
    let total = priors.conditional_into(&state, d, i, &mut raw);
    let oracle = direct_conditional(&p, &word, &y, &z, d, i);
    let mut rel = raw.iter().zip(&oracle).map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max);
    rel = rel.max((total - oracle.iter().sum::<f64>()).abs() / total);
    let dist = conditional_distribution(&state, &priors, d, i);
    let sum: f64 = dist.iter().sum();
    ((sum - 1.0).abs(), rel)
}

pub fn random_state(rng: &mut ModelRng, s: usize, k: usize, v: usize) -> EpochState {
    let docs: Vec<Document> = (0..rng.random_range(1..8))
        .map(|d| Document::new(d, (0..rng.random_range(0..30)).map(|_| rng.random_range(0..v as u32)).collect()))
        .collect();
    EpochState::random(&docs, s, k, v, rng).unwrap()
}

pub fn random_matrix(rng: &mut ModelRng, r: usize, c: usize, lo: f64, hi: f64) -> Matrix {
    Matrix::from_vec(r, c, (0..r * c).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

pub fn random_simplex_rows(rng: &mut ModelRng, r: usize, c: usize) -> Matrix {
    let mut m = random_matrix(rng, r, c, 0.01, 1.0);
    for i in 0..r {
        let sum: f64 = m.row(i).iter().sum();
        m.row_mut(i).iter_mut().for_each(|x| *x /= sum);
    }
    m
}
