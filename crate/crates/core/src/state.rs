//! Per-epoch assignments and the count tables derived from them.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Document, Error, Result};

/// Supertopic/subtopic assignment of every token of one epoch together with
/// the sufficient statistics of the collapsed sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Assignments", into = "Assignments")]
pub struct EpochState {
    num_supertopics: usize,
    num_topics: usize,
    vocab_size: usize,
    tokens: Vec<Vec<u32>>,
    y: Vec<Vec<u32>>,
    z: Vec<Vec<u32>>,
    /// `n_{d,s}`, D x S.
    n_ds: Vec<u32>,
    /// `n_{d,s,k}`, D x S x K.
    n_dsk: Vec<u32>,
    /// `n_{k,v}`, K x V.
    n_kv: Vec<u32>,
    /// `n_k`.
    n_k: Vec<u32>,
    /// `n_d`, live token count per document (drops by one while a token is
    /// removed for resampling).
    n_d: Vec<u32>,
}

/// Serialized form: dimensions, tokens and assignments. Counts are rebuilt.
#[derive(Serialize, Deserialize)]
struct Assignments {
    num_supertopics: usize,
    num_topics: usize,
    vocab_size: usize,
    tokens: Vec<Vec<u32>>,
    y: Vec<Vec<u32>>,
    z: Vec<Vec<u32>>,
}

impl TryFrom<Assignments> for EpochState {
    type Error = Error;

    fn try_from(a: Assignments) -> Result<Self> {
        EpochState::from_assignments(a.tokens, a.num_supertopics, a.num_topics, a.vocab_size, a.y, a.z)
    }
}

impl From<EpochState> for Assignments {
    fn from(s: EpochState) -> Self {
        Assignments {
            num_supertopics: s.num_supertopics,
            num_topics: s.num_topics,
            vocab_size: s.vocab_size,
            tokens: s.tokens,
            y: s.y,
            z: s.z,
        }
    }
}

/// Independently tallied count tables, used to audit incremental ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTables {
    pub n_ds: Vec<u32>,
    pub n_dsk: Vec<u32>,
    pub n_kv: Vec<u32>,
    pub n_k: Vec<u32>,
    pub n_d: Vec<u32>,
}

impl EpochState {
    /// State with every token drawn uniformly over supertopics and subtopics.
    pub fn random<R: Rng + ?Sized>(
        docs: &[Document],
        num_supertopics: usize,
        num_topics: usize,
        vocab_size: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let tokens: Vec<Vec<u32>> = docs.iter().map(|d| d.tokens.clone()).collect();
        let mut y = Vec::with_capacity(docs.len());
        let mut z = Vec::with_capacity(docs.len());
        for doc in &tokens {
            let mut yd = Vec::with_capacity(doc.len());
            let mut zd = Vec::with_capacity(doc.len());
            for _ in doc {
                yd.push(rng.random_range(0..num_supertopics as u32));
                zd.push(rng.random_range(0..num_topics as u32));
            }
            y.push(yd);
            z.push(zd);
        }
        Self::from_assignments(tokens, num_supertopics, num_topics, vocab_size, y, z)
    }

    pub fn from_assignments(
        tokens: Vec<Vec<u32>>,
        num_supertopics: usize,
        num_topics: usize,
        vocab_size: usize,
        y: Vec<Vec<u32>>,
        z: Vec<Vec<u32>>,
    ) -> Result<Self> {
        if num_supertopics == 0 || num_topics == 0 || vocab_size == 0 {
            return Err(Error::InvalidArgument("state dimensions must be positive".into()));
        }
        if y.len() != tokens.len() || z.len() != tokens.len() {
            return Err(Error::DimensionMismatch {
                what: "assignment documents",
                expected: format!("{}", tokens.len()),
                actual: format!("{} / {}", y.len(), z.len()),
            });
        }
        for (d, doc) in tokens.iter().enumerate() {
            if y[d].len() != doc.len() || z[d].len() != doc.len() {
                return Err(Error::DimensionMismatch {
                    what: "assignments of a document",
                    expected: format!("{}", doc.len()),
                    actual: format!("{} / {}", y[d].len(), z[d].len()),
                });
            }
            let bad_token = doc.iter().any(|&w| w as usize >= vocab_size);
            let bad_y = y[d].iter().any(|&s| s as usize >= num_supertopics);
            let bad_z = z[d].iter().any(|&k| k as usize >= num_topics);
            if bad_token || bad_y || bad_z {
                return Err(Error::InvalidArgument(format!(
                    "document {d} has an id outside its range"
                )));
            }
        }
        let mut state = EpochState {
            num_supertopics,
            num_topics,
            vocab_size,
            tokens,
            y,
            z,
            n_ds: Vec::new(),
            n_dsk: Vec::new(),
            n_kv: Vec::new(),
            n_k: Vec::new(),
            n_d: Vec::new(),
        };
        let tables = state.recount();
        state.n_ds = tables.n_ds;
        state.n_dsk = tables.n_dsk;
        state.n_kv = tables.n_kv;
        state.n_k = tables.n_k;
        state.n_d = tables.n_d;
        Ok(state)
    }

    /// Tallies every count table from scratch out of tokens and assignments.
    pub fn recount(&self) -> CountTables {
        let (s_n, k_n, v_n, d_n) = (self.num_supertopics, self.num_topics, self.vocab_size, self.tokens.len());
        let mut t = CountTables {
            n_ds: vec![0; d_n * s_n],
            n_dsk: vec![0; d_n * s_n * k_n],
            n_kv: vec![0; k_n * v_n],
            n_k: vec![0; k_n],
            n_d: vec![0; d_n],
        };
        for (d, doc) in self.tokens.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let (s, k) = (self.y[d][i] as usize, self.z[d][i] as usize);
                t.n_ds[d * s_n + s] += 1;
                t.n_dsk[(d * s_n + s) * k_n + k] += 1;
                t.n_kv[k * v_n + w as usize] += 1;
                t.n_k[k] += 1;
                t.n_d[d] += 1;
            }
        }
        t
    }

    pub fn counts(&self) -> CountTables {
        CountTables {
            n_ds: self.n_ds.clone(),
            n_dsk: self.n_dsk.clone(),
            n_kv: self.n_kv.clone(),
            n_k: self.n_k.clone(),
            n_d: self.n_d.clone(),
        }
    }

    /// Incremental tables equal a fresh tally.
    pub fn counts_consistent(&self) -> bool {
        self.counts() == self.recount()
    }

    /// Takes token `(d, i)` out of every count table. Its assignment is kept
    /// until [`EpochState::assign`] replaces it.
    #[inline]
    pub fn remove(&mut self, d: usize, i: usize) {
        let (s, k, w) = (self.y[d][i] as usize, self.z[d][i] as usize, self.tokens[d][i] as usize);
        let ds = d * self.num_supertopics + s;
        self.n_ds[ds] -= 1;
        self.n_dsk[ds * self.num_topics + k] -= 1;
        self.n_kv[k * self.vocab_size + w] -= 1;
        self.n_k[k] -= 1;
        self.n_d[d] -= 1;
    }

    /// Assigns token `(d, i)` to `(s, k)` and adds it to the count tables.
    /// The token must currently be removed.
    #[inline]
    pub fn assign(&mut self, d: usize, i: usize, s: usize, k: usize) {
        let w = self.tokens[d][i] as usize;
        self.y[d][i] = s as u32;
        self.z[d][i] = k as u32;
        let ds = d * self.num_supertopics + s;
        self.n_ds[ds] += 1;
        self.n_dsk[ds * self.num_topics + k] += 1;
        self.n_kv[k * self.vocab_size + w] += 1;
        self.n_k[k] += 1;
        self.n_d[d] += 1;
    }

    #[inline]
    pub fn num_supertopics(&self) -> usize {
        self.num_supertopics
    }

    #[inline]
    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    #[inline]
    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    #[inline]
    pub fn num_docs(&self) -> usize {
        self.tokens.len()
    }

    pub fn num_tokens(&self) -> usize {
        self.tokens.iter().map(Vec::len).sum()
    }

    pub fn tokens(&self) -> &[Vec<u32>] {
        &self.tokens
    }

    pub fn supertopics(&self) -> &[Vec<u32>] {
        &self.y
    }

    pub fn subtopics(&self) -> &[Vec<u32>] {
        &self.z
    }

    #[inline]
    pub fn word(&self, d: usize, i: usize) -> u32 {
        self.tokens[d][i]
    }

    #[inline]
    pub fn doc_len(&self, d: usize) -> u32 {
        self.n_d[d]
    }

    #[inline]
    pub fn n_ds(&self, d: usize, s: usize) -> u32 {
        self.n_ds[d * self.num_supertopics + s]
    }

    #[inline]
    pub fn n_dsk(&self, d: usize, s: usize, k: usize) -> u32 {
        self.n_dsk[(d * self.num_supertopics + s) * self.num_topics + k]
    }

    /// `n_{d,s,.}` as a slice of length K.
    #[inline]
    pub fn n_dsk_row(&self, d: usize, s: usize) -> &[u32] {
        let start = (d * self.num_supertopics + s) * self.num_topics;
        &self.n_dsk[start..start + self.num_topics]
    }

    #[inline]
    pub fn n_kv(&self, k: usize, v: usize) -> u32 {
        self.n_kv[k * self.vocab_size + v]
    }

    /// `n_{k,.}` as a slice of length V.
    #[inline]
    pub fn n_kv_row(&self, k: usize) -> &[u32] {
        &self.n_kv[k * self.vocab_size..(k + 1) * self.vocab_size]
    }

    #[inline]
    pub fn n_k(&self, k: usize) -> u32 {
        self.n_k[k]
    }
}
