//! Time-sliced bag-of-words corpora and within-document token splits.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{rng_for, Error, Result};

/// Ordered list of distinct terms; word id `v` names `terms[v]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl Vocabulary {
    pub fn new(terms: Vec<String>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidCorpus("vocabulary is empty".into()));
        }
        let mut index = BTreeMap::new();
        for (i, term) in terms.iter().enumerate() {
            if index.insert(term.clone(), i as u32).is_some() {
                return Err(Error::InvalidCorpus(format!(
                    "duplicate vocabulary term {term:?} at word id {i}"
                )));
            }
        }
        Ok(Vocabulary { terms, index })
    }

    /// Vocabulary `w0000, w0001, ...` for synthetic data.
    pub fn synthetic(size: usize) -> Self {
        let width = format!("{}", size.saturating_sub(1)).len().max(4);
        let terms = (0..size).map(|v| format!("w{v:0width$}")).collect();
        Vocabulary::new(terms).expect("synthetic terms are distinct")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, id: u32) -> Option<&str> {
        self.terms.get(id as usize).map(String::as_str)
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = Error;

    fn try_from(terms: Vec<String>) -> Result<Self> {
        Vocabulary::new(terms)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.terms
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: u64,
    pub tokens: Vec<u32>,
}

impl Document {
    pub fn new(id: u64, tokens: Vec<u32>) -> Self {
        Document { id, tokens }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Epoch {
    pub label: String,
    pub docs: Vec<Document>,
}

impl Epoch {
    pub fn token_count(&self) -> usize {
        self.docs.iter().map(Document::len).sum()
    }
}

/// Documents grouped into ordered epochs over one shared vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCorpus")]
pub struct Corpus {
    vocabulary: Vocabulary,
    epochs: Vec<Epoch>,
}

#[derive(Deserialize)]
struct RawCorpus {
    vocabulary: Vocabulary,
    epochs: Vec<Epoch>,
}

impl TryFrom<RawCorpus> for Corpus {
    type Error = Error;

    fn try_from(raw: RawCorpus) -> Result<Self> {
        Corpus::new(raw.vocabulary, raw.epochs)
    }
}

impl Corpus {
    /// Validates that there is at least one epoch, that no epoch is empty,
    /// and that every token id is inside the vocabulary. Documents may hold
    /// zero tokens (held-out views do); loaders drop such documents.
    pub fn new(vocabulary: Vocabulary, epochs: Vec<Epoch>) -> Result<Self> {
        if epochs.is_empty() {
            return Err(Error::InvalidCorpus("corpus has no epochs".into()));
        }
        let v = vocabulary.len() as u32;
        for epoch in &epochs {
            if epoch.docs.is_empty() {
                return Err(Error::InvalidCorpus(format!(
                    "epoch {:?} has no documents",
                    epoch.label
                )));
            }
            for doc in &epoch.docs {
                if let Some(&bad) = doc.tokens.iter().find(|&&w| w >= v) {
                    return Err(Error::InvalidCorpus(format!(
                        "document {} has word id {bad} outside vocabulary of size {v}",
                        doc.id
                    )));
                }
            }
        }
        Ok(Corpus { vocabulary, epochs })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn epochs(&self) -> &[Epoch] {
        &self.epochs
    }

    pub fn epoch_labels(&self) -> Vec<String> {
        self.epochs.iter().map(|e| e.label.clone()).collect()
    }

    pub fn num_docs(&self) -> usize {
        self.epochs.iter().map(|e| e.docs.len()).sum()
    }

    pub fn num_tokens(&self) -> usize {
        self.epochs.iter().map(Epoch::token_count).sum()
    }
}

/// Within-document random token holdout.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCorpus {
    pub train: Corpus,
    /// Same documents as `train`; some may hold zero tokens.
    pub test: Corpus,
    /// Sorted original positions kept on the train side, per epoch and document.
    pub train_positions: Vec<Vec<Vec<u32>>>,
    pub seed: u64,
    pub ratio: f64,
}

/// Number of training tokens for a document of `n` tokens. Always at least
/// one so that every training document stays non-empty.
pub fn train_size(n: usize, ratio: f64) -> usize {
    let rounded = libm::round(ratio * n as f64) as usize;
    rounded.clamp(1, n.max(1))
}

/// Samples `round(ratio * n_d)` token positions per document uniformly
/// without replacement into the training side; the rest become test tokens.
/// Both sides keep the original token order.
pub fn split_tokens(corpus: &Corpus, ratio: f64, seed: u64) -> Result<SplitCorpus> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let mut rng = rng_for(seed, 0);
    let mut train_epochs = Vec::with_capacity(corpus.epochs.len());
    let mut test_epochs = Vec::with_capacity(corpus.epochs.len());
    let mut positions = Vec::with_capacity(corpus.epochs.len());
    for epoch in &corpus.epochs {
        let mut train_docs = Vec::with_capacity(epoch.docs.len());
        let mut test_docs = Vec::with_capacity(epoch.docs.len());
        let mut epoch_positions = Vec::with_capacity(epoch.docs.len());
        for doc in &epoch.docs {
            let n = doc.len();
            if n == 0 {
                return Err(Error::InvalidCorpus(format!(
                    "document {} has no tokens to split",
                    doc.id
                )));
            }
            let m = train_size(n, ratio);
            let mut perm: Vec<u32> = (0..n as u32).collect();
            for i in 0..m {
                let j = rng.random_range(i..n);
                perm.swap(i, j);
            }
            let mut in_train = alloc::vec![false; n];
            for &p in &perm[..m] {
                in_train[p as usize] = true;
            }
            let mut kept = Vec::with_capacity(m);
            let mut train = Vec::with_capacity(m);
            let mut test = Vec::with_capacity(n - m);
            for (pos, &w) in doc.tokens.iter().enumerate() {
                if in_train[pos] {
                    kept.push(pos as u32);
                    train.push(w);
                } else {
                    test.push(w);
                }
            }
            train_docs.push(Document::new(doc.id, train));
            test_docs.push(Document::new(doc.id, test));
            epoch_positions.push(kept);
        }
        train_epochs.push(Epoch {
            label: epoch.label.clone(),
            docs: train_docs,
        });
        test_epochs.push(Epoch {
            label: epoch.label.clone(),
            docs: test_docs,
        });
        positions.push(epoch_positions);
    }
    Ok(SplitCorpus {
        train: Corpus::new(corpus.vocabulary.clone(), train_epochs)?,
        test: Corpus::new(corpus.vocabulary.clone(), test_epochs)?,
        train_positions: positions,
        seed,
        ratio,
    })
}
