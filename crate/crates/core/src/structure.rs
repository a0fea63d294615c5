//! Topic-structure graphs: temporal edges between subtopics of consecutive
//! epochs and within-epoch edges from supertopics to their strongest
//! subtopics.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::sqrt;
use crate::{Error, FittedModel, Matrix, Result, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Subtopic,
    Supertopic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub word: String,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub epoch: usize,
    pub epoch_label: String,
    pub kind: NodeKind,
    pub index: usize,
    /// Display name; empty for supertopics.
    pub label: String,
    pub keywords: Vec<Keyword>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StructureGraph {
    pub nodes: Vec<Node>,
    /// Subtopic `(t-1, k')` to subtopic `(t, k)`, weight `beta^t[k][k']`.
    pub dynamic_edges: Vec<Edge>,
    /// Supertopic `(t, s)` to subtopic `(t, k)`, weight `alpha2^t[s][k]`.
    pub static_edges: Vec<Edge>,
}

impl StructureGraph {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractOptions {
    pub beta_threshold: f64,
    pub static_top_m: usize,
    pub top_words: usize,
    /// Optional display names per subtopic index.
    pub labels: BTreeMap<usize, String>,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            beta_threshold: 200.0,
            static_top_m: 3,
            top_words: 8,
            labels: BTreeMap::new(),
        }
    }
}

pub fn subtopic_id(epoch: usize, k: usize) -> String {
    format!("t{epoch}_k{k}")
}

pub fn supertopic_id(epoch: usize, s: usize) -> String {
    format!("t{epoch}_s{s}")
}

/// Indices of the `n` largest entries, descending, ties by lower index.
pub fn top_indices(values: &[f64], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(n);
    idx
}

/// Builds the structure graph of a fitted model.
///
/// Every subtopic of every epoch becomes a node labelled by its most
/// probable words; hierarchical models add one node per supertopic.
pub fn extract_graph(model: &FittedModel, vocab: &Vocabulary, opts: &ExtractOptions) -> Result<StructureGraph> {
    if vocab.len() != model.vocab_size {
        return Err(Error::DimensionMismatch {
            what: "vocabulary",
            expected: format!("{}", model.vocab_size),
            actual: format!("{}", vocab.len()),
        });
    }
    let hierarchical = model.kind.is_hierarchical();
    let mut graph = StructureGraph::default();
    for (t, epoch) in model.epochs.iter().enumerate() {
        let p = &epoch.params;
        for k in 0..p.phi_hat.rows() {
            let keywords: Vec<Keyword> = top_indices(p.phi_hat.row(k), opts.top_words)
                .into_iter()
                .map(|v| Keyword {
                    word: String::from(vocab.term(v as u32).unwrap_or("?")),
                    prob: p.phi_hat[(k, v)],
                })
                .collect();
            let label = opts
                .labels
                .get(&k)
                .cloned()
                .or_else(|| keywords.first().map(|w| w.word.clone()))
                .unwrap_or_default();
            graph.nodes.push(Node {
                id: subtopic_id(t, k),
                epoch: t,
                epoch_label: epoch.label.clone(),
                kind: NodeKind::Subtopic,
                index: k,
                label,
                keywords,
            });
        }
        if hierarchical {
            for s in 0..p.alpha2.rows() {
                graph.nodes.push(Node {
                    id: supertopic_id(t, s),
                    epoch: t,
                    epoch_label: epoch.label.clone(),
                    kind: NodeKind::Supertopic,
                    index: s,
                    label: String::new(),
                    keywords: Vec::new(),
                });
                for k in top_indices(p.alpha2.row(s), opts.static_top_m) {
                    graph.static_edges.push(Edge {
                        from: supertopic_id(t, s),
                        to: subtopic_id(t, k),
                        weight: p.alpha2[(s, k)],
                    });
                }
            }
        }
        if t > 0 {
            if let Some(beta) = &p.beta {
                for k in 0..beta.rows() {
                    for kp in 0..beta.cols() {
                        let w = beta[(k, kp)];
                        if w > opts.beta_threshold {
                            graph.dynamic_edges.push(Edge {
                                from: subtopic_id(t - 1, kp),
                                to: subtopic_id(t, k),
                                weight: w,
                            });
                        }
                    }
                }
            }
        }
    }
    graph.nodes.sort_by_key(|n| (n.epoch, n.kind, n.index));
    let key = |e: &Edge| (e.from.clone(), e.to.clone());
    graph.dynamic_edges.sort_by_key(key);
    graph.static_edges.sort_by_key(key);
    Ok(graph)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    dot / sqrt(na * nb)
}

/// Greedy one-to-one matching of estimated topics to reference topics by
/// cosine similarity of their word distributions. Entry `k` of the result
/// is the reference topic matched to estimated topic `k`.
pub fn align_topics(estimated: &Matrix, reference: &Matrix) -> Vec<usize> {
    let n = estimated.rows().min(reference.rows());
    let mut pairs = Vec::with_capacity(estimated.rows() * reference.rows());
    for i in 0..estimated.rows() {
        for j in 0..reference.rows() {
            pairs.push((cosine(estimated.row(i), reference.row(j)), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut map = alloc::vec![usize::MAX; estimated.rows()];
    let mut used = alloc::vec![false; reference.rows()];
    let mut assigned = 0;
    for (_, i, j) in pairs {
        if assigned == n {
            break;
        }
        if map[i] == usize::MAX && !used[j] {
            map[i] = j;
            used[j] = true;
            assigned += 1;
        }
    }
    map
}
