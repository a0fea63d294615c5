//! Fitted-model files.
//!
//! JSON with the configuration echoed, then one object per epoch holding
//! `alpha2`, `beta` (null for static kinds), `phi_hat` and optionally the
//! document estimates. `phi_hat` is either dense rows or, when written with
//! a top-N limit, rows of `[word_id, prob]` pairs; truncated files are for
//! inspection and do not load back. Floats use shortest round-trip decimal
//! form, so a dense file reloads bit-identically.

use std::fs;
use std::path::Path;

use dstm_core::fit::TracePoint;
use dstm_core::structure::top_indices;
use dstm_core::{EpochFit, EpochParams, FittedModel, Matrix, ModelConfig, ModelKind};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const FORMAT: &str = "dstm-model/1";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WriteOptions {
    /// Keep only the N most probable words of each `phi_hat` row.
    pub phi_top_n: Option<usize>,
    /// Include `theta1_hat` / `theta2_hat`.
    pub with_theta: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum PhiRows {
    Dense(Matrix),
    Sparse(Vec<Vec<(u32, f64)>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EpochRecord {
    label: String,
    m_steps: usize,
    trace: Vec<TracePoint>,
    alpha2: Matrix,
    beta: Option<Matrix>,
    phi_hat: PhiRows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta1_hat: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta2_hat: Option<Matrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelRecord {
    format: String,
    kind: ModelKind,
    config: ModelConfig,
    vocab_size: usize,
    phi_top_n: Option<usize>,
    epochs: Vec<EpochRecord>,
}

pub fn to_string(model: &FittedModel, opts: WriteOptions) -> String {
    let epochs = model
        .epochs
        .iter()
        .map(|e| {
            let p = &e.params;
            let phi_hat = match opts.phi_top_n {
                None => PhiRows::Dense(p.phi_hat.clone()),
                Some(n) => PhiRows::Sparse(
                    p.phi_hat
                        .iter_rows()
                        .map(|row| top_indices(row, n).into_iter().map(|v| (v as u32, row[v])).collect())
                        .collect(),
                ),
            };
            EpochRecord {
                label: e.label.clone(),
                m_steps: e.m_steps,
                trace: e.trace.clone(),
                alpha2: p.alpha2.clone(),
                beta: p.beta.clone(),
                phi_hat,
                theta1_hat: opts.with_theta.then(|| p.theta1_hat.clone()),
                theta2_hat: opts.with_theta.then(|| p.theta2_hat.clone()),
            }
        })
        .collect();
    let record = ModelRecord {
        format: FORMAT.to_string(),
        kind: model.kind,
        config: model.config.clone(),
        vocab_size: model.vocab_size,
        phi_top_n: opts.phi_top_n,
        epochs,
    };
    let mut s = serde_json::to_string_pretty(&record).expect("model serializes");
    s.push('\n');
    s
}

pub fn write_model(model: &FittedModel, path: &Path, opts: WriteOptions) -> Result<()> {
    fs::write(path, to_string(model, opts)).map_err(|e| Error::io(path, e))
}

/// Parses a dense model file. Files written without document estimates
/// load with zero-row `theta` matrices.
pub fn from_str(text: &str) -> std::result::Result<FittedModel, String> {
    let record: ModelRecord = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if record.format != FORMAT {
        return Err(format!("unsupported model format {:?}", record.format));
    }
    if record.phi_top_n.is_some() {
        return Err("model was written with truncated phi rows and cannot be loaded".into());
    }
    let (k, s) = (record.config.num_topics, record.config.num_supertopics);
    let epochs = record
        .epochs
        .into_iter()
        .map(|e| {
            let phi_hat = match e.phi_hat {
                PhiRows::Dense(m) => m,
                PhiRows::Sparse(_) => return Err("sparse phi rows in a dense model".to_string()),
            };
            Ok(EpochFit {
                label: e.label,
                params: EpochParams {
                    alpha2: e.alpha2,
                    beta: e.beta,
                    phi_hat,
                    theta1_hat: e.theta1_hat.unwrap_or_else(|| Matrix::zeros(0, s)),
                    theta2_hat: e.theta2_hat.unwrap_or_else(|| Matrix::zeros(0, k)),
                },
                m_steps: e.m_steps,
                trace: e.trace,
                state: None,
            })
        })
        .collect::<std::result::Result<Vec<_>, String>>()?;
    let model = FittedModel {
        kind: record.kind,
        config: record.config,
        vocab_size: record.vocab_size,
        epochs,
    };
    model.validate().map_err(|e| e.to_string())?;
    Ok(model)
}

pub fn read_model(path: &Path) -> Result<FittedModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_str(&text).map_err(|msg| Error::parse(path, 0, msg))
}
