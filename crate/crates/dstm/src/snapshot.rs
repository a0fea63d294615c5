//! Corpus snapshots: a JSON document
//! `{"vocabulary": [term, ...], "epochs": [{"label": .., "docs": [{"id": .., "tokens": [..]}]}]}`
//! with 0-based word ids.

use std::fs;
use std::path::Path;

use dstm_core::Corpus;

use crate::{Error, Result};

pub fn to_string(corpus: &Corpus) -> String {
    serde_json::to_string(corpus).expect("corpus serializes")
}

pub fn write_snapshot(corpus: &Corpus, path: &Path) -> Result<()> {
    fs::write(path, to_string(corpus)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<Corpus> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}
