//! UCI bag-of-words corpora with an epoch sidecar.
//!
//! * `docword`: three header lines `D`, `V`, `NNZ`, then `NNZ` lines
//!   `docID wordID count` with 1-based ids.
//! * `vocab`: one term per line; line `k` is word id `k - 1`.
//! * epoch map: one `docID label` pair per line. Blank lines and lines
//!   starting with `#` are skipped.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use dstm_core::{Corpus, Document, Epoch, Vocabulary};

use crate::{Error, Result};

/// Summary of a load, including the zero-token documents that were dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadReport {
    pub declared_docs: usize,
    pub dropped_empty_docs: usize,
    pub num_docs: usize,
    pub vocab_size: usize,
    pub num_tokens: usize,
    pub num_epochs: usize,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn numbered_lines(path: &Path) -> Result<impl Iterator<Item = Result<(usize, String)>>> {
    let owned: PathBuf = path.to_path_buf();
    Ok(open(path)?
        .lines()
        .enumerate()
        .map(move |(i, line)| line.map(|l| (i + 1, l)).map_err(|e| Error::io(&owned, e))))
}

pub fn read_vocabulary(path: &Path) -> Result<Vocabulary> {
    let mut terms = Vec::new();
    for item in numbered_lines(path)? {
        let (no, line) = item?;
        let term = line.trim();
        if term.is_empty() {
            // tolerate trailing blank lines only
            terms.push((no, None));
        } else {
            terms.push((no, Some(term.to_string())));
        }
    }
    while matches!(terms.last(), Some((_, None))) {
        terms.pop();
    }
    if let Some((no, _)) = terms.iter().find(|(_, t)| t.is_none()) {
        return Err(Error::parse(path, *no, "blank vocabulary term"));
    }
    let terms: Vec<String> = terms.into_iter().filter_map(|(_, t)| t).collect();
    if terms.is_empty() {
        return Err(Error::parse(path, 1, "vocabulary is empty"));
    }
    Vocabulary::new(terms).map_err(|e| Error::parse(path, 0, e.to_string()))
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, field: Option<&str>, name: &str) -> Result<T> {
    let raw = field.ok_or_else(|| Error::parse(path, line, format!("missing {name}")))?;
    raw.parse()
        .map_err(|_| Error::parse(path, line, format!("{name} {raw:?} is not a non-negative integer")))
}

/// Reads the epoch sidecar into doc id -> label.
pub fn read_epoch_map(path: &Path) -> Result<BTreeMap<u64, String>> {
    let mut map = BTreeMap::new();
    for item in numbered_lines(path)? {
        let (no, line) = item?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let id: u64 = parse_field(path, no, parts.next(), "document id")?;
        let label = parts.collect::<Vec<_>>().join(" ");
        if label.is_empty() {
            return Err(Error::parse(path, no, format!("document {id} has no epoch label")));
        }
        if map.insert(id, label).is_some() {
            return Err(Error::parse(path, no, format!("document {id} is mapped twice")));
        }
    }
    Ok(map)
}

/// Sorts labels numerically when all are integers, otherwise as strings.
pub fn sort_labels(labels: &mut [String]) {
    let numeric: Option<Vec<i64>> = labels.iter().map(|l| l.parse().ok()).collect();
    match numeric {
        Some(_) => labels.sort_by_key(|l| l.parse::<i64>().unwrap_or_default()),
        None => labels.sort(),
    }
}

pub fn load_uci_bow(docword: &Path, vocab: &Path, epoch_map: &Path) -> Result<(Corpus, LoadReport)> {
    let vocabulary = read_vocabulary(vocab)?;
    let epochs_of = read_epoch_map(epoch_map)?;

    let mut lines = numbered_lines(docword)?;
    let mut header = [0usize; 3];
    for (slot, name) in header.iter_mut().zip(["D", "V", "NNZ"]) {
        let (no, line) = lines
            .next()
            .ok_or_else(|| Error::parse(docword, 0, format!("missing header line {name}")))??;
        let mut parts = line.split_whitespace();
        *slot = parse_field(docword, no, parts.next(), &format!("header {name}"))?;
        if parts.next().is_some() {
            return Err(Error::parse(docword, no, format!("header {name} must hold one integer")));
        }
    }
    let [num_docs, vocab_size, nnz] = header;
    if vocab_size == 0 {
        return Err(Error::parse(docword, 2, "header declares an empty vocabulary"));
    }
    if vocab_size != vocabulary.len() {
        return Err(Error::parse(
            docword,
            2,
            format!("header declares V = {vocab_size} but {} has {} terms", vocab.display(), vocabulary.len()),
        ));
    }

    let mut tokens: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    let mut triples = 0usize;
    let mut last_line = 3;
    for item in lines {
        let (no, line) = item?;
        last_line = no;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let doc: u64 = parse_field(docword, no, parts.next(), "docID")?;
        let word: usize = parse_field(docword, no, parts.next(), "wordID")?;
        let count: usize = parse_field(docword, no, parts.next(), "count")?;
        if parts.next().is_some() {
            return Err(Error::parse(docword, no, "expected exactly three fields"));
        }
        if doc == 0 || doc as usize > num_docs {
            return Err(Error::parse(docword, no, format!("docID {doc} outside 1..={num_docs}")));
        }
        if word == 0 || word > vocab_size {
            return Err(Error::parse(docword, no, format!("wordID {word} outside 1..={vocab_size}")));
        }
        let entry = tokens.entry(doc).or_default();
        entry.extend(std::iter::repeat_n((word - 1) as u32, count));
        triples += 1;
    }
    if triples != nnz {
        return Err(Error::parse(
            docword,
            last_line,
            format!("header declares NNZ = {nnz} but the file has {triples} entries"),
        ));
    }

    let mut by_label: BTreeMap<String, Vec<Document>> = BTreeMap::new();
    let mut dropped = 0;
    for doc_id in 1..=num_docs as u64 {
        let toks = tokens.remove(&doc_id).unwrap_or_default();
        if toks.is_empty() {
            dropped += 1;
            continue;
        }
        let label = epochs_of.get(&doc_id).ok_or_else(|| {
            Error::parse(epoch_map, 0, format!("document {doc_id} has no epoch mapping"))
        })?;
        by_label.entry(label.clone()).or_default().push(Document::new(doc_id, toks));
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} documents with zero tokens");
    }
    let mut labels: Vec<String> = by_label.keys().cloned().collect();
    sort_labels(&mut labels);
    let epochs: Vec<Epoch> = labels
        .into_iter()
        .map(|label| {
            let docs = by_label.remove(&label).unwrap_or_default();
            Epoch { label, docs }
        })
        .collect();
    let corpus = Corpus::new(vocabulary, epochs)?;
    let report = LoadReport {
        declared_docs: num_docs,
        dropped_empty_docs: dropped,
        num_docs: corpus.num_docs(),
        vocab_size: corpus.vocab_size(),
        num_tokens: corpus.num_tokens(),
        num_epochs: corpus.epochs().len(),
    };
    Ok((corpus, report))
}

/// Paths of the three files that make up one corpus on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusFiles {
    pub docword: PathBuf,
    pub vocab: PathBuf,
    pub epoch_map: PathBuf,
}

impl CorpusFiles {
    /// `docword.txt`, `vocab.txt` and `epochs.txt` inside `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        CorpusFiles {
            docword: dir.join("docword.txt"),
            vocab: dir.join("vocab.txt"),
            epoch_map: dir.join("epochs.txt"),
        }
    }
}

/// Writes `corpus` in UCI form. Each document lists its words in order of
/// first appearance with their counts, so a document whose equal tokens are
/// contiguous reloads with identical token order.
pub fn write_uci_bow(corpus: &Corpus, files: &CorpusFiles) -> Result<()> {
    for path in [&files.docword, &files.vocab, &files.epoch_map] {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut entries: Vec<(u64, Vec<(u32, usize)>)> = Vec::new();
    for epoch in corpus.epochs() {
        for doc in &epoch.docs {
            let mut counts: Vec<(u32, usize)> = Vec::new();
            for &w in &doc.tokens {
                match counts.iter_mut().find(|(v, _)| *v == w) {
                    Some((_, c)) => *c += 1,
                    None => counts.push((w, 1)),
                }
            }
            entries.push((doc.id, counts));
        }
    }
    entries.sort_by_key(|e| e.0);
    let max_id = entries.last().map_or(0, |e| e.0);
    let nnz: usize = entries.iter().map(|e| e.1.len()).sum();

    write_lines(&files.docword, |w| {
        writeln!(w, "{max_id}")?;
        writeln!(w, "{}", corpus.vocab_size())?;
        writeln!(w, "{nnz}")?;
        for (id, counts) in &entries {
            for (word, count) in counts {
                writeln!(w, "{id} {} {count}", word + 1)?;
            }
        }
        Ok(())
    })?;
    write_lines(&files.vocab, |w| {
        for term in corpus.vocabulary().terms() {
            writeln!(w, "{term}")?;
        }
        Ok(())
    })?;
    write_lines(&files.epoch_map, |w| {
        for epoch in corpus.epochs() {
            for doc in &epoch.docs {
                writeln!(w, "{} {}", doc.id, epoch.label)?;
            }
        }
        Ok(())
    })
}

pub(crate) fn write_lines(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn minimal_file() {
        let dir = tempfile::tempdir().unwrap();
        let dw = write(dir.path(), "dw", "1\n3\n1\n1 1 2\n");
        let vo = write(dir.path(), "vo", "a\nb\nc\n");
        let em = write(dir.path(), "em", "1 2001\n");
        let (c, r) = load_uci_bow(&dw, &vo, &em).unwrap();
        assert_eq!(c.epochs().len(), 1);
        assert_eq!(c.epochs()[0].docs[0].tokens, vec![0, 0]);
        assert_eq!(r.num_tokens, 2);
    }

    #[test]
    fn drops_empty_documents_and_sorts_epochs_numerically() {
        let dir = tempfile::tempdir().unwrap();
        let dw = write(dir.path(), "dw", "4\n2\n3\n1 1 1\n2 2 3\n4 1 1\n");
        let vo = write(dir.path(), "vo", "x\ny\n");
        let em = write(dir.path(), "em", "1 10\n2 9\n3 9\n4 10\n");
        let (c, r) = load_uci_bow(&dw, &vo, &em).unwrap();
        assert_eq!(r.dropped_empty_docs, 1);
        assert_eq!(c.epoch_labels(), vec!["9", "10"]);
        assert_eq!(c.epochs()[1].docs.iter().map(|d| d.id).collect::<Vec<_>>(), vec![1, 4]);
    }

    #[test]
    fn errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let vo = write(dir.path(), "vo", "x\ny\n");
        let em = write(dir.path(), "em", "1 a\n");
        let cases = [
            ("1\n2\n1\n1 3 1\n", "dw:4"),
            ("1\n2\n1\n2 1 1\n", "dw:4"),
            ("1\nz\n1\n1 1 1\n", "dw:2"),
            ("1\n2\n2\n1 1 1\n", "NNZ"),
            ("1\n2\n1\n1 1\n", "missing count"),
        ];
        for (body, needle) in cases {
            let dw = write(dir.path(), "dw", body);
            let err = load_uci_bow(&dw, &vo, &em).unwrap_err().to_string();
            assert!(err.contains(needle), "{err}");
        }
        let dw = write(dir.path(), "dw", "2\n2\n2\n1 1 1\n2 1 1\n");
        let err = load_uci_bow(&dw, &vo, &em).unwrap_err().to_string();
        assert!(err.contains("document 2 has no epoch mapping"), "{err}");
        let empty = write(dir.path(), "empty", "\n");
        assert!(load_uci_bow(&dw, &empty, &em).is_err());
    }

    #[test]
    fn duplicate_epoch_entry_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let em = write(dir.path(), "em", "1 a\n# comment\n\n1 b\n");
        let err = read_epoch_map(&em).unwrap_err().to_string();
        assert!(err.contains("em:4"), "{err}");
    }

    #[test]
    fn label_sorting() {
        let mut v = vec!["10".to_string(), "9".into(), "100".into()];
        sort_labels(&mut v);
        assert_eq!(v, vec!["9", "10", "100"]);
        let mut v = vec!["b".to_string(), "a".into(), "10".into()];
        sort_labels(&mut v);
        assert_eq!(v, vec!["10", "a", "b"]);
    }
}
