//! Documents, vocabulary, frozen embeddings, and level-input composition.
//!
//! The one piece of modeling machinery here is [`compose_level_input`]: at
//! level 1 a document is classified from its own tokens, and at every
//! deeper level the parent category's label text is prepended to the tokens
//! before embedding, so the child-level classifier is conditioned on which
//! branch it refines.

pub mod synth;

pub use synth::{generate_synthetic_corpus, SynthConfig, SynthCorpus};

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::{LabelPath, NodeId, Taxonomy, TaxonomyError};

/// Reserved padding token, always index 0; its embedding row is all-zero.
pub const PAD_TOKEN: &str = "<pad>";
/// Reserved unknown token, always index 1; its embedding row is all-zero.
pub const UNK_TOKEN: &str = "<unk>";
pub const PAD_INDEX: usize = 0;
pub const UNK_INDEX: usize = 1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("document {0} has no tokens after tokenization")]
    EmptyDocument(String),
    #[error("document {doc}: {source}")]
    BadPath {
        doc: String,
        source: TaxonomyError,
    },
    #[error("document {0}: path is not edge-consistent with the taxonomy")]
    InconsistentPath(String),
    #[error("embedding file line {line}: expected {expected} values, got {got}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("embedding file line {line}: unparseable number")]
    BadNumber { line: usize },
    #[error("embedding file line {line}: non-finite value")]
    NonFiniteEmbedding { line: usize },
    #[error("corpus file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("class {0} is not in the level's class-index map")]
    UnknownClass(NodeId),
    #[error("level 1 takes no parent label, got {0:?}")]
    UnexpectedParentLabel(String),
    #[error("level {0} requires a parent label")]
    MissingParentLabel(usize),
    #[error("max_len must be at least 1")]
    ZeroMaxLen,
    #[error("mismatched batch slices: {0}")]
    RaggedBatch(String),
    #[error("invalid synthetic corpus config: {0}")]
    InvalidSynthConfig(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Lowercase, split on Unicode whitespace, strip leading and trailing ASCII
/// punctuation from each token, and drop anything left empty. Internal
/// punctuation (hyphens, apostrophes) survives.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .map(|raw| raw.trim_matches(|c: char| c.is_ascii_punctuation()))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// One labeled document: raw text, its token sequence, and the ground-truth
/// label path (one node per level, edge-consistent).
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub path: LabelPath,
}

impl Document {
    /// Tokenizes `text`; fails if nothing survives tokenization.
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        path: LabelPath,
    ) -> Result<Document, CorpusError> {
        let id = id.into();
        let text = text.into();
        let tokens = tokenize(&text);
        if tokens.is_empty() {
            return Err(CorpusError::EmptyDocument(id));
        }
        Ok(Document {
            id,
            text,
            tokens,
            path,
        })
    }

    /// True node id at a classification level (1-based).
    pub fn label_at(&self, level: usize) -> &NodeId {
        self.path.at_level(level)
    }
}

/// Record format of the corpus file: one JSON object per line. The `path`
/// array lists node ids from level 1 to level L. Prediction inputs may omit
/// `path`.
#[derive(Debug, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<NodeId>>,
}

/// Read labeled documents, checking each path for length, per-level
/// membership, and edge consistency against `tax`.
pub fn read_corpus<R: BufRead>(reader: R, tax: &Taxonomy) -> Result<Vec<Document>, CorpusError> {
    let mut docs = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
                line: index + 1,
                message: e.to_string(),
            })?;
        let path_nodes = record.path.ok_or_else(|| CorpusError::Parse {
            line: index + 1,
            message: format!("document {} has no path", record.id),
        })?;
        let path = LabelPath(path_nodes);
        let consistent = tax.validate_path(&path).map_err(|source| CorpusError::BadPath {
            doc: record.id.clone(),
            source,
        })?;
        if !consistent {
            return Err(CorpusError::InconsistentPath(record.id));
        }
        docs.push(Document::new(record.id, record.text, path)?);
    }
    if docs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok(docs)
}

pub fn load_corpus(path: &Path, tax: &Taxonomy) -> Result<Vec<Document>, CorpusError> {
    let file = std::fs::File::open(path)?;
    read_corpus(std::io::BufReader::new(file), tax)
}

pub fn write_corpus<W: Write>(docs: &[Document], mut out: W) -> Result<(), CorpusError> {
    for doc in docs {
        let record = CorpusRecord {
            id: doc.id.clone(),
            text: doc.text.clone(),
            path: Some(doc.path.0.clone()),
        };
        serde_json::to_writer(&mut out, &record)
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Token-to-index map with reserved `<pad>` = 0 and `<unk>` = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    fn from_tokens(tokens: Vec<String>) -> Vocabulary {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Index of `token`, or the UNK index for unseen tokens.
    pub fn index_of(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK_INDEX)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// One token per line; the line number is the index.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), CorpusError> {
        for token in &self.tokens {
            out.write_all(token.as_bytes())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Vocabulary, CorpusError> {
        let mut tokens = Vec::new();
        for line in reader.lines() {
            tokens.push(line?);
        }
        if tokens.len() < 2 || tokens[PAD_INDEX] != PAD_TOKEN || tokens[UNK_INDEX] != UNK_TOKEN {
            return Err(CorpusError::Parse {
                line: 1,
                message: "vocabulary must start with the reserved pad/unk tokens".into(),
            });
        }
        Ok(Vocabulary::from_tokens(tokens))
    }
}

/// Build the vocabulary from document tokens with frequency at least
/// `min_count`, plus every token of every category label regardless of
/// frequency (labels must always be embeddable for composition).
pub fn build_vocabulary(
    docs: &[Document],
    tax: &Taxonomy,
    min_count: usize,
) -> Result<Vocabulary, CorpusError> {
    if docs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        for token in &doc.tokens {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    let mut selected: std::collections::BTreeSet<String> = counts
        .iter()
        .filter(|(_, &c)| c >= min_count)
        .map(|(t, _)| t.to_string())
        .collect();
    for level in 0..=tax.level_count() {
        let ids: Vec<NodeId> = if level == 0 {
            vec![tax.root().clone()]
        } else {
            tax.categories_at(level).unwrap().to_vec()
        };
        for id in ids {
            for token in tokenize(tax.label(&id).expect("node exists")) {
                selected.insert(token);
            }
        }
    }
    selected.remove(PAD_TOKEN);
    selected.remove(UNK_TOKEN);
    let mut tokens = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
    tokens.extend(selected);
    Ok(Vocabulary::from_tokens(tokens))
}

/// The frozen pretrained embedding table: one row per vocabulary entry.
/// Rows never change during training; the pad and unk rows are all-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    matrix: Array2<f64>,
}

impl EmbeddingMatrix {
    pub fn from_matrix(matrix: Array2<f64>) -> EmbeddingMatrix {
        EmbeddingMatrix { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn vocab_size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn row(&self, index: usize) -> ndarray::ArrayView1<'_, f64> {
        self.matrix.row(index)
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Embed a padded index row into a (len x dim) matrix.
    pub fn embed_sequence(&self, indices: &[usize]) -> Array2<f64> {
        let mut out = Array2::zeros((indices.len(), self.dim()));
        for (mut row, &idx) in out.outer_iter_mut().zip(indices) {
            row.assign(&self.matrix.row(idx));
        }
        out
    }
}

/// Load embeddings in plain text format: each line is a token followed by
/// `dim` decimal values, whitespace-separated.
///
/// Vocabulary tokens absent from the file keep an all-zero row (the unk
/// convention); returns the fraction of non-reserved vocabulary tokens that
/// were found.
pub fn load_embeddings<R: BufRead>(
    reader: R,
    vocab: &Vocabulary,
    dim: usize,
) -> Result<(EmbeddingMatrix, f64), CorpusError> {
    let mut matrix = Array2::<f64>::zeros((vocab.len(), dim));
    let mut found = 0usize;
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().ok_or(CorpusError::Parse {
            line: index + 1,
            message: "empty line".into(),
        })?;
        let values: Vec<&str> = parts.collect();
        if values.len() != dim {
            return Err(CorpusError::DimensionMismatch {
                line: index + 1,
                expected: dim,
                got: values.len(),
            });
        }
        if !vocab.contains(token) || token == PAD_TOKEN || token == UNK_TOKEN {
            continue;
        }
        let row_index = vocab.index_of(token);
        let mut row = Array1::zeros(dim);
        for (slot, raw) in row.iter_mut().zip(values) {
            let v: f64 = raw
                .parse()
                .map_err(|_| CorpusError::BadNumber { line: index + 1 })?;
            if !v.is_finite() {
                return Err(CorpusError::NonFiniteEmbedding { line: index + 1 });
            }
            *slot = v;
        }
        matrix.row_mut(row_index).assign(&row);
        found += 1;
    }
    let coverage = if vocab.len() > 2 {
        found as f64 / (vocab.len() - 2) as f64
    } else {
        1.0
    };
    Ok((EmbeddingMatrix::from_matrix(matrix), coverage))
}

pub fn load_embeddings_file(
    path: &Path,
    vocab: &Vocabulary,
    dim: usize,
) -> Result<(EmbeddingMatrix, f64), CorpusError> {
    let file = std::fs::File::open(path)?;
    load_embeddings(std::io::BufReader::new(file), vocab, dim)
}

/// Compose the input token sequence for one level.
///
/// Level 1 uses the document tokens unchanged; deeper levels prepend the
/// tokenized parent label, with no separator.
pub fn compose_level_input(
    doc_tokens: &[String],
    level: usize,
    parent_label: Option<&str>,
) -> Result<Vec<String>, CorpusError> {
    let parent = parent_label.filter(|l| !l.trim().is_empty());
    if level <= 1 {
        if let Some(label) = parent {
            return Err(CorpusError::UnexpectedParentLabel(label.to_string()));
        }
        return Ok(doc_tokens.to_vec());
    }
    let label = parent.ok_or(CorpusError::MissingParentLabel(level))?;
    let mut tokens = tokenize(label);
    tokens.extend_from_slice(doc_tokens);
    Ok(tokens)
}

/// One encoded mini-batch for a single level.
#[derive(Debug, Clone)]
pub struct LevelBatch {
    /// (batch x width) token indices, right-padded with the pad index.
    pub token_ids: Array2<usize>,
    /// Unpadded (possibly truncated) length per example.
    pub lengths: Vec<usize>,
    /// True class index per example, when labels are known.
    pub targets: Option<Vec<usize>>,
    /// Parent label text composed into each example (empty at level 1).
    pub parent_labels: Vec<String>,
}

impl LevelBatch {
    pub fn batch_size(&self) -> usize {
        self.token_ids.nrows()
    }

    pub fn width(&self) -> usize {
        self.token_ids.ncols()
    }
}

/// Encode one token sequence: unknown tokens map to unk, sequences longer
/// than `max_len` keep their prefix (so a prepended parent label is never
/// cut), shorter ones are returned as-is.
pub fn encode_tokens(tokens: &[String], vocab: &Vocabulary, max_len: usize) -> Vec<usize> {
    tokens
        .iter()
        .take(max_len)
        .map(|t| vocab.index_of(t))
        .collect()
}

/// Encode composed sequences into a [`LevelBatch`].
///
/// Rows share one width: `min(max_len, longest sequence)`, padded with the
/// pad index. Targets are mapped through the level's ordered class list.
pub fn encode_batch(
    sequences: &[Vec<String>],
    classes: Option<&[NodeId]>,
    parent_labels: &[String],
    vocab: &Vocabulary,
    max_len: usize,
    class_ids: &[NodeId],
) -> Result<LevelBatch, CorpusError> {
    if max_len == 0 {
        return Err(CorpusError::ZeroMaxLen);
    }
    if sequences.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    if parent_labels.len() != sequences.len() {
        return Err(CorpusError::RaggedBatch(format!(
            "{} sequences, {} parent labels",
            sequences.len(),
            parent_labels.len()
        )));
    }
    let targets = match classes {
        None => None,
        Some(classes) => {
            if classes.len() != sequences.len() {
                return Err(CorpusError::RaggedBatch(format!(
                    "{} sequences, {} classes",
                    sequences.len(),
                    classes.len()
                )));
            }
            let mut targets = Vec::with_capacity(classes.len());
            for class in classes {
                let idx = class_ids
                    .iter()
                    .position(|c| c == class)
                    .ok_or_else(|| CorpusError::UnknownClass(class.clone()))?;
                targets.push(idx);
            }
            Some(targets)
        }
    };
    let width = sequences
        .iter()
        .map(|s| s.len().min(max_len))
        .max()
        .unwrap_or(1)
        .max(1);
    let mut token_ids = Array2::from_elem((sequences.len(), width), PAD_INDEX);
    let mut lengths = Vec::with_capacity(sequences.len());
    for (b, seq) in sequences.iter().enumerate() {
        let encoded = encode_tokens(seq, vocab, max_len);
        for (t, &idx) in encoded.iter().enumerate() {
            token_ids[[b, t]] = idx;
        }
        lengths.push(encoded.len());
    }
    Ok(LevelBatch {
        token_ids,
        lengths,
        targets,
        parent_labels: parent_labels.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::build_taxonomy;

    fn tiny_tax() -> Taxonomy {
        let edges = vec![
            ("root".into(), "a".into()),
            ("root".into(), "b".into()),
            ("a".into(), "a1".into()),
            ("b".into(), "b1".into()),
        ];
        let labels: BTreeMap<NodeId, String> = [
            ("root", "everything"),
            ("a", "sports"),
            ("b", "science"),
            ("a1", "team sport"),
            ("b1", "physics"),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        build_taxonomy(&edges, &labels, "root").unwrap()
    }

    #[test]
    fn tokenize_strips_outer_punctuation_only() {
        assert_eq!(tokenize("The Match, today!"), ["the", "match", "today"]);
        assert_eq!(tokenize(""), Vec::<String>::new());
        assert_eq!(tokenize("A-B c"), ["a-b", "c"]);
        assert_eq!(tokenize("...  ?!"), Vec::<String>::new());
        assert_eq!(tokenize("\"quoted\" word's"), ["quoted", "word's"]);
    }

    #[test]
    fn vocabulary_includes_label_tokens_and_applies_min_count() {
        let tax = tiny_tax();
        let path = LabelPath(vec!["a".into(), "a1".into()]);
        let docs = vec![
            Document::new("d1", "x x x x x y", path.clone()).unwrap(),
            Document::new("d2", "x", path).unwrap(),
        ];
        let vocab = build_vocabulary(&docs, &tax, 2).unwrap();
        assert!(vocab.contains("x"));
        assert!(!vocab.contains("y"), "y is below min_count");
        for label_token in ["sports", "science", "team", "sport", "physics"] {
            assert!(vocab.contains(label_token), "missing {label_token}");
        }
        assert_eq!(vocab.index_of(PAD_TOKEN), PAD_INDEX);
        assert_eq!(vocab.index_of(UNK_TOKEN), UNK_INDEX);
        assert_eq!(vocab.index_of("never-seen"), UNK_INDEX);

        let all = build_vocabulary(&docs, &tax, 1).unwrap();
        assert!(all.contains("y"));
        assert!(build_vocabulary(&[], &tax, 1).is_err());
    }

    #[test]
    fn vocabulary_file_round_trip() {
        let tax = tiny_tax();
        let docs = vec![Document::new(
            "d1",
            "alpha beta",
            LabelPath(vec!["a".into(), "a1".into()]),
        )
        .unwrap()];
        let vocab = build_vocabulary(&docs, &tax, 1).unwrap();
        let mut buffer = Vec::new();
        vocab.write_to(&mut buffer).unwrap();
        let reloaded = Vocabulary::read_from(buffer.as_slice()).unwrap();
        assert_eq!(vocab, reloaded);
    }

    #[test]
    fn load_embeddings_copies_known_rows_and_zeroes_missing() {
        let tax = tiny_tax();
        let docs = vec![Document::new(
            "d1",
            "cat dog",
            LabelPath(vec!["a".into(), "a1".into()]),
        )
        .unwrap()];
        let vocab = build_vocabulary(&docs, &tax, 1).unwrap();
        let file = "cat 0.1 0.2\nelephant 9.0 9.0\n";
        let (emb, coverage) = load_embeddings(file.as_bytes(), &vocab, 2).unwrap();
        let cat = emb.row(vocab.index_of("cat"));
        assert_eq!(cat.to_vec(), vec![0.1, 0.2]);
        let dog = emb.row(vocab.index_of("dog"));
        assert_eq!(dog.to_vec(), vec![0.0, 0.0]);
        assert_eq!(emb.row(PAD_INDEX).to_vec(), vec![0.0, 0.0]);
        assert_eq!(emb.row(UNK_INDEX).to_vec(), vec![0.0, 0.0]);
        // one token found out of the non-reserved vocabulary
        let non_reserved = (vocab.len() - 2) as f64;
        assert!((coverage - 1.0 / non_reserved).abs() < 1e-12);
    }

    #[test]
    fn load_embeddings_rejects_dimension_mismatch() {
        let tax = tiny_tax();
        let docs = vec![Document::new(
            "d1",
            "cat",
            LabelPath(vec!["a".into(), "a1".into()]),
        )
        .unwrap()];
        let vocab = build_vocabulary(&docs, &tax, 1).unwrap();
        let err = load_embeddings("cat 0.1 0.2 0.3\n".as_bytes(), &vocab, 2).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::DimensionMismatch {
                line: 1,
                expected: 2,
                got: 3
            }
        ));
    }

    #[test]
    fn compose_prepends_parent_label_tokens() {
        let doc = vec!["the".to_string(), "match".to_string()];
        assert_eq!(compose_level_input(&doc, 1, None).unwrap(), doc);
        assert_eq!(
            compose_level_input(&doc, 2, Some("Sports")).unwrap(),
            ["sports", "the", "match"]
        );
        assert_eq!(
            compose_level_input(&["x".to_string()], 2, Some("Team Sport")).unwrap(),
            ["team", "sport", "x"]
        );
        assert!(matches!(
            compose_level_input(&doc, 1, Some("Sports")),
            Err(CorpusError::UnexpectedParentLabel(_))
        ));
        assert!(matches!(
            compose_level_input(&doc, 2, None),
            Err(CorpusError::MissingParentLabel(2))
        ));
        // Empty string counts as absent.
        assert!(compose_level_input(&doc, 1, Some("")).is_ok());
    }

    #[test]
    fn encode_truncates_tail_and_pads_with_pad_index() {
        let tax = tiny_tax();
        let docs = vec![Document::new(
            "d1",
            "a b c",
            LabelPath(vec!["a".into(), "a1".into()]),
        )
        .unwrap()];
        let vocab = build_vocabulary(&docs, &tax, 1).unwrap();
        let seqs = vec![vec!["a".to_string(), "b".to_string(), "c".to_string()]];
        let batch = encode_batch(
            &seqs,
            Some(&["a".to_string()]),
            &[String::new()],
            &vocab,
            2,
            &["a".to_string(), "b".to_string()],
        )
        .unwrap();
        assert_eq!(batch.width(), 2);
        assert_eq!(
            batch.token_ids.row(0).to_vec(),
            vec![vocab.index_of("a"), vocab.index_of("b")]
        );
        assert_eq!(batch.lengths, vec![2]);
        assert_eq!(batch.targets, Some(vec![0]));

        // Short sequence pads to the batch width.
        let seqs = vec![
            vec!["a".to_string()],
            vec!["a".to_string(), "b".to_string(), "c".to_string()],
        ];
        let batch = encode_batch(
            &seqs,
            None,
            &[String::new(), String::new()],
            &vocab,
            8,
            &[],
        )
        .unwrap();
        assert_eq!(batch.width(), 3);
        assert_eq!(
            batch.token_ids.row(0).to_vec(),
            vec![vocab.index_of("a"), PAD_INDEX, PAD_INDEX]
        );
        assert_eq!(batch.lengths, vec![1, 3]);

        // Unknown tokens map to unk.
        let seqs = vec![vec!["zzz".to_string()]];
        let batch = encode_batch(&seqs, None, &[String::new()], &vocab, 4, &[]).unwrap();
        assert_eq!(batch.token_ids[[0, 0]], UNK_INDEX);
    }

    #[test]
    fn encode_rejects_unknown_class() {
        let tax = tiny_tax();
        let docs = vec![Document::new(
            "d1",
            "a",
            LabelPath(vec!["a".into(), "a1".into()]),
        )
        .unwrap()];
        let vocab = build_vocabulary(&docs, &tax, 1).unwrap();
        let err = encode_batch(
            &[vec!["a".to_string()]],
            Some(&["nope".to_string()]),
            &[String::new()],
            &vocab,
            4,
            &["a".to_string()],
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::UnknownClass(_)));
    }

    #[test]
    fn corpus_file_round_trip_checks_paths() {
        let tax = tiny_tax();
        let docs = vec![
            Document::new("d1", "alpha beta", LabelPath(vec!["a".into(), "a1".into()]))
                .unwrap(),
            Document::new("d2", "gamma", LabelPath(vec!["b".into(), "b1".into()])).unwrap(),
        ];
        let mut buffer = Vec::new();
        write_corpus(&docs, &mut buffer).unwrap();
        let reloaded = read_corpus(buffer.as_slice(), &tax).unwrap();
        assert_eq!(docs, reloaded);

        // Cross-branch path is rejected.
        let bad = r#"{"id":"d3","text":"x","path":["a","b1"]}"#;
        let err = read_corpus(bad.as_bytes(), &tax).unwrap_err();
        assert!(matches!(err, CorpusError::InconsistentPath(id) if id == "d3"));
    }
}
