//! Seeded synthetic corpora for desk-scale experiments and acceptance runs.
//!
//! The generator builds a uniform tree, gives every class its own signal
//! tokens, and mixes those signals with noise tokens in each document. In
//! the default mode every class is separable from the text alone. In
//! `parent_dependent` mode the signal tokens of level 2 and below encode
//! only the child's position under its parent and are shared across
//! branches, so those levels are unresolvable without knowing the parent —
//! the setup that isolates the value of composing the parent label into the
//! input.

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{
    build_vocabulary, CorpusError, Document, EmbeddingMatrix, Vocabulary, PAD_INDEX, UNK_INDEX,
};
use crate::rng::stream;
use crate::taxonomy::{build_taxonomy, LabelPath, NodeId, Taxonomy};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Children per node at each depth; `branching[0]` is the number of
    /// level-1 categories.
    pub branching: Vec<usize>,
    pub docs_per_leaf: usize,
    pub signal_tokens_per_class: usize,
    pub noise_vocab: usize,
    pub doc_len: usize,
    pub embed_dim: usize,
    pub seed: u64,
    /// Share level >= 2 signal tokens across branches so those levels are
    /// only separable given the parent identity.
    pub parent_dependent: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            branching: vec![3, 3],
            docs_per_leaf: 30,
            signal_tokens_per_class: 2,
            noise_vocab: 50,
            doc_len: 20,
            embed_dim: 16,
            seed: 7,
            parent_dependent: false,
        }
    }
}

/// A generated corpus with everything needed to train on it.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub taxonomy: Taxonomy,
    pub documents: Vec<Document>,
    pub vocabulary: Vocabulary,
    pub embeddings: EmbeddingMatrix,
}

fn node_id(level: usize, index: usize) -> NodeId {
    format!("l{level}c{index:03}")
}

fn node_label(level: usize, index: usize) -> String {
    format!("cat{level}x{index:03}")
}

/// Generate a taxonomy, documents, vocabulary, and seeded embeddings.
/// Byte-identical output for identical configs.
pub fn generate_synthetic_corpus(cfg: &SynthConfig) -> Result<SynthCorpus, CorpusError> {
    if cfg.branching.is_empty() || cfg.branching.contains(&0) {
        return Err(CorpusError::InvalidSynthConfig(
            "branching must be non-empty with positive entries".into(),
        ));
    }
    if cfg.docs_per_leaf == 0 || cfg.signal_tokens_per_class == 0 || cfg.noise_vocab == 0 {
        return Err(CorpusError::InvalidSynthConfig(
            "counts must be at least 1".into(),
        ));
    }
    let depth = cfg.branching.len();
    if cfg.doc_len < depth + 1 {
        return Err(CorpusError::InvalidSynthConfig(format!(
            "doc_len {} too small for {depth} levels",
            cfg.doc_len
        )));
    }
    if cfg.embed_dim == 0 {
        return Err(CorpusError::InvalidSynthConfig("embed_dim must be positive".into()));
    }

    // Uniform tree. Leaf paths are enumerated in node-id order.
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    let mut labels: BTreeMap<NodeId, String> = BTreeMap::new();
    labels.insert("root".into(), "everything".into());
    let mut paths: Vec<Vec<(usize, usize)>> = vec![Vec::new()]; // (global idx, local idx) per level
    for (depth_index, &fanout) in cfg.branching.iter().enumerate() {
        let level = depth_index + 1;
        let mut next_paths = Vec::with_capacity(paths.len() * fanout);
        for prefix in &paths {
            let parent = match prefix.last() {
                None => "root".to_string(),
                Some(&(global, _)) => node_id(level - 1, global),
            };
            let parent_global = prefix.last().map(|&(g, _)| g).unwrap_or(0);
            for local in 0..fanout {
                let global = parent_global * fanout + local;
                let id = node_id(level, global);
                edges.push((parent.clone(), id.clone()));
                labels.insert(id, node_label(level, global));
                let mut path = prefix.clone();
                path.push((global, local));
                next_paths.push(path);
            }
        }
        paths = next_paths;
    }
    let taxonomy =
        build_taxonomy(&edges, &labels, "root").expect("generated tree is always valid");

    // Signal token for one path element, respecting the generator mode.
    // Levels without a signal (level 1 in parent-dependent mode) return None.
    let signal_token = |level: usize, global: usize, local: usize, pick: usize| -> Option<String> {
        if cfg.parent_dependent {
            if level == 1 {
                None
            } else {
                Some(format!("sig{level}p{local:03}n{pick}"))
            }
        } else {
            Some(format!("sig{level}x{global:03}n{pick}"))
        }
    };

    let mut rng = stream(cfg.seed, "synth");
    let mut documents = Vec::with_capacity(paths.len() * cfg.docs_per_leaf);
    for path in &paths {
        let label_path = LabelPath(
            path.iter()
                .enumerate()
                .map(|(i, &(global, _))| node_id(i + 1, global))
                .collect(),
        );
        for _ in 0..cfg.docs_per_leaf {
            let mut tokens: Vec<String> = Vec::with_capacity(cfg.doc_len);
            // One guaranteed signal token per signal-bearing level.
            for (i, &(global, local)) in path.iter().enumerate() {
                let pick = rng.random_range(0..cfg.signal_tokens_per_class);
                if let Some(tok) = signal_token(i + 1, global, local, pick) {
                    tokens.push(tok);
                }
            }
            while tokens.len() < cfg.doc_len {
                if rng.random::<f64>() < 0.5 {
                    let level_index = rng.random_range(0..path.len());
                    let (global, local) = path[level_index];
                    let pick = rng.random_range(0..cfg.signal_tokens_per_class);
                    match signal_token(level_index + 1, global, local, pick) {
                        Some(tok) => tokens.push(tok),
                        None => tokens.push(format!(
                            "noise{:04}",
                            rng.random_range(0..cfg.noise_vocab)
                        )),
                    }
                } else {
                    tokens.push(format!("noise{:04}", rng.random_range(0..cfg.noise_vocab)));
                }
            }
            tokens.shuffle(&mut rng);
            let id = format!("doc{:05}", documents.len());
            let text = tokens.join(" ");
            documents.push(Document::new(id, text, label_path.clone())?);
        }
    }

    let vocabulary = build_vocabulary(&documents, &taxonomy, 1)?;
    let embeddings = seeded_embeddings(&vocabulary, cfg.embed_dim, cfg.seed);
    Ok(SynthCorpus {
        taxonomy,
        documents,
        vocabulary,
        embeddings,
    })
}

/// Unit-variance embedding rows derived per token from the seed, so any
/// vocabulary ordering reproduces the same vectors. Pad and unk stay zero.
pub fn seeded_embeddings(vocab: &Vocabulary, dim: usize, seed: u64) -> EmbeddingMatrix {
    let mut matrix = Array2::<f64>::zeros((vocab.len(), dim));
    for (index, token) in vocab.tokens().iter().enumerate() {
        if index == PAD_INDEX || index == UNK_INDEX {
            continue;
        }
        let mut row_rng = stream(seed, &format!("embed/{token}"));
        for slot in matrix.row_mut(index) {
            *slot = standard_normal(&mut row_rng);
        }
    }
    EmbeddingMatrix::from_matrix(matrix)
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng)
}

/// Embedding-file lines for every non-reserved vocabulary token, in the
/// plain text format the loader reads.
pub fn embedding_file_lines(corpus: &SynthCorpus) -> Vec<String> {
    let mut lines = Vec::new();
    for (index, token) in corpus.vocabulary.tokens().iter().enumerate() {
        if index == PAD_INDEX || index == UNK_INDEX {
            continue;
        }
        let row = corpus.embeddings.row(index);
        let values: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        lines.push(format!("{token} {}", values.join(" ")));
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::load_embeddings;

    #[test]
    fn three_by_three_shape() {
        let cfg = SynthConfig {
            branching: vec![3, 3],
            docs_per_leaf: 30,
            ..SynthConfig::default()
        };
        let corpus = generate_synthetic_corpus(&cfg).unwrap();
        assert_eq!(corpus.taxonomy.level_count(), 2);
        assert_eq!(corpus.taxonomy.categories_count_at(1).unwrap(), 3);
        assert_eq!(corpus.taxonomy.categories_count_at(2).unwrap(), 9);
        assert_eq!(corpus.documents.len(), 270);
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let cfg = SynthConfig::default();
        let a = generate_synthetic_corpus(&cfg).unwrap();
        let b = generate_synthetic_corpus(&cfg).unwrap();
        assert_eq!(a.documents, b.documents);
        assert_eq!(a.vocabulary, b.vocabulary);
        assert_eq!(a.embeddings, b.embeddings);
        let c = generate_synthetic_corpus(&SynthConfig {
            seed: 8,
            ..cfg
        })
        .unwrap();
        assert_ne!(a.documents, c.documents);
    }

    #[test]
    fn single_level_minimal_corpus() {
        let cfg = SynthConfig {
            branching: vec![2],
            docs_per_leaf: 1,
            doc_len: 4,
            ..SynthConfig::default()
        };
        let corpus = generate_synthetic_corpus(&cfg).unwrap();
        assert_eq!(corpus.taxonomy.level_count(), 1);
        assert_eq!(corpus.documents.len(), 2);
        for doc in &corpus.documents {
            assert_eq!(doc.path.len(), 1);
        }
    }

    #[test]
    fn every_doc_carries_its_signal_tokens() {
        let cfg = SynthConfig::default();
        let corpus = generate_synthetic_corpus(&cfg).unwrap();
        for doc in &corpus.documents {
            for (i, node) in doc.path.0.iter().enumerate() {
                let level = i + 1;
                let global: usize = node[3..].parse().unwrap();
                let prefix = format!("sig{level}x{global:03}");
                assert!(
                    doc.tokens.iter().any(|t| t.starts_with(&prefix)),
                    "doc {} missing signal {prefix}",
                    doc.id
                );
            }
        }
    }

    #[test]
    fn parent_dependent_mode_shares_level2_signals() {
        let cfg = SynthConfig {
            parent_dependent: true,
            ..SynthConfig::default()
        };
        let corpus = generate_synthetic_corpus(&cfg).unwrap();
        // No level-1 signal tokens anywhere.
        for doc in &corpus.documents {
            assert!(
                doc.tokens.iter().all(|t| !t.starts_with("sig1")),
                "level-1 signal leaked into {}",
                doc.id
            );
        }
        // The same level-2 signal prefix appears under different parents.
        let mut parents_per_prefix: BTreeMap<String, std::collections::BTreeSet<String>> =
            BTreeMap::new();
        for doc in &corpus.documents {
            for token in &doc.tokens {
                if token.starts_with("sig2") {
                    parents_per_prefix
                        .entry(token.clone())
                        .or_default()
                        .insert(doc.path.0[0].clone());
                }
            }
        }
        assert!(parents_per_prefix
            .values()
            .any(|parents| parents.len() > 1));
    }

    #[test]
    fn embedding_file_round_trips_through_loader() {
        let cfg = SynthConfig {
            branching: vec![2],
            docs_per_leaf: 2,
            doc_len: 6,
            embed_dim: 4,
            ..SynthConfig::default()
        };
        let corpus = generate_synthetic_corpus(&cfg).unwrap();
        let file = embedding_file_lines(&corpus).join("\n");
        let (loaded, coverage) =
            load_embeddings(file.as_bytes(), &corpus.vocabulary, 4).unwrap();
        assert_eq!(coverage, 1.0);
        assert_eq!(&loaded, &corpus.embeddings);
    }
}
