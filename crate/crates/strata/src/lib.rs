//! Level-by-level text classification over a category taxonomy.
//!
//! `strata` trains one classifier per level of a tree-shaped taxonomy. Each
//! level's classifier is an ordered-neuron recurrent network over frozen
//! pretrained word embeddings, and two tricks tie the levels together:
//!
//! * **Label-text composition** — the parent category's label text is
//!   prepended to the document tokens before embedding, so the child-level
//!   classifier sees which branch it is refining.
//! * **Parameter transfer** — the recurrent weights trained at level `j`
//!   initialize level `j + 1`, so lower levels start from features that
//!   already separate their ancestors.
//!
//! Everything is deterministic given a seed: corpus splits, parameter
//! initialization, dropout, batch order, and the on-disk model format.
//!
//! The narrative guide lives in `book/` and is mirrored into the [`guide`]
//! module so its code samples run as doc-tests.

pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod metrics;
pub mod numeric;
pub mod onlstm;
pub mod persistence;
pub mod rng;
pub mod taxonomy;
pub mod trainer;

pub use corpus::{Document, EmbeddingMatrix, Vocabulary};
pub use taxonomy::{LabelPath, Taxonomy};

/// The book chapters, included verbatim so `cargo test --doc` keeps every
/// snippet in the guide compiling against the current API.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/taxonomy.md")]
    pub mod taxonomy {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    pub mod corpus {}
    #[doc = include_str!("../../../book/src/autodiff.md")]
    pub mod autodiff {}
    #[doc = include_str!("../../../book/src/onlstm.md")]
    pub mod onlstm {}
    #[doc = include_str!("../../../book/src/classifier.md")]
    pub mod classifier {}
    #[doc = include_str!("../../../book/src/training.md")]
    pub mod training {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    pub mod metrics {}
    #[doc = include_str!("../../../book/src/persistence.md")]
    pub mod persistence {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
