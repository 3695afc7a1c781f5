//! Quantifies the causal uncertainty of labeled sound stimuli from
//! crowd-sourced free-text descriptions.
//!
//! The crate ingests annotation corpora, normalizes free-text labels against a
//! pre-trained word-embedding vocabulary and an offline WordNet-style lexicon,
//! clusters labels by heavily stemmed head words, and derives per-stimulus
//! uncertainty scores: the Shannon entropy over label groups (`H_cu`, in bits)
//! together with embedding cluster-radius metrics and a knowledge-graph
//! co-location radius. A statistics layer reproduces the usual annotation
//! analyses: outlier-worker filtering, split-half reliability, correlation
//! matrices, percentile splits, and a 2-D projection for plotting.
//!
//! Modules map onto pipeline stages:
//!
//! - [`corpus`] — annotation/sound CSV ingestion and persistence
//! - [`stemmer`] — aggressive rule-table (Paice/Husk) suffix stripping
//! - [`wordnet`] — lexical database: POS lookup, synonyms, hypernym path length
//! - [`embedding`] — embedding-file parsing and vector-space primitives
//! - [`labels`] — label normalization, OOV repair, head-word clustering,
//!   embedding strategies
//! - [`uncertainty`] — `H_cu` and the cluster-radius metrics
//! - [`colocation`] — ConceptNet location crawling and pseudo-embeddings
//! - [`stats`] — reliability, correlation, percentile, and projection analyses

pub mod colocation;
pub mod corpus;
pub mod embedding;
pub mod labels;
pub mod stats;
pub mod stemmer;
pub mod uncertainty;
pub mod wordnet;

pub use corpus::{AnnotationRecord, Corpus, IngestConfig, LikertScale, SoundEntry};
pub use embedding::{EmbeddingSource, EmbeddingTable, Vector};
pub use labels::{HeadWordClustering, NormalizedLabel, Strategy};
pub use stemmer::Stemmer;
pub use uncertainty::{GroupProportions, RadiusStats, UncertaintyScores};
pub use wordnet::{LexicalDatabase, PosClass};
