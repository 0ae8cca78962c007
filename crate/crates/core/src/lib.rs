//! Hierarchical word embeddings for hypernymy.
//!
//! The crate trains skip-gram embeddings with negative sampling that are
//! additionally shaped by a hyponym→hypernym resource, so that hypernyms end
//! up close to their hyponyms and with a larger vector norm. Trained stores are
//! scored with [`measures::hyper_score`] and evaluated with the protocols in
//! [`eval`]. The [`xling`] module maps foreign embedding spaces into a trained
//! space with ridge regression.

pub mod corpus;
pub mod embeddings;
mod error;
pub mod eval;
pub mod hyperbase;
pub mod measures;
pub mod rng;
pub mod synthetic;
pub mod trainer;
pub mod xling;

pub use corpus::{CoocIndex, EncodedCorpus, NegTable, Vocab};
pub use embeddings::EmbeddingStore;
pub use error::{Error, Result};
pub use eval::RelationDataset;
pub use hyperbase::HypernymResource;
pub use measures::Direction;
pub use trainer::TrainConfig;
pub use xling::{BilingualLexicon, MappingModel};
