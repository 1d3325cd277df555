//! Topic modelling toolkit for news articles and their reader comments.
//!
//! The crate covers the full workflow: JSONL ingestion and bag-of-words
//! encoding ([`corpus`]), online variational LDA ([`lda`]), C_v topic
//! coherence ([`coherence`]), similarity and rank correlation primitives
//! ([`stats`]), corpus-level topic analytics ([`analysis`]), per-thread
//! article/comment topic inconsistency ([`inconsistency`]) and the
//! configuration-driven end-to-end runner ([`pipeline`]).

pub mod analysis;
pub mod coherence;
pub mod corpus;
pub mod error;
pub mod inconsistency;
pub mod lda;
mod math;
pub mod pipeline;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use math::derive_seed;
