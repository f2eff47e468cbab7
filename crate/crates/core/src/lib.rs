//! Smart-contract corpus engine.
//!
//! - [`metrics`]: intrinsic metrics of Solidity sources (lexical analysis).
//! - [`store`]: sharded artifact files plus JSON documents, deduplicated by content.
//! - [`ingest`]: throttled explorer crawling that feeds the store.
//! - [`query`]: the `metrics(query: {...}) { ... }` filter language.

pub mod address;
pub mod ingest;
pub mod metrics;
pub mod query;
pub mod store;

pub use address::{AddressParseError, ContractAddress};
pub use metrics::{analyze, analyze_batch, analyze_bytes, lex, IntrinsicMetrics, SourceText};
pub use store::{ContractArtifacts, ContractDocument, CorpusStore, ExtrinsicMetrics, StoreError};
