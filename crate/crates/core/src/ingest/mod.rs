//! Explorer crawling: block walk, page extraction, throttled fetching.

mod client;
pub mod extract;
pub mod fixture;
#[cfg(feature = "live")]
pub mod live;
mod pipeline;
pub mod throttle;

pub use client::{BlockFile, ChainTransaction, ClientError, ContractPage, ExplorerClient};
pub use extract::{extract_source, ExtractionError, ExtractionRule};
pub use fixture::{FixtureExplorer, FixtureWriter};
pub use pipeline::{scan_blocks, AddressFailure, BlockFailure, IngestError, IngestReport};
pub use throttle::{Clock, ManualClock, RateLimit, RateLimitError, SystemClock, Throttle};
