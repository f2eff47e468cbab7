use std::collections::HashSet;
use std::ops::RangeInclusive;

use serde::Serialize;
use thiserror::Error;

use super::client::{ClientError, ContractPage, ExplorerClient};
use super::extract::{extract_source, ExtractionRule};
use super::throttle::Throttle;
use crate::address::ContractAddress;
use crate::store::{CorpusStore, StoreError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("invalid block range: from {from} is after to {to}")]
    InvalidRange { from: u64, to: u64 },
    #[error(transparent)]
    Storage(StoreError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AddressFailure {
    pub address: ContractAddress,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockFailure {
    pub block: u64,
    pub reason: String,
}

/// Outcome of one scan. `verified_fetched` always equals
/// `new_canonical + duplicates`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestReport {
    pub blocks_scanned: u64,
    pub addresses_seen: u64,
    pub already_stored: u64,
    pub not_verified: u64,
    pub verified_fetched: u64,
    pub new_canonical: u64,
    pub duplicates: u64,
    pub failures: Vec<AddressFailure>,
    pub block_failures: Vec<BlockFailure>,
}

/// Walks `range`, storing every verified contract created in it that the
/// store does not already hold. Every explorer call passes the throttle.
///
/// Explorer and extraction problems are recorded per address and the scan
/// moves on; only storage failures abort.
pub fn scan_blocks(
    client: &dyn ExplorerClient,
    range: RangeInclusive<u64>,
    throttle: &Throttle,
    store: &CorpusStore,
    rule: &ExtractionRule,
) -> Result<IngestReport, IngestError> {
    let (from, to) = (*range.start(), *range.end());
    if from > to {
        return Err(IngestError::InvalidRange { from, to });
    }

    let mut report = IngestReport::default();
    let mut seen: HashSet<ContractAddress> = HashSet::new();

    for block in range {
        throttle.acquire();
        let txs = match client.list_block_transactions(block) {
            Ok(txs) => txs,
            Err(ClientError::NotFound(_)) => continue,
            Err(e) => {
                report.block_failures.push(BlockFailure { block, reason: e.to_string() });
                continue;
            }
        };
        report.blocks_scanned += 1;

        for address in txs.iter().filter_map(|tx| tx.created_contract()) {
            if !seen.insert(address) {
                continue;
            }
            report.addresses_seen += 1;
            if store.contains(&address) {
                report.already_stored += 1;
                continue;
            }
            match ingest_address(client, &address, throttle, store, rule) {
                Ok(Outcome::NotVerified) => report.not_verified += 1,
                Ok(Outcome::Stored { duplicate }) => {
                    report.verified_fetched += 1;
                    if duplicate {
                        report.duplicates += 1;
                    } else {
                        report.new_canonical += 1;
                    }
                }
                Err(Failure::Address(reason)) => {
                    tracing::warn!(%address, %reason, "skipping contract");
                    report.failures.push(AddressFailure { address, reason });
                }
                Err(Failure::Storage(e)) => return Err(IngestError::Storage(e)),
            }
        }
    }
    Ok(report)
}

enum Outcome {
    NotVerified,
    Stored { duplicate: bool },
}

enum Failure {
    Address(String),
    Storage(StoreError),
}

fn ingest_address(
    client: &dyn ExplorerClient,
    address: &ContractAddress,
    throttle: &Throttle,
    store: &CorpusStore,
    rule: &ExtractionRule,
) -> Result<Outcome, Failure> {
    throttle.acquire();
    let html = match client.fetch_contract_page(address) {
        Ok(ContractPage::Verified(html)) => html,
        Ok(ContractPage::NotVerified) => return Ok(Outcome::NotVerified),
        Err(e) => return Err(Failure::Address(format!("page fetch: {e}"))),
    };
    let artifacts = extract_source(&html, rule).map_err(|e| Failure::Address(format!("extraction: {e}")))?;

    throttle.acquire();
    let extrinsic = client.fetch_extrinsic(address).map_err(|e| Failure::Address(format!("extrinsic fetch: {e}")))?;

    let retrieved_at = throttle.clock().now().as_secs() as i64;
    match store.put_with_provenance(*address, artifacts, extrinsic, retrieved_at, client.provenance_url(address)) {
        Ok(doc) => Ok(Outcome::Stored { duplicate: !doc.is_canonical() }),
        Err(e @ (StoreError::EmptySource | StoreError::InvalidExtrinsic(_) | StoreError::DuplicateAddress(_))) => {
            Err(Failure::Address(e.to_string()))
        }
        Err(e) => Err(Failure::Storage(e)),
    }
}
