use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::address::ContractAddress;
use crate::metrics::{IntrinsicMetrics, SourceText};

/// Seconds since the Unix epoch, UTC.
pub type Timestamp = i64;

/// Source, ABI and bytecode of one deployed contract, stored byte-exact.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContractArtifacts {
    pub source: SourceText,
    pub abi: String,
    pub bytecode: String,
}

impl ContractArtifacts {
    pub fn new(source: impl Into<SourceText>, abi: impl Into<String>, bytecode: impl Into<String>) -> Self {
        Self { source: source.into(), abi: abi.into(), bytecode: bytecode.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenValue {
    pub symbol: String,
    #[serde(with = "rust_decimal::serde::arbitrary_precision")]
    pub value: Decimal,
}

/// On-chain activity of an address. Stored as received from the explorer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ExtrinsicMetrics {
    pub transactions: u64,
    /// Wei.
    pub balance: u128,
    /// USD.
    #[serde(with = "rust_decimal::serde::arbitrary_precision")]
    pub ether_value: Decimal,
    pub token: Vec<TokenValue>,
    pub first_seen: Option<Timestamp>,
    pub last_seen: Option<Timestamp>,
}

impl ExtrinsicMetrics {
    pub fn validate(&self) -> Result<(), String> {
        if self.ether_value.is_sign_negative() && !self.ether_value.is_zero() {
            return Err("etherValue must be non-negative".into());
        }
        if let Some(t) = self.token.iter().find(|t| t.value.is_sign_negative() && !t.value.is_zero()) {
            return Err(format!("token {} has a negative value", t.symbol));
        }
        if self.transactions > 0 {
            if let (Some(first), Some(last)) = (self.first_seen, self.last_seen) {
                if first > last {
                    return Err(format!("firstSeen {first} is after lastSeen {last}"));
                }
            }
        }
        Ok(())
    }
}

/// The metadata record kept for every stored address.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ContractDocument {
    pub address: ContractAddress,
    /// Lowercase hex digest of the exact source bytes.
    pub source_hash: String,
    /// Canonical address holding the artifacts, for duplicates.
    pub duplicate_of: Option<ContractAddress>,
    pub intrinsic: IntrinsicMetrics,
    pub extrinsic: ExtrinsicMetrics,
    pub retrieved_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance_url: Option<String>,
}

impl ContractDocument {
    pub fn is_canonical(&self) -> bool {
        self.duplicate_of.is_none()
    }

    /// The address whose artifact files back this document.
    pub fn artifact_owner(&self) -> ContractAddress {
        self.duplicate_of.unwrap_or(self.address)
    }
}
