use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::ContractAddress;
use crate::store::ExtrinsicMetrics;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    Malformed(String),
}

/// One transaction of a block. For a contract creation `to` holds the
/// address of the newly created contract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainTransaction {
    pub from: ContractAddress,
    pub to: Option<ContractAddress>,
    #[serde(default)]
    pub is_contract_creation: bool,
}

impl ChainTransaction {
    pub fn created_contract(&self) -> Option<ContractAddress> {
        if self.is_contract_creation {
            self.to
        } else {
            None
        }
    }
}

/// `blocks/<n>.json`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockFile {
    pub number: u64,
    pub transactions: Vec<ChainTransaction>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContractPage {
    Verified(String),
    NotVerified,
}

/// Access to a block explorer. Implementations are interchangeable.
pub trait ExplorerClient: Send + Sync {
    /// Transactions of one block; `ClientError::NotFound` if the block does
    /// not exist.
    fn list_block_transactions(&self, block: u64) -> Result<Vec<ChainTransaction>, ClientError>;

    /// The verified-source page of an address, if the explorer has one.
    fn fetch_contract_page(&self, address: &ContractAddress) -> Result<ContractPage, ClientError>;

    fn fetch_extrinsic(&self, address: &ContractAddress) -> Result<ExtrinsicMetrics, ClientError>;

    /// Where a human can find the original page.
    fn provenance_url(&self, _address: &ContractAddress) -> Option<String> {
        None
    }
}

impl<T: ExplorerClient + ?Sized> ExplorerClient for &T {
    fn list_block_transactions(&self, block: u64) -> Result<Vec<ChainTransaction>, ClientError> {
        (**self).list_block_transactions(block)
    }

    fn fetch_contract_page(&self, address: &ContractAddress) -> Result<ContractPage, ClientError> {
        (**self).fetch_contract_page(address)
    }

    fn fetch_extrinsic(&self, address: &ContractAddress) -> Result<ExtrinsicMetrics, ClientError> {
        (**self).fetch_extrinsic(address)
    }

    fn provenance_url(&self, address: &ContractAddress) -> Option<String> {
        (**self).provenance_url(address)
    }
}

impl<T: ExplorerClient + ?Sized> ExplorerClient for Box<T> {
    fn list_block_transactions(&self, block: u64) -> Result<Vec<ChainTransaction>, ClientError> {
        (**self).list_block_transactions(block)
    }

    fn fetch_contract_page(&self, address: &ContractAddress) -> Result<ContractPage, ClientError> {
        (**self).fetch_contract_page(address)
    }

    fn fetch_extrinsic(&self, address: &ContractAddress) -> Result<ExtrinsicMetrics, ClientError> {
        (**self).fetch_extrinsic(address)
    }

    fn provenance_url(&self, address: &ContractAddress) -> Option<String> {
        (**self).provenance_url(address)
    }
}
