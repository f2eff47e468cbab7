//! HTTP explorer client. Speaks the same three path shapes as the fixture
//! directory, relative to a base URL.

use std::time::Duration;

use super::client::{BlockFile, ChainTransaction, ClientError, ContractPage, ExplorerClient};
use crate::address::ContractAddress;
use crate::store::ExtrinsicMetrics;

pub struct HttpExplorer {
    base: String,
    agent: ureq::Agent,
}

impl HttpExplorer {
    pub fn new(base_url: impl Into<String>) -> Self {
        let base = base_url.into().trim_end_matches('/').to_string();
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .user_agent("smac-corpus/0.1")
            .build()
            .into();
        Self { base, agent }
    }

    fn get(&self, path: &str) -> Result<String, ClientError> {
        let url = format!("{}/{path}", self.base);
        match self.agent.get(&url).call() {
            Ok(mut resp) => resp.body_mut().read_to_string().map_err(|e| ClientError::Transport(format!("{url}: {e}"))),
            Err(ureq::Error::StatusCode(404)) => Err(ClientError::NotFound(url)),
            Err(e) => Err(ClientError::Transport(format!("{url}: {e}"))),
        }
    }
}

impl ExplorerClient for HttpExplorer {
    fn list_block_transactions(&self, block: u64) -> Result<Vec<ChainTransaction>, ClientError> {
        let body = self.get(&format!("blocks/{block}.json"))?;
        let file: BlockFile = serde_json::from_str(&body).map_err(|e| ClientError::Malformed(e.to_string()))?;
        Ok(file.transactions)
    }

    fn fetch_contract_page(&self, address: &ContractAddress) -> Result<ContractPage, ClientError> {
        match self.get(&format!("pages/{address}.html")) {
            Ok(html) => Ok(ContractPage::Verified(html)),
            Err(ClientError::NotFound(_)) => Ok(ContractPage::NotVerified),
            Err(e) => Err(e),
        }
    }

    fn fetch_extrinsic(&self, address: &ContractAddress) -> Result<ExtrinsicMetrics, ClientError> {
        let body = self.get(&format!("extrinsic/{address}.json"))?;
        serde_json::from_str(&body).map_err(|e| ClientError::Malformed(e.to_string()))
    }

    fn provenance_url(&self, address: &ContractAddress) -> Option<String> {
        Some(format!("{}/pages/{address}.html", self.base))
    }
}
