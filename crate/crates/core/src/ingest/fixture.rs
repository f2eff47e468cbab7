//! Directory-backed explorer:
//!
//! ```text
//! blocks/<n>.json           BlockFile
//! pages/<address>.html      verified-source page (absent = not verified)
//! extrinsic/<address>.json  ExtrinsicMetrics
//! ```

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::client::{BlockFile, ChainTransaction, ClientError, ContractPage, ExplorerClient};
use super::extract::{render_contract_page, ExtractionRule};
use crate::address::ContractAddress;
use crate::store::{ContractArtifacts, ExtrinsicMetrics};

#[derive(Debug, Clone)]
pub struct FixtureExplorer {
    root: PathBuf,
}

impl FixtureExplorer {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn page_path(&self, address: &ContractAddress) -> PathBuf {
        self.root.join("pages").join(format!("{address}.html"))
    }

    fn read(&self, path: &Path) -> Result<String, ClientError> {
        fs::read_to_string(path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => ClientError::NotFound(path.display().to_string()),
            _ => ClientError::Transport(format!("{}: {e}", path.display())),
        })
    }
}

impl ExplorerClient for FixtureExplorer {
    fn list_block_transactions(&self, block: u64) -> Result<Vec<ChainTransaction>, ClientError> {
        let path = self.root.join("blocks").join(format!("{block}.json"));
        let body = self.read(&path)?;
        let file: BlockFile =
            serde_json::from_str(&body).map_err(|e| ClientError::Malformed(format!("{}: {e}", path.display())))?;
        if file.number != block {
            return Err(ClientError::Malformed(format!("{} declares block {}", path.display(), file.number)));
        }
        Ok(file.transactions)
    }

    fn fetch_contract_page(&self, address: &ContractAddress) -> Result<ContractPage, ClientError> {
        match self.read(&self.page_path(address)) {
            Ok(html) => Ok(ContractPage::Verified(html)),
            Err(ClientError::NotFound(_)) => Ok(ContractPage::NotVerified),
            Err(e) => Err(e),
        }
    }

    fn fetch_extrinsic(&self, address: &ContractAddress) -> Result<ExtrinsicMetrics, ClientError> {
        let path = self.root.join("extrinsic").join(format!("{address}.json"));
        let body = self.read(&path)?;
        serde_json::from_str(&body).map_err(|e| ClientError::Malformed(format!("{}: {e}", path.display())))
    }

    fn provenance_url(&self, address: &ContractAddress) -> Option<String> {
        Some(format!("file://{}", self.page_path(address).display()))
    }
}

/// Writes fixture explorer directories.
pub struct FixtureWriter {
    root: PathBuf,
    rule: ExtractionRule,
}

impl FixtureWriter {
    pub fn create(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        for sub in ["blocks", "pages", "extrinsic"] {
            fs::create_dir_all(root.join(sub))?;
        }
        Ok(Self { root, rule: ExtractionRule::default() })
    }

    pub fn with_rule(mut self, rule: ExtractionRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn block(&self, number: u64, transactions: Vec<ChainTransaction>) -> io::Result<()> {
        let body = serde_json::to_string_pretty(&BlockFile { number, transactions })?;
        fs::write(self.root.join("blocks").join(format!("{number}.json")), body)
    }

    /// A verified contract: its page plus extrinsic metrics.
    pub fn verified(
        &self,
        address: &ContractAddress,
        artifacts: &ContractArtifacts,
        extrinsic: &ExtrinsicMetrics,
    ) -> io::Result<()> {
        let html = render_contract_page(&address.to_string(), artifacts, &self.rule);
        fs::write(self.root.join("pages").join(format!("{address}.html")), html)?;
        self.extrinsic(address, extrinsic)
    }

    pub fn extrinsic(&self, address: &ContractAddress, extrinsic: &ExtrinsicMetrics) -> io::Result<()> {
        let body = serde_json::to_string_pretty(extrinsic)?;
        fs::write(self.root.join("extrinsic").join(format!("{address}.json")), body)
    }

    pub fn raw_page(&self, address: &ContractAddress, html: &str) -> io::Result<()> {
        fs::write(self.root.join("pages").join(format!("{address}.html")), html)
    }
}
