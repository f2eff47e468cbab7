use std::collections::BTreeSet;
use std::io::{Cursor, Write};

use serde::Serialize;
use smac_core::store::StoreError;
use smac_core::{ContractAddress, CorpusStore};
use thiserror::Error;
use zip::write::SimpleFileOptions;
use zip::ZipWriter;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ArchiveManifest {
    pub included: Vec<ContractAddress>,
    pub missing: Vec<ContractAddress>,
}

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("zip: {0}")]
    Zip(#[from] zip::result::ZipError),
    #[error("zip: {0}")]
    Io(#[from] std::io::Error),
}

/// ZIP of the requested addresses' export entries plus `manifest.json`.
/// Repeated addresses are archived once; unknown ones go to `missing`.
pub fn build_archive(
    store: &CorpusStore,
    addresses: &[ContractAddress],
) -> Result<(Vec<u8>, ArchiveManifest), ArchiveError> {
    let mut zip = ZipWriter::new(Cursor::new(Vec::new()));
    let opts = SimpleFileOptions::default().compression_method(zip::CompressionMethod::Deflated);
    let mut manifest = ArchiveManifest::default();
    let mut done = BTreeSet::new();
    for address in addresses {
        if !done.insert(*address) {
            continue;
        }
        match store.export_entries(address) {
            Ok(entries) => {
                for (name, bytes) in entries {
                    zip.start_file(name, opts)?;
                    zip.write_all(&bytes)?;
                }
                manifest.included.push(*address);
            }
            Err(StoreError::NotFound(_)) => manifest.missing.push(*address),
            Err(e) => return Err(e.into()),
        }
    }
    zip.start_file("manifest.json", opts)?;
    zip.write_all(&serde_json::to_vec_pretty(&manifest).expect("manifest serializes"))?;
    let bytes = zip.finish()?.into_inner();
    Ok((bytes, manifest))
}
