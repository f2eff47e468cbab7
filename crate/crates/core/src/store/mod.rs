//! Sharded artifact store with a JSON document collection and exact-content
//! deduplication.
//!
//! Layout under the store root:
//!
//! ```text
//! store.json                      store manifest (format, digest algorithm)
//! b7/0xb7f4...e8ad.sol            artifact files, canonical contracts only
//! b7/0xb7f4...e8ad.abi
//! b7/0xb7f4...e8ad.bytecode
//! meta/0xb7f4...e8ad.json         one document per stored address
//! ```
//!
//! A document file is the commit point for a put: artifacts are written
//! first, each through a temp file and rename, and the document last. The
//! in-memory index is rebuilt from `meta/` on open.

mod document;
mod layout;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, RwLock};
use std::time::SystemTime;

use chrono::{DateTime, NaiveDate};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::address::ContractAddress;
use crate::metrics::{self, SourceText};

pub use document::{ContractArtifacts, ContractDocument, ExtrinsicMetrics, Timestamp, TokenValue};
pub use layout::{meta_path, shard_path, ArtifactKind};

pub(crate) const META_DIR: &str = "meta";
const MANIFEST: &str = "store.json";
const FORMAT_VERSION: u32 = 1;
/// Digest used for `sourceHash`; recorded in the store manifest.
pub const HASH_ALGORITHM: &str = "sha256";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("address {0} is already stored")]
    DuplicateAddress(ContractAddress),
    #[error("address {0} not found")]
    NotFound(ContractAddress),
    #[error("contract source is empty")]
    EmptySource,
    #[error("invalid extrinsic metrics: {0}")]
    InvalidExtrinsic(String),
    #[error("store at {path} is incompatible: {reason}")]
    Incompatible { path: PathBuf, reason: String },
    #[error("storage failure at {path}: {source}")]
    StorageFailure {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt document {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
}

impl StoreError {
    fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> StoreError {
        let path = path.into();
        move |source| StoreError::StorageFailure { path, source }
    }
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Manifest {
    format: u32,
    hash_algorithm: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyCount {
    pub date: NaiveDate,
    pub count: u64,
}

#[derive(Default)]
struct Index {
    docs: BTreeMap<ContractAddress, ContractDocument>,
    canonical_by_hash: HashMap<String, ContractAddress>,
}

impl Index {
    fn insert(&mut self, doc: ContractDocument) {
        if doc.is_canonical() {
            self.canonical_by_hash.insert(doc.source_hash.clone(), doc.address);
        }
        self.docs.insert(doc.address, doc);
    }
}

/// The corpus store. Readers share an index snapshot; puts are serialized.
pub struct CorpusStore {
    root: PathBuf,
    index: RwLock<Index>,
    writer: Mutex<()>,
    meta_stamp: Mutex<Option<(SystemTime, usize)>>,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

pub fn source_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl CorpusStore {
    /// Opens the store at `root`, creating an empty one if the directory has
    /// no manifest yet.
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(root.join(META_DIR)).map_err(StoreError::io(root.join(META_DIR)))?;

        let manifest_path = root.join(MANIFEST);
        match fs::read(&manifest_path) {
            Ok(bytes) => {
                let m: Manifest = serde_json::from_slice(&bytes)
                    .map_err(|e| StoreError::Corrupt { path: manifest_path.clone(), reason: e.to_string() })?;
                if m.format != FORMAT_VERSION || m.hash_algorithm != HASH_ALGORITHM {
                    return Err(StoreError::Incompatible {
                        path: root,
                        reason: format!("format {} / {}", m.format, m.hash_algorithm),
                    });
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                let m = Manifest { format: FORMAT_VERSION, hash_algorithm: HASH_ALGORITHM.into() };
                let body = serde_json::to_vec_pretty(&m).expect("manifest serializes");
                write_atomic(&manifest_path, &body)?;
            }
            Err(e) => return Err(StoreError::io(manifest_path)(e)),
        }

        let store =
            Self { root, index: RwLock::new(Index::default()), writer: Mutex::new(()), meta_stamp: Mutex::new(None) };
        store.reload()?;
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn meta_dir(&self) -> PathBuf {
        self.root.join(META_DIR)
    }

    fn reload(&self) -> Result<()> {
        let dir = self.meta_dir();
        let stamp = meta_stamp(&dir);
        let mut fresh = Index::default();
        for entry in fs::read_dir(&dir).map_err(StoreError::io(&dir))? {
            let entry = entry.map_err(StoreError::io(&dir))?;
            let name = entry.file_name();
            let name = name.to_string_lossy();
            let is_file = entry.file_type().map(|t| t.is_file()).unwrap_or(false);
            if !is_file || name.starts_with('.') || !name.ends_with(".json") {
                continue;
            }
            let path = entry.path();
            let bytes = fs::read(&path).map_err(StoreError::io(&path))?;
            let doc: ContractDocument = serde_json::from_slice(&bytes)
                .map_err(|e| StoreError::Corrupt { path: path.clone(), reason: e.to_string() })?;
            fresh.insert(doc);
        }
        for doc in fresh.docs.values() {
            if let Some(target) = doc.duplicate_of {
                if !fresh.docs.get(&target).is_some_and(ContractDocument::is_canonical) {
                    tracing::warn!(address = %doc.address, %target, "duplicate points at a missing or non-canonical document");
                }
            }
        }
        *self.index.write().expect("index lock") = fresh;
        *self.meta_stamp.lock().expect("stamp lock") = stamp;
        Ok(())
    }

    /// Re-reads the document collection if another process changed it.
    /// Returns whether a reload happened.
    pub fn refresh(&self) -> Result<bool> {
        let current = meta_stamp(&self.meta_dir());
        let known = *self.meta_stamp.lock().expect("stamp lock");
        if current.is_some() && current == known {
            return Ok(false);
        }
        let _w = self.writer.lock().expect("writer lock");
        self.reload()?;
        Ok(true)
    }

    pub fn len(&self) -> usize {
        self.index.read().expect("index lock").docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, address: &ContractAddress) -> bool {
        self.index.read().expect("index lock").docs.contains_key(address)
    }

    pub fn canonical_count(&self) -> usize {
        self.index.read().expect("index lock").canonical_by_hash.len()
    }

    pub fn document(&self, address: &ContractAddress) -> Option<ContractDocument> {
        self.index.read().expect("index lock").docs.get(address).cloned()
    }

    /// Absolute path of an artifact file (for canonical addresses).
    pub fn artifact_file(&self, address: &ContractAddress, kind: ArtifactKind) -> PathBuf {
        self.root.join(shard_path(address, kind))
    }

    pub fn put(
        &self,
        address: ContractAddress,
        artifacts: ContractArtifacts,
        extrinsic: ExtrinsicMetrics,
        retrieved_at: Timestamp,
    ) -> Result<ContractDocument> {
        self.put_with_provenance(address, artifacts, extrinsic, retrieved_at, None)
    }

    /// Stores one address. A source already held by a canonical document
    /// makes this address a duplicate of it: no artifact files are written
    /// and the canonical intrinsic vector is reused.
    pub fn put_with_provenance(
        &self,
        address: ContractAddress,
        artifacts: ContractArtifacts,
        extrinsic: ExtrinsicMetrics,
        retrieved_at: Timestamp,
        provenance_url: Option<String>,
    ) -> Result<ContractDocument> {
        if artifacts.source.is_empty() {
            return Err(StoreError::EmptySource);
        }
        extrinsic.validate().map_err(StoreError::InvalidExtrinsic)?;

        let _w = self.writer.lock().expect("writer lock");
        let source_hash = source_digest(artifacts.source.as_bytes());
        let canonical = {
            let idx = self.index.read().expect("index lock");
            if idx.docs.contains_key(&address) {
                return Err(StoreError::DuplicateAddress(address));
            }
            idx.canonical_by_hash.get(&source_hash).and_then(|a| idx.docs.get(a)).cloned()
        };

        let doc = match canonical {
            Some(canon) => {
                let doc = ContractDocument {
                    address,
                    source_hash,
                    duplicate_of: Some(canon.address),
                    intrinsic: canon.intrinsic,
                    extrinsic,
                    retrieved_at,
                    provenance_url,
                };
                self.write_document(&doc)?;
                doc
            }
            None => {
                let written = self.write_artifacts(&address, &artifacts)?;
                let doc = ContractDocument {
                    address,
                    source_hash,
                    duplicate_of: None,
                    intrinsic: metrics::analyze(&artifacts.source),
                    extrinsic,
                    retrieved_at,
                    provenance_url,
                };
                if let Err(e) = self.write_document(&doc) {
                    for path in written {
                        let _ = fs::remove_file(path);
                    }
                    return Err(e);
                }
                doc
            }
        };

        self.index.write().expect("index lock").insert(doc.clone());
        Ok(doc)
    }

    fn write_artifacts(&self, address: &ContractAddress, artifacts: &ContractArtifacts) -> Result<Vec<PathBuf>> {
        let bodies = [
            (ArtifactKind::Source, artifacts.source.as_bytes()),
            (ArtifactKind::Abi, artifacts.abi.as_bytes()),
            (ArtifactKind::Bytecode, artifacts.bytecode.as_bytes()),
        ];
        let mut written = Vec::with_capacity(3);
        for (kind, body) in bodies {
            let path = self.artifact_file(address, kind);
            let result = path
                .parent()
                .map_or(Ok(()), |dir| fs::create_dir_all(dir).map_err(StoreError::io(dir)))
                .and_then(|_| write_atomic(&path, body));
            if let Err(e) = result {
                for p in written {
                    let _ = fs::remove_file(p);
                }
                return Err(e);
            }
            written.push(path);
        }
        Ok(written)
    }

    fn write_document(&self, doc: &ContractDocument) -> Result<()> {
        let path = self.root.join(meta_path(&doc.address));
        write_atomic(&path, document_json(doc).as_bytes())
    }

    /// The document together with the artifacts it resolves to.
    pub fn get(&self, address: &ContractAddress) -> Result<(ContractDocument, ContractArtifacts)> {
        let doc = self.document(address).ok_or(StoreError::NotFound(*address))?;
        let artifacts = self.read_artifacts(&doc.artifact_owner())?;
        Ok((doc, artifacts))
    }

    /// Raw bytes of one artifact, resolved through `duplicateOf`.
    pub fn artifact_bytes(&self, address: &ContractAddress, kind: ArtifactKind) -> Result<Vec<u8>> {
        let doc = self.document(address).ok_or(StoreError::NotFound(*address))?;
        let path = self.artifact_file(&doc.artifact_owner(), kind);
        fs::read(&path).map_err(StoreError::io(path))
    }

    /// Files describing one address as they appear in an export: the three
    /// artifacts at the address's own shard paths (canonical bytes for
    /// duplicates) and its document at `meta/<address>.json`. Paths use `/`.
    pub fn export_entries(&self, address: &ContractAddress) -> Result<Vec<(String, Vec<u8>)>> {
        let doc = self.document(address).ok_or(StoreError::NotFound(*address))?;
        let mut out = Vec::with_capacity(4);
        for kind in ArtifactKind::ALL {
            let bytes = self.artifact_bytes(address, kind)?;
            out.push((slash_path(&shard_path(address, kind)), bytes));
        }
        out.push((slash_path(&meta_path(address)), document_json(&doc).into_bytes()));
        Ok(out)
    }

    fn read_artifacts(&self, owner: &ContractAddress) -> Result<ContractArtifacts> {
        let read_text = |kind| -> Result<String> {
            let path = self.artifact_file(owner, kind);
            let bytes = fs::read(&path).map_err(StoreError::io(&path))?;
            String::from_utf8(bytes)
                .map_err(|_| StoreError::Corrupt { path, reason: "artifact is not valid UTF-8".into() })
        };
        Ok(ContractArtifacts {
            source: SourceText::from(read_text(ArtifactKind::Source)?),
            abi: read_text(ArtifactKind::Abi)?,
            bytecode: read_text(ArtifactKind::Bytecode)?,
        })
    }

    /// All documents matching `predicate`, address ascending.
    pub fn scan(&self, predicate: impl Fn(&ContractDocument) -> bool) -> Vec<ContractDocument> {
        let idx = self.index.read().expect("index lock");
        idx.docs.values().filter(|d| predicate(d)).cloned().collect()
    }

    /// Ingest counts per UTC day of `retrievedAt`, dates ascending.
    pub fn daily_counts(&self) -> Vec<DailyCount> {
        let idx = self.index.read().expect("index lock");
        let mut by_day: BTreeMap<NaiveDate, u64> = BTreeMap::new();
        for doc in idx.docs.values() {
            *by_day.entry(utc_date(doc.retrieved_at)).or_default() += 1;
        }
        by_day.into_iter().map(|(date, count)| DailyCount { date, count }).collect()
    }
}

/// Directory mtime plus entry count; the count catches additions that land
/// within the filesystem's timestamp granularity.
fn meta_stamp(dir: &Path) -> Option<(SystemTime, usize)> {
    let mtime = fs::metadata(dir).and_then(|m| m.modified()).ok()?;
    let count = fs::read_dir(dir).ok()?.count();
    Some((mtime, count))
}

fn slash_path(p: &Path) -> String {
    p.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
}

pub fn utc_date(ts: Timestamp) -> NaiveDate {
    DateTime::from_timestamp(ts, 0).map(|dt| dt.date_naive()).unwrap_or(if ts < 0 {
        NaiveDate::MIN
    } else {
        NaiveDate::MAX
    })
}

/// The exact JSON written to `meta/<address>.json`.
pub fn document_json(doc: &ContractDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document serializes");
    s.push('\n');
    s
}

fn write_atomic(path: &Path, body: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}-{}", std::process::id(), TMP_COUNTER.fetch_add(1, Ordering::Relaxed)));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(body)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        StoreError::io(path)(e)
    })
}
