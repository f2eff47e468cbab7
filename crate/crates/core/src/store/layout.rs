use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::address::ContractAddress;

/// The three artifact files kept per canonical contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArtifactKind {
    Source,
    Abi,
    Bytecode,
}

impl ArtifactKind {
    pub const ALL: [ArtifactKind; 3] = [ArtifactKind::Source, ArtifactKind::Abi, ArtifactKind::Bytecode];

    pub fn extension(self) -> &'static str {
        match self {
            ArtifactKind::Source => "sol",
            ArtifactKind::Abi => "abi",
            ArtifactKind::Bytecode => "bytecode",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ArtifactKind::Source => "source",
            ArtifactKind::Abi => "abi",
            ArtifactKind::Bytecode => "bytecode",
        }
    }
}

impl fmt::Display for ArtifactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ArtifactKind {
    type Err = String;

    /// Accepts either the kind name (`source`) or the file extension (`sol`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "source" | "sol" => Ok(ArtifactKind::Source),
            "abi" => Ok(ArtifactKind::Abi),
            "bytecode" => Ok(ArtifactKind::Bytecode),
            other => Err(format!("unknown artifact kind {other:?}")),
        }
    }
}

/// `<hh>/<0xaddress>.<ext>`, where `hh` is the first two hex digits after `0x`.
pub fn shard_path(address: &ContractAddress, kind: ArtifactKind) -> PathBuf {
    let mut p = PathBuf::from(address.shard_prefix());
    p.push(format!("{address}.{}", kind.extension()));
    p
}

/// `meta/<0xaddress>.json`
pub fn meta_path(address: &ContractAddress) -> PathBuf {
    let mut p = PathBuf::from(super::META_DIR);
    p.push(format!("{address}.json"));
    p
}
