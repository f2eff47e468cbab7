use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A 20-byte account identifier.
///
/// Text form is always `0x` followed by 40 lowercase hex digits. Parsing
/// accepts either case (including EIP-55 checksummed input) and normalizes.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContractAddress([u8; 20]);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid contract address {input:?}: {reason}")]
pub struct AddressParseError {
    pub input: String,
    pub reason: &'static str,
}

impl ContractAddress {
    pub const ZERO: ContractAddress = ContractAddress([0; 20]);

    pub const fn from_bytes(bytes: [u8; 20]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    /// Canonical `0x…` rendering.
    pub fn to_hex(&self) -> String {
        format!("0x{}", hex::encode(self.0))
    }

    /// First two hex digits after the prefix; used as the directory shard.
    pub fn shard_prefix(&self) -> String {
        hex::encode(&self.0[..1])
    }
}

impl FromStr for ContractAddress {
    type Err = AddressParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| AddressParseError { input: s.to_string(), reason };
        let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).ok_or_else(|| err("missing 0x prefix"))?;
        if digits.len() != 40 {
            return Err(err("expected 40 hex digits"));
        }
        let mut out = [0u8; 20];
        hex::decode_to_slice(digits, &mut out).map_err(|_| err("non-hex character"))?;
        Ok(Self(out))
    }
}

impl fmt::Display for ContractAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("0x")?;
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ContractAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContractAddress({self})")
    }
}

impl Serialize for ContractAddress {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for ContractAddress {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_normalizes_mixed_case() {
        let a: ContractAddress = "0xB7F4C286851CBF0CBF2FE8EBF40412B196C0E8AD".parse().unwrap();
        assert_eq!(a.to_string(), "0xb7f4c286851cbf0cbf2fe8ebf40412b196c0e8ad");
        assert_eq!(a.shard_prefix(), "b7");
    }

    #[test]
    fn rejects_malformed() {
        assert!("b7f4c286851cbf0cbf2fe8ebf40412b196c0e8ad".parse::<ContractAddress>().is_err());
        assert!("0xb7f4".parse::<ContractAddress>().is_err());
        assert!("0xg7f4c286851cbf0cbf2fe8ebf40412b196c0e8ad".parse::<ContractAddress>().is_err());
    }

    #[test]
    fn serde_uses_canonical_text() {
        let json = serde_json::to_string(&ContractAddress::ZERO).unwrap();
        assert_eq!(json, "\"0x0000000000000000000000000000000000000000\"");
        let back: ContractAddress = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ContractAddress::ZERO);
    }
}
