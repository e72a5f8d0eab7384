use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};

use super::CodeModelError;
use crate::tlsh::{self, Tlsh};

/// Bodies shorter than this many bytes are fingerprinted with SHA-256.
pub const FUZZY_MIN_LEN: usize = tlsh::MIN_DATA_LENGTH;

/// Returned by [`distance`] for two different exact hashes.
pub const INFINITE_DISTANCE: u32 = u32::MAX;

const EXACT_PREFIX: &str = "sha256:";

/// Fingerprint of a normalized code body.
///
/// Serialized as a bare string: the 70-hex TLSH body, or `sha256:<hex>` for
/// the exact-hash fallback.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FuzzyDigest {
    Tlsh(String),
    ExactHash(String),
}

impl FuzzyDigest {
    /// Canonical identity string, used as the hash-index key.
    pub fn hex(&self) -> &str {
        match self {
            FuzzyDigest::Tlsh(h) | FuzzyDigest::ExactHash(h) => h,
        }
    }

    pub fn is_fuzzy(&self) -> bool {
        matches!(self, FuzzyDigest::Tlsh(_))
    }
}

impl fmt::Display for FuzzyDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FuzzyDigest::Tlsh(h) => f.write_str(h),
            FuzzyDigest::ExactHash(h) => write!(f, "{EXACT_PREFIX}{h}"),
        }
    }
}

impl fmt::Debug for FuzzyDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FuzzyDigest({self})")
    }
}

impl FromStr for FuzzyDigest {
    type Err = CodeModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(hex) = s.strip_prefix(EXACT_PREFIX) {
            if hex.len() == 64 && hex.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Ok(FuzzyDigest::ExactHash(hex.to_ascii_lowercase()));
            }
        } else if let Some(t) = Tlsh::from_hex(s) {
            return Ok(FuzzyDigest::Tlsh(t.to_hex()));
        }
        Err(CodeModelError::BadDigest(s.to_string()))
    }
}

impl Serialize for FuzzyDigest {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FuzzyDigest {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Fingerprint a normalized body.
pub fn digest(normalized_body: &str) -> FuzzyDigest {
    let bytes = normalized_body.as_bytes();
    if bytes.len() >= FUZZY_MIN_LEN {
        if let Some(t) = Tlsh::from_data(bytes) {
            return FuzzyDigest::Tlsh(t.to_hex());
        }
    }
    let sum = Sha256::digest(bytes);
    FuzzyDigest::ExactHash(sum.iter().map(|b| format!("{b:02x}")).collect())
}

/// TLSH distance between two digests; exact hashes are 0 or
/// [`INFINITE_DISTANCE`].
pub fn distance(a: &FuzzyDigest, b: &FuzzyDigest) -> Result<u32, CodeModelError> {
    match (a, b) {
        (FuzzyDigest::Tlsh(x), FuzzyDigest::Tlsh(y)) => {
            if x == y {
                return Ok(0);
            }
            let (x, y) = (
                Tlsh::from_hex(x).ok_or_else(|| CodeModelError::BadDigest(x.clone()))?,
                Tlsh::from_hex(y).ok_or_else(|| CodeModelError::BadDigest(y.clone()))?,
            );
            Ok(x.diff(&y))
        }
        (FuzzyDigest::ExactHash(x), FuzzyDigest::ExactHash(y)) => {
            Ok(if x == y { 0 } else { INFINITE_DISTANCE })
        }
        _ => Err(CodeModelError::AlgorithmMismatch),
    }
}

/// Like [`distance`] but treats mismatched families as infinitely far apart.
pub fn distance_or_infinite(a: &FuzzyDigest, b: &FuzzyDigest) -> u32 {
    distance(a, b).unwrap_or(INFINITE_DISTANCE)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LONG: &str = "static int add(int a, int b)\n{\nint sum = a + b;\nif (sum < a) return -1;\nreturn sum;\n}";

    #[test]
    fn short_bodies_fall_back_to_exact_hash() {
        let d = digest("int f;");
        assert!(!d.is_fuzzy());
        assert_eq!(distance(&d, &d).unwrap(), 0);
        assert_eq!(distance(&d, &digest("int g;")).unwrap(), INFINITE_DISTANCE);
    }

    #[test]
    fn long_bodies_get_tlsh() {
        let d = digest(LONG);
        assert!(d.is_fuzzy());
        assert_eq!(d.hex().len(), tlsh::HEX_LEN);
        assert_eq!(distance(&d, &d).unwrap(), 0);
    }

    #[test]
    fn mixing_families_is_an_error() {
        let err = distance(&digest(LONG), &digest("x")).unwrap_err();
        assert!(matches!(err, CodeModelError::AlgorithmMismatch));
        assert_eq!(distance_or_infinite(&digest(LONG), &digest("x")), INFINITE_DISTANCE);
    }

    #[test]
    fn string_form_round_trips() {
        for d in [digest(LONG), digest("tiny")] {
            let s = d.to_string();
            assert_eq!(s.parse::<FuzzyDigest>().unwrap(), d);
            let json = serde_json::to_string(&d).unwrap();
            assert_eq!(serde_json::from_str::<FuzzyDigest>(&json).unwrap(), d);
        }
        assert!("nonsense".parse::<FuzzyDigest>().is_err());
    }
}
