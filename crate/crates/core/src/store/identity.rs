use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::TryRngCore;
use sha2::{Digest, Sha256};

use super::StoreError;

/// Anonymous user id: 64 lowercase hex characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UserIdentity(String);

impl UserIdentity {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for UserIdentity {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, StoreError> {
        let s = s.trim();
        if s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            Ok(UserIdentity(s.to_string()))
        } else {
            Err(StoreError::InvalidIdentity(format!("expected 64 lowercase hex characters, got {s:?}")))
        }
    }
}

impl fmt::Display for UserIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// SHA-256 of `data`, two hex digits per byte.
pub fn sha256_hex(data: &[u8]) -> String {
    let digest = Sha256::digest(data);
    let mut out = String::with_capacity(64);
    for byte in digest.iter() {
        write!(out, "{byte:02x}").expect("writing to a String");
    }
    out
}

/// Hashes the current time, a random fraction, the process id and a fresh
/// 256-bit random key into a new id. Entropy failures are returned as is.
pub fn generate_identity<R: TryRngCore>(rng: &mut R, now_ms: i64, process_id: u32) -> Result<UserIdentity, R::Error> {
    let fraction = (rng.try_next_u64()? >> 11) as f64 / (1u64 << 53) as f64;
    let mut key = [0u8; 32];
    rng.try_fill_bytes(&mut key)?;
    let key_text: String = key.iter().map(|b| format!("{b:02x}")).collect();
    let material = format!("{now_ms}{fraction}{process_id}{key_text}");
    Ok(UserIdentity(sha256_hex(material.as_bytes())))
}

/// [`generate_identity`] with the operating system's entropy, clock and pid.
pub fn generate_identity_from_os() -> Result<UserIdentity, StoreError> {
    let now_ms = chrono::Utc::now().timestamp_millis();
    generate_identity(&mut rand::rngs::OsRng, now_ms, std::process::id())
        .map_err(|e| StoreError::InvalidIdentity(format!("entropy source failed: {e}")))
}
