//! Privacy amplification by hashing, and cross-node key comparison.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::entropy::lzw_compress_size;
use crate::error::{Error, Result};

pub const KEY_BITS: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyMaterial {
    pub key: [u8; 32],
    pub source_bits: usize,
    pub entropy_bound_bits: usize,
    /// Set when the entropy bound is below the key length.
    pub warning: bool,
}

impl KeyMaterial {
    pub fn hex(&self) -> String {
        hex::encode(self.key)
    }
}

/// Bits packed MSB-first, zero-padded in the last byte, followed by the
/// unpadded bit count as a big-endian u64.
pub fn hash_input(bits: &[bool]) -> Vec<u8> {
    let mut out: Vec<u8> = bits
        .chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)))
        })
        .collect();
    out.extend_from_slice(&(bits.len() as u64).to_be_bytes());
    out
}

/// SHA-256 over the framed bit stream.
pub fn amplify(bits: &[bool], entropy_bound_bits: usize) -> Result<KeyMaterial> {
    if bits.is_empty() {
        return Err(Error::EmptyInput("cannot derive a key from an empty bit stream"));
    }
    let key: [u8; 32] = Sha256::digest(hash_input(bits)).into();
    Ok(KeyMaterial {
        key,
        source_bits: bits.len(),
        entropy_bound_bits,
        warning: entropy_bound_bits < KEY_BITS,
    })
}

/// Hamming distance over length.
pub fn key_disagreement_rate(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("disagreement rate of empty streams"));
    }
    let diff = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok(diff as f64 / a.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub pre_hash_kdr: f64,
    pub keys_match: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agreement {
    pub alice_bob: AgreementReport,
    pub alice_eve: Option<AgreementReport>,
    pub alice_key: KeyMaterial,
    pub bob_key: KeyMaterial,
    pub eve_key: Option<KeyMaterial>,
}

fn derive(bits: &[bool]) -> Result<KeyMaterial> {
    let bound = lzw_compress_size(bits)?.entropy_upper_bound_bits;
    amplify(bits, bound)
}

/// Compares each node against Alice and derives every node's key from its
/// own stream and entropy bound.
pub fn agree(alice: &[bool], bob: &[bool], eve: Option<&[bool]>) -> Result<Agreement> {
    let alice_key = derive(alice)?;
    let bob_key = derive(bob)?;
    let alice_bob = AgreementReport {
        pre_hash_kdr: key_disagreement_rate(alice, bob)?,
        keys_match: alice_key.key == bob_key.key,
    };
    let (alice_eve, eve_key) = match eve {
        Some(eve) => {
            let key = derive(eve)?;
            let report = AgreementReport {
                pre_hash_kdr: key_disagreement_rate(alice, eve)?,
                keys_match: alice_key.key == key.key,
            };
            (Some(report), Some(key))
        }
        None => (None, None),
    };
    Ok(Agreement {
        alice_bob,
        alice_eve,
        alice_key,
        bob_key,
        eve_key,
    })
}
