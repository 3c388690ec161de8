//! CBC framing for arbitrary-length payloads.
//!
//! Layout, all integers big-endian:
//!
//! ```text
//! "QSE1" | iv (16) | payload_len (u64) | ciphertext (payload_len rounded up to 16)
//! ```
//!
//! The final block is zero-padded and the true length lives in the header, so
//! decrypting with the wrong key produces garbage of the right size instead of
//! a padding failure.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::cipher::{decrypt_block, encrypt_block, expand, AesKey, BLOCK_SIZE};
use super::AesError;

pub const ENVELOPE_MAGIC: [u8; 4] = *b"QSE1";
pub const HEADER_LEN: usize = 4 + BLOCK_SIZE + 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherEnvelope {
    pub iv: [u8; BLOCK_SIZE],
    pub payload_len: u64,
    pub ciphertext: Vec<u8>,
}

fn padded_len(len: u64) -> u64 {
    len.div_ceil(BLOCK_SIZE as u64) * BLOCK_SIZE as u64
}

impl CipherEnvelope {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.ciphertext.len());
        out.extend_from_slice(&ENVELOPE_MAGIC);
        out.extend_from_slice(&self.iv);
        out.extend_from_slice(&self.payload_len.to_be_bytes());
        out.extend_from_slice(&self.ciphertext);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AesError> {
        if bytes.len() < HEADER_LEN {
            return Err(AesError::Truncated {
                needed: HEADER_LEN,
                have: bytes.len(),
            });
        }
        let magic: [u8; 4] = bytes[..4].try_into().unwrap();
        if magic != ENVELOPE_MAGIC {
            return Err(AesError::BadMagic(magic));
        }
        let iv: [u8; BLOCK_SIZE] = bytes[4..4 + BLOCK_SIZE].try_into().unwrap();
        let payload_len = u64::from_be_bytes(bytes[4 + BLOCK_SIZE..HEADER_LEN].try_into().unwrap());
        let ciphertext = &bytes[HEADER_LEN..];
        let expected = padded_len(payload_len);
        if (ciphertext.len() as u64) < expected {
            return Err(AesError::Truncated {
                needed: HEADER_LEN.saturating_add(usize::try_from(expected).unwrap_or(usize::MAX)),
                have: bytes.len(),
            });
        }
        if ciphertext.len() as u64 != expected {
            return Err(AesError::LengthMismatch {
                payload_len,
                ciphertext: ciphertext.len(),
            });
        }
        Ok(Self {
            iv,
            payload_len,
            ciphertext: ciphertext.to_vec(),
        })
    }
}

pub fn encrypt_payload(plaintext: &[u8], key: &AesKey, iv: [u8; BLOCK_SIZE]) -> CipherEnvelope {
    let keys = expand(key);
    let mut ciphertext = Vec::with_capacity(padded_len(plaintext.len() as u64) as usize);
    let mut chain = iv;
    for chunk in plaintext.chunks(BLOCK_SIZE) {
        let mut block = [0u8; BLOCK_SIZE];
        block[..chunk.len()].copy_from_slice(chunk);
        for (b, c) in block.iter_mut().zip(chain) {
            *b ^= c;
        }
        chain = encrypt_block(&block, &keys);
        ciphertext.extend_from_slice(&chain);
    }
    CipherEnvelope {
        iv,
        payload_len: plaintext.len() as u64,
        ciphertext,
    }
}

/// Never fails for a well-formed envelope; a wrong key yields wrong bytes.
pub fn decrypt_payload(envelope: &CipherEnvelope, key: &AesKey) -> Vec<u8> {
    let keys = expand(key);
    let mut plain = Vec::with_capacity(envelope.ciphertext.len());
    let mut chain = envelope.iv;
    for chunk in envelope.ciphertext.chunks_exact(BLOCK_SIZE) {
        let block: [u8; BLOCK_SIZE] = chunk.try_into().unwrap();
        let mut out = decrypt_block(&block, &keys);
        for (b, c) in out.iter_mut().zip(chain) {
            *b ^= c;
        }
        plain.extend_from_slice(&out);
        chain = block;
    }
    plain.truncate(envelope.payload_len as usize);
    plain
}

/// Deterministic IV for reproducible runs.
pub fn iv_from_seed(seed: u64) -> [u8; BLOCK_SIZE] {
    let mut iv = [0u8; BLOCK_SIZE];
    ChaCha20Rng::seed_from_u64(seed).fill_bytes(&mut iv);
    iv
}

pub fn random_iv() -> [u8; BLOCK_SIZE] {
    let mut iv = [0u8; BLOCK_SIZE];
    rand::rngs::OsRng.fill_bytes(&mut iv);
    iv
}
