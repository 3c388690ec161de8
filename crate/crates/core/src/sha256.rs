//! SHA-256 written out from its primitives, used to turn a sifted key of any
//! length into a 256-bit cipher key.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bits::KeyBits;

/// Fractional parts of the square roots of the first eight primes.
pub const INITIAL_HASH: [u32; 8] = [
    0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19,
];

/// Fractional parts of the cube roots of the first 64 primes.
pub const ROUND_CONSTANTS: [u32; 64] = [
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
];

pub const BLOCK_BYTES: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HashError {
    #[error("cannot derive a key from an empty bit string")]
    EmptyKey,
    #[error("digest must be 64 hex characters")]
    BadHex,
}

/// One 512-bit block as sixteen big-endian words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageBlock {
    pub words: [u32; 16],
}

impl MessageBlock {
    pub fn from_bytes(bytes: &[u8; BLOCK_BYTES]) -> Self {
        let mut words = [0u32; 16];
        for (w, chunk) in words.iter_mut().zip(bytes.chunks_exact(4)) {
            *w = u32::from_be_bytes(chunk.try_into().unwrap());
        }
        Self { words }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct HashDigest {
    pub h: [u32; 8],
}

impl HashDigest {
    pub fn to_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for (chunk, w) in out.chunks_exact_mut(4).zip(self.h) {
            chunk.copy_from_slice(&w.to_be_bytes());
        }
        out
    }

    /// Lowercase, no prefix.
    pub fn hex(&self) -> String {
        self.h.iter().map(|w| format!("{w:08x}")).collect()
    }
}

impl fmt::Display for HashDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hex())
    }
}

impl fmt::Debug for HashDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HashDigest({})", self.hex())
    }
}

impl FromStr for HashDigest {
    type Err = HashError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 64 || !s.is_ascii() {
            return Err(HashError::BadHex);
        }
        let mut h = [0u32; 8];
        for (i, w) in h.iter_mut().enumerate() {
            *w = u32::from_str_radix(&s[8 * i..8 * i + 8], 16).map_err(|_| HashError::BadHex)?;
        }
        Ok(Self { h })
    }
}

/// Append `0x80`, zero-fill, then the 64-bit big-endian bit length.
pub fn pad_message(message: &[u8]) -> Vec<u8> {
    let bit_len = (message.len() as u64).wrapping_mul(8);
    let mut padded = Vec::with_capacity(message.len() + 2 * BLOCK_BYTES);
    padded.extend_from_slice(message);
    padded.push(0x80);
    while padded.len() % BLOCK_BYTES != BLOCK_BYTES - 8 {
        padded.push(0);
    }
    padded.extend_from_slice(&bit_len.to_be_bytes());
    padded
}

fn small_sigma0(x: u32) -> u32 {
    x.rotate_right(7) ^ x.rotate_right(18) ^ (x >> 3)
}

fn small_sigma1(x: u32) -> u32 {
    x.rotate_right(17) ^ x.rotate_right(19) ^ (x >> 10)
}

fn big_sigma0(x: u32) -> u32 {
    x.rotate_right(2) ^ x.rotate_right(13) ^ x.rotate_right(22)
}

fn big_sigma1(x: u32) -> u32 {
    x.rotate_right(6) ^ x.rotate_right(11) ^ x.rotate_right(25)
}

fn ch(x: u32, y: u32, z: u32) -> u32 {
    (x & y) ^ (!x & z)
}

fn maj(x: u32, y: u32, z: u32) -> u32 {
    (x & y) ^ (x & z) ^ (y & z)
}

/// Expand sixteen block words into the 64-word schedule.
pub fn message_schedule(block: &MessageBlock) -> [u32; 64] {
    let mut w = [0u32; 64];
    w[..16].copy_from_slice(&block.words);
    for t in 16..64 {
        w[t] = small_sigma1(w[t - 2])
            .wrapping_add(w[t - 7])
            .wrapping_add(small_sigma0(w[t - 15]))
            .wrapping_add(w[t - 16]);
    }
    w
}

/// Run the 64-round compression function over one block.
pub fn compress(state: [u32; 8], block: &MessageBlock) -> [u32; 8] {
    let w = message_schedule(block);
    let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut h] = state;
    for t in 0..64 {
        let t1 = h
            .wrapping_add(big_sigma1(e))
            .wrapping_add(ch(e, f, g))
            .wrapping_add(ROUND_CONSTANTS[t])
            .wrapping_add(w[t]);
        let t2 = big_sigma0(a).wrapping_add(maj(a, b, c));
        h = g;
        g = f;
        f = e;
        e = d.wrapping_add(t1);
        d = c;
        c = b;
        b = a;
        a = t1.wrapping_add(t2);
    }
    let mut out = state;
    for (o, v) in out.iter_mut().zip([a, b, c, d, e, f, g, h]) {
        *o = o.wrapping_add(v);
    }
    out
}

pub fn digest(message: &[u8]) -> HashDigest {
    let padded = pad_message(message);
    let h = padded
        .chunks_exact(BLOCK_BYTES)
        .map(|chunk| MessageBlock::from_bytes(chunk.try_into().unwrap()))
        .fold(INITIAL_HASH, |state, block| compress(state, &block));
    HashDigest { h }
}

/// Hash the ASCII `'0'`/`'1'` rendering of the key.
pub fn derive_key(key: &KeyBits) -> Result<HashDigest, HashError> {
    if key.is_empty() {
        return Err(HashError::EmptyKey);
    }
    Ok(digest(&key.to_ascii()))
}
