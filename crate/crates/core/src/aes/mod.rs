//! AES-256 and the `.qse` envelope used to carry encrypted images.

mod cipher;
mod envelope;

pub use cipher::{
    add_round_key, decrypt_block, encrypt_block, expand, gf_mul, inv_mix_columns,
    inv_mix_single_column, inv_sbox, inv_shift_rows, inv_sub_bytes, key_expansion, mix_columns,
    mix_single_column, sbox, shift_rows, sub_bytes, AesKey, RoundKeys, State, BLOCK_SIZE, KEY_SIZE,
    ROUNDS,
};
pub use envelope::{
    decrypt_payload, encrypt_payload, iv_from_seed, random_iv, CipherEnvelope, ENVELOPE_MAGIC,
    HEADER_LEN,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AesError {
    #[error("AES-256 needs a 32-byte key, got {0} bytes")]
    KeyLength(usize),
    #[error("envelope truncated: need at least {needed} bytes, have {have}")]
    Truncated { needed: usize, have: usize },
    #[error("bad envelope magic {0:02x?}; expected \"QSE1\"")]
    BadMagic([u8; 4]),
    #[error("ciphertext length {ciphertext} does not match payload length {payload_len}")]
    LengthMismatch { payload_len: u64, ciphertext: usize },
}
