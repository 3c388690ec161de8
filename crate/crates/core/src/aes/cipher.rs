//! AES-256 block cipher.
//!
//! The S-box is generated at first use from its definition: multiplicative
//! inverse in GF(2⁸) modulo `x⁸ + x⁴ + x³ + x + 1`, followed by the affine map
//! with constant `0x63`.

use std::sync::OnceLock;

use super::AesError;

pub const BLOCK_SIZE: usize = 16;
pub const KEY_SIZE: usize = 32;
/// Rounds for a 256-bit key.
pub const ROUNDS: usize = 14;
const NK: usize = 8;
const SCHEDULE_WORDS: usize = 4 * (ROUNDS + 1);

/// A 256-bit cipher key.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct AesKey([u8; KEY_SIZE]);

impl AesKey {
    pub fn new(bytes: [u8; KEY_SIZE]) -> Self {
        Self(bytes)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self, AesError> {
        let arr: [u8; KEY_SIZE] = bytes
            .try_into()
            .map_err(|_| AesError::KeyLength(bytes.len()))?;
        Ok(Self(arr))
    }

    pub fn as_bytes(&self) -> &[u8; KEY_SIZE] {
        &self.0
    }
}

impl std::fmt::Debug for AesKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("AesKey(..)")
    }
}

impl From<crate::sha256::HashDigest> for AesKey {
    fn from(d: crate::sha256::HashDigest) -> Self {
        Self(d.to_bytes())
    }
}

/// Multiply in GF(2⁸).
pub fn gf_mul(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0u8;
    while b != 0 {
        if b & 1 != 0 {
            p ^= a;
        }
        let carry = a & 0x80 != 0;
        a <<= 1;
        if carry {
            a ^= 0x1b;
        }
        b >>= 1;
    }
    p
}

fn gf_inverse(a: u8) -> u8 {
    if a == 0 {
        return 0;
    }
    // a^254 = a^-1 since the multiplicative group has order 255
    let mut result = 1u8;
    let mut base = a;
    let mut e = 254u32;
    while e > 0 {
        if e & 1 != 0 {
            result = gf_mul(result, base);
        }
        base = gf_mul(base, base);
        e >>= 1;
    }
    result
}

fn affine(b: u8) -> u8 {
    b ^ b.rotate_left(1) ^ b.rotate_left(2) ^ b.rotate_left(3) ^ b.rotate_left(4) ^ 0x63
}

struct SBoxes {
    forward: [u8; 256],
    inverse: [u8; 256],
}

fn sboxes() -> &'static SBoxes {
    static TABLES: OnceLock<SBoxes> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut forward = [0u8; 256];
        let mut inverse = [0u8; 256];
        for x in 0..=255u8 {
            let s = affine(gf_inverse(x));
            forward[usize::from(x)] = s;
            inverse[usize::from(s)] = x;
        }
        SBoxes { forward, inverse }
    })
}

pub fn sbox(x: u8) -> u8 {
    sboxes().forward[usize::from(x)]
}

pub fn inv_sbox(x: u8) -> u8 {
    sboxes().inverse[usize::from(x)]
}

/// 4×4 byte state, stored column-major: byte `i` sits at row `i % 4`,
/// column `i / 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct State(pub [u8; BLOCK_SIZE]);

impl State {
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.0[4 * col + row]
    }

    pub fn set(&mut self, row: usize, col: usize, v: u8) {
        self.0[4 * col + row] = v;
    }

    pub fn row(&self, row: usize) -> [u8; 4] {
        [0, 1, 2, 3].map(|c| self.get(row, c))
    }
}

pub fn sub_bytes(state: &mut State) {
    let t = &sboxes().forward;
    for b in &mut state.0 {
        *b = t[usize::from(*b)];
    }
}

pub fn inv_sub_bytes(state: &mut State) {
    let t = &sboxes().inverse;
    for b in &mut state.0 {
        *b = t[usize::from(*b)];
    }
}

/// Row `r` rotates left by `r`.
pub fn shift_rows(state: &mut State) {
    for r in 1..4 {
        let mut row = state.row(r);
        row.rotate_left(r);
        for (c, v) in row.into_iter().enumerate() {
            state.set(r, c, v);
        }
    }
}

pub fn inv_shift_rows(state: &mut State) {
    for r in 1..4 {
        let mut row = state.row(r);
        row.rotate_right(r);
        for (c, v) in row.into_iter().enumerate() {
            state.set(r, c, v);
        }
    }
}

fn mix_column(col: [u8; 4], m: [u8; 4]) -> [u8; 4] {
    // circulant matrix whose first row is m
    let mut out = [0u8; 4];
    for (r, o) in out.iter_mut().enumerate() {
        *o = (0..4).fold(0, |acc, c| acc ^ gf_mul(m[(c + 4 - r) % 4], col[c]));
    }
    out
}

pub fn mix_single_column(col: [u8; 4]) -> [u8; 4] {
    mix_column(col, [0x02, 0x03, 0x01, 0x01])
}

pub fn inv_mix_single_column(col: [u8; 4]) -> [u8; 4] {
    mix_column(col, [0x0e, 0x0b, 0x0d, 0x09])
}

pub fn mix_columns(state: &mut State) {
    for chunk in state.0.chunks_exact_mut(4) {
        let col = mix_single_column(chunk.try_into().unwrap());
        chunk.copy_from_slice(&col);
    }
}

pub fn inv_mix_columns(state: &mut State) {
    for chunk in state.0.chunks_exact_mut(4) {
        let col = inv_mix_single_column(chunk.try_into().unwrap());
        chunk.copy_from_slice(&col);
    }
}

pub fn add_round_key(state: &mut State, round_key: &[u8; BLOCK_SIZE]) {
    for (b, k) in state.0.iter_mut().zip(round_key) {
        *b ^= k;
    }
}

/// Expanded key schedule: fifteen 16-byte round keys.
#[derive(Clone, PartialEq, Eq)]
pub struct RoundKeys([[u8; BLOCK_SIZE]; ROUNDS + 1]);

impl RoundKeys {
    pub fn round(&self, i: usize) -> &[u8; BLOCK_SIZE] {
        &self.0[i]
    }

    /// The sixty schedule words, big-endian.
    pub fn words(&self) -> [u32; SCHEDULE_WORDS] {
        let mut out = [0u32; SCHEDULE_WORDS];
        for (i, w) in out.iter_mut().enumerate() {
            let rk = &self.0[i / 4];
            *w = u32::from_be_bytes(rk[4 * (i % 4)..4 * (i % 4) + 4].try_into().unwrap());
        }
        out
    }
}

impl std::fmt::Debug for RoundKeys {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("RoundKeys(..)")
    }
}

/// Standard Nk = 8 schedule. Accepts a raw slice so that bad lengths surface
/// as an error rather than a panic.
pub fn key_expansion(key: &[u8]) -> Result<RoundKeys, AesError> {
    let key = AesKey::from_slice(key)?;
    Ok(expand(&key))
}

pub fn expand(key: &AesKey) -> RoundKeys {
    let mut w = [[0u8; 4]; SCHEDULE_WORDS];
    for (i, word) in w.iter_mut().take(NK).enumerate() {
        word.copy_from_slice(&key.0[4 * i..4 * i + 4]);
    }
    let mut rcon = 0x01u8;
    for i in NK..SCHEDULE_WORDS {
        let mut temp = w[i - 1];
        if i % NK == 0 {
            temp.rotate_left(1);
            temp = temp.map(sbox);
            temp[0] ^= rcon;
            rcon = gf_mul(rcon, 0x02);
        } else if i % NK == 4 {
            temp = temp.map(sbox);
        }
        for j in 0..4 {
            w[i][j] = w[i - NK][j] ^ temp[j];
        }
    }
    let mut keys = [[0u8; BLOCK_SIZE]; ROUNDS + 1];
    for (r, rk) in keys.iter_mut().enumerate() {
        for c in 0..4 {
            rk[4 * c..4 * c + 4].copy_from_slice(&w[4 * r + c]);
        }
    }
    RoundKeys(keys)
}

pub fn encrypt_block(block: &[u8; BLOCK_SIZE], keys: &RoundKeys) -> [u8; BLOCK_SIZE] {
    let mut s = State(*block);
    add_round_key(&mut s, keys.round(0));
    for round in 1..ROUNDS {
        sub_bytes(&mut s);
        shift_rows(&mut s);
        mix_columns(&mut s);
        add_round_key(&mut s, keys.round(round));
    }
    sub_bytes(&mut s);
    shift_rows(&mut s);
    add_round_key(&mut s, keys.round(ROUNDS));
    s.0
}

pub fn decrypt_block(block: &[u8; BLOCK_SIZE], keys: &RoundKeys) -> [u8; BLOCK_SIZE] {
    let mut s = State(*block);
    add_round_key(&mut s, keys.round(ROUNDS));
    inv_shift_rows(&mut s);
    inv_sub_bytes(&mut s);
    for round in (1..ROUNDS).rev() {
        add_round_key(&mut s, keys.round(round));
        inv_mix_columns(&mut s);
        inv_shift_rows(&mut s);
        inv_sub_bytes(&mut s);
    }
    add_round_key(&mut s, keys.round(0));
    s.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sbox_fixed_points_from_definition() {
        assert_eq!(sbox(0x00), 0x63);
        assert_eq!(sbox(0x53), 0xed);
        assert_eq!(inv_sbox(0x63), 0x00);
    }

    #[test]
    fn sbox_is_a_bijection() {
        let mut seen = [false; 256];
        for x in 0..=255u8 {
            let s = sbox(x);
            assert!(!seen[usize::from(s)]);
            seen[usize::from(s)] = true;
            assert_eq!(inv_sbox(s), x);
        }
    }

    #[test]
    fn gf_inverse_really_inverts() {
        for a in 1..=255u8 {
            assert_eq!(gf_mul(a, gf_inverse(a)), 1, "a = {a:#04x}");
        }
    }

    #[test]
    fn shift_rows_rows() {
        let mut s = State(core::array::from_fn(|i| i as u8));
        let before = s;
        shift_rows(&mut s);
        assert_eq!(s.row(0), before.row(0));
        let r2 = before.row(2);
        assert_eq!(s.row(2), [r2[2], r2[3], r2[0], r2[1]]);
        let r1 = before.row(1);
        assert_eq!(s.row(1), [r1[1], r1[2], r1[3], r1[0]]);
        inv_shift_rows(&mut s);
        assert_eq!(s, before);
    }

    #[test]
    fn mix_zero_column() {
        assert_eq!(mix_single_column([0; 4]), [0; 4]);
    }

    #[test]
    fn inv_mix_covers_all_single_byte_variations() {
        for pos in 0..4 {
            for v in 0..=255u8 {
                let mut col = [0x11, 0x22, 0x33, 0x44];
                col[pos] = v;
                assert_eq!(inv_mix_single_column(mix_single_column(col)), col);
            }
        }
    }

    #[test]
    fn key_expansion_rejects_wrong_length() {
        assert_eq!(
            key_expansion(&[0u8; 16]).unwrap_err(),
            AesError::KeyLength(16)
        );
        assert!(key_expansion(&[0u8; 33]).is_err());
    }

    #[test]
    fn first_round_keys_are_raw_key() {
        let key: [u8; 32] = core::array::from_fn(|i| (i * 7) as u8);
        let rk = key_expansion(&key).unwrap();
        assert_eq!(rk.round(0), &key[..16]);
        assert_eq!(rk.round(1), &key[16..]);
    }

    #[test]
    fn zero_key_expansion_is_stable() {
        let a = key_expansion(&[0u8; 32]).unwrap();
        let b = key_expansion(&[0u8; 32]).unwrap();
        assert_eq!(a, b);
        // word 8 = SubWord(RotWord(0)) ^ Rcon ^ 0 = 0x62636363
        assert_eq!(a.words()[8], 0x6263_6363);
    }
}
