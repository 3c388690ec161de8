use proptest::prelude::*;
use qstego_core::sha256::{derive_key, digest, pad_message, HashDigest};
use qstego_core::KeyBits;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

fn oracle(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Example sifted keys for 25/100/250/500 singlets and the key-sensitivity
/// pair, with their known digests.
pub const KNOWN_KEYS: [(&str, &str); 6] = [
    (
        "10010111",
        "459c2daec5458568864215c57d12fa0ae28243b080971bb90d09fe020f8f265e",
    ),
    (
        "1010011110001000111011",
        "dd116ea845b69b000cfde2831b67e5ac53544fd9688b86123fef6235e34af651",
    ),
    (
        "0110110001111001010101101110000101000011101100100",
        "6c26412c58131663b4034e37bf71318c115589186085671c27f25b368e4cbb4e",
    ),
    (
        "01000100101010001010111001010001000010011110010001110011010011011001111000111111101000101100000000",
        "b0c1de302023c06df2ca56b7206da959dccc9cc8d25f983f921b51664a7e2851",
    ),
    (
        "000010010110011110101011111010111011101011111010111",
        "8a49d097d696624218e1872935d9e3d2767bd9953d2e4a6b6946210966e5732c",
    ),
    (
        "100010010110011110101011111010111011101011111010111",
        "200fa0c121fc9d2e2b7640445f05308ce671c68b29a1d2aae6311a392d468f5b",
    ),
];

#[test]
fn standard_vectors() {
    assert_eq!(
        digest(b"").hex(),
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    );
    assert_eq!(
        digest(b"abc").hex(),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
    assert_eq!(
        digest(b"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq").hex(),
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1"
    );
}

#[test]
fn oracle_agrees_on_known_keys() {
    for (bits, expected) in KNOWN_KEYS {
        assert_eq!(
            oracle(bits.as_bytes()),
            expected,
            "oracle vs expected for {bits}"
        );
        let key: KeyBits = bits.parse().unwrap();
        assert_eq!(derive_key(&key).unwrap().hex(), expected);
    }
}

#[test]
fn known_key_lengths() {
    assert_eq!(KNOWN_KEYS[3].0.len(), 98);
    assert_eq!(KNOWN_KEYS[4].0.len(), 51);
}

#[test]
fn lengths_around_block_boundaries() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for len in (0..200).chain([511, 512, 513, 1000, 4096]) {
        let mut msg = vec![0u8; len];
        rng.fill_bytes(&mut msg);
        assert_eq!(digest(&msg).hex(), oracle(&msg), "len {len}");
        assert_eq!(pad_message(&msg).len() % 64, 0);
    }
}

#[test]
fn avalanche() {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let trials = 1000;
    let mut flipped = 0u32;
    for _ in 0..trials {
        let len = rng.gen_range(1..128);
        let mut msg = vec![0u8; len];
        rng.fill_bytes(&mut msg);
        let a = digest(&msg).to_bytes();
        let bit = rng.gen_range(0..len * 8);
        msg[bit / 8] ^= 1 << (bit % 8);
        let b = digest(&msg).to_bytes();
        flipped += a
            .iter()
            .zip(b)
            .map(|(x, y)| (x ^ y).count_ones())
            .sum::<u32>();
    }
    let mean = f64::from(flipped) / f64::from(trials);
    assert!(mean >= 100.0, "mean flipped bits {mean}");
}

proptest! {
    #[test]
    fn matches_oracle(msg in proptest::collection::vec(any::<u8>(), 0..300)) {
        let d = digest(&msg);
        prop_assert_eq!(d.hex(), oracle(&msg));
        prop_assert_eq!(d.to_bytes().len(), 32);
        prop_assert_eq!(d.hex().parse::<HashDigest>().unwrap(), d);
    }
}
