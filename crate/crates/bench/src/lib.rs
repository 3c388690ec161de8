//! Fixtures shared by the criterion benches.

use qstego_core::aes::AesKey;
use qstego_core::image::Image;
use qstego_core::imageio::{generate_test_image, generate_test_image_with_channels, TestPattern};
use qstego_core::sha256::derive_key;
use qstego_core::KeyBits;

pub const SAMPLE_KEY: &str = "000010010110011110101011111010111011101011111010111";

pub fn sample_key_bits() -> KeyBits {
    SAMPLE_KEY.parse().expect("constant key parses")
}

pub fn sample_key() -> AesKey {
    derive_key(&sample_key_bits())
        .expect("constant key is non-empty")
        .into()
}

pub fn cover(size: usize) -> Image {
    generate_test_image(size, TestPattern::Gradient, 0)
}

/// Grayscale secret at half the cover's resolution.
pub fn secret(cover_size: usize) -> Image {
    generate_test_image_with_channels(cover_size / 2, 1, TestPattern::Blocks, 0)
}
