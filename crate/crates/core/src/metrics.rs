//! Image-encryption quality metrics: Shannon entropy, NPCR, UACI,
//! histograms, the key-sensitivity experiment, and timing tables.
//!
//! Comparisons are between an original image and its "encrypted image", the
//! ciphertext bytes truncated to the original sample count and reinterpreted
//! with the original shape.

use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::aes::{decrypt_payload, encrypt_payload, AesKey, CipherEnvelope, BLOCK_SIZE};
use crate::bits::KeyBits;
use crate::image::Image;
use crate::imageio::{generate_test_image, TestPattern};
use crate::sha256::{derive_key, HashDigest, HashError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("entropy of an empty sequence is undefined")]
    Empty,
    #[error("images differ in shape: {0} vs {1}")]
    ShapeMismatch(String, String),
    #[error("flip index {index} is outside a {len}-bit key")]
    FlipIndex { index: usize, len: usize },
    #[error(transparent)]
    Hash(#[from] HashError),
}

/// Base-2 Shannon entropy of the byte histogram, in bits per symbol.
pub fn shannon_entropy(bytes: &[u8]) -> Result<f64, MetricsError> {
    if bytes.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut counts = [0u64; 256];
    for &b in bytes {
        counts[usize::from(b)] += 1;
    }
    let n = bytes.len() as f64;
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum())
}

fn shape_label(img: &Image) -> String {
    format!("{}x{}x{}", img.width(), img.height(), img.channels())
}

fn check_shape(a: &Image, b: &Image) -> Result<(), MetricsError> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(MetricsError::ShapeMismatch(shape_label(a), shape_label(b)))
    }
}

/// Percentage of pixel positions where any channel differs.
pub fn npcr(a: &Image, b: &Image) -> Result<f64, MetricsError> {
    check_shape(a, b)?;
    if a.pixel_count() == 0 {
        return Ok(0.0);
    }
    let changed = a.pixels().zip(b.pixels()).filter(|(p, q)| p != q).count();
    Ok(100.0 * changed as f64 / a.pixel_count() as f64)
}

/// NPCR computed separately on each channel plane.
pub fn npcr_per_channel(a: &Image, b: &Image) -> Result<Vec<f64>, MetricsError> {
    check_shape(a, b)?;
    let c = a.channels();
    let pixels = a.pixel_count().max(1) as f64;
    Ok((0..c)
        .map(|ch| {
            let changed = a
                .samples()
                .iter()
                .zip(b.samples())
                .skip(ch)
                .step_by(c)
                .filter(|(x, y)| x != y)
                .count();
            100.0 * changed as f64 / pixels
        })
        .collect())
}

/// Mean of `|a − b| / 255` over every sample, as a percentage.
pub fn uaci(a: &Image, b: &Image) -> Result<f64, MetricsError> {
    check_shape(a, b)?;
    if a.samples().is_empty() {
        return Ok(0.0);
    }
    let total: u64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| u64::from(x.abs_diff(*y)))
        .sum();
    Ok(100.0 * total as f64 / (255.0 * a.samples().len() as f64))
}

/// 256-bin histogram per channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub channels: Vec<[u64; 256]>,
}

pub fn histogram(img: &Image) -> Histogram {
    let c = img.channels();
    let mut channels = vec![[0u64; 256]; c];
    for (i, &s) in img.samples().iter().enumerate() {
        channels[i % c][usize::from(s)] += 1;
    }
    Histogram { channels }
}

impl Histogram {
    /// `channel,bin,count` rows with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel,bin,count\n");
        for (c, bins) in self.channels.iter().enumerate() {
            for (bin, count) in bins.iter().enumerate() {
                writeln!(out, "{c},{bin},{count}").unwrap();
            }
        }
        out
    }

    pub fn total(&self, channel: usize) -> u64 {
        self.channels[channel].iter().sum()
    }

    /// Ratio of fullest to emptiest bin; infinite if a bin is empty.
    pub fn flatness(&self, channel: usize) -> f64 {
        let bins = &self.channels[channel];
        let max = *bins.iter().max().unwrap_or(&0) as f64;
        let min = *bins.iter().min().unwrap_or(&0) as f64;
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Bar chart of one channel as a 256-wide grayscale image, bars white on
    /// black, scaled so the tallest bar fills `height`.
    pub fn render(&self, channel: usize, height: usize) -> Image {
        let bins = &self.channels[channel];
        let max = (*bins.iter().max().unwrap_or(&0)).max(1);
        let mut samples = vec![0u8; 256 * height];
        for (x, &count) in bins.iter().enumerate() {
            let bar = ((count as u128 * height as u128).div_ceil(max as u128)) as usize;
            for y in height - bar..height {
                samples[y * 256 + x] = 255;
            }
        }
        Image::new(256, height, 1, samples).expect("256 × height samples")
    }
}

/// Raster view of the ciphertext with the plaintext image's shape.
pub fn ciphertext_as_image(envelope: &CipherEnvelope, original: &Image) -> Image {
    let n = original.samples().len();
    Image::new(
        original.width(),
        original.height(),
        original.channels(),
        envelope.ciphertext[..n].to_vec(),
    )
    .expect("ciphertext covers the plaintext length")
}

/// One row of the entropy / differential-analysis tables.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub pixel_size: String,
    pub entropy_bits: f64,
    pub npcr_percent: f64,
    pub npcr_per_channel: Vec<f64>,
    pub uaci_percent: f64,
    pub encrypt_s: f64,
    pub decrypt_s: f64,
}

pub const METRICS_CSV_HEADER: &str =
    "pixel_size,entropy_bits,npcr_percent,uaci_percent,npcr_channels,encrypt_s,decrypt_s";

impl MetricsReport {
    pub fn to_csv_row(&self) -> String {
        let per_channel: Vec<String> = self
            .npcr_per_channel
            .iter()
            .map(|v| format!("{v:.4}"))
            .collect();
        format!(
            "{},{:.6},{:.4},{:.4},{},{:.6},{:.6}",
            self.pixel_size,
            self.entropy_bits,
            self.npcr_percent,
            self.uaci_percent,
            per_channel.join(";"),
            self.encrypt_s,
            self.decrypt_s
        )
    }
}

/// Encrypt `img`, decrypt it back, and measure the encrypted raster.
pub fn evaluate_encryption(img: &Image, key: &AesKey, iv: [u8; BLOCK_SIZE]) -> MetricsReport {
    let t = Instant::now();
    let envelope = encrypt_payload(img.samples(), key, iv);
    let encrypt_s = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let restored = decrypt_payload(&envelope, key);
    let decrypt_s = t.elapsed().as_secs_f64();
    debug_assert_eq!(restored, img.samples());

    let encrypted = ciphertext_as_image(&envelope, img);
    MetricsReport {
        pixel_size: img.size_label(),
        entropy_bits: shannon_entropy(encrypted.samples()).unwrap_or(0.0),
        npcr_percent: npcr(img, &encrypted).expect("same shape"),
        npcr_per_channel: npcr_per_channel(img, &encrypted).expect("same shape"),
        uaci_percent: uaci(img, &encrypted).expect("same shape"),
        encrypt_s,
        decrypt_s,
    }
}

#[derive(Debug, Clone)]
pub struct KeySensitivityReport {
    pub k1: KeyBits,
    pub k2: KeyBits,
    pub k1_digest: HashDigest,
    pub k2_digest: HashDigest,
    /// Plaintext vs the image decrypted with the wrong key.
    pub npcr_percent: f64,
    pub uaci_percent: f64,
    pub correct_key_restores: bool,
    pub wrong_key_image: Image,
}

impl KeySensitivityReport {
    pub fn to_csv(&self) -> String {
        format!(
            "k1,k2,k1_digest,k2_digest,npcr_percent,uaci_percent,correct_key_restores\n{},{},{},{},{:.4},{:.4},{}\n",
            self.k1,
            self.k2,
            self.k1_digest,
            self.k2_digest,
            self.npcr_percent,
            self.uaci_percent,
            self.correct_key_restores
        )
    }
}

/// Encrypt under `H(K1)`, decrypt under `H(K1)` and under `H(K2)` where K2
/// is K1 with one bit flipped.
pub fn key_sensitivity_experiment(
    image: &Image,
    key_bits: &KeyBits,
    flip_index: usize,
    iv: [u8; BLOCK_SIZE],
) -> Result<KeySensitivityReport, MetricsError> {
    let k2 = key_bits
        .with_flipped(flip_index)
        .ok_or(MetricsError::FlipIndex {
            index: flip_index,
            len: key_bits.len(),
        })?;
    let k1_digest = derive_key(key_bits)?;
    let k2_digest = derive_key(&k2)?;
    let envelope = encrypt_payload(image.samples(), &k1_digest.into(), iv);
    let good = decrypt_payload(&envelope, &k1_digest.into());
    let bad = decrypt_payload(&envelope, &k2_digest.into());
    let wrong_key_image = Image::new(image.width(), image.height(), image.channels(), bad)
        .expect("decrypt preserves payload length");
    Ok(KeySensitivityReport {
        k1: key_bits.clone(),
        k2,
        k1_digest,
        k2_digest,
        npcr_percent: npcr(image, &wrong_key_image)?,
        uaci_percent: uaci(image, &wrong_key_image)?,
        correct_key_restores: good == image.samples(),
        wrong_key_image,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub pixel_size: String,
    pub encrypt_s: f64,
    pub decrypt_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimingTable {
    pub rows: Vec<TimingRow>,
}

impl TimingTable {
    /// `None` for an empty table.
    pub fn average(&self) -> Option<TimingRow> {
        if self.rows.is_empty() {
            return None;
        }
        let n = self.rows.len() as f64;
        Some(TimingRow {
            pixel_size: "Average".into(),
            encrypt_s: self.rows.iter().map(|r| r.encrypt_s).sum::<f64>() / n,
            decrypt_s: self.rows.iter().map(|r| r.decrypt_s).sum::<f64>() / n,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("pixel_size,encrypt_s,decrypt_s\n");
        for r in self.rows.iter().cloned().chain(self.average()) {
            writeln!(
                out,
                "{},{:.6},{:.6}",
                r.pixel_size, r.encrypt_s, r.decrypt_s
            )
            .unwrap();
        }
        out
    }
}

/// Time encryption and decryption of a generated color image at each size.
pub fn timing_report(
    pixel_sizes: &[usize],
    key: &AesKey,
    iv: [u8; BLOCK_SIZE],
    seed: u64,
) -> TimingTable {
    let rows = pixel_sizes
        .iter()
        .map(|&size| {
            let img = generate_test_image(size, TestPattern::Gradient, seed);
            let t = Instant::now();
            let env = encrypt_payload(img.samples(), key, iv);
            let encrypt_s = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let _ = decrypt_payload(&env, key);
            let decrypt_s = t.elapsed().as_secs_f64();
            TimingRow {
                pixel_size: img.size_label(),
                encrypt_s,
                decrypt_s,
            }
        })
        .collect();
    TimingTable { rows }
}
