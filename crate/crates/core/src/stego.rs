//! LSB steganography.
//!
//! The payload is a 12-byte header followed by the secret's raw samples. It
//! is read as one bit stream, most significant bit first, and written `k`
//! bits at a time into the low `k` bits of consecutive cover samples.
//!
//! Header layout: `"SG" | width u32 BE | height u32 BE | channels u8 | k u8`.

use thiserror::Error;

use crate::image::Image;

pub const STEGO_MAGIC: [u8; 2] = *b"SG";
pub const HEADER_BYTES: usize = 12;
pub const DEFAULT_BITS_PER_CHANNEL: u8 = 2;
/// Order in which `extract` probes for a header.
pub const SUPPORTED_BITS: [u8; 3] = [1, 2, 4];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StegoError {
    #[error("bits per channel must be 1, 2 or 4, got {0}")]
    BitsPerChannel(u8),
    #[error(
        "secret needs {required} bytes (header included) but the cover holds {available} at k={k}"
    )]
    CapacityExceeded {
        required: usize,
        available: usize,
        k: u8,
    },
    #[error("no steganographic header found")]
    NotStego,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StegoHeader {
    pub secret_width: u32,
    pub secret_height: u32,
    pub secret_channels: u8,
    pub bits_per_channel_used: u8,
}

impl StegoHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_BYTES] {
        let mut out = [0u8; HEADER_BYTES];
        out[..2].copy_from_slice(&STEGO_MAGIC);
        out[2..6].copy_from_slice(&self.secret_width.to_be_bytes());
        out[6..10].copy_from_slice(&self.secret_height.to_be_bytes());
        out[10] = self.secret_channels;
        out[11] = self.bits_per_channel_used;
        out
    }

    pub fn parse(bytes: &[u8; HEADER_BYTES]) -> Option<Self> {
        if bytes[..2] != STEGO_MAGIC {
            return None;
        }
        Some(Self {
            secret_width: u32::from_be_bytes(bytes[2..6].try_into().unwrap()),
            secret_height: u32::from_be_bytes(bytes[6..10].try_into().unwrap()),
            secret_channels: bytes[10],
            bits_per_channel_used: bytes[11],
        })
    }

    fn secret_len(&self) -> Option<usize> {
        (self.secret_width as usize)
            .checked_mul(self.secret_height as usize)?
            .checked_mul(usize::from(self.secret_channels))
    }
}

fn check_bits(k: u8) -> Result<(), StegoError> {
    if SUPPORTED_BITS.contains(&k) {
        Ok(())
    } else {
        Err(StegoError::BitsPerChannel(k))
    }
}

fn total_bytes(cover: &Image, k: u8) -> usize {
    cover.samples().len() * usize::from(k) / 8
}

/// Secret bytes the cover can carry at `k` bits per sample, header excluded.
pub fn capacity(cover: &Image, k: u8) -> Result<usize, StegoError> {
    check_bits(k)?;
    Ok(total_bytes(cover, k).saturating_sub(HEADER_BYTES))
}

pub fn embed(cover: &Image, secret: &Image, k: u8) -> Result<Image, StegoError> {
    check_bits(k)?;
    let available = total_bytes(cover, k);
    let required = HEADER_BYTES + secret.samples().len();
    if required > available {
        return Err(StegoError::CapacityExceeded {
            required,
            available,
            k,
        });
    }
    let header = StegoHeader {
        secret_width: secret.width() as u32,
        secret_height: secret.height() as u32,
        secret_channels: secret.channels() as u8,
        bits_per_channel_used: k,
    };
    let mut stego = cover.clone();
    let payload = header
        .to_bytes()
        .into_iter()
        .chain(secret.samples().iter().copied());
    write_bits(stego.samples_mut(), payload, k);
    Ok(stego)
}

fn write_bits(samples: &mut [u8], payload: impl Iterator<Item = u8>, k: u8) {
    let per_byte = 8 / usize::from(k);
    let mask = (1u8 << k) - 1;
    for (i, byte) in payload.enumerate() {
        for j in 0..per_byte {
            let shift = 8 - usize::from(k) * (j + 1);
            let chunk = (byte >> shift) & mask;
            let s = &mut samples[i * per_byte + j];
            *s = (*s & !mask) | chunk;
        }
    }
}

fn read_bytes(samples: &[u8], k: u8, offset: usize, len: usize) -> Vec<u8> {
    let per_byte = 8 / usize::from(k);
    let mask = (1u8 << k) - 1;
    samples[offset * per_byte..(offset + len) * per_byte]
        .chunks_exact(per_byte)
        .map(|group| group.iter().fold(0u8, |acc, s| (acc << k) | (s & mask)))
        .collect()
}

fn try_extract(stego: &Image, k: u8) -> Option<Image> {
    let available = total_bytes(stego, k);
    if available < HEADER_BYTES {
        return None;
    }
    let raw: [u8; HEADER_BYTES] = read_bytes(stego.samples(), k, 0, HEADER_BYTES)
        .try_into()
        .ok()?;
    let header = StegoHeader::parse(&raw)?;
    if header.bits_per_channel_used != k {
        return None;
    }
    let len = header.secret_len()?;
    if len > available - HEADER_BYTES {
        return None;
    }
    let samples = read_bytes(stego.samples(), k, HEADER_BYTES, len);
    Image::new(
        header.secret_width as usize,
        header.secret_height as usize,
        usize::from(header.secret_channels),
        samples,
    )
    .ok()
}

/// Probe `k = 1, 2, 4` for a header and recover the secret.
pub fn extract(stego: &Image) -> Result<Image, StegoError> {
    SUPPORTED_BITS
        .iter()
        .find_map(|&k| try_extract(stego, k))
        .ok_or(StegoError::NotStego)
}

/// Header found in `stego`, if any.
pub fn read_header(stego: &Image) -> Option<StegoHeader> {
    SUPPORTED_BITS.iter().find_map(|&k| {
        if total_bytes(stego, k) < HEADER_BYTES {
            return None;
        }
        let raw: [u8; HEADER_BYTES] = read_bytes(stego.samples(), k, 0, HEADER_BYTES)
            .try_into()
            .ok()?;
        StegoHeader::parse(&raw).filter(|h| h.bits_per_channel_used == k)
    })
}
