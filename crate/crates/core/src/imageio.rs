//! Binary netpbm (P5 grayscale, P6 color) with maxval fixed at 255, plus
//! deterministic synthetic test images.

use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::image::{Image, ImageError};

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("not a binary PGM/PPM file (magic {0:?})")]
    BadMagic(String),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("unsupported maxval {0}; only 255 is accepted")]
    Maxval(u32),
    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{format:?} cannot hold a {channels}-channel image")]
    FormatMismatch {
        format: RasterFormat,
        channels: usize,
    },
    #[error(transparent)]
    Image(#[from] ImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    /// P5
    Pgm,
    /// P6
    Ppm,
}

impl RasterFormat {
    pub fn for_channels(channels: usize) -> Option<Self> {
        match channels {
            1 => Some(RasterFormat::Pgm),
            3 => Some(RasterFormat::Ppm),
            _ => None,
        }
    }

    fn magic(self) -> &'static str {
        match self {
            RasterFormat::Pgm => "P5",
            RasterFormat::Ppm => "P6",
        }
    }

    fn channels(self) -> usize {
        match self {
            RasterFormat::Pgm => 1,
            RasterFormat::Ppm => 3,
        }
    }
}

/// Header tokenizer: skips whitespace and `#` comments up to end of line.
struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn token(&mut self) -> Result<&'a str, ImageIoError> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err(ImageIoError::Header("unexpected end of header".into())),
            }
        }
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| ImageIoError::Header("non-ASCII header token".into()))
    }

    fn number<T: FromStr>(&mut self, what: &str) -> Result<T, ImageIoError> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| ImageIoError::Header(format!("invalid {what} {tok:?}")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Image, ImageIoError> {
    let mut header = HeaderReader { bytes, pos: 0 };
    let magic = match header.token() {
        Ok(m) => m,
        Err(_) => return Err(ImageIoError::BadMagic(String::new())),
    };
    let format = match magic {
        "P5" => RasterFormat::Pgm,
        "P6" => RasterFormat::Ppm,
        other => return Err(ImageIoError::BadMagic(other.to_string())),
    };
    let width: usize = header.number("width")?;
    let height: usize = header.number("height")?;
    let maxval: u32 = header.number("maxval")?;
    if maxval != 255 {
        return Err(ImageIoError::Maxval(maxval));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(header.pos) {
        Some(b) if b.is_ascii_whitespace() => header.pos += 1,
        _ => {
            return Err(ImageIoError::Header(
                "missing separator after maxval".into(),
            ))
        }
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(format.channels()))
        .ok_or_else(|| ImageIoError::Header("dimensions overflow".into()))?;
    let data = &bytes[header.pos..];
    if data.len() < expected {
        return Err(ImageIoError::Truncated {
            expected,
            found: data.len(),
        });
    }
    Ok(Image::new(
        width,
        height,
        format.channels(),
        data[..expected].to_vec(),
    )?)
}

/// Canonical encoding: `P6\n<w> <h>\n255\n` followed by raw samples.
pub fn encode(img: &Image, format: RasterFormat) -> Result<Vec<u8>, ImageIoError> {
    if format.channels() != img.channels() {
        return Err(ImageIoError::FormatMismatch {
            format,
            channels: img.channels(),
        });
    }
    let header = format!(
        "{}\n{} {}\n255\n",
        format.magic(),
        img.width(),
        img.height()
    );
    let mut out = Vec::with_capacity(header.len() + img.samples().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.samples());
    Ok(out)
}

pub fn read_image(path: impl AsRef<Path>) -> Result<Image, ImageIoError> {
    decode(&fs::read(path)?)
}

pub fn write_image(
    img: &Image,
    path: impl AsRef<Path>,
    format: RasterFormat,
) -> Result<(), ImageIoError> {
    fs::write(path, encode(img, format)?)?;
    Ok(())
}

/// Picks P5 or P6 from the channel count.
pub fn write_image_auto(img: &Image, path: impl AsRef<Path>) -> Result<(), ImageIoError> {
    let format =
        RasterFormat::for_channels(img.channels()).ok_or(ImageError::Channels(img.channels()))?;
    write_image(img, path, format)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestPattern {
    Gradient,
    Noise,
    Blocks,
}

impl FromStr for TestPattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gradient" => Ok(TestPattern::Gradient),
            "noise" => Ok(TestPattern::Noise),
            "blocks" => Ok(TestPattern::Blocks),
            other => Err(format!("unknown pattern {other:?}")),
        }
    }
}

/// Square three-channel test image.
pub fn generate_test_image(size: usize, kind: TestPattern, seed: u64) -> Image {
    generate_test_image_with_channels(size, 3, kind, seed)
}

pub fn generate_test_image_with_channels(
    size: usize,
    channels: usize,
    kind: TestPattern,
    seed: u64,
) -> Image {
    let n = size * size * channels;
    let samples = match kind {
        TestPattern::Gradient => (0..n)
            .map(|i| {
                let c = i % channels;
                let x = (i / channels) % size;
                let y = i / channels / size;
                let (x, y) = (x * 256 / size.max(1), y * 256 / size.max(1));
                match c {
                    0 => x as u8,
                    1 => y as u8,
                    _ => ((x + y) / 2) as u8,
                }
            })
            .collect(),
        TestPattern::Noise => {
            let mut buf = vec![0u8; n];
            ChaCha20Rng::seed_from_u64(seed).fill_bytes(&mut buf);
            buf
        }
        TestPattern::Blocks => {
            // 8×8 grid of flat tiles drawn from a small palette
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let palette: Vec<[u8; 3]> = (0..6)
                .map(|_| {
                    let mut c = [0u8; 3];
                    rng.fill_bytes(&mut c);
                    c
                })
                .collect();
            let tiles: Vec<usize> = (0..64)
                .map(|_| rng.next_u32() as usize % palette.len())
                .collect();
            let tile = size.div_ceil(8).max(1);
            (0..n)
                .map(|i| {
                    let c = i % channels;
                    let x = (i / channels) % size;
                    let y = i / channels / size;
                    palette[tiles[(y / tile) * 8 + x / tile]][c]
                })
                .collect()
        }
    };
    Image::new(size, size, channels, samples).expect("generated sample count matches shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_p6() {
        let mut bytes = b"P6\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0, 0, 255, 0]);
        let img = decode(&bytes).unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (2, 1, 3));
        assert_eq!(img.samples(), &[255, 0, 0, 0, 255, 0]);
        assert_eq!(encode(&img, RasterFormat::Ppm).unwrap(), bytes);
    }

    #[test]
    fn comments_are_skipped() {
        let plain = b"P5\n2 2\n255\n\x01\x02\x03\x04".to_vec();
        let commented = b"P5\n# test\n2 # inline\n2\n255\n\x01\x02\x03\x04".to_vec();
        assert_eq!(decode(&plain).unwrap(), decode(&commented).unwrap());
    }

    #[test]
    fn format_errors() {
        assert!(matches!(decode(b"P3\n1 1\n255\n"), Err(ImageIoError::BadMagic(m)) if m == "P3"));
        assert!(matches!(decode(b""), Err(ImageIoError::BadMagic(_))));
        assert!(matches!(
            decode(b"P5\n1 1\n65535\n\0\0"),
            Err(ImageIoError::Maxval(65535))
        ));
        assert!(matches!(
            decode(b"P6\n2 2\n255\n\0\0\0"),
            Err(ImageIoError::Truncated {
                expected: 12,
                found: 3
            })
        ));
        assert!(matches!(
            decode(b"P5\nx 1\n255\n"),
            Err(ImageIoError::Header(_))
        ));
    }

    #[test]
    fn channel_format_mismatch() {
        let img = Image::filled(2, 2, 3, 9).unwrap();
        assert!(matches!(
            encode(&img, RasterFormat::Pgm),
            Err(ImageIoError::FormatMismatch { channels: 3, .. })
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join(format!("qstego-imageio-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        for channels in [1, 3] {
            let img = generate_test_image_with_channels(17, channels, TestPattern::Noise, 4);
            let path = dir.join(format!("rt{channels}.pnm"));
            write_image_auto(&img, &path).unwrap();
            assert_eq!(read_image(&path).unwrap(), img);
        }
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in [
            TestPattern::Gradient,
            TestPattern::Noise,
            TestPattern::Blocks,
        ] {
            assert_eq!(
                generate_test_image(64, kind, 3),
                generate_test_image(64, kind, 3)
            );
        }
        assert_ne!(
            generate_test_image(64, TestPattern::Noise, 3),
            generate_test_image(64, TestPattern::Noise, 4)
        );
    }

    #[test]
    fn gradient_is_function_of_coordinates() {
        let img = generate_test_image(64, TestPattern::Gradient, 0);
        assert_eq!(img.pixel(0, 0), &[0, 0, 0]);
        assert_eq!(img.pixel(32, 16), &[128, 64, 96]);
    }

    #[test]
    fn blocks_histogram_is_structured() {
        let img = generate_test_image(128, TestPattern::Blocks, 1);
        let mut distinct = [false; 256];
        for &s in img.samples() {
            distinct[usize::from(s)] = true;
        }
        // at most 6 palette colours × 3 channels of distinct values
        assert!(distinct.iter().filter(|&&d| d).count() <= 18);
    }
}
