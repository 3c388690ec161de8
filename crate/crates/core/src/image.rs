use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("{width}x{height}x{channels} image needs {expected} samples, got {got}")]
    SampleCount {
        width: usize,
        height: usize,
        channels: usize,
        expected: usize,
        got: usize,
    },
    #[error("unsupported channel count {0}; expected 1 or 3")]
    Channels(usize),
}

/// 8-bit raster, row-major with interleaved channels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<u8>,
}

impl Image {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        samples: Vec<u8>,
    ) -> Result<Self, ImageError> {
        if channels != 1 && channels != 3 {
            return Err(ImageError::Channels(channels));
        }
        let expected = width * height * channels;
        if samples.len() != expected {
            return Err(ImageError::SampleCount {
                width,
                height,
                channels,
                expected,
                got: samples.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    pub fn filled(
        width: usize,
        height: usize,
        channels: usize,
        value: u8,
    ) -> Result<Self, ImageError> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        (self.width, self.height, self.channels) == (other.width, other.height, other.channels)
    }

    /// Samples of one pixel.
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let start = (y * self.width + x) * self.channels;
        &self.samples[start..start + self.channels]
    }

    pub fn pixels(&self) -> impl Iterator<Item = &[u8]> {
        self.samples.chunks_exact(self.channels)
    }

    /// Every sample replaced by `255 − v`.
    pub fn complemented(&self) -> Image {
        Image {
            samples: self.samples.iter().map(|v| 255 - v).collect(),
            ..self.clone()
        }
    }

    /// "WxH" label used in reports.
    pub fn size_label(&self) -> String {
        format!("{}x{}", self.width, self.height)
    }
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_validation() {
        assert!(Image::new(2, 2, 3, vec![0; 12]).is_ok());
        assert_eq!(
            Image::new(2, 2, 3, vec![0; 11]).unwrap_err(),
            ImageError::SampleCount {
                width: 2,
                height: 2,
                channels: 3,
                expected: 12,
                got: 11
            }
        );
        assert_eq!(
            Image::new(1, 1, 2, vec![0; 2]).unwrap_err(),
            ImageError::Channels(2)
        );
    }

    #[test]
    fn pixel_access() {
        let img = Image::new(2, 1, 3, vec![255, 0, 0, 0, 255, 0]).unwrap();
        assert_eq!(img.pixel(1, 0), &[0, 255, 0]);
        assert_eq!(img.pixels().count(), 2);
        assert_eq!(img.complemented().pixel(0, 0), &[0, 255, 255]);
    }
}
