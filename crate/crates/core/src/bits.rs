use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid key character {found:?} at position {position}; expected '0' or '1'")]
pub struct ParseBitsError {
    pub position: usize,
    pub found: char,
}

/// A key as an ordered bit string. Its text form is a run of `'0'`/`'1'`
/// characters, which is also the form that gets hashed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct KeyBits(Vec<bool>);

impl KeyBits {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    /// Copy with bit `index` inverted; `None` when out of range.
    pub fn with_flipped(&self, index: usize) -> Option<Self> {
        let mut bits = self.0.clone();
        let b = bits.get_mut(index)?;
        *b = !*b;
        Some(Self(bits))
    }

    /// ASCII `'0'`/`'1'` encoding.
    pub fn to_ascii(&self) -> Vec<u8> {
        self.0
            .iter()
            .map(|&b| if b { b'1' } else { b'0' })
            .collect()
    }

    /// Number of positions where the two strings differ, counting any length
    /// difference as mismatches.
    pub fn hamming_distance(&self, other: &Self) -> usize {
        let common = self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count();
        common + self.len().abs_diff(other.len())
    }
}

impl FromStr for KeyBits {
    type Err = ParseBitsError;

    /// Surrounding whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .chars()
            .enumerate()
            .map(|(position, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                found => Err(ParseBitsError { position, found }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(KeyBits)
    }
}

impl fmt::Display for KeyBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromIterator<bool> for KeyBits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}
