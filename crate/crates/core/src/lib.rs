//! Quantum-classical image protection toolkit.
//!
//! An E91 entanglement-based key exchange is simulated on a small two-qubit
//! simulator; the sifted key is hashed with SHA-256 into an AES-256 key; a
//! secret image hidden by LSB steganography is encrypted in CBC mode; and the
//! result is scored with entropy, NPCR, UACI and histogram metrics.
//!
//! The cryptographic primitives are written from scratch for study and
//! testing. They are not hardened against side channels.

pub mod aes;
pub mod bits;
pub mod e91;
pub mod image;
pub mod imageio;
pub mod metrics;
pub mod pipeline;
pub mod quantum;
pub mod sha256;
pub mod stego;

pub use crate::aes::{AesError, AesKey, CipherEnvelope};
pub use crate::bits::KeyBits;
pub use crate::e91::{ChannelConfig, Eavesdropper, ProtocolResult};
pub use crate::image::Image;
pub use crate::sha256::HashDigest;
