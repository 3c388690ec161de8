//! End-to-end flow: E91 key → SHA-256 → LSB embed → AES-CBC → decrypt →
//! extract, with a manifest of every intermediate's digest.

use std::fmt::Write as _;

use thiserror::Error;

use crate::aes::{
    decrypt_payload, encrypt_payload, iv_from_seed, random_iv, AesError, AesKey, CipherEnvelope,
    BLOCK_SIZE,
};
use crate::e91::{
    run_protocol_with_threshold, ChannelConfig, Eavesdropper, ProtocolError, ProtocolResult,
    DEFAULT_CHSH_THRESHOLD,
};
use crate::image::Image;
use crate::imageio::{self, RasterFormat};
use crate::sha256::{self, derive_key, HashDigest, HashError};
use crate::stego::{self, StegoError, DEFAULT_BITS_PER_CHANNEL};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("keygen: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("keygen: channel insecure, |E| = {} does not exceed threshold {threshold}", fmt_chsh(.chsh))]
    Insecure { chsh: Option<f64>, threshold: f64 },
    #[error("keygen: {0}")]
    Hash(#[from] HashError),
    #[error("embed: {0}")]
    Embed(StegoError),
    #[error("decrypt: {0}")]
    Envelope(#[from] AesError),
    #[error("extract: {0}")]
    Extract(StegoError),
    #[error("verify: recovered secret differs from the original")]
    Mismatch,
}

fn fmt_chsh(chsh: &Option<f64>) -> String {
    match chsh {
        Some(e) => format!("{:.4}", e.abs()),
        None => "n/a (too few rounds)".into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeygenConfig {
    pub singlets: usize,
    pub seed: u64,
    pub channel: ChannelConfig,
    pub chsh_threshold: f64,
    /// Hand out key material even when the CHSH test fails.
    pub force: bool,
}

impl KeygenConfig {
    pub fn new(singlets: usize, seed: u64) -> Self {
        Self {
            singlets,
            seed,
            channel: ChannelConfig::ideal(),
            chsh_threshold: DEFAULT_CHSH_THRESHOLD,
            force: false,
        }
    }

    pub fn with_eavesdropper(mut self, eve: bool) -> Self {
        self.channel = self.channel.with_eavesdropper(if eve {
            Eavesdropper::InterceptResend
        } else {
            Eavesdropper::None
        });
        self
    }
}

#[derive(Debug, Clone)]
pub struct KeyMaterial {
    pub protocol: ProtocolResult,
    pub digest: HashDigest,
}

impl KeyMaterial {
    pub fn aes_key(&self) -> AesKey {
        self.digest.into()
    }
}

/// Run E91 and hash Alice's sifted key; refuses on a failed CHSH test
/// unless `force` is set.
pub fn establish_key(config: &KeygenConfig) -> Result<KeyMaterial, PipelineError> {
    let protocol = run_protocol_with_threshold(
        config.singlets,
        &config.channel,
        config.seed,
        config.chsh_threshold,
    )?;
    if !protocol.secure && !config.force {
        return Err(PipelineError::Insecure {
            chsh: protocol.chsh_value,
            threshold: config.chsh_threshold,
        });
    }
    let digest = derive_key(protocol.sifted_key())?;
    Ok(KeyMaterial { protocol, digest })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoConfig {
    pub keygen: KeygenConfig,
    pub lsb_bits: u8,
    /// `None` draws the IV from the OS.
    pub iv_seed: Option<u64>,
}

impl DemoConfig {
    pub fn new(singlets: usize, seed: u64, iv_seed: Option<u64>) -> Self {
        Self {
            keygen: KeygenConfig::new(singlets, seed),
            lsb_bits: DEFAULT_BITS_PER_CHANNEL,
            iv_seed,
        }
    }

    pub fn iv(&self) -> [u8; BLOCK_SIZE] {
        self.iv_seed.map_or_else(random_iv, iv_from_seed)
    }
}

/// Ordered `name=value` lines.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn push(&mut self, name: &str, value: impl ToString) {
        self.entries.push((name.to_string(), value.to_string()));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            writeln!(out, "{k}={v}").unwrap();
        }
        out
    }
}

/// SHA-256 of the canonical netpbm encoding.
pub fn image_digest(img: &Image) -> HashDigest {
    let format = RasterFormat::for_channels(img.channels()).unwrap_or(RasterFormat::Ppm);
    let bytes = imageio::encode(img, format).unwrap_or_else(|_| img.samples().to_vec());
    sha256::digest(&bytes)
}

#[derive(Debug, Clone)]
pub struct DemoOutcome {
    pub key: KeyMaterial,
    pub stego: Image,
    pub envelope: CipherEnvelope,
    pub decrypted: Image,
    pub recovered: Image,
    pub manifest: Manifest,
}

pub fn run_demo(
    config: &DemoConfig,
    cover: &Image,
    secret: &Image,
) -> Result<DemoOutcome, PipelineError> {
    let key = establish_key(&config.keygen)?;
    let stego = stego::embed(cover, secret, config.lsb_bits).map_err(PipelineError::Embed)?;
    let iv = config.iv();
    let envelope = encrypt_payload(stego.samples(), &key.aes_key(), iv);

    // the envelope crosses the classical channel as bytes
    let wire = envelope.to_bytes();
    let received = CipherEnvelope::from_bytes(&wire)?;
    let plain = decrypt_payload(&received, &key.aes_key());
    let decrypted = Image::new(stego.width(), stego.height(), stego.channels(), plain)
        .map_err(|_| PipelineError::Mismatch)?;
    let recovered = stego::extract(&decrypted).map_err(PipelineError::Extract)?;
    if &recovered != secret {
        return Err(PipelineError::Mismatch);
    }

    let p = &key.protocol;
    let mut manifest = Manifest::default();
    manifest.push("singlets", p.singlets());
    manifest.push("seed", config.keygen.seed);
    manifest.push("depolarizing_p", config.keygen.channel.depolarizing_p());
    manifest.push(
        "chsh",
        p.chsh_value.map(|e| format!("{e:.12}")).unwrap_or_default(),
    );
    manifest.push("secure", p.secure);
    manifest.push("key_bits", p.sifted_key().len());
    manifest.push("key_sha256", key.digest);
    manifest.push("lsb_bits", config.lsb_bits);
    manifest.push("iv", hex(&iv));
    manifest.push("cover_sha256", image_digest(cover));
    manifest.push("secret_sha256", image_digest(secret));
    manifest.push("stego_sha256", image_digest(&stego));
    manifest.push("envelope_sha256", sha256::digest(&wire));
    manifest.push("decrypted_sha256", image_digest(&decrypted));
    manifest.push("recovered_sha256", image_digest(&recovered));
    manifest.push("secret_recovered", true);

    Ok(DemoOutcome {
        key,
        stego,
        envelope,
        decrypted,
        recovered,
        manifest,
    })
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
