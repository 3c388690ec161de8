//! `qstego` command-line front end.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qstego_core::e91::DEFAULT_CHSH_THRESHOLD;
use qstego_core::stego::DEFAULT_BITS_PER_CHANNEL;

#[derive(Parser, Debug)]
#[command(
    name = "qstego",
    version,
    about = "E91 key exchange, SHA-256 key derivation, LSB steganography and AES-256 image encryption"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ProtocolArgs {
    /// Number of entangled pairs to distribute.
    #[arg(long, default_value_t = 500)]
    pub singlets: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Weight of the pure singlet in the depolarizing channel (1 = noiseless).
    #[arg(long = "depolarizing-p", default_value_t = 1.0)]
    pub depolarizing_p: f64,
    /// Put an intercept-resend eavesdropper on Bob's line.
    #[arg(long)]
    pub eve: bool,
    #[arg(long = "chsh-threshold", default_value_t = DEFAULT_CHSH_THRESHOLD)]
    pub chsh_threshold: f64,
    /// Emit key material even if the CHSH test fails.
    #[arg(long)]
    pub force: bool,
}

/// Where the key comes from: a key file or literal bits.
#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct KeySource {
    /// File holding the sifted key as '0'/'1' characters.
    #[arg(long = "key-file")]
    pub key_file: Option<PathBuf>,
    /// Sifted key given inline.
    #[arg(long)]
    pub bits: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run E91 and write the sifted key.
    Keygen {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Key file to write.
        #[arg(long, default_value = "key.txt")]
        out: PathBuf,
        /// Optional CSV row with singlets, key length, time, rate, CHSH.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the SHA-256 digest of a key.
    HashKey {
        #[command(flatten)]
        key: KeySource,
    },
    /// Hide a secret image in a cover image.
    Embed {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        secret: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Low-order bits used per sample (1, 2 or 4).
        #[arg(long = "lsb-k", default_value_t = DEFAULT_BITS_PER_CHANNEL)]
        lsb_k: u8,
    },
    /// Recover a hidden image.
    Extract {
        #[arg(long)]
        stego: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt an image's samples into a .qse envelope.
    Encrypt {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        key: KeySource,
        #[arg(long)]
        out: PathBuf,
        /// Derive the IV from this seed instead of the OS.
        #[arg(long = "iv-seed")]
        iv_seed: Option<u64>,
    },
    /// Decrypt a .qse envelope back into an image.
    Decrypt {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        key: KeySource,
        #[arg(long)]
        out: PathBuf,
        /// Image shape as WxHxC; printed by `encrypt`.
        #[arg(long)]
        shape: String,
    },
    /// Regenerate the entropy, differential, key-rate, timing and histogram reports.
    Analyze {
        #[arg(long, value_delimiter = ',', default_values_t = [64usize, 128, 256, 512])]
        sizes: Vec<usize>,
        #[arg(long = "out-dir", default_value = "analysis")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "iv-seed", default_value_t = 0)]
        iv_seed: u64,
        /// Test image pattern: gradient, noise or blocks.
        #[arg(long, default_value = "gradient")]
        pattern: String,
        /// Singlet counts for the key-rate table.
        #[arg(long = "key-singlets", value_delimiter = ',', default_values_t = [25usize, 100, 250, 500])]
        key_singlets: Vec<usize>,
    },
    /// Full pipeline: keygen, embed, encrypt, decrypt, extract.
    Demo {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Cover image; a generated gradient is used when absent.
        #[arg(long)]
        cover: Option<PathBuf>,
        /// Secret image; a generated half-size grayscale image is used when absent.
        #[arg(long)]
        secret: Option<PathBuf>,
        /// Size of generated images.
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long = "lsb-k", default_value_t = DEFAULT_BITS_PER_CHANNEL)]
        lsb_k: u8,
        #[arg(long = "iv-seed")]
        iv_seed: Option<u64>,
        #[arg(long = "out-dir", default_value = "demo")]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Keygen {
            protocol,
            out,
            report,
        } => commands::keygen(&protocol, &out, report.as_deref()),
        Command::HashKey { key } => commands::hash_key(&key),
        Command::Embed {
            cover,
            secret,
            out,
            lsb_k,
        } => commands::embed(&cover, &secret, &out, lsb_k),
        Command::Extract { stego, out } => commands::extract(&stego, &out),
        Command::Encrypt {
            input,
            key,
            out,
            iv_seed,
        } => commands::encrypt(&input, &key, &out, iv_seed),
        Command::Decrypt {
            input,
            key,
            out,
            shape,
        } => commands::decrypt(&input, &key, &out, &shape),
        Command::Analyze {
            sizes,
            out_dir,
            seed,
            iv_seed,
            pattern,
            key_singlets,
        } => commands::analyze(&sizes, &out_dir, seed, iv_seed, &pattern, &key_singlets),
        Command::Demo {
            protocol,
            cover,
            secret,
            size,
            lsb_k,
            iv_seed,
            out_dir,
        } => commands::demo(
            &protocol,
            cover.as_deref(),
            secret.as_deref(),
            size,
            lsb_k,
            iv_seed,
            &out_dir,
        ),
    };
    match result {
        Ok(()) => ExitCode::from(error::exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
