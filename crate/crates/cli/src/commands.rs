use std::fs;
use std::path::Path;

use qstego_core::aes::{
    decrypt_payload, encrypt_payload, iv_from_seed, random_iv, AesKey, CipherEnvelope,
};
use qstego_core::e91::{
    key_generation_report, key_rate_csv, run_protocol_with_threshold, ChannelConfig, Eavesdropper,
    DEFAULT_CHSH_THRESHOLD,
};
use qstego_core::image::Image;
use qstego_core::imageio::{
    generate_test_image, generate_test_image_with_channels, read_image, write_image_auto,
    TestPattern,
};
use qstego_core::metrics::{
    ciphertext_as_image, evaluate_encryption, histogram, key_sensitivity_experiment, timing_report,
    METRICS_CSV_HEADER,
};
use qstego_core::pipeline::{establish_key, run_demo, DemoConfig, KeygenConfig};
use qstego_core::sha256::derive_key;
use qstego_core::{stego, KeyBits};

use crate::error::CliError;
use crate::{KeySource, ProtocolArgs};

/// Reference key for the key-sensitivity table.
const SENSITIVITY_KEY: &str = "000010010110011110101011111010111011101011111010111";
const HISTOGRAM_HEIGHT: usize = 128;

fn keygen_config(args: &ProtocolArgs) -> Result<KeygenConfig, CliError> {
    if args.singlets == 0 {
        return Err(CliError::Usage("--singlets must be at least 1".into()));
    }
    let eve = if args.eve {
        Eavesdropper::InterceptResend
    } else {
        Eavesdropper::None
    };
    let channel =
        ChannelConfig::new(args.depolarizing_p, eve).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut config = KeygenConfig::new(args.singlets, args.seed);
    config.channel = channel;
    config.chsh_threshold = args.chsh_threshold;
    config.force = args.force;
    Ok(config)
}

fn load_key_bits(source: &KeySource) -> Result<KeyBits, CliError> {
    let text = match (&source.key_file, &source.bits) {
        (Some(path), _) => {
            fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?
        }
        (None, Some(bits)) => bits.clone(),
        (None, None) => return Err(CliError::Usage("need --key-file or --bits".into())),
    };
    text.parse()
        .map_err(|e| CliError::Usage(format!("bad key: {e}")))
}

/// The AES key is always recomputed from the bits.
fn load_key(source: &KeySource) -> Result<AesKey, CliError> {
    let bits = load_key_bits(source)?;
    let digest = derive_key(&bits).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(digest.into())
}

fn read(path: &Path) -> Result<Image, CliError> {
    read_image(path).map_err(|source| CliError::Image {
        path: path.into(),
        source,
    })
}

fn write(img: &Image, path: &Path) -> Result<(), CliError> {
    write_image_auto(img, path).map_err(|source| CliError::Image {
        path: path.into(),
        source,
    })
}

fn named(stem: &str, img: &Image) -> String {
    let ext = if img.channels() == 1 { "pgm" } else { "ppm" };
    format!("{stem}.{ext}")
}

fn write_text(path: &Path, text: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path.display().to_string(), e))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path.display().to_string(), e))
}

fn parse_shape(shape: &str) -> Result<(usize, usize, usize), CliError> {
    let bad = || CliError::Usage(format!("bad --shape {shape:?}, expected WxH or WxHxC"));
    let parts: Vec<usize> = shape
        .split('x')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [w, h] => Ok((w, h, 3)),
        [w, h, c] => Ok((w, h, c)),
        _ => Err(bad()),
    }
}

pub fn keygen(args: &ProtocolArgs, out: &Path, report: Option<&Path>) -> Result<(), CliError> {
    let config = keygen_config(args)?;
    let material = establish_key(&config)?;
    let p = &material.protocol;
    write_text(out, format!("{}\n", p.sifted_key()))?;
    if let Some(path) = report {
        let row = key_generation_report(p);
        write_text(path, key_rate_csv(&[row]))?;
    }
    println!("singlets      {}", p.singlets());
    println!("key bits      {}", p.sifted_key().len());
    match p.chsh_value {
        Some(e) => println!("chsh          {e:.4}"),
        None => println!("chsh          n/a"),
    }
    println!("secure        {}", p.secure);
    println!("qber          {:.4}", p.qber());
    println!("sha256        {}", material.digest);
    if !p.secure {
        eprintln!("warning: CHSH test failed; key written because --force was given");
    }
    Ok(())
}

pub fn hash_key(source: &KeySource) -> Result<(), CliError> {
    let bits = load_key_bits(source)?;
    let digest = derive_key(&bits).map_err(|e| CliError::Usage(e.to_string()))?;
    println!("{digest}");
    Ok(())
}

pub fn embed(cover: &Path, secret: &Path, out: &Path, k: u8) -> Result<(), CliError> {
    let cover_img = read(cover)?;
    let secret_img = read(secret)?;
    let stego_img = stego::embed(&cover_img, &secret_img, k)?;
    write(&stego_img, out)?;
    println!(
        "embedded {} into {} at k={k} ({} of {} bytes)",
        secret_img.size_label(),
        cover_img.size_label(),
        secret_img.samples().len(),
        stego::capacity(&cover_img, k)?
    );
    Ok(())
}

pub fn extract(stego_path: &Path, out: &Path) -> Result<(), CliError> {
    let img = read(stego_path)?;
    let secret = stego::extract(&img)?;
    write(&secret, out)?;
    println!(
        "extracted {}x{} channels",
        secret.size_label(),
        secret.channels()
    );
    Ok(())
}

pub fn encrypt(
    input: &Path,
    key: &KeySource,
    out: &Path,
    iv_seed: Option<u64>,
) -> Result<(), CliError> {
    let img = read(input)?;
    let key = load_key(key)?;
    let iv = iv_seed.map_or_else(random_iv, iv_from_seed);
    let envelope = encrypt_payload(img.samples(), &key, iv);
    write_text(out, envelope.to_bytes())?;
    println!("shape {}x{}", img.size_label(), img.channels());
    Ok(())
}

pub fn decrypt(input: &Path, key: &KeySource, out: &Path, shape: &str) -> Result<(), CliError> {
    let (w, h, c) = parse_shape(shape)?;
    let bytes = fs::read(input).map_err(|e| CliError::io(input.display().to_string(), e))?;
    let envelope = CipherEnvelope::from_bytes(&bytes).map_err(|source| CliError::Envelope {
        path: input.into(),
        source,
    })?;
    let key = load_key(key)?;
    let plain = decrypt_payload(&envelope, &key);
    let found = plain.len();
    // a wrong key still yields a writable image of the right shape
    let img = Image::new(w, h, c, plain).map_err(|_| {
        CliError::Usage(format!(
            "shape {shape} needs {} samples, envelope holds {found}",
            w * h * c
        ))
    })?;
    write(&img, out)
}

pub fn analyze(
    sizes: &[usize],
    out_dir: &Path,
    seed: u64,
    iv_seed: u64,
    pattern: &str,
    key_singlets: &[usize],
) -> Result<(), CliError> {
    if sizes.contains(&0) {
        return Err(CliError::Usage("--sizes entries must be positive".into()));
    }
    let pattern: TestPattern = pattern.parse().map_err(CliError::Usage)?;
    create_dir(out_dir)?;
    let hist_dir = out_dir.join("histograms");
    create_dir(&hist_dir)?;

    let k1: KeyBits = SENSITIVITY_KEY.parse().expect("constant key parses");
    let key: AesKey = derive_key(&k1).expect("constant key is non-empty").into();
    let iv = iv_from_seed(iv_seed);

    let mut metrics = format!("{METRICS_CSV_HEADER}\n");
    for &size in sizes {
        let img = generate_test_image(size, pattern, seed);
        let report = evaluate_encryption(&img, &key, iv);
        metrics.push_str(&report.to_csv_row());
        metrics.push('\n');

        let env = encrypt_payload(img.samples(), &key, iv);
        let cipher_img = ciphertext_as_image(&env, &img);
        for (label, picture) in [("original", &img), ("encrypted", &cipher_img)] {
            let hist = histogram(picture);
            write_text(&hist_dir.join(format!("{size}_{label}.csv")), hist.to_csv())?;
            for c in 0..picture.channels() {
                let render = hist.render(c, HISTOGRAM_HEIGHT);
                write(&render, &hist_dir.join(format!("{size}_{label}_c{c}.pgm")))?;
            }
            write(
                picture,
                &out_dir.join(named(&format!("{size}_{label}"), picture)),
            )?;
        }
        println!(
            "{:>9}  entropy {:.5}  npcr {:.4}%  uaci {:.4}%",
            report.pixel_size, report.entropy_bits, report.npcr_percent, report.uaci_percent
        );
    }
    write_text(&out_dir.join("metrics.csv"), metrics)?;

    let timing = timing_report(sizes, &key, iv, seed);
    write_text(&out_dir.join("timing.csv"), timing.to_csv())?;

    let smallest = sizes.iter().copied().min().unwrap_or(64);
    let sens_img = generate_test_image(smallest, pattern, seed);
    let sens = key_sensitivity_experiment(&sens_img, &k1, 0, iv).expect("flip index 0 is in range");
    write_text(&out_dir.join("key_sensitivity.csv"), sens.to_csv())?;
    write(
        &sens.wrong_key_image,
        &out_dir.join(named("wrong_key", &sens.wrong_key_image)),
    )?;
    println!(
        "key sensitivity  npcr {:.4}%  restores {}",
        sens.npcr_percent, sens.correct_key_restores
    );

    let mut rows = Vec::new();
    for &n in key_singlets {
        let config = keygen_config(&ProtocolArgs {
            singlets: n,
            seed,
            depolarizing_p: 1.0,
            eve: false,
            chsh_threshold: DEFAULT_CHSH_THRESHOLD,
            force: true,
        })?;
        let result = run_protocol_with_threshold(n, &config.channel, seed, config.chsh_threshold)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        rows.push(key_generation_report(&result));
    }
    let key_rate = key_rate_csv(&rows);
    write_text(&out_dir.join("key_rate.csv"), &key_rate)?;
    print!("{key_rate}");
    println!("wrote {}", out_dir.display());
    Ok(())
}

pub fn demo(
    args: &ProtocolArgs,
    cover: Option<&Path>,
    secret: Option<&Path>,
    size: usize,
    lsb_k: u8,
    iv_seed: Option<u64>,
    out_dir: &Path,
) -> Result<(), CliError> {
    if size < 2 {
        return Err(CliError::Usage("--size must be at least 2".into()));
    }
    let cover = match cover {
        Some(p) => read(p)?,
        None => generate_test_image(size, TestPattern::Gradient, args.seed),
    };
    let secret = match secret {
        Some(p) => read(p)?,
        None => generate_test_image_with_channels(size / 2, 1, TestPattern::Blocks, args.seed),
    };
    let config = DemoConfig {
        keygen: keygen_config(args)?,
        lsb_bits: lsb_k,
        iv_seed,
    };
    let outcome = run_demo(&config, &cover, &secret)?;

    create_dir(out_dir)?;
    write_text(
        &out_dir.join("key.txt"),
        format!("{}\n", outcome.key.protocol.sifted_key()),
    )?;
    let encrypted = ciphertext_as_image(&outcome.envelope, &outcome.stego);
    write_text(&out_dir.join("stego.qse"), outcome.envelope.to_bytes())?;
    for (stem, img) in [
        ("cover", &cover),
        ("secret", &secret),
        ("stego", &outcome.stego),
        ("encrypted", &encrypted),
        ("decrypted", &outcome.decrypted),
        ("recovered", &outcome.recovered),
    ] {
        write(img, &out_dir.join(named(stem, img)))?;
    }
    let manifest = outcome.manifest.render();
    write_text(&out_dir.join("manifest.txt"), &manifest)?;
    print!("{manifest}");
    Ok(())
}
