use proptest::prelude::*;
use qstego_core::aes::{decrypt_payload, encrypt_payload, iv_from_seed, AesKey};
use qstego_core::image::Image;
use qstego_core::imageio::{generate_test_image, generate_test_image_with_channels, TestPattern};
use qstego_core::stego::{capacity, embed, extract, StegoError, HEADER_BYTES};

fn image(width: usize, height: usize, channels: usize, fill: &[u8]) -> Image {
    let n = width * height * channels;
    let samples = fill.iter().copied().cycle().take(n).collect();
    Image::new(width, height, channels, samples).unwrap()
}

fn arb_case() -> impl Strategy<Value = (Image, Image, u8)> {
    (
        1usize..40,
        1usize..40,
        prop_oneof![Just(1usize), Just(3usize)],
        1usize..12,
        1usize..12,
        prop_oneof![Just(1usize), Just(3usize)],
        prop_oneof![Just(1u8), Just(2u8), Just(4u8)],
        proptest::collection::vec(any::<u8>(), 1..64),
        proptest::collection::vec(any::<u8>(), 1..64),
    )
        .prop_map(|(cw, ch, cc, sw, sh, sc, k, cf, sf)| {
            (image(cw, ch, cc, &cf), image(sw, sh, sc, &sf), k)
        })
}

proptest! {
    #[test]
    fn embed_extract_laws((cover, secret, k) in arb_case()) {
        let fits = HEADER_BYTES + secret.samples().len()
            <= cover.samples().len() * usize::from(k) / 8;
        prop_assert_eq!(fits, secret.samples().len() <= capacity(&cover, k).unwrap());
        match embed(&cover, &secret, k) {
            Ok(stego) => {
                prop_assert!(fits);
                prop_assert_eq!(extract(&stego).unwrap(), secret);
                let bound = (1u8 << k) - 1;
                for (a, b) in stego.samples().iter().zip(cover.samples()) {
                    prop_assert!(a.abs_diff(*b) <= bound);
                    prop_assert_eq!(a >> k, b >> k);
                }
            }
            Err(StegoError::CapacityExceeded { required, available, .. }) => {
                prop_assert!(!fits);
                prop_assert!(required > available);
            }
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }
}

#[test]
fn survives_encrypt_decrypt() {
    let cover = generate_test_image(128, TestPattern::Gradient, 0);
    let secret = generate_test_image_with_channels(64, 1, TestPattern::Blocks, 3);
    let stego = embed(&cover, &secret, 2).unwrap();
    let key = AesKey::new([0x5a; 32]);
    let env = encrypt_payload(stego.samples(), &key, iv_from_seed(1));
    let back = Image::new(128, 128, 3, decrypt_payload(&env, &key)).unwrap();
    assert_eq!(extract(&back).unwrap(), secret);
}

#[test]
fn k2_fits_half_resolution_secret() {
    let cover = generate_test_image(256, TestPattern::Gradient, 0);
    let gray = generate_test_image_with_channels(128, 1, TestPattern::Noise, 0);
    assert!(embed(&cover, &gray, 2).is_ok());
    assert!(embed(&cover, &gray, 1).is_ok());
    // a colour secret at half resolution fills k=2 exactly, leaving no room for the header
    let color = generate_test_image(128, TestPattern::Noise, 0);
    assert_eq!(
        embed(&cover, &color, 2),
        Err(StegoError::CapacityExceeded {
            required: 49_152 + HEADER_BYTES,
            available: 49_152,
            k: 2
        })
    );
    assert!(embed(&cover, &color, 4).is_ok());
}

#[test]
fn noise_images_are_rejected() {
    for seed in 0..50 {
        let noise = generate_test_image(32, TestPattern::Noise, seed);
        assert_eq!(extract(&noise), Err(StegoError::NotStego), "seed {seed}");
    }
}
