//! Input generators shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tmuq_core::{BitImage, ImageThermometer};

pub fn random_bits(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

/// Smooth random 32x32 RGB image, thermometer-encoded.
pub fn random_image(resolution: usize, seed: u64) -> BitImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: [f64; 3] = [rng.random_range(0.0..255.0), rng.random_range(0.0..255.0), rng.random_range(0.0..255.0)];
    let mut pixels = Vec::with_capacity(3072);
    for b in base {
        for p in 0..1024 {
            let wave = 40.0 * ((p % 32) as f64 / 5.0).sin() + rng.random_range(-30.0..30.0);
            pixels.push((b + wave).clamp(0.0, 255.0) as u8);
        }
    }
    ImageThermometer::new(3, resolution).encode_image(&pixels, 32, 32).expect("valid image")
}
