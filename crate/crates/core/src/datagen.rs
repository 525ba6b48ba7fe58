//! Seeded generators for the simulated experiments.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The repeated sample of the single-pattern experiment.
pub const SINGLE_PATTERN: [u8; 3] = [1, 0, 1];

/// One row of the eight-pattern conditional probability table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptRow {
    pub features: [u8; 3],
    pub p_target: f64,
}

/// `P(Y = 1 | A, B, C)` for every combination of the three features.
pub const CPT: [CptRow; 8] = [
    CptRow { features: [1, 1, 1], p_target: 1.00 },
    CptRow { features: [1, 1, 0], p_target: 0.90 },
    CptRow { features: [1, 0, 1], p_target: 0.80 },
    CptRow { features: [1, 0, 0], p_target: 0.60 },
    CptRow { features: [0, 1, 1], p_target: 0.40 },
    CptRow { features: [0, 1, 0], p_target: 0.20 },
    CptRow { features: [0, 0, 1], p_target: 0.10 },
    CptRow { features: [0, 0, 0], p_target: 0.00 },
];

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")))
    }
}

#[inline]
fn bernoulli<R: Rng>(p: f64, rng: &mut R) -> u8 {
    (rng.random::<f64>() < p) as u8
}

/// How labels are drawn for a block of copies of one pattern.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelNoise {
    /// Independent Bernoulli(p) label per copy.
    #[default]
    Bernoulli,
    /// Exactly `round(p * n)` positive labels at shuffled positions, so the
    /// empirical frequency equals the nominal one up to rounding.
    Exact,
}

impl LabelNoise {
    fn labels<R: Rng>(self, n: usize, p: f64, rng: &mut R) -> Vec<u8> {
        match self {
            LabelNoise::Bernoulli => (0..n).map(|_| bernoulli(p, rng)).collect(),
            LabelNoise::Exact => {
                let ones = (p * n as f64).round() as usize;
                let mut ys: Vec<u8> = (0..n).map(|i| (i < ones) as u8).collect();
                ys.shuffle(rng);
                ys
            }
        }
    }
}

/// `n` copies of [`SINGLE_PATTERN`], each labelled 1 with probability `p`.
pub fn single_pattern_dataset(n: usize, p: f64, seed: u64) -> Result<(Vec<Vec<u8>>, Vec<u8>)> {
    single_pattern_dataset_with(n, p, seed, LabelNoise::Bernoulli)
}

pub fn single_pattern_dataset_with(
    n: usize,
    p: f64,
    seed: u64,
    noise: LabelNoise,
) -> Result<(Vec<Vec<u8>>, Vec<u8>)> {
    check_probability(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ys = noise.labels(n, p, &mut rng);
    Ok((vec![SINGLE_PATTERN.to_vec(); n], ys))
}

/// Every CPT row repeated `copies` times (rows in table order), labels drawn
/// from the row's probability.
pub fn cpt_dataset(copies: usize, seed: u64) -> Result<(Vec<Vec<u8>>, Vec<u8>)> {
    cpt_dataset_with(copies, seed, LabelNoise::Bernoulli)
}

pub fn cpt_dataset_with(copies: usize, seed: u64, noise: LabelNoise) -> Result<(Vec<Vec<u8>>, Vec<u8>)> {
    if copies == 0 {
        return Err(Error::InvalidArgument("need at least one copy per row".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(8 * copies);
    let mut ys = Vec::with_capacity(8 * copies);
    for row in &CPT {
        xs.extend(std::iter::repeat_n(row.features.to_vec(), copies));
        ys.extend(noise.labels(copies, row.p_target, &mut rng));
    }
    Ok((xs, ys))
}

/// Noise-free point on a moon at angle `t`: the upper moon (label 0) is
/// `(cos t, sin t)`, the lower moon (label 1) is `(1 - cos t, 0.5 - sin t)`.
pub fn moon_point(lower: bool, t: f64) -> [f64; 2] {
    if lower {
        [1.0 - t.cos(), 0.5 - t.sin()]
    } else {
        [t.cos(), t.sin()]
    }
}

/// Two interleaved half-moons, `n / 2` points each (upper moon first), with
/// `t ~ U[0, pi]` and isotropic Gaussian noise.
pub fn two_moons(n: usize, noise_sd: f64, seed: u64) -> Result<(Vec<[f64; 2]>, Vec<u8>)> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("moons need a positive even sample count, got {n}")));
    }
    if !noise_sd.is_finite() || noise_sd < 0.0 {
        return Err(Error::InvalidArgument(format!("invalid noise level {noise_sd}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for label in [0u8, 1] {
        for _ in 0..n / 2 {
            let t = rng.random_range(0.0..=PI);
            let [x, y] = moon_point(label == 1, t);
            xs.push([x + noise.sample(&mut rng), y + noise.sample(&mut rng)]);
            ys.push(label);
        }
    }
    Ok((xs, ys))
}

/// `steps x steps` lattice over the two ranges, endpoints included. Rows run
/// along `y`, so point `i * steps + j` is `(x_j, y_i)`.
pub fn mesh_grid(x_range: (f64, f64), y_range: (f64, f64), steps: usize) -> Result<Vec<[f64; 2]>> {
    if steps < 2 {
        return Err(Error::InvalidArgument("mesh needs at least 2 steps".into()));
    }
    for (lo, hi) in [x_range, y_range] {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidArgument(format!("degenerate range [{lo}, {hi}]")));
        }
    }
    let at = |(lo, hi): (f64, f64), k: usize| lo + (hi - lo) * k as f64 / (steps - 1) as f64;
    let mut out = Vec::with_capacity(steps * steps);
    for i in 0..steps {
        for j in 0..steps {
            out.push([at(x_range, j), at(y_range, i)]);
        }
    }
    Ok(out)
}

/// Bounding box of `points` as `((x_lo, x_hi), (y_lo, y_hi))`.
pub fn bounding_box(points: &[[f64; 2]]) -> Result<((f64, f64), (f64, f64))> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no points".into()));
    }
    let mut bx = (f64::INFINITY, f64::NEG_INFINITY);
    let mut by = bx;
    for p in points {
        bx = (bx.0.min(p[0]), bx.1.max(p[0]));
        by = (by.0.min(p[1]), by.1.max(p[1]));
    }
    Ok((bx, by))
}

/// Widens a range by `fraction` of its width on each side.
pub fn expand(range: (f64, f64), fraction: f64) -> (f64, f64) {
    let pad = (range.1 - range.0) * fraction;
    (range.0 - pad, range.1 + pad)
}

/// Default mesh extent: the data bounding box grown by half its size per side.
pub fn default_mesh_extent(points: &[[f64; 2]]) -> Result<((f64, f64), (f64, f64))> {
    let (bx, by) = bounding_box(points)?;
    Ok((expand(bx, 0.5), expand(by, 0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pattern_extremes() {
        let (xs, ys) = single_pattern_dataset(100, 1.0, 1).unwrap();
        assert!(xs.iter().all(|x| x == &SINGLE_PATTERN));
        assert!(ys.iter().all(|&y| y == 1));
        let (_, ys) = single_pattern_dataset(100, 0.0, 1).unwrap();
        assert!(ys.iter().all(|&y| y == 0));
        assert!(single_pattern_dataset(10, 1.2, 1).is_err());
    }

    #[test]
    fn exact_noise_hits_the_proportion() {
        let (_, ys) = single_pattern_dataset_with(100, 0.65, 3, LabelNoise::Exact).unwrap();
        assert_eq!(ys.iter().filter(|&&y| y == 1).count(), 65);
        let (_, ys) = cpt_dataset_with(100, 3, LabelNoise::Exact).unwrap();
        for (row, chunk) in CPT.iter().zip(ys.chunks(100)) {
            let ones = chunk.iter().filter(|&&y| y == 1).count();
            assert_eq!(ones, (row.p_target * 100.0).round() as usize);
        }
    }

    #[test]
    fn cpt_table_covers_all_rows_once() {
        let mut seen: Vec<[u8; 3]> = CPT.iter().map(|r| r.features).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 8);
        let (xs, ys) = cpt_dataset(50, 4).unwrap();
        assert_eq!(xs.len(), 400);
        assert!(ys[..50].iter().all(|&y| y == 1));
        assert!(ys[350..].iter().all(|&y| y == 0));
        assert!(cpt_dataset(0, 4).is_err());
    }

    #[test]
    fn moons_formula_and_shape() {
        assert_eq!(moon_point(false, 0.0), [1.0, 0.0]);
        assert_eq!(moon_point(true, 0.0), [0.0, 0.5]);
        assert!(two_moons(7, 0.1, 1).is_err());
        let (xs, ys) = two_moons(10, 0.0, 9).unwrap();
        assert_eq!(ys.iter().filter(|&&y| y == 1).count(), 5);
        assert_eq!(xs.len(), 10);
    }

    #[test]
    fn mesh_cases() {
        let corners = mesh_grid((0.0, 1.0), (2.0, 3.0), 2).unwrap();
        assert_eq!(corners, vec![[0.0, 2.0], [1.0, 2.0], [0.0, 3.0], [1.0, 3.0]]);
        let g = mesh_grid((0.0, 1.0), (0.0, 1.0), 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[4], [0.5, 0.5]);
        assert!(mesh_grid((0.0, 1.0), (0.0, 1.0), 1).is_err());
        assert!(mesh_grid((1.0, 1.0), (0.0, 1.0), 3).is_err());
        let ext = default_mesh_extent(&[[0.0, 0.0], [2.0, 4.0]]).unwrap();
        assert_eq!(ext, ((-1.0, 3.0), (-2.0, 6.0)));
    }
}
