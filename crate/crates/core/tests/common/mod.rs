#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tmuq_core::harness::cifar::CifarSet;
use tmuq_core::{Clause, ClauseBank, Polarity, TaState};

/// Brute-force clause output straight from automaton states: literal `k`
/// is included iff its state exceeds `n`; literal `k < f` is `x_k`, literal
/// `f + k` is `NOT x_k`.
pub fn oracle_clause(states: &[u16], n: u16, x: &[u8], empty_value: bool) -> bool {
    let f = x.len();
    let mut any = false;
    for (k, &s) in states.iter().enumerate() {
        if s > n {
            any = true;
            let lit = if k < f { x[k] == 1 } else { x[k - f] == 0 };
            if !lit {
                return false;
            }
        }
    }
    any || empty_value
}

/// Inference class sum by enumeration over clauses.
pub fn oracle_sum(clauses: &[(Vec<u16>, Polarity, u32)], n: u16, x: &[u8]) -> i64 {
    clauses
        .iter()
        .filter(|(s, _, _)| oracle_clause(s, n, x, false))
        .map(|(_, p, w)| if *p == Polarity::Positive { i64::from(*w) } else { -i64::from(*w) })
        .sum()
}

/// Random clause specs with about `density` of automata on the include side.
pub fn random_clauses(rng: &mut ChaCha8Rng, f: usize, c: usize, n: u16, density: f64) -> Vec<(Vec<u16>, Polarity, u32)> {
    (0..c)
        .map(|j| {
            let states = (0..2 * f)
                .map(|_| if rng.random::<f64>() < density { rng.random_range(n + 1..=2 * n) } else { rng.random_range(1..=n) })
                .collect();
            let polarity = if j % 2 == 0 { Polarity::Positive } else { Polarity::Negative };
            (states, polarity, rng.random_range(1..6))
        })
        .collect()
}

pub fn build_bank(f: usize, specs: &[(Vec<u16>, Polarity, u32)], n: u16) -> ClauseBank {
    let clauses = specs
        .iter()
        .map(|(s, p, w)| {
            let states = s.iter().map(|&v| TaState::new(v, n).unwrap()).collect();
            Clause::from_parts(states, *p, *w, n).unwrap()
        })
        .collect();
    ClauseBank::from_clauses(f, clauses).unwrap()
}

/// Two-class 32x32 RGB images separable by colour layout: class 0 is bright
/// in the lower half, class 1 is blue-dominant; `overlap` in [0, 1] mixes a
/// fraction of each class's pattern into the other.
pub fn synthetic_images(per_class: usize, overlap: f64, seed: u64) -> CifarSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = CifarSet { class_names: vec!["automobile".into(), "ship".into()], ..Default::default() };
    for i in 0..2 * per_class {
        let label = i % 2;
        let shown = if rng.random::<f64>() < overlap { 1 - label } else { label };
        let mut px = vec![0u8; 3072];
        for c in 0..3 {
            for r in 0..32 {
                for col in 0..32 {
                    let base: f64 = match shown {
                        0 if r >= 16 => 180.0,
                        0 => 60.0,
                        _ if c == 2 => 200.0,
                        _ => 90.0,
                    };
                    px[c * 1024 + r * 32 + col] = (base + rng.random_range(-70.0..70.0)).clamp(0.0, 255.0) as u8;
                }
            }
        }
        set.images.push(px);
        set.labels.push(label);
    }
    set
}
