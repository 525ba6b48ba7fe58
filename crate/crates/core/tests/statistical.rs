use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use tmuq_core::datagen::{cpt_dataset, moon_point, single_pattern_dataset, two_moons, CPT};
use tmuq_core::machine::FeedbackConfig;
use tmuq_core::{BinaryTM, Clause, Literals, Polarity, TMParams, TaState};

/// Goodness-of-fit p-value for observed counts against expected proportions.
fn chi_square_p(observed: &[f64], probs: &[f64]) -> f64 {
    let total: f64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(probs)
        .map(|(o, p)| (o - total * p).powi(2) / (total * p))
        .sum();
    ChiSquared::new((observed.len() - 1) as f64).unwrap().sf(stat)
}

fn cfg(s: f64, boost: bool) -> FeedbackConfig {
    FeedbackConfig { specificity: s, boost_true_positive: boost, literal_budget: None }
}

#[test]
fn erase_steps_each_literal_with_probability_one_over_s() {
    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut moved, mut stayed) = (0.0, 0.0);
    for _ in 0..2000 {
        let states = vec![TaState::new(2 * n, n).unwrap(); 8];
        let mut c = Clause::from_parts(states, Polarity::Positive, 1, n).unwrap();
        c.erase(&cfg(2.0, false), &mut rng);
        for t in c.states() {
            if t.value() == 2 * n - 1 { moved += 1.0 } else { stayed += 1.0 }
        }
    }
    let p = chi_square_p(&[moved, stayed], &[0.5, 0.5]);
    assert!(p > 1e-3, "erase frequency {} (p = {p})", moved / (moved + stayed));
}

#[test]
fn recognize_probabilities_without_boost() {
    // s = 3: satisfied literals step toward include w.p. 2/3, unsatisfied
    // literals toward exclude w.p. 1/3.
    let n = 4;
    let x = Literals::from_bits(&[1, 0]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut up, mut down) = ([0.0; 2], [0.0; 2]);
    for _ in 0..3000 {
        let mut c = Clause::from_parts(vec![TaState::new(n, n).unwrap(); 4], Polarity::Positive, 1, n).unwrap();
        // Include x0 so the clause matches and is recognized, not erased.
        c.set_state(0, TaState::new(n + 2, n).unwrap());
        c.recognize(&x, &cfg(3.0, false), &mut rng);
        // literal 3 = NOT x1 (true); literal 1 = x1 and 2 = NOT x0 (false).
        if c.state(3).value() == n + 1 { up[0] += 1.0 } else { up[1] += 1.0 }
        for lit in [1, 2] {
            if c.state(lit).value() == n - 1 { down[0] += 1.0 } else { down[1] += 1.0 }
        }
    }
    assert!(chi_square_p(&up, &[2.0 / 3.0, 1.0 / 3.0]) > 1e-3, "include rate {}", up[0] / 3000.0);
    assert!(chi_square_p(&down, &[1.0 / 3.0, 2.0 / 3.0]) > 1e-3, "exclude rate {}", down[0] / 6000.0);
}

#[test]
fn boosted_recognize_always_includes_satisfied_literals() {
    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut c = Clause::new(2, Polarity::Positive, n);
    c.recognize(&Literals::from_bits(&[1, 0]), &cfg(1.0, true), &mut rng);
    assert!(c.includes(0) && c.includes(3));
    assert!(!c.includes(1) && !c.includes(2));
    assert_eq!(c.weight(), 2);
}

#[test]
fn matching_patch_chosen_uniformly() {
    // One feature, two patches x = 1 and x = 0, empty clauses with N = 1 and
    // boost: a recognized positive clause includes exactly the true literal
    // of the patch it was trained on.
    let patches = [Literals::from_bits(&[1]), Literals::from_bits(&[0])];
    let (mut first, mut second) = (0.0, 0.0);
    for seed in 0..4000 {
        let params = TMParams::new(100, 5.0, 2).with_seed(seed).with_boost(true).with_states_per_action(1);
        let mut tm = BinaryTM::new(1, params).unwrap();
        tm.train_patches(&patches, true);
        let c = &tm.bank().clauses()[0];
        match (c.includes(0), c.includes(1)) {
            (true, false) => first += 1.0,
            (false, true) => second += 1.0,
            (false, false) => {}
            _ => panic!("clause trained on both patches"),
        }
    }
    assert!(first + second > 1500.0);
    let p = chi_square_p(&[first, second], &[0.5, 0.5]);
    assert!(p > 1e-3, "{first} vs {second} (p = {p})");
}

#[test]
fn single_pattern_labels_follow_p() {
    let n = 100_000;
    let (_, ys) = single_pattern_dataset(n, 0.7, 99).unwrap();
    let mean = ys.iter().map(|&y| f64::from(y)).sum::<f64>() / n as f64;
    let sigma = (0.7f64 * 0.3 / n as f64).sqrt();
    assert!((mean - 0.7).abs() < 3.0 * sigma, "mean {mean}");
}

#[test]
fn cpt_marginals_converge() {
    let copies = 100_000;
    let (xs, ys) = cpt_dataset(copies, 8).unwrap();
    for (k, row) in CPT.iter().enumerate() {
        let block = k * copies..(k + 1) * copies;
        assert!(xs[block.clone()].iter().all(|x| x.as_slice() == row.features));
        let mean = ys[block].iter().map(|&y| f64::from(y)).sum::<f64>() / copies as f64;
        let sigma = (row.p_target * (1.0 - row.p_target) / copies as f64).sqrt();
        assert!((mean - row.p_target).abs() <= 3.0 * sigma, "row {k}: {mean}");
    }
}

#[test]
fn noiseless_moons_lie_on_arcs() {
    let (xs, ys) = two_moons(400, 0.0, 4).unwrap();
    for (p, &y) in xs.iter().zip(&ys) {
        let (cx, cy) = if y == 0 { (0.0, 0.0) } else { (1.0, 0.5) };
        let r = ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(if y == 0 { p[1] >= -1e-12 } else { p[1] <= 0.5 + 1e-12 });
    }
    let end = moon_point(true, std::f64::consts::PI);
    assert!((end[0] - 2.0).abs() < 1e-12 && (end[1] - 0.5).abs() < 1e-12);
}

#[test]
fn generators_are_reproducible() {
    assert_eq!(two_moons(100, 0.2, 3).unwrap(), two_moons(100, 0.2, 3).unwrap());
    assert_ne!(two_moons(100, 0.2, 3).unwrap().0, two_moons(100, 0.2, 4).unwrap().0);
    assert_eq!(cpt_dataset(10, 1).unwrap(), cpt_dataset(10, 1).unwrap());
}
