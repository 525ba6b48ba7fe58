//! One-vs-rest multiclass wrapper around [`BinaryTM`] units.

use std::borrow::Cow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bits::Literals;
use crate::error::{check_len, Error, Result};
use crate::machine::{BinaryTM, TMParams};

/// SplitMix64 finalizer; derives independent per-unit seeds from one base seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the generator that shuffles the sample order.
pub fn order_seed(base: u64) -> u64 {
    derive_seed(base, 0)
}

/// Seed of the unit for class `k`.
pub fn unit_seed(base: u64, k: usize) -> u64 {
    derive_seed(base, k as u64 + 1)
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax_lowest(values: &[i64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct MulticlassTM {
    classes: Vec<String>,
    units: Vec<BinaryTM>,
    order_rng: ChaCha8Rng,
}

impl MulticlassTM {
    pub fn new(classes: Vec<String>, num_features: usize, params: TMParams) -> Result<Self> {
        let seeds: Vec<u64> = (0..classes.len()).map(|k| unit_seed(params.seed, k)).collect();
        Self::with_unit_seeds(classes, num_features, params.clone(), &seeds, order_seed(params.seed))
    }

    /// Builds units with explicit seeds; `params.seed` is ignored.
    pub fn with_unit_seeds(
        classes: Vec<String>,
        num_features: usize,
        params: TMParams,
        unit_seeds: &[u64],
        order_seed: u64,
    ) -> Result<Self> {
        check_len(classes.len(), unit_seeds.len())?;
        let units = unit_seeds
            .iter()
            .map(|&seed| BinaryTM::new(num_features, params.clone().with_seed(seed)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_units(classes, units, ChaCha8Rng::seed_from_u64(order_seed))
    }

    pub fn from_units(classes: Vec<String>, units: Vec<BinaryTM>, order_rng: ChaCha8Rng) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::InvalidArgument("need at least two classes".into()));
        }
        check_len(classes.len(), units.len())?;
        let mut sorted = classes.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("class names must be unique".into()));
        }
        let f = units[0].num_features();
        if let Some(u) = units.iter().find(|u| u.num_features() != f) {
            return Err(Error::InputShape { expected: f, actual: u.num_features() });
        }
        Ok(Self { classes, units, order_rng })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn num_features(&self) -> usize {
        self.units[0].num_features()
    }

    pub fn units(&self) -> &[BinaryTM] {
        &self.units
    }

    pub fn units_mut(&mut self) -> &mut [BinaryTM] {
        &mut self.units
    }

    pub fn order_rng(&self) -> &ChaCha8Rng {
        &self.order_rng
    }

    pub fn params(&self) -> &TMParams {
        self.units[0].params()
    }

    pub fn target(&self) -> u32 {
        self.units[0].target()
    }

    pub fn class_index(&self, name: &str) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    /// Clipped inference class sum of every unit, in class order.
    pub fn class_sums_all(&self, input: &[u8]) -> Result<Vec<i64>> {
        check_len(self.num_features(), input.len())?;
        Ok(self.class_sums_literals(&Literals::from_bits(input)))
    }

    pub fn class_sums_literals(&self, lits: &Literals) -> Vec<i64> {
        self.units.iter().map(|u| u.clipped_sum(lits)).collect()
    }

    pub fn predict(&self, input: &[u8]) -> Result<usize> {
        Ok(argmax_lowest(&self.class_sums_all(input)?))
    }

    /// Unweighted (positive, negative) active clause counts per class.
    pub fn clause_counts(&self, input: &[u8]) -> Result<Vec<(usize, usize)>> {
        check_len(self.num_features(), input.len())?;
        let lits = Literals::from_bits(input);
        Ok(self.units.iter().map(|u| u.bank().active_counts(&lits)).collect())
    }

    /// Trains every unit on every sample: unit `k` sees target 1 for class
    /// `k` and 0 for the rest. Labels are class indices.
    pub fn fit(&mut self, xs: &[Vec<u8>], labels: &[usize], epochs: usize) -> Result<()> {
        let f = self.num_features();
        let lits = xs
            .iter()
            .map(|x| {
                check_len(f, x.len())?;
                Ok(Literals::from_bits(x))
            })
            .collect::<Result<Vec<_>>>()?;
        self.fit_samples(labels, epochs, |i| Cow::Borrowed(std::slice::from_ref(&lits[i])))
    }

    /// Like [`fit`](Self::fit) with string labels.
    pub fn fit_named(&mut self, xs: &[Vec<u8>], labels: &[&str], epochs: usize) -> Result<()> {
        let idx = labels.iter().map(|l| self.class_index(l)).collect::<Result<Vec<_>>>()?;
        self.fit(xs, &idx, epochs)
    }

    pub(crate) fn fit_samples<'a>(
        &mut self,
        labels: &[usize],
        epochs: usize,
        mut patches_of: impl FnMut(usize) -> Cow<'a, [Literals]>,
    ) -> Result<()> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("cannot fit on an empty dataset".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= self.num_classes()) {
            return Err(Error::UnknownLabel(bad.to_string()));
        }
        let mut order: Vec<usize> = (0..labels.len()).collect();
        for _ in 0..epochs {
            order.shuffle(&mut self.order_rng);
            for &i in &order {
                let patches = patches_of(i);
                self.train_patches(&patches, labels[i]);
            }
        }
        Ok(())
    }

    pub(crate) fn train_patches(&mut self, patches: &[Literals], label: usize) {
        self.units
            .par_iter_mut()
            .enumerate()
            .for_each(|(k, unit)| unit.train_patches(patches, k == label));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn argmax_tie_break_and_negatives() {
        assert_eq!(argmax_lowest(&[3, 7, 7]), 1);
        assert_eq!(argmax_lowest(&[0, 0, 0]), 0);
        assert_eq!(argmax_lowest(&[-5, -2, -9]), 1);
    }

    #[test]
    fn construction_checks() {
        let p = TMParams::new(10, 2.0, 4);
        assert!(MulticlassTM::new(names(1), 3, p.clone()).is_err());
        assert!(MulticlassTM::new(vec!["a".into(), "a".into()], 3, p.clone()).is_err());
        assert!(MulticlassTM::new(names(3), 3, p).is_ok());
    }

    #[test]
    fn untrained_sums_are_zero() {
        let tm = MulticlassTM::new(names(3), 4, TMParams::new(10, 2.0, 4)).unwrap();
        assert_eq!(tm.class_sums_all(&[1, 0, 1, 1]).unwrap(), vec![0, 0, 0]);
        assert_eq!(tm.predict(&[1, 0, 1, 1]).unwrap(), 0);
        assert!(tm.class_sums_all(&[1, 0]).is_err());
    }

    #[test]
    fn single_clause_vote() {
        let mut tm = MulticlassTM::new(names(3), 2, TMParams::new(10, 2.0, 4)).unwrap();
        let c = &mut tm.units_mut()[1].bank_mut().clauses_mut()[0];
        c.set_included(0, true);
        c.set_weight(5).unwrap();
        assert_eq!(tm.class_sums_all(&[1, 0]).unwrap(), vec![0, 5, 0]);
        assert_eq!(tm.predict(&[1, 0]).unwrap(), 1);
        assert_eq!(tm.clause_counts(&[1, 0]).unwrap(), vec![(0, 0), (1, 0), (0, 0)]);
    }

    #[test]
    fn unknown_label_rejected() {
        let mut tm = MulticlassTM::new(names(2), 2, TMParams::new(10, 2.0, 4)).unwrap();
        assert!(matches!(tm.fit(&[vec![1, 0]], &[2], 1), Err(Error::UnknownLabel(_))));
        assert!(matches!(tm.fit_named(&[vec![1, 0]], &["zebra"], 1), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn derived_seeds_differ() {
        let s: Vec<u64> = (0..4).map(|k| unit_seed(7, k)).collect();
        assert!(s.windows(2).all(|w| w[0] != w[1]));
        assert_ne!(order_seed(7), s[0]);
    }
}
