//! Summary statistics used by the experiment reports.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{check_len, Error, Result};

/// Ranks starting at 1; tied values share their mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa == 0.0 || sbb == 0.0 {
        return f64::NAN;
    }
    sab / (saa * sbb).sqrt()
}

/// Spearman rank correlation with average ranks for ties. NaN when either
/// side is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    check_len(a.len(), b.len())?;
    if a.len() < 2 {
        return Err(Error::InvalidArgument("rank correlation needs two points".into()));
    }
    Ok(pearson(&average_ranks(a), &average_ranks(b)))
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct WelchTest {
    pub t: f64,
    pub dof: f64,
    /// `P(T >= t)` under equal means.
    pub p_greater: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
}

/// One-sided Welch t-test of `mean(a) > mean(b)`.
pub fn welch_greater(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidArgument("each group needs at least two values".into()));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    if sa + sb == 0.0 {
        let p = if ma > mb { 0.0 } else { 1.0 };
        return Ok(WelchTest { t: f64::INFINITY.copysign(ma - mb), dof: f64::NAN, p_greater: p });
    }
    let t = (ma - mb) / (sa + sb).sqrt();
    let dof = (sa + sb).powi(2) / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(WelchTest { t, dof, p_greater: dist.sf(t) })
}

/// Nearest-rank percentile, `q` in `(0, 1]`.
pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() || !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidArgument(format!("percentile {q} of {} values", values.len())));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = (q * v.len() as f64).ceil() as usize;
    Ok(v[rank.max(1) - 1])
}

/// Counts of `values` in `bins` equal-width bins over `[0, 1]`; 1.0 lands in
/// the last bin.
pub fn unit_histogram(values: &[f64], bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    for &v in values {
        let k = ((v * bins as f64).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn spearman_cases() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&a, &[10.0, 20.0, 30.0, 400.0]).unwrap(), 1.0);
        assert_eq!(spearman(&a, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!(spearman(&a, &[1.0; 4]).unwrap().is_nan());
    }

    #[test]
    fn welch_known_value() {
        // Equal variances and sizes: t = (3 - 1) / sqrt(2.5/5 + 2.5/5) = 2, dof = 8.
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [-1.0, 0.0, 1.0, 2.0, 3.0];
        let w = welch_greater(&a, &b).unwrap();
        assert!((w.t - 2.0).abs() < 1e-12);
        assert!((w.dof - 8.0).abs() < 1e-12);
        // Upper tail of t_8 at 2.0.
        assert!((w.p_greater - 0.040_258_119).abs() < 1e-8);
    }

    #[test]
    fn percentile_and_histogram() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.8).unwrap(), 8.0);
        assert_eq!(percentile(&v, 1.0).unwrap(), 10.0);
        assert_eq!(unit_histogram(&[0.0, 0.49, 0.5, 1.0], 2), vec![2, 2]);
    }
}
