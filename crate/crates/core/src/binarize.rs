//! Thermometer encoders for continuous features and for images.

use serde::{Deserialize, Serialize};

use crate::conv::BitImage;
use crate::error::{check_len, Error, Result};

/// Per-feature thermometer code over uniform thresholds.
///
/// Feature `f` with training range `[min, max]` and `bins` bins gets interior
/// thresholds `min + k (max - min) / bins` for `k = 1..bins`, followed by a
/// boundary threshold at `max` when `boundary_bit` is set. Bit `j` of the code
/// is 1 iff the value is `>=` threshold `j`, so values below the training
/// minimum encode as all zeros and values at or above the maximum as all ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermometerEncoder {
    thresholds: Vec<Vec<f64>>,
    bins: usize,
    boundary_bit: bool,
}

impl ThermometerEncoder {
    pub fn fit(xs: &[Vec<f64>], bins: usize, boundary_bit: bool) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidArgument("cannot fit an encoder on no samples".into()));
        }
        if bins == 0 || (bins == 1 && !boundary_bit) {
            return Err(Error::InvalidArgument(format!(
                "{bins} bin(s) without a boundary bit leaves no thresholds"
            )));
        }
        let dims = xs[0].len();
        if dims == 0 {
            return Err(Error::InvalidArgument("samples have no features".into()));
        }
        let mut lo = vec![f64::INFINITY; dims];
        let mut hi = vec![f64::NEG_INFINITY; dims];
        for x in xs {
            check_len(dims, x.len())?;
            for (f, &v) in x.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!("non-finite value {v} in feature {f}")));
                }
                lo[f] = lo[f].min(v);
                hi[f] = hi[f].max(v);
            }
        }
        let mut thresholds = Vec::with_capacity(dims);
        for f in 0..dims {
            if hi[f] <= lo[f] {
                return Err(Error::DegenerateFeature { feature: f, value: lo[f] });
            }
            let step = (hi[f] - lo[f]) / bins as f64;
            let mut t: Vec<f64> = (1..bins).map(|k| lo[f] + k as f64 * step).collect();
            if boundary_bit {
                t.push(hi[f]);
            }
            thresholds.push(t);
        }
        Ok(Self { thresholds, bins, boundary_bit })
    }

    /// Builds an encoder from explicit thresholds, e.g. when loading a model.
    pub fn from_thresholds(thresholds: Vec<Vec<f64>>, bins: usize, boundary_bit: bool) -> Result<Self> {
        if bins == 0 || (bins == 1 && !boundary_bit) || thresholds.is_empty() {
            return Err(Error::InvalidArgument("encoder needs features and at least one threshold".into()));
        }
        let width = bins - 1 + boundary_bit as usize;
        for (f, t) in thresholds.iter().enumerate() {
            check_len(width, t.len())?;
            if t.iter().any(|v| !v.is_finite()) || t.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!("thresholds of feature {f} are not strictly ascending")));
            }
        }
        Ok(Self { thresholds, bins, boundary_bit })
    }

    pub fn num_features(&self) -> usize {
        self.thresholds.len()
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn boundary_bit(&self) -> bool {
        self.boundary_bit
    }

    pub fn thresholds(&self, feature: usize) -> &[f64] {
        &self.thresholds[feature]
    }

    /// Code bits per feature.
    pub fn feature_width(&self) -> usize {
        self.bins - 1 + self.boundary_bit as usize
    }

    /// Total code bits.
    pub fn width(&self) -> usize {
        self.feature_width() * self.num_features()
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vec<u8>> {
        check_len(self.num_features(), x.len())?;
        let mut out = Vec::with_capacity(self.width());
        for (f, &v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite value {v} in feature {f}")));
            }
            out.extend(self.thresholds[f].iter().map(|&t| (v >= t) as u8));
        }
        Ok(out)
    }

    pub fn encode_all(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<u8>>> {
        xs.iter().map(|x| self.encode(x)).collect()
    }

    /// Half-open interval `[lo, hi)` of values producing `code` for `feature`.
    /// Infinite ends mark values outside the threshold range.
    pub fn decode_interval(&self, feature: usize, code: &[u8]) -> Result<(f64, f64)> {
        let t = &self.thresholds[feature];
        check_len(t.len(), code.len())?;
        let ones = code.iter().take_while(|&&b| b != 0).count();
        if code[ones..].iter().any(|&b| b != 0) {
            return Err(Error::InvalidArgument("code is not a thermometer prefix".into()));
        }
        let lo = if ones == 0 { f64::NEG_INFINITY } else { t[ones - 1] };
        let hi = if ones == t.len() { f64::INFINITY } else { t[ones] };
        Ok((lo, hi))
    }
}

/// Thermometer code for integer pixels: `resolution` levels per channel over
/// uniform thresholds `lo + k (hi - lo) / resolution`, `k = 1..=resolution`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageThermometer {
    pub channels: usize,
    pub resolution: usize,
    pub pixel_min: u8,
    pub pixel_max: u8,
}

impl ImageThermometer {
    pub fn new(channels: usize, resolution: usize) -> Self {
        Self { channels, resolution, pixel_min: 0, pixel_max: 255 }
    }

    pub fn planes(&self) -> usize {
        self.channels * self.resolution
    }

    pub fn thresholds(&self) -> Vec<f64> {
        let lo = f64::from(self.pixel_min);
        let span = f64::from(self.pixel_max) - lo;
        (1..=self.resolution).map(|k| lo + k as f64 * span / self.resolution as f64).collect()
    }

    /// Encodes channel-major pixels (`channels x height x width`) into bit
    /// planes ordered `(channel, level)` per pixel.
    pub fn encode_image(&self, pixels: &[u8], height: usize, width: usize) -> Result<BitImage> {
        if self.channels == 0 || self.resolution == 0 || self.pixel_max <= self.pixel_min {
            return Err(Error::InvalidArgument("image thermometer needs channels, levels and a range".into()));
        }
        check_len(self.channels * height * width, pixels.len())?;
        let thresholds = self.thresholds();
        let planes = self.planes();
        let mut bits = vec![0u8; height * width * planes];
        for c in 0..self.channels {
            for p in 0..height * width {
                let v = pixels[c * height * width + p];
                if v < self.pixel_min || v > self.pixel_max {
                    return Err(Error::InvalidArgument(format!(
                        "pixel value {v} outside [{}, {}]",
                        self.pixel_min, self.pixel_max
                    )));
                }
                let v = f64::from(v);
                for (k, &t) in thresholds.iter().enumerate() {
                    bits[p * planes + c * self.resolution + k] = (v >= t) as u8;
                }
            }
        }
        BitImage::new(height, width, planes, bits)
    }
}
