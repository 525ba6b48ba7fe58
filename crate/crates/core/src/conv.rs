//! Convolutional (patch-based) Tsetlin machine.
//!
//! A clause fires on an image when it matches at least one stride-1 patch.
//! Patch features are the patch's bit-planes in `(row, column, plane)` order,
//! optionally followed by thermometer-coded row and column offsets.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::bits::Literals;
use crate::error::{check_len, Error, Result};
use crate::machine::{Clause, Mode, TMParams};
use crate::multiclass::{argmax_lowest, MulticlassTM};

/// Binarized image: `planes` bits per pixel, stored row-major by pixel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitImage {
    height: usize,
    width: usize,
    planes: usize,
    bits: Vec<u8>,
}

impl BitImage {
    pub fn new(height: usize, width: usize, planes: usize, bits: Vec<u8>) -> Result<Self> {
        check_len(height * width * planes, bits.len())?;
        if height == 0 || width == 0 || planes == 0 {
            return Err(Error::InvalidArgument("image dimensions must be positive".into()));
        }
        Ok(Self { height, width, planes, bits })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn planes(&self) -> usize {
        self.planes
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, plane: usize) -> bool {
        self.bits[(row * self.width + col) * self.planes + plane] != 0
    }

    /// Bits in `(row, column, plane)` order.
    pub fn as_bits(&self) -> &[u8] {
        &self.bits
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchConfig {
    pub image_height: usize,
    pub image_width: usize,
    pub planes: usize,
    pub patch_height: usize,
    pub patch_width: usize,
    pub position_literals: bool,
}

impl PatchConfig {
    pub fn new(image: (usize, usize, usize), patch: (usize, usize)) -> Self {
        Self {
            image_height: image.0,
            image_width: image.1,
            planes: image.2,
            patch_height: patch.0,
            patch_width: patch.1,
            position_literals: true,
        }
    }

    pub fn with_position_literals(mut self, on: bool) -> Self {
        self.position_literals = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_height == 0 || self.patch_width == 0 || self.planes == 0 {
            return Err(Error::InvalidArgument("patch dimensions must be positive".into()));
        }
        if self.patch_height > self.image_height || self.patch_width > self.image_width {
            return Err(Error::InvalidArgument(format!(
                "patch {}x{} larger than image {}x{}",
                self.patch_height, self.patch_width, self.image_height, self.image_width
            )));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.image_height - self.patch_height + 1
    }

    pub fn cols(&self) -> usize {
        self.image_width - self.patch_width + 1
    }

    pub fn num_patches(&self) -> usize {
        self.rows() * self.cols()
    }

    fn position_bits(&self) -> usize {
        if self.position_literals {
            (self.rows() - 1) + (self.cols() - 1)
        } else {
            0
        }
    }

    /// Features per patch: pixel bits plus position thermometer bits.
    pub fn patch_features(&self) -> usize {
        self.patch_height * self.patch_width * self.planes + self.position_bits()
    }

    fn check_image(&self, image: &BitImage) -> Result<()> {
        if (image.height, image.width, image.planes) != (self.image_height, self.image_width, self.planes) {
            return Err(Error::InvalidArgument(format!(
                "image is {}x{}x{}, expected {}x{}x{}",
                image.height, image.width, image.planes, self.image_height, self.image_width, self.planes
            )));
        }
        Ok(())
    }

    #[inline]
    fn patch_feature(&self, image: &BitImage, row: usize, col: usize, k: usize) -> bool {
        let pixel_bits = self.patch_height * self.patch_width * self.planes;
        if k < pixel_bits {
            let plane = k % self.planes;
            let pixel = k / self.planes;
            image.get(row + pixel / self.patch_width, col + pixel % self.patch_width, plane)
        } else {
            let j = k - pixel_bits;
            let row_bits = self.rows() - 1;
            if j < row_bits {
                row > j
            } else {
                col > j - row_bits
            }
        }
    }
}

/// All stride-1 patches as 0/1 feature vectors, row-major over patch origins.
pub fn extract_patches(image: &BitImage, config: &PatchConfig) -> Result<Vec<Vec<u8>>> {
    config.validate()?;
    config.check_image(image)?;
    let f = config.patch_features();
    let mut out = Vec::with_capacity(config.num_patches());
    for row in 0..config.rows() {
        for col in 0..config.cols() {
            out.push((0..f).map(|k| config.patch_feature(image, row, col, k) as u8).collect());
        }
    }
    Ok(out)
}

/// Patches packed as literal vectors, same order as [`extract_patches`].
pub fn patch_literals(image: &BitImage, config: &PatchConfig) -> Result<Vec<Literals>> {
    config.validate()?;
    config.check_image(image)?;
    let f = config.patch_features();
    let mut out = Vec::with_capacity(config.num_patches());
    for row in 0..config.rows() {
        for col in 0..config.cols() {
            out.push(Literals::from_fn(f, |k| config.patch_feature(image, row, col, k)));
        }
    }
    Ok(out)
}

/// A clause fires on an image iff it fires on at least one patch.
pub fn conv_clause_evaluate(clause: &Clause, patches: &[Literals], mode: Mode) -> Result<bool> {
    if patches.is_empty() {
        return Err(Error::InvalidArgument("need at least one patch".into()));
    }
    check_len(clause.num_features(), patches[0].num_features())?;
    Ok(patches.iter().any(|p| clause.evaluate(p, mode)))
}

#[derive(Clone, Debug)]
pub struct ConvolutionalTM {
    config: PatchConfig,
    inner: MulticlassTM,
}

impl ConvolutionalTM {
    pub fn new(config: PatchConfig, classes: Vec<String>, params: TMParams) -> Result<Self> {
        config.validate()?;
        let inner = MulticlassTM::new(classes, config.patch_features(), params)?;
        Ok(Self { config, inner })
    }

    pub fn from_parts(config: PatchConfig, inner: MulticlassTM) -> Result<Self> {
        config.validate()?;
        check_len(config.patch_features(), inner.num_features())?;
        Ok(Self { config, inner })
    }

    pub fn config(&self) -> &PatchConfig {
        &self.config
    }

    pub fn inner(&self) -> &MulticlassTM {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut MulticlassTM {
        &mut self.inner
    }

    pub fn num_classes(&self) -> usize {
        self.inner.num_classes()
    }

    pub fn target(&self) -> u32 {
        self.inner.target()
    }

    pub fn patches(&self, image: &BitImage) -> Result<Vec<Literals>> {
        patch_literals(image, &self.config)
    }

    pub fn class_sums_patches(&self, patches: &[Literals]) -> Vec<i64> {
        self.inner.units().iter().map(|u| u.clipped_sum_patches(patches)).collect()
    }

    pub fn class_sums_all(&self, image: &BitImage) -> Result<Vec<i64>> {
        Ok(self.class_sums_patches(&self.patches(image)?))
    }

    pub fn predict(&self, image: &BitImage) -> Result<usize> {
        Ok(argmax_lowest(&self.class_sums_all(image)?))
    }

    pub fn clause_counts(&self, image: &BitImage) -> Result<Vec<(usize, usize)>> {
        let patches = self.patches(image)?;
        Ok(self.inner.units().iter().map(|u| u.active_counts_patches(&patches)).collect())
    }

    pub fn train_step(&mut self, image: &BitImage, label: usize) -> Result<()> {
        if label >= self.num_classes() {
            return Err(Error::UnknownLabel(label.to_string()));
        }
        let patches = self.patches(image)?;
        self.inner.train_patches(&patches, label);
        Ok(())
    }

    pub fn fit(&mut self, images: &[BitImage], labels: &[usize], epochs: usize) -> Result<()> {
        check_len(images.len(), labels.len())?;
        for img in images {
            self.config.check_image(img)?;
        }
        let config = self.config;
        self.inner.fit_samples(labels, epochs, |i| {
            Cow::Owned(patch_literals(&images[i], &config).expect("image checked"))
        })
    }

    /// Like [`fit`](Self::fit), calling `on_epoch(epoch, self)` after each epoch.
    pub fn fit_with_progress(
        &mut self,
        images: &[BitImage],
        labels: &[usize],
        epochs: usize,
        mut on_epoch: impl FnMut(usize, &Self),
    ) -> Result<()> {
        for e in 0..epochs {
            self.fit(images, labels, 1)?;
            on_epoch(e, self);
        }
        Ok(())
    }
}
