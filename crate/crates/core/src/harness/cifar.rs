//! Reader for the CIFAR-10 binary batches.
//!
//! Each record is one label byte followed by 3072 pixel bytes: the 1024
//! red values, then green, then blue, each plane row-major over 32x32.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const LABELS: [&str; 10] = [
    "airplane",
    "automobile",
    "bird",
    "cat",
    "deer",
    "dog",
    "frog",
    "horse",
    "ship",
    "truck",
];

pub const SIDE: usize = 32;
pub const CHANNELS: usize = 3;
pub const PIXELS: usize = SIDE * SIDE * CHANNELS;
pub const RECORD_BYTES: usize = PIXELS + 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn files(self) -> Vec<String> {
        match self {
            Split::Train => (1..=5).map(|k| format!("data_batch_{k}.bin")).collect(),
            Split::Test => vec!["test_batch.bin".to_string()],
        }
    }
}

pub fn label_index(name: &str) -> Result<usize> {
    LABELS
        .iter()
        .position(|l| *l == name)
        .ok_or_else(|| Error::UnknownLabel(name.to_string()))
}

/// Images (channel-major pixels) with labels indexing `class_names`.
#[derive(Clone, Debug, Default)]
pub struct CifarSet {
    pub class_names: Vec<String>,
    pub images: Vec<Vec<u8>>,
    pub labels: Vec<usize>,
}

impl CifarSet {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// Decodes raw records as `(CIFAR label, pixels)`.
pub fn parse_records(bytes: &[u8]) -> Result<Vec<(u8, &[u8])>> {
    if bytes.len() % RECORD_BYTES != 0 {
        return Err(Error::InvalidArgument(format!(
            "{} bytes is not a whole number of {RECORD_BYTES}-byte records",
            bytes.len()
        )));
    }
    bytes
        .chunks_exact(RECORD_BYTES)
        .map(|r| {
            if usize::from(r[0]) >= LABELS.len() {
                return Err(Error::InvalidArgument(format!("record label {} out of range", r[0])));
            }
            Ok((r[0], &r[1..]))
        })
        .collect()
}

/// Loads one split from `dir`. With `classes`, only those classes are kept
/// and labels are re-indexed in the given order; `limit` caps images per class.
pub fn load_cifar10(dir: &Path, split: Split, classes: Option<&[String]>, limit: Option<usize>) -> Result<CifarSet> {
    let class_names: Vec<String> = match classes {
        Some(c) => c.to_vec(),
        None => LABELS.iter().map(|s| s.to_string()).collect(),
    };
    let mut remap = [None; 10];
    for (k, name) in class_names.iter().enumerate() {
        remap[label_index(name)?] = Some(k);
    }
    let mut out = CifarSet { class_names, ..Default::default() };
    let mut taken = vec![0usize; out.class_names.len()];
    for file in split.files() {
        let path: PathBuf = dir.join(file);
        let bytes = fs::read(&path).map_err(|source| Error::File { path: path.clone(), source })?;
        for (label, pixels) in parse_records(&bytes)? {
            let Some(k) = remap[usize::from(label)] else { continue };
            if limit.is_some_and(|cap| taken[k] >= cap) {
                continue;
            }
            taken[k] += 1;
            out.images.push(pixels.to_vec());
            out.labels.push(k);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_order() {
        assert_eq!(LABELS[8], "ship");
        assert_eq!(label_index("automobile").unwrap(), 1);
        assert!(label_index("zebra").is_err());
    }

    #[test]
    fn malformed_length_rejected() {
        assert!(parse_records(&[0u8; RECORD_BYTES + 1]).is_err());
        let mut rec = vec![0u8; RECORD_BYTES];
        rec[0] = 10;
        assert!(parse_records(&rec).is_err());
    }

    #[test]
    fn missing_directory_names_the_file() {
        let err = load_cifar10(Path::new("/nonexistent"), Split::Test, None, None).unwrap_err();
        assert!(err.to_string().contains("test_batch.bin"));
    }
}
