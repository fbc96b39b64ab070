#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcnn::data::{write_idx, IdxDataset};

/// Digit-like images: class `k` lights a band whose position and width depend
/// on `k`, plus background noise.
pub fn synthetic_dataset(per_class: usize, classes: usize, seed: u64) -> IdxDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for i in 0..per_class * classes {
        let k = i % classes;
        let mut im = vec![0u8; 784];
        for (p, px) in im.iter_mut().enumerate() {
            let (r, c) = (p / 28, p % 28);
            let band = r >= 2 + 2 * k && r < 5 + 2 * k && c >= 4 + k && c < 22;
            *px = if band { rng.random_range(180..=255) } else { rng.random_range(0..40) };
        }
        images.push(im);
        labels.push(k as u8);
    }
    IdxDataset::new(images, labels).unwrap()
}

pub struct DataFiles {
    pub dir: PathBuf,
}

impl DataFiles {
    pub fn write(dir: &Path, train: &IdxDataset, test: &IdxDataset) -> Self {
        write_idx(train, dir.join("train-images-idx3-ubyte"), dir.join("train-labels-idx1-ubyte")).unwrap();
        write_idx(test, dir.join("t10k-images-idx3-ubyte"), dir.join("t10k-labels-idx1-ubyte")).unwrap();
        Self { dir: dir.to_path_buf() }
    }
}
