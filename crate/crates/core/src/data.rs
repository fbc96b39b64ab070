//! MNIST IDX container parsing and class-subset selection.

use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const IMAGE_SIDE: usize = 28;
pub const IMAGE_PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;

/// Images as raw 784-byte rows plus their digit labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IdxDataset {
    pub images: Vec<Vec<u8>>,
    pub labels: Vec<u8>,
}

impl IdxDataset {
    pub fn new(images: Vec<Vec<u8>>, labels: Vec<u8>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        if let Some(i) = images.iter().position(|im| im.len() != IMAGE_PIXELS) {
            return Err(Error::invalid(format!("image {i} is not {IMAGE_PIXELS} pixels")));
        }
        if let Some(l) = labels.iter().find(|&&l| l > 9) {
            return Err(Error::invalid(format!("label {l} is not a digit")));
        }
        Ok(Self { images, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Per-label sample counts indexed by digit.
    pub fn class_counts(&self) -> [usize; 10] {
        let mut counts = [0; 10];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    file: &'static str,
}

impl<'a> Reader<'a> {
    fn u32(&mut self, field: &str) -> Result<u32> {
        let end = self.pos + 4;
        let raw = self.bytes.get(self.pos..end).ok_or_else(|| {
            Error::format(
                format!("{} {field}", self.file),
                "file truncated inside header",
            )
        })?;
        self.pos = end;
        Ok(u32::from_be_bytes(raw.try_into().expect("4-byte slice")))
    }

    fn body(&self, len: usize, field: &str) -> Result<&'a [u8]> {
        let rest = &self.bytes[self.pos..];
        if rest.len() < len {
            return Err(Error::format(
                format!("{} {field}", self.file),
                format!("expected {len} bytes of data, found {}", rest.len()),
            ));
        }
        Ok(&rest[..len])
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn parse_idx(image_bytes: &[u8], label_bytes: &[u8]) -> Result<IdxDataset> {
    let mut r = Reader {
        bytes: image_bytes,
        pos: 0,
        file: "images",
    };
    let magic = r.u32("magic")?;
    if magic != IMAGE_MAGIC {
        return Err(Error::format(
            "images magic",
            format!("expected {IMAGE_MAGIC:#010x}, found {magic:#010x}"),
        ));
    }
    let count = r.u32("count")? as usize;
    let rows = r.u32("rows")? as usize;
    let cols = r.u32("cols")? as usize;
    if rows != IMAGE_SIDE || cols != IMAGE_SIDE {
        return Err(Error::format(
            "images dimensions",
            format!("expected {IMAGE_SIDE}x{IMAGE_SIDE}, found {rows}x{cols}"),
        ));
    }
    let pixels = r.body(count * IMAGE_PIXELS, "pixels")?;

    let mut l = Reader {
        bytes: label_bytes,
        pos: 0,
        file: "labels",
    };
    let magic = l.u32("magic")?;
    if magic != LABEL_MAGIC {
        return Err(Error::format(
            "labels magic",
            format!("expected {LABEL_MAGIC:#010x}, found {magic:#010x}"),
        ));
    }
    let label_count = l.u32("count")? as usize;
    if label_count != count {
        return Err(Error::format(
            "labels count",
            format!("{label_count} labels for {count} images"),
        ));
    }
    let labels = l.body(count, "labels")?.to_vec();
    if let Some(i) = labels.iter().position(|&x| x > 9) {
        return Err(Error::format(
            "labels data",
            format!("label {} at index {i} is not a digit", labels[i]),
        ));
    }

    Ok(IdxDataset {
        images: pixels.chunks_exact(IMAGE_PIXELS).map(<[u8]>::to_vec).collect(),
        labels,
    })
}

pub fn read_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<IdxDataset> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    parse_idx(&read_file(ip)?, &read_file(lp)?).map_err(|e| match e {
        Error::Format { field, message } => Error::Format {
            field: format!("{field} ({} / {})", ip.display(), lp.display()),
            message,
        },
        other => other,
    })
}

pub fn encode_idx(dataset: &IdxDataset) -> (Vec<u8>, Vec<u8>) {
    let n = dataset.len() as u32;
    let mut images = Vec::with_capacity(16 + dataset.len() * IMAGE_PIXELS);
    for word in [IMAGE_MAGIC, n, IMAGE_SIDE as u32, IMAGE_SIDE as u32] {
        images.extend_from_slice(&word.to_be_bytes());
    }
    for im in &dataset.images {
        images.extend_from_slice(im);
    }
    let mut labels = Vec::with_capacity(8 + dataset.len());
    labels.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    labels.extend_from_slice(&n.to_be_bytes());
    labels.extend_from_slice(&dataset.labels);
    (images, labels)
}

pub fn write_idx(dataset: &IdxDataset, images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<()> {
    let (images, labels) = encode_idx(dataset);
    fs::write(images_path.as_ref(), images).map_err(|e| Error::io(images_path.as_ref(), e))?;
    fs::write(labels_path.as_ref(), labels).map_err(|e| Error::io(labels_path.as_ref(), e))
}

/// Keeps only `classes`. With a cap, draws `samples_per_class` indices per class
/// uniformly without replacement; survivors keep their original relative order.
pub fn select_subset(
    dataset: &IdxDataset,
    classes: &[u8],
    samples_per_class: Option<usize>,
    seed: u64,
) -> Result<IdxDataset> {
    if classes.is_empty() {
        return Err(Error::invalid("class list is empty"));
    }
    let mut keep: Vec<usize> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &class in classes {
        let members: Vec<usize> = dataset
            .labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        match samples_per_class {
            None => keep.extend(members),
            Some(cap) => {
                if cap > members.len() {
                    return Err(Error::invalid(format!(
                        "class {class} has {} samples, cap is {cap}",
                        members.len()
                    )));
                }
                keep.extend(index::sample(&mut rng, members.len(), cap).into_iter().map(|k| members[k]));
            }
        }
    }
    keep.sort_unstable();
    keep.dedup();
    Ok(IdxDataset {
        images: keep.iter().map(|&i| dataset.images[i].clone()).collect(),
        labels: keep.iter().map(|&i| dataset.labels[i]).collect(),
    })
}
