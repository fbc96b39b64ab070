use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const SCALER_MAGIC: &[u8; 4] = b"SCL1";

/// Per-feature min/max from the training set; maps `[min, max]` onto `[0, π/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(samples: &[Vec<f64>]) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::invalid("cannot fit a scaler on zero samples"))?;
        let mut min = first.clone();
        let mut max = first.clone();
        for s in samples {
            if s.len() != min.len() {
                return Err(Error::invalid("feature vectors differ in length"));
            }
            for (j, &x) in s.iter().enumerate() {
                min[j] = min[j].min(x);
                max[j] = max[j].max(x);
            }
        }
        Ok(Self { min, max })
    }

    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::invalid("min and max lengths differ"));
        }
        if let Some(j) = (0..min.len()).find(|&j| !(max[j] >= min[j])) {
            return Err(Error::invalid(format!("feature {j}: max {} < min {}", max[j], min[j])));
        }
        Ok(Self { min, max })
    }

    pub fn len(&self) -> usize {
        self.min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_empty()
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    /// Values outside the training range are clamped. A constant training
    /// feature maps to 0.
    pub fn scale(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.len() {
            return Err(Error::Shape(format!(
                "{} features for a scaler of width {}",
                features.len(),
                self.len()
            )));
        }
        Ok(features
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                let span = self.max[j] - self.min[j];
                if span > 0.0 {
                    ((x - self.min[j]) / span).clamp(0.0, 1.0) * FRAC_PI_2
                } else {
                    0.0
                }
            })
            .collect())
    }

    /// `"SCL1"`, width as little-endian u32, then mins and maxes as f64.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 16 * self.len());
        out.extend_from_slice(SCALER_MAGIC);
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        for x in self.min.iter().chain(&self.max) {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..4] != SCALER_MAGIC {
            return Err(Error::format("scaler magic", "expected \"SCL1\" header"));
        }
        let n = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
        let body = &bytes[8..];
        if body.len() != 16 * n {
            return Err(Error::format(
                "scaler body",
                format!("expected {} bytes for width {n}, found {}", 16 * n, body.len()),
            ));
        }
        let floats: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Self::new(floats[..n].to_vec(), floats[n..].to_vec())
            .map_err(|e| Error::format("scaler body", e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path.as_ref(), self.to_bytes()).map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = fs::read(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_bytes(&bytes)
    }
}
