use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub const PCA_MAGIC: &[u8; 4] = b"PCA1";

const CHUNK_ROWS: usize = 2048;

/// Mean vector and orthonormal principal directions (rows), strongest first.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    /// `k × dim`, row-major.
    components: Vec<f64>,
    k: usize,
}

/// Top-`k` principal directions of the mean-centred samples.
///
/// Each component's largest-magnitude entry is made positive (first one wins
/// on ties) so fits are reproducible.
pub fn fit_pca(samples: &[Vec<f64>], k: usize) -> Result<PcaModel> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if samples.len() < k {
        return Err(Error::invalid(format!(
            "{} samples cannot support {k} components",
            samples.len()
        )));
    }
    let dim = samples[0].len();
    if k > dim {
        return Err(Error::invalid(format!("k = {k} exceeds dimension {dim}")));
    }
    if let Some(i) = samples.iter().position(|s| s.len() != dim) {
        return Err(Error::invalid(format!("sample {i} has length {}, expected {dim}", samples[i].len())));
    }

    let n = samples.len() as f64;
    let mut mean = vec![0.0; dim];
    for s in samples {
        for (m, &x) in mean.iter_mut().zip(s) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let mut scatter = DMatrix::<f64>::zeros(dim, dim);
    for chunk in samples.chunks(CHUNK_ROWS) {
        let centred = DMatrix::from_fn(chunk.len(), dim, |r, c| chunk[r][c] - mean[c]);
        scatter.gemm_tr(1.0, &centred, &centred, 1.0);
    }
    // symmetrize away rounding before the eigensolver
    let scatter = (&scatter + scatter.transpose()) * 0.5;

    let eigen = SymmetricEigen::new(scatter);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]).then(a.cmp(&b)));

    let mut components = Vec::with_capacity(k * dim);
    for &col in &order[..k] {
        let v = eigen.eigenvectors.column(col);
        let pivot = (0..dim).fold(0, |best, i| if v[i].abs() > v[best].abs() { i } else { best });
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        components.extend(v.iter().map(|x| sign * x));
    }
    Ok(PcaModel { mean, components, k })
}

impl PcaModel {
    pub fn new(mean: Vec<f64>, components: Vec<f64>, k: usize) -> Result<Self> {
        if components.len() != k * mean.len() || k > mean.len() {
            return Err(Error::invalid(format!(
                "{} component entries for k = {k}, dimension {}",
                components.len(),
                mean.len()
            )));
        }
        Ok(Self { mean, components, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn component(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.components[i * d..(i + 1) * d]
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Shape(format!(
                "input of length {} for a PCA model of dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok((0..self.k)
            .map(|i| {
                self.component(i)
                    .iter()
                    .zip(x.iter().zip(&self.mean))
                    .map(|(c, (x, m))| c * (x - m))
                    .sum()
            })
            .collect())
    }

    pub fn reconstruct(&self, features: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (i, f) in features.iter().enumerate().take(self.k) {
            for (o, c) in out.iter_mut().zip(self.component(i)) {
                *o += f * c;
            }
        }
        out
    }

    /// `"PCA1"`, then `k` and dimension as little-endian u32, then the mean
    /// and the row-major components as little-endian f64.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 8 * (self.mean.len() + self.components.len()));
        out.extend_from_slice(PCA_MAGIC);
        out.extend_from_slice(&(self.k as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        for x in self.mean.iter().chain(&self.components) {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 12 {
            return Err(Error::format("PCA header", "file shorter than header"));
        }
        if &bytes[..4] != PCA_MAGIC {
            return Err(Error::format("PCA magic", format!("expected \"PCA1\", found {:?}", &bytes[..4])));
        }
        let k = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
        let dim = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
        if k > dim {
            return Err(Error::format("PCA k", format!("k = {k} exceeds dimension {dim}")));
        }
        let body = &bytes[12..];
        let expected = 8 * dim * (k + 1);
        if body.len() != expected {
            return Err(Error::format(
                "PCA body",
                format!("expected {expected} bytes for k = {k}, dim = {dim}, found {}", body.len()),
            ));
        }
        let floats: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let (mean, components) = floats.split_at(dim);
        Self::new(mean.to_vec(), components.to_vec(), k)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path.as_ref(), self.to_bytes()).map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = fs::read(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_bytes(&bytes)
    }
}
