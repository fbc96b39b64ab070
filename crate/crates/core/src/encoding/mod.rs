//! Classical-to-quantum data encoding.
//!
//! Raw images are scaled to unit L2 norm, reduced with PCA, and then either
//! written directly into the amplitudes of an 8-qubit state (256 features) or
//! min-max scaled to `[0, π/2]` and loaded one feature per qubit as a product
//! state (8 features).

mod pca;
mod scaler;

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use pca::{fit_pca, PcaModel, PCA_MAGIC};
pub use scaler::{FeatureScaler, SCALER_MAGIC};

use crate::error::{Error, Result};
use crate::sim::{GateInstruction, GateKind, StateVector, MAX_QUBITS};

pub const AMPLITUDE_FEATURES: usize = 256;
pub const ANGLE_FEATURES: usize = 8;
pub const PCA_FILE: &str = "pca.bin";
pub const SCALER_FILE: &str = "scaler.bin";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Amplitude,
    Angle,
}

impl Encoding {
    /// PCA components retained for this encoding.
    pub fn pca_k(self) -> usize {
        match self {
            Encoding::Amplitude => AMPLITUDE_FEATURES,
            Encoding::Angle => ANGLE_FEATURES,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Encoding::Amplitude => "amplitude",
            Encoding::Angle => "angle",
        }
    }
}

/// `|φ(x)⟩ = Σ_i x_i/‖x‖ |i⟩` over `log2(len)` qubits.
pub fn amplitude_encode(features: &[f64]) -> Result<StateVector> {
    let n = features.len();
    if !n.is_power_of_two() || !(2..=1 << MAX_QUBITS).contains(&n) {
        return Err(Error::invalid(format!(
            "amplitude encoding needs a power-of-two length in 2..={}, got {n}",
            1 << MAX_QUBITS
        )));
    }
    let norm = features.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DegenerateInput(format!("feature vector has norm {norm}")));
    }
    let amps = features.iter().map(|&x| Complex64::new(x / norm, 0.0)).collect();
    StateVector::from_amplitudes(n.trailing_zeros() as usize, amps)
}

/// `⊗_i (cos x_i |0⟩ + sin x_i |1⟩)`, prepared as `RY(2 x_i)` on wire `i`.
pub fn angle_encode(features: &[f64]) -> Result<StateVector> {
    if let Some((i, x)) = features
        .iter()
        .enumerate()
        .find(|(_, x)| !(0.0..=std::f64::consts::FRAC_PI_2).contains(*x))
    {
        return Err(Error::invalid(format!("feature {i} = {x} outside [0, π/2]")));
    }
    let mut state = StateVector::zero_state(features.len())?;
    for (w, &x) in features.iter().enumerate() {
        let g = GateInstruction::fixed(GateKind::Ry, &[w], &[2.0 * x])?;
        state.apply_gate(&g, &[2.0 * x])?;
    }
    Ok(state)
}

/// Pixels scaled to `[0, 1]`.
pub fn pixel_intensities(image: &[u8]) -> Vec<f64> {
    image.iter().map(|&p| f64::from(p) / 255.0).collect()
}

/// Pixels as a unit-L2-norm vector.
pub fn normalized_image(image: &[u8]) -> Result<Vec<f64>> {
    let mut x = pixel_intensities(image);
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateInput("blank image".into()));
    }
    x.iter_mut().for_each(|v| *v /= norm);
    Ok(x)
}

/// Fitted PCA (and, for angle encoding, feature scaler) turning raw images
/// into encoded states.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessor {
    pub encoding: Encoding,
    pub pca: PcaModel,
    pub scaler: Option<FeatureScaler>,
}

impl Preprocessor {
    pub fn fit(encoding: Encoding, images: &[Vec<u8>]) -> Result<Self> {
        let normalized = images.iter().map(|im| normalized_image(im)).collect::<Result<Vec<_>>>()?;
        let pca = fit_pca(&normalized, encoding.pca_k())?;
        let scaler = match encoding {
            Encoding::Amplitude => None,
            Encoding::Angle => {
                let projected = normalized.iter().map(|x| pca.project(x)).collect::<Result<Vec<_>>>()?;
                Some(FeatureScaler::fit(&projected)?)
            }
        };
        Ok(Self { encoding, pca, scaler })
    }

    pub fn features(&self, image: &[u8]) -> Result<Vec<f64>> {
        let projected = self.pca.project(&normalized_image(image)?)?;
        match &self.scaler {
            Some(s) => s.scale(&projected),
            None => Ok(projected),
        }
    }

    pub fn encode(&self, image: &[u8]) -> Result<StateVector> {
        let features = self.features(image)?;
        match self.encoding {
            Encoding::Amplitude => amplitude_encode(&features),
            Encoding::Angle => angle_encode(&features),
        }
    }

    pub fn pca_path(dir: &Path) -> PathBuf {
        dir.join(PCA_FILE)
    }

    pub fn scaler_path(dir: &Path) -> PathBuf {
        dir.join(SCALER_FILE)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        self.pca.save(Self::pca_path(dir))?;
        if let Some(s) = &self.scaler {
            s.save(Self::scaler_path(dir))?;
        }
        Ok(())
    }

    pub fn load(encoding: Encoding, dir: &Path) -> Result<Self> {
        let hint = format!("run `qcnn preprocess --encoding {}` first", encoding.name());
        let pca_path = Self::pca_path(dir);
        if !pca_path.exists() {
            return Err(Error::MissingArtifact { path: pca_path, hint });
        }
        let pca = PcaModel::load(&pca_path)?;
        if pca.k() != encoding.pca_k() {
            return Err(Error::Shape(format!(
                "{} holds {} components, {} encoding needs {}",
                pca_path.display(),
                pca.k(),
                encoding.name(),
                encoding.pca_k()
            )));
        }
        let scaler = match encoding {
            Encoding::Amplitude => None,
            Encoding::Angle => {
                let path = Self::scaler_path(dir);
                if !path.exists() {
                    return Err(Error::MissingArtifact { path, hint });
                }
                Some(FeatureScaler::load(&path)?)
            }
        };
        Ok(Self { encoding, pca, scaler })
    }
}
