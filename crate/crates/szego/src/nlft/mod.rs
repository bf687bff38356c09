//! The nonlinear Fourier transform u ↦ ((s_r), (Ψ_r)) and its inverse.

mod forward;
mod inverse;
mod norming;
pub mod realize;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};

pub use forward::{forward, Analysis, ForwardOptions};
pub use inverse::{
    build_c, build_csharp, eigen_components, inverse, solve_point, PointSolution, Reconstruction,
};
pub use norming::{
    bateman_check, kernel_diagnostic, norming_constants, BatemanReport, KernelClass,
    KernelDiagnostic, NormingConstants,
};

/// Smallest relative gap allowed between consecutive singular values.
pub const MIN_RELATIVE_GAP: f64 = 1e-10;

/// Spectral data: s_1 > s_2 > … > s_n > 0 with one Blaschke product per s_r.
///
/// Odd positions (1-based) are the H-dominant values ρ_j = s_{2j−1}; even
/// positions are the K-dominant values σ_k = s_{2k}. For odd n, σ_q = 0 is
/// implicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectralRepr", into = "SpectralRepr")]
pub struct SpectralData {
    s: Vec<f64>,
    psi: Vec<BlaschkeProduct>,
}

impl SpectralData {
    pub fn new(s: Vec<f64>, psi: Vec<BlaschkeProduct>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Domain(
                "spectral data must contain at least one value".into(),
            ));
        }
        if s.len() != psi.len() {
            return Err(Error::Invalid(format!(
                "{} singular values but {} Blaschke products",
                s.len(),
                psi.len()
            )));
        }
        if let Some(x) = s.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::Invalid(format!(
                "singular value {x} is not positive"
            )));
        }
        for w in s.windows(2) {
            if !((w[0] - w[1]) / w[0] >= MIN_RELATIVE_GAP) {
                return Err(Error::Invalid(format!(
                    "singular values {} and {} are not strictly decreasing",
                    w[0], w[1]
                )));
            }
        }
        Ok(SpectralData { s, psi })
    }

    /// All Blaschke products of degree zero with the given angles.
    pub fn with_angles(s: Vec<f64>, angles: &[f64]) -> Result<Self> {
        let psi = angles
            .iter()
            .map(|&a| BlaschkeProduct::constant(a))
            .collect();
        SpectralData::new(s, psi)
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn psi(&self) -> &[BlaschkeProduct] {
        &self.psi
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }

    /// q = ⌈n/2⌉, the size of the matrix 𝒞.
    pub fn q(&self) -> usize {
        self.s.len().div_ceil(2)
    }

    pub fn rho(&self) -> Vec<f64> {
        self.s.iter().step_by(2).copied().collect()
    }

    /// Positive σ_k only.
    pub fn sigma(&self) -> Vec<f64> {
        self.s.iter().skip(1).step_by(2).copied().collect()
    }

    /// σ_k for k < q, zero past the end when n is odd.
    pub fn sigma_padded(&self) -> Vec<f64> {
        let mut v = self.sigma();
        v.resize(self.q(), 0.0);
        v
    }

    pub fn max_degree(&self) -> usize {
        self.psi.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    /// Replace every Ψ_r by Ψ_r·e^{iθ_r}.
    pub fn rotated(&self, theta: &[f64]) -> Self {
        SpectralData {
            s: self.s.clone(),
            psi: self
                .psi
                .iter()
                .zip(theta)
                .map(|(p, &t)| p.rotated(t))
                .collect(),
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<BlaschkeProduct>) {
        (self.s, self.psi)
    }
}

#[derive(Serialize, Deserialize)]
struct BlaschkeRepr {
    angle: f64,
    zeros: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct SpectralRepr {
    s: Vec<f64>,
    psi: Vec<BlaschkeRepr>,
}

impl TryFrom<SpectralRepr> for SpectralData {
    type Error = Error;

    fn try_from(r: SpectralRepr) -> Result<Self> {
        let psi = r
            .psi
            .into_iter()
            .map(|b| {
                BlaschkeProduct::new(
                    b.angle,
                    b.zeros.iter().map(|z| C64::new(z[0], z[1])).collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        SpectralData::new(r.s, psi)
    }
}

impl From<SpectralData> for SpectralRepr {
    fn from(sd: SpectralData) -> Self {
        SpectralRepr {
            s: sd.s,
            psi: sd
                .psi
                .iter()
                .map(|p| BlaschkeRepr {
                    angle: p.angle(),
                    zeros: p.zeros().iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SpectralData::with_angles(vec![], &[]).is_err());
        assert!(SpectralData::with_angles(vec![1.0, 1.0], &[0.0, 0.0]).is_err());
        assert!(SpectralData::with_angles(vec![0.5, 1.0], &[0.0, 0.0]).is_err());
        assert!(SpectralData::with_angles(vec![1.0, 0.0], &[0.0, 0.0]).is_err());
        assert!(SpectralData::with_angles(vec![1.0], &[0.0, 0.0]).is_err());
        let sd = SpectralData::with_angles(vec![1.0, 0.5, 0.2], &[0.0; 3]).unwrap();
        assert_eq!(sd.q(), 2);
        assert_eq!(sd.rho(), vec![1.0, 0.2]);
        assert_eq!(sd.sigma(), vec![0.5]);
        assert_eq!(sd.sigma_padded(), vec![0.5, 0.0]);
    }

    #[test]
    fn json_roundtrip() {
        let psi = vec![
            BlaschkeProduct::new(0.3, vec![C64::new(0.1, -0.2)]).unwrap(),
            BlaschkeProduct::constant(1.0),
        ];
        let sd = SpectralData::new(vec![1.0, 0.5], psi).unwrap();
        let text = serde_json::to_string(&sd).unwrap();
        assert!(
            text.starts_with("{\"s\":[1.0,0.5],\"psi\":[{\"angle\":0.3,\"zeros\":[[0.1,-0.2]]}")
        );
        let back: SpectralData = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sd);
        let bad = r#"{"s":[1.0],"psi":[{"angle":0.0,"zeros":[[1.5,0.0]]}]}"#;
        assert!(serde_json::from_str::<SpectralData>(bad).is_err());
    }
}
