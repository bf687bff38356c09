use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

use super::SpectralData;

/// ‖u_{ρ_j}‖², ‖u′_{σ_k}‖² and, for odd n, ‖u′_0‖².
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormingConstants {
    pub tau_sq: Vec<f64>,
    pub kappa_sq: Vec<f64>,
    pub kappa0_sq: Option<f64>,
}

pub fn norming_constants(sd: &SpectralData) -> NormingConstants {
    let rho = sd.rho();
    let sig = sd.sigma_padded();
    let pos = sd.sigma();
    let q = rho.len();
    let tau_sq = (0..q)
        .map(|j| {
            let r2 = rho[j] * rho[j];
            let mut t = r2 - sig[j] * sig[j];
            for i in (0..q).filter(|&i| i != j) {
                t *= (r2 - sig[i] * sig[i]) / (r2 - rho[i] * rho[i]);
            }
            t
        })
        .collect();
    let kappa_sq = (0..pos.len())
        .map(|k| {
            let s2 = pos[k] * pos[k];
            let mut t = rho[k] * rho[k] - s2;
            for i in (0..q).filter(|&i| i != k) {
                t *= (s2 - rho[i] * rho[i]) / (s2 - sig[i] * sig[i]);
            }
            t
        })
        .collect();
    let kappa0_sq = (sd.n() % 2 == 1).then(|| {
        let mut t = rho[0] * rho[0];
        for (k, s) in pos.iter().enumerate() {
            t *= (rho[k + 1] * rho[k + 1]) / (s * s);
        }
        t
    });
    NormingConstants {
        tau_sq,
        kappa_sq,
        kappa0_sq,
    }
}

/// Largest residual of each Bateman-type identity.
#[derive(Clone, Debug, Serialize)]
pub struct BatemanReport {
    /// ∏(1 − xσ_j²)/(1 − xρ_j²) = 1 + x Σ τ_j²/(1 − xρ_j²).
    pub product_formula: f64,
    /// 1/J(x) = 1 − x Σ κ²/(1 − xσ²), σ = 0 included for odd n.
    pub inverse_product_formula: f64,
    /// Σ_j τ_j²/(ρ_j² − σ²) = 1 for every σ.
    pub simple_sum: f64,
    /// Σ_j τ_j²/((ρ_j² − σ²)(ρ_j² − σ′²)) = δ_{σσ′}/κ_σ², relative to max(1, rhs).
    pub double_sum: f64,
    /// 1 − Σ τ_j²/ρ_j² = ∏ σ_j²/ρ_j².
    pub nu_sum: f64,
}

impl BatemanReport {
    pub fn max(&self) -> f64 {
        [
            self.product_formula,
            self.inverse_product_formula,
            self.simple_sum,
            self.double_sum,
            self.nu_sum,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn bateman_check(sd: &SpectralData, nc: &NormingConstants, seed: u64) -> BatemanReport {
    let rho = sd.rho();
    let sig = sd.sigma_padded();
    let tau = &nc.tau_sq;
    // σ values with their κ², zero included when it is K-dominant
    let mut kset: Vec<(f64, f64)> = sd
        .sigma()
        .into_iter()
        .zip(nc.kappa_sq.iter().copied())
        .collect();
    if let Some(k0) = nc.kappa0_sq {
        kset.push((0.0, k0));
    }
    let s1 = sd.s()[0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut product_formula: f64 = 0.0;
    let mut inverse_product_formula: f64 = 0.0;
    for _ in 0..16 {
        let x = -rng.gen::<f64>() / (s1 * s1);
        let j: f64 = rho
            .iter()
            .zip(&sig)
            .map(|(r, s)| (1.0 - x * s * s) / (1.0 - x * r * r))
            .product();
        let rhs = 1.0
            + x * rho
                .iter()
                .zip(tau)
                .map(|(r, t)| t / (1.0 - x * r * r))
                .sum::<f64>();
        product_formula = product_formula.max((j - rhs).abs());
        let inv = 1.0 - x * kset.iter().map(|(s, k)| k / (1.0 - x * s * s)).sum::<f64>();
        inverse_product_formula = inverse_product_formula.max((1.0 / j - inv).abs());
    }
    let pair_sum = |a: f64, b: f64| -> f64 {
        rho.iter()
            .zip(tau)
            .map(|(r, t)| t / ((r * r - a * a) * (r * r - b * b)))
            .sum()
    };
    let mut simple_sum: f64 = 0.0;
    let mut double_sum: f64 = 0.0;
    for &(a, ka) in &kset {
        let lhs: f64 = rho.iter().zip(tau).map(|(r, t)| t / (r * r - a * a)).sum();
        simple_sum = simple_sum.max((lhs - 1.0).abs());
        for &(b, _) in &kset {
            let rhs = if a == b { 1.0 / ka } else { 0.0 };
            double_sum = double_sum.max((pair_sum(a, b) - rhs).abs() / rhs.max(1.0));
        }
    }
    let lhs = 1.0 - rho.iter().zip(tau).map(|(r, t)| t / (r * r)).sum::<f64>();
    let rhs: f64 = rho.iter().zip(&sig).map(|(r, s)| s * s / (r * r)).product();
    BatemanReport {
        product_formula,
        inverse_product_formula,
        simple_sum,
        double_sum,
        nu_sum: (lhs - rhs).abs(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelClass {
    TrivialKernel,
    NontrivialKernel,
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelDiagnostic {
    pub class: KernelClass,
    /// Partial products ∏_{j≤J} σ_j²/ρ_j².
    pub sigma_over_rho: Vec<f64>,
    /// Partial products ∏_{k≤K} σ_k²/ρ_{k+1}².
    pub sigma_over_next_rho: Vec<f64>,
}

/// Kernel classification of H_u from a singular-value list.
///
/// A finite list means finite rank, hence a nontrivial kernel. A list that is
/// the truncation of an infinite sequence cannot decide the question; only the
/// partial products are reported.
pub fn kernel_diagnostic(s: &[f64], truncated: bool) -> Result<KernelDiagnostic> {
    if s.is_empty() {
        return Err(Error::Domain("empty singular-value list".into()));
    }
    let rho: Vec<f64> = s.iter().step_by(2).copied().collect();
    let sigma: Vec<f64> = s.iter().skip(1).step_by(2).copied().collect();
    let mut a = 1.0;
    let sigma_over_rho = sigma
        .iter()
        .zip(&rho)
        .map(|(s, r)| {
            a *= s * s / (r * r);
            a
        })
        .collect();
    let mut b = 1.0;
    let sigma_over_next_rho = sigma
        .iter()
        .zip(rho.iter().skip(1))
        .map(|(s, r)| {
            b *= s * s / (r * r);
            b
        })
        .collect();
    Ok(KernelDiagnostic {
        class: if truncated {
            KernelClass::Undetermined
        } else {
            KernelClass::NontrivialKernel
        },
        sigma_over_rho,
        sigma_over_next_rho,
    })
}
