//! Best rank-k Hankel approximation through Schmidt pairs and a unimodular symbol.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hankel::{build_pair, hermitian_eigen, DEFAULT_TOL_CLUSTER};
use crate::hardy::{eval_grid, GridValues, HardySymbol};

/// Samples with |h| below this fraction of max|h| are dropped from φ.
pub const DROP_FRACTION: f64 = 1e-6;
/// At most this share of grid samples may be dropped.
pub const MAX_DROPPED_SHARE: f64 = 0.05;
/// Relative cut for the numerical rank of H_r.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SchmidtPair {
    pub h: HardySymbol,
    pub f: HardySymbol,
    pub s: f64,
    pub index: usize,
}

/// Singular values of H_u, decreasing, with multiplicity.
///
/// Taken from an SVD of Γ: square roots of eigenvalues of ΓΓ^H cannot resolve
/// values below about 1e−8·s₁.
pub fn hankel_singular_values(u: &HardySymbol) -> Vec<f64> {
    let mut sv: Vec<f64> = build_pair(u)
        .gamma()
        .singular_values()
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// (h, f) with H_u(h) = s_k f and H_u(f) = s_k h; k counts from zero with multiplicity.
pub fn schmidt_pair(u: &HardySymbol, k: usize) -> Result<SchmidtPair> {
    let pair = build_pair(u);
    let n = pair.dim();
    if k >= n {
        return Err(Error::Invalid(format!(
            "index {k} exceeds the truncation dimension {n}"
        )));
    }
    let (lambda, vecs) = hermitian_eigen(pair.h_sq())?;
    let s: Vec<f64> = lambda.iter().map(|l| l.max(0.0).sqrt()).collect();
    if s[0] == 0.0 || s[k] < DEFAULT_TOL_CLUSTER * s[0] {
        return Err(Error::Invalid(format!(
            "index {k} is at or beyond the rank of H_u"
        )));
    }
    if k > 0 && (s[k - 1] - s[k]) / s[k - 1] < DEFAULT_TOL_CLUSTER {
        return Err(Error::Invalid(format!(
            "index {k} is inside a multiplicity plateau (s_{} = s_{})",
            k - 1,
            k
        )));
    }
    let h = HardySymbol::new(vecs[k].iter().copied().collect());
    let f = pair.apply_h(&h).scale(C64::new(1.0 / s[k], 0.0));
    Ok(SchmidtPair {
        h,
        f,
        s: s[k],
        index: k,
    })
}

#[derive(Clone, Debug)]
pub struct UnimodularSymbol {
    pub phi: GridValues,
    pub dropped: usize,
    /// max ||φ| − 1| over the retained samples.
    pub max_modulus_deviation: f64,
}

/// φ = f/h̄ on M boundary points.
pub fn unimodular_symbol(pair: &SchmidtPair, m: usize) -> Result<UnimodularSymbol> {
    let hg = eval_grid(&pair.h, m)?;
    let fg = eval_grid(&pair.f, m)?;
    let cut = DROP_FRACTION * hg.max_abs();
    let mut phi: Vec<Option<C64>> = hg
        .values()
        .iter()
        .zip(fg.values())
        .map(|(h, f)| (h.norm() >= cut).then(|| f / h.conj()))
        .collect();
    let dropped = phi.iter().filter(|p| p.is_none()).count();
    if dropped as f64 > MAX_DROPPED_SHARE * m as f64 {
        return Err(Error::IllConditioned(format!(
            "h nearly vanishes at {dropped} of {m} boundary points"
        )));
    }
    let max_modulus_deviation = phi
        .iter()
        .flatten()
        .map(|p| (p.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    if dropped > 0 {
        fill_by_phase(&mut phi);
    }
    Ok(UnimodularSymbol {
        phi: GridValues::new(phi.into_iter().map(|p| p.unwrap()).collect()),
        dropped,
        max_modulus_deviation,
    })
}

/// Replace missing samples by unit values whose phase interpolates the
/// nearest retained neighbours on the periodic grid.
fn fill_by_phase(phi: &mut [Option<C64>]) {
    let m = phi.len();
    let known: Vec<usize> = (0..m).filter(|&i| phi[i].is_some()).collect();
    for i in 0..m {
        if phi[i].is_some() {
            continue;
        }
        let next = known
            .iter()
            .copied()
            .find(|&j| j > i)
            .unwrap_or(known[0] + m);
        let prev = known
            .iter()
            .rev()
            .copied()
            .find(|&j| j < i)
            .map_or(known[known.len() - 1] as isize - m as isize, |j| j as isize);
        let a = phi[prev.rem_euclid(m as isize) as usize].unwrap();
        let b = phi[next % m].unwrap();
        let w = (i as isize - prev) as f64 / (next as isize - prev) as f64;
        let delta = (b / a).arg();
        phi[i] = Some(C64::from_polar(1.0, a.arg() + w * delta));
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AakApproximation {
    #[serde(skip)]
    pub r: HardySymbol,
    /// ‖H_{u−r}‖.
    pub err: f64,
    /// λ_k(u), the optimal error.
    pub s: f64,
    pub rank: usize,
    pub tail_energy: f64,
    pub dropped: usize,
    pub max_modulus_deviation: f64,
}

/// r = u − sΠ(φ), the best rank-k Hankel approximation.
pub fn best_rank_approx(
    u: &HardySymbol,
    k: usize,
    m: usize,
    n_out: usize,
) -> Result<AakApproximation> {
    if n_out < u.n_modes() {
        return Err(Error::Invalid(format!(
            "output dimension {n_out} is below the symbol dimension {}",
            u.n_modes()
        )));
    }
    let u_out = u.resized(n_out);
    let s1 = hankel_singular_values(u).first().copied().unwrap_or(0.0);
    if k == 0 {
        return Ok(AakApproximation {
            r: HardySymbol::zeros(n_out),
            err: s1,
            s: s1,
            rank: 0,
            tail_energy: 0.0,
            dropped: 0,
            max_modulus_deviation: 0.0,
        });
    }
    let pair = schmidt_pair(u, k)?;
    let uni = unimodular_symbol(&pair, m)?;
    let (proj, tail) = uni.phi.project(n_out);
    let v = proj.scale(C64::new(pair.s, 0.0));
    let r = u_out.sub(&v);
    let err = hankel_singular_values(&v).first().copied().unwrap_or(0.0);
    let rank = hankel_singular_values(&r)
        .iter()
        .filter(|&&x| x > RANK_TOL * s1)
        .count();
    if rank != k {
        return Err(Error::Degenerate(format!(
            "approximant has numerical rank {rank}, expected {k}"
        )));
    }
    Ok(AakApproximation {
        r,
        err,
        s: pair.s,
        rank,
        tail_energy: tail * pair.s * pair.s,
        dropped: uni.dropped,
        max_modulus_deviation: uni.max_modulus_deviation,
    })
}
