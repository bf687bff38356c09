use num_complex::Complex64 as C64;

use crate::blaschke::{fit_from_samples, BlaschkeProduct};
use crate::error::{Error, Result};
use crate::hankel::{
    build_pair, dominance_split, spectral_clusters, HankelPair, Side, SpectralSkeleton,
    DEFAULT_TOL_CLUSTER, DEFAULT_TOL_DOMINANCE,
};
use crate::hardy::{eval_grid, grid_point, min_grid, HardySymbol};

use super::SpectralData;

/// Largest last-quarter energy fraction for which the rank counts as resolved.
pub const RESOLUTION_LIMIT: f64 = 1e-10;

/// Samples whose denominator falls below this fraction of its maximum are
/// left out of the Blaschke fit.
pub const DROP_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct ForwardOptions {
    pub tol_cluster: f64,
    pub tol_dominance: f64,
    pub tol_fit: f64,
    /// Boundary grid for the Blaschke fits; chosen from the dimension if absent.
    pub grid: Option<usize>,
}

impl Default for ForwardOptions {
    fn default() -> Self {
        ForwardOptions {
            tol_cluster: DEFAULT_TOL_CLUSTER,
            tol_dominance: DEFAULT_TOL_DOMINANCE,
            tol_fit: 1e-6,
            grid: None,
        }
    }
}

/// Result of the forward transform.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub data: SpectralData,
    pub skeleton: SpectralSkeleton,
    /// Truncation dimension the spectrum was computed at.
    pub dim: usize,
    pub tail_fraction: f64,
    /// Some cluster gap or dominance decision was close to its tolerance.
    pub ambiguous: bool,
    /// Samples dropped from each Blaschke fit.
    pub dropped: Vec<usize>,
}

pub fn forward(u: &HardySymbol, opts: &ForwardOptions) -> Result<Analysis> {
    if u.is_zero() {
        return Err(Error::Domain("the zero symbol has no spectral data".into()));
    }
    let tail_fraction = u.tail_fraction();
    if tail_fraction > RESOLUTION_LIMIT {
        return Err(Error::Unresolved(tail_fraction));
    }
    let pair = build_pair(u);
    let n = pair.dim();
    let h = spectral_clusters(&pair, Side::H, opts.tol_cluster)?;
    let k = spectral_clusters(&pair, Side::K, opts.tol_cluster)?;
    let skeleton = dominance_split(u, &h, &k, opts.tol_dominance)?;
    let m = opts.grid.unwrap_or_else(|| min_grid(n, 4).max(64));
    let mut s = Vec::with_capacity(skeleton.n());
    let mut psi = Vec::with_capacity(skeleton.n());
    let mut dropped = Vec::with_capacity(skeleton.n());
    for e in &skeleton.entries {
        let set = if e.side == Side::H { &h } else { &k };
        let proj = &set.clusters[e.cluster].u_proj;
        let (fit, d) = extract_blaschke(&pair, e.side, e.s, proj, e.degree(), m, opts.tol_fit)?;
        s.push(e.s);
        psi.push(fit);
        dropped.push(d);
    }
    let data = SpectralData::new(s, psi)?;
    Ok(Analysis {
        data,
        ambiguous: skeleton.ambiguous,
        skeleton,
        dim: n,
        tail_fraction,
        dropped,
    })
}

/// Ψ from s·u_s = Ψ·H_u(u_s) on the H side, or K_u(u′_s) = s·Ψ·u′_s on the K side.
fn extract_blaschke(
    pair: &HankelPair,
    side: Side,
    s: f64,
    proj: &HardySymbol,
    degree: usize,
    m: usize,
    tol: f64,
) -> Result<(BlaschkeProduct, usize)> {
    let image = pair.apply(side, proj);
    let (num, den) = match side {
        Side::H => (
            eval_grid(&proj.scale(C64::new(s, 0.0)), m)?,
            eval_grid(&image, m)?,
        ),
        Side::K => (
            eval_grid(&image, m)?,
            eval_grid(&proj.scale(C64::new(s, 0.0)), m)?,
        ),
    };
    let cut = DROP_THRESHOLD * den.max_abs();
    let mut points = Vec::with_capacity(m);
    let mut ratio = Vec::with_capacity(m);
    for (j, (a, b)) in num.values().iter().zip(den.values()).enumerate() {
        if b.norm() >= cut {
            points.push(grid_point(j, m));
            ratio.push(a / b);
        }
    }
    if points.len() < 2 * degree + 2 {
        return Err(Error::IllConditioned(format!(
            "only {} usable boundary samples for a degree-{degree} fit",
            points.len()
        )));
    }
    let fit = fit_from_samples(&points, &ratio, degree, tol)?;
    Ok((fit, m - points.len()))
}
