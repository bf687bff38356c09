//! Truncated Hankel pairs and their spectral analysis.
//!
//! The Hankel operator H_u is antilinear: H_u(h) = Π(u h̄), which in
//! coefficients is h ↦ Γ·conj(h) with Γ_{np} = û(n+p). Its square H_u² = ΓΓ^H
//! is a Hermitian matrix, and likewise K_u² = Γ′Γ′^H with Γ′_{np} = û(n+p+1).

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hardy::{abs_sq_modes, HardySymbol};

pub const DEFAULT_TOL_CLUSTER: f64 = 1e-6;
pub const DEFAULT_TOL_DOMINANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct HankelPair {
    gamma: DMatrix<C64>,
    gamma_shift: DMatrix<C64>,
    source: HardySymbol,
}

impl HankelPair {
    pub fn gamma(&self) -> &DMatrix<C64> {
        &self.gamma
    }

    pub fn gamma_shift(&self) -> &DMatrix<C64> {
        &self.gamma_shift
    }

    pub fn source(&self) -> &HardySymbol {
        &self.source
    }

    /// Truncation dimension N.
    pub fn dim(&self) -> usize {
        self.gamma.nrows()
    }

    /// H_u² = ΓΓ^H.
    pub fn h_sq(&self) -> DMatrix<C64> {
        &self.gamma * self.gamma.adjoint()
    }

    /// K_u² = Γ′Γ′^H.
    pub fn k_sq(&self) -> DMatrix<C64> {
        &self.gamma_shift * self.gamma_shift.adjoint()
    }

    pub fn square(&self, side: Side) -> DMatrix<C64> {
        match side {
            Side::H => self.h_sq(),
            Side::K => self.k_sq(),
        }
    }

    pub fn matrix(&self, side: Side) -> &DMatrix<C64> {
        match side {
            Side::H => &self.gamma,
            Side::K => &self.gamma_shift,
        }
    }

    /// H_u(h) = Γ·conj(h).
    pub fn apply_h(&self, h: &HardySymbol) -> HardySymbol {
        apply_antilinear(&self.gamma, h)
    }

    /// K_u(h) = Γ′·conj(h).
    pub fn apply_k(&self, h: &HardySymbol) -> HardySymbol {
        apply_antilinear(&self.gamma_shift, h)
    }

    pub fn apply(&self, side: Side, h: &HardySymbol) -> HardySymbol {
        apply_antilinear(self.matrix(side), h)
    }
}

fn apply_antilinear(g: &DMatrix<C64>, h: &HardySymbol) -> HardySymbol {
    let n = g.nrows();
    let x = DVector::from_iterator(n, h.resized(n).coeffs().iter().map(|c| c.conj()));
    HardySymbol::new((g * x).iter().copied().collect())
}

/// Zero the entries below ε² of the largest one. Left in place they push the
/// Householder steps of the dense decompositions into subnormals and NaN.
pub fn flush_tiny(m: &mut DMatrix<C64>) {
    let floor = m.iter().map(|x| x.norm()).fold(0.0, f64::max) * f64::EPSILON * f64::EPSILON;
    m.iter_mut()
        .filter(|x| x.norm() < floor)
        .for_each(|x| *x = C64::new(0.0, 0.0));
}

/// Hankel matrix with entries û(n+p+shift), of the symbol's own dimension.
pub fn hankel_matrix(u: &HardySymbol, shift: usize) -> DMatrix<C64> {
    let n = u.n_modes();
    let c = u.coeffs();
    let mut m = DMatrix::from_fn(n, n, |i, j| {
        c.get(i + j + shift).copied().unwrap_or_default()
    });
    flush_tiny(&mut m);
    m
}

pub fn build_pair(u: &HardySymbol) -> HankelPair {
    HankelPair {
        gamma: hankel_matrix(u, 0),
        gamma_shift: hankel_matrix(u, 1),
        source: u.clone(),
    }
}

/// Toeplitz matrix T_{np} = b̂(n−p) from two-sided coefficients centered in
/// `b` (index j holds mode j − (len−1)/2).
pub fn toeplitz_matrix(b: &[C64], n: usize) -> DMatrix<C64> {
    let center = (b.len() as isize - 1) / 2;
    DMatrix::from_fn(n, n, |i, j| {
        let idx = i as isize - j as isize + center;
        if idx >= 0 && (idx as usize) < b.len() {
            b[idx as usize]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// T_{|u|²} on the symbol's own dimension.
pub fn toeplitz_abs_sq(u: &HardySymbol) -> DMatrix<C64> {
    toeplitz_matrix(&abs_sq_modes(u), u.n_modes())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    H,
    K,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::H => Side::K,
            Side::K => Side::H,
        }
    }
}

/// One clustered eigenvalue of H_u² or K_u².
#[derive(Clone, Debug)]
pub struct EigenCluster {
    pub s: f64,
    pub s_sq: f64,
    pub mult: usize,
    /// Orthonormal eigenvectors, each of the truncation dimension.
    pub basis: Vec<HardySymbol>,
    /// Orthogonal projection of the symbol onto the eigenspace.
    pub u_proj: HardySymbol,
    pub norm_sq: f64,
    pub side: Side,
    pub kernel: bool,
}

#[derive(Clone, Debug)]
pub struct ClusterSet {
    pub side: Side,
    /// Positive clusters by decreasing s, then the kernel cluster if any.
    pub clusters: Vec<EigenCluster>,
    /// Set when some gap sits within a factor 10 of the clustering tolerance.
    pub ambiguous: bool,
    pub tol_rel: f64,
    pub dim: usize,
}

impl ClusterSet {
    pub fn positive(&self) -> impl Iterator<Item = (usize, &EigenCluster)> {
        self.clusters.iter().enumerate().filter(|(_, c)| !c.kernel)
    }

    pub fn kernel(&self) -> Option<&EigenCluster> {
        self.clusters.iter().find(|c| c.kernel)
    }

    /// Index of the positive cluster matching `s` within the clustering tolerance.
    pub fn find(&self, s: f64) -> Option<usize> {
        self.positive()
            .find(|(_, c)| (c.s - s).abs() <= self.tol_rel * s.max(c.s))
            .map(|(i, _)| i)
    }

    /// All singular values with multiplicity, decreasing, kernel excluded.
    pub fn values_with_multiplicity(&self) -> Vec<f64> {
        self.positive()
            .flat_map(|(_, c)| std::iter::repeat_n(c.s, c.mult))
            .collect()
    }
}

/// Eigenpairs of a Hermitian matrix sorted by decreasing eigenvalue.
pub fn hermitian_eigen(mut m: DMatrix<C64>) -> Result<(Vec<f64>, Vec<DVector<C64>>)> {
    flush_tiny(&mut m);
    let n = m.nrows();
    let a = Mat::<C64>::from_fn(n, n, |i, j| m[(i, j)]);
    let eig = a
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::IllConditioned(format!("Hermitian eigensolver failed: {e:?}")))?;
    let (lambda, vecs) = (eig.S(), eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lambda[b].re.total_cmp(&lambda[a].re));
    let values = order.iter().map(|&i| lambda[i].re).collect();
    let vectors = order
        .iter()
        .map(|&i| DVector::from_fn(n, |r, _| vecs[(r, i)]))
        .collect();
    Ok((values, vectors))
}

/// Cluster the spectrum of H_u² or K_u².
pub fn spectral_clusters(pair: &HankelPair, side: Side, tol_rel: f64) -> Result<ClusterSet> {
    if !(tol_rel > 0.0 && tol_rel < 1e-2) {
        return Err(Error::Invalid(format!(
            "cluster tolerance {tol_rel} outside (0, 1e-2)"
        )));
    }
    let n = pair.dim();
    let (lambda, vecs) = hermitian_eigen(pair.square(side))?;
    let s: Vec<f64> = lambda.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let s_max = s.first().copied().unwrap_or(0.0);
    let threshold = tol_rel * s_max;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut kernel: Vec<usize> = Vec::new();
    let mut ambiguous = false;
    for i in 0..s.len() {
        if s_max == 0.0 || s[i] < threshold {
            if s[i] >= 0.1 * threshold && s_max > 0.0 {
                ambiguous = true;
            }
            kernel.push(i);
            continue;
        }
        if s[i] < 10.0 * threshold {
            ambiguous = true;
        }
        match groups.last_mut() {
            Some(g) => {
                let prev = s[*g.last().unwrap()];
                let gap = (prev - s[i]) / prev;
                if gap < tol_rel {
                    if gap > 0.1 * tol_rel {
                        ambiguous = true;
                    }
                    g.push(i);
                } else {
                    if gap < 10.0 * tol_rel {
                        ambiguous = true;
                    }
                    groups.push(vec![i]);
                }
            }
            None => groups.push(vec![i]),
        }
    }
    let u = pair.source().resized(n);
    let make = |idx: &[usize], is_kernel: bool| {
        let basis: Vec<HardySymbol> = idx
            .iter()
            .map(|&i| HardySymbol::new(vecs[i].iter().copied().collect()))
            .collect();
        let s_sq = if is_kernel {
            0.0
        } else {
            idx.iter().map(|&i| lambda[i]).sum::<f64>() / idx.len() as f64
        };
        let cluster = EigenCluster {
            s: s_sq.max(0.0).sqrt(),
            s_sq,
            mult: idx.len(),
            basis,
            u_proj: HardySymbol::zeros(n),
            norm_sq: 0.0,
            side,
            kernel: is_kernel,
        };
        project_symbol(&u, cluster)
    };
    let mut clusters: Vec<EigenCluster> = groups.iter().map(|g| make(g, false)).collect();
    if !kernel.is_empty() {
        clusters.push(make(&kernel, true));
    }
    Ok(ClusterSet {
        side,
        clusters,
        ambiguous,
        tol_rel,
        dim: n,
    })
}

/// Fill the projection of `u` onto the cluster's eigenspace.
pub fn project_symbol(u: &HardySymbol, mut cluster: EigenCluster) -> EigenCluster {
    let n = cluster.basis.first().map_or(u.n_modes(), |b| b.n_modes());
    let u = u.resized(n);
    let mut proj = HardySymbol::zeros(n);
    for v in &cluster.basis {
        proj = proj.add(&v.scale(u.inner(v)));
    }
    cluster.norm_sq = proj.norm_sq();
    cluster.u_proj = proj;
    cluster
}

/// One entry of the interlaced list of dominant singular values.
#[derive(Clone, Debug)]
pub struct SkeletonEntry {
    pub s: f64,
    pub side: Side,
    /// Dimension of the dominant eigenspace (m for ρ, ℓ for σ).
    pub mult: usize,
    /// Dimension of the eigenspace for the same value on the other side.
    pub partner_mult: usize,
    /// Index into the dominant side's cluster list.
    pub cluster: usize,
    /// ‖u_ρ‖² or ‖u′_σ‖².
    pub norm_sq: f64,
}

impl SkeletonEntry {
    /// Degree of the associated Blaschke product.
    pub fn degree(&self) -> usize {
        self.mult - 1
    }
}

/// Ordered spectral skeleton: ρ_1 > σ_1 > ρ_2 > … with side tags.
#[derive(Clone, Debug)]
pub struct SpectralSkeleton {
    pub entries: Vec<SkeletonEntry>,
    /// Whether 0 is K-dominant, making n odd.
    pub zero_in_k: bool,
    /// ‖u′_0‖², the squared projection of u onto ker K_u.
    pub kappa0_sq: f64,
    pub dim: usize,
    pub ambiguous: bool,
}

impl SpectralSkeleton {
    pub fn s_list(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.s).collect()
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }
}

/// Classify clusters as H- or K-dominant and check the interlacing structure.
pub fn dominance_split(
    u: &HardySymbol,
    h: &ClusterSet,
    k: &ClusterSet,
    tol_dom: f64,
) -> Result<SpectralSkeleton> {
    let unorm = u.norm();
    if unorm == 0.0 {
        return Err(Error::Domain("zero symbol has no spectral data".into()));
    }
    let cut = (tol_dom * unorm).powi(2);
    let mut entries: Vec<SkeletonEntry> = Vec::new();
    for (set, other) in [(h, k), (k, h)] {
        for (i, c) in set.positive() {
            if c.norm_sq <= cut {
                continue;
            }
            let partner = other.find(c.s);
            let partner_mult = partner.map_or(0, |j| other.clusters[j].mult);
            if let Some(j) = partner {
                if other.clusters[j].norm_sq > cut {
                    return Err(Error::InconsistentSpectrum(format!(
                        "s = {} is dominant for both H and K",
                        c.s
                    )));
                }
            }
            entries.push(SkeletonEntry {
                s: c.s,
                side: set.side,
                mult: c.mult,
                partner_mult,
                cluster: i,
                norm_sq: c.norm_sq,
            });
        }
    }
    entries.sort_by(|a, b| b.s.total_cmp(&a.s));
    for (idx, e) in entries.iter().enumerate() {
        let want = if idx % 2 == 0 { Side::H } else { Side::K };
        if e.side != want {
            return Err(Error::InconsistentSpectrum(format!(
                "interlacing violated at s = {} (position {})",
                e.s,
                idx + 1
            )));
        }
        if e.partner_mult + 1 != e.mult {
            return Err(Error::InconsistentSpectrum(format!(
                "multiplicities at s = {} are {} and {}, expected a difference of one",
                e.s, e.mult, e.partner_mult
            )));
        }
    }
    // every positive cluster must be dominant or the partner of a dominant one
    for set in [h, k] {
        for (_, c) in set.positive() {
            let covered = entries
                .iter()
                .any(|e| (e.s - c.s).abs() <= set.tol_rel * e.s.max(c.s));
            if !covered {
                return Err(Error::InconsistentSpectrum(format!(
                    "cluster s = {} on side {:?} is attached to no dominant value",
                    c.s, set.side
                )));
            }
        }
    }
    let kappa0_sq = k.kernel().map_or(0.0, |c| c.norm_sq);
    let zero_in_k = kappa0_sq > cut;
    let n_h = entries.iter().filter(|e| e.side == Side::H).count();
    let n_k = entries.len() - n_h;
    if n_h != n_k + usize::from(zero_in_k) {
        return Err(Error::InconsistentSpectrum(format!(
            "{n_h} H-dominant and {n_k} K-dominant values with zero {} K-dominant",
            if zero_in_k { "" } else { "not" }
        )));
    }
    Ok(SpectralSkeleton {
        entries,
        zero_in_k,
        kappa0_sq,
        dim: h.dim,
        ambiguous: h.ambiguous || k.ambiguous,
    })
}
