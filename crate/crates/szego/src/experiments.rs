//! Traveling waves, the near-collapse turbulence family and isospectral tori.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::flow::{integrate_direct, least_squares_slope, IntegrateOptions};
use crate::hankel::build_pair;
use crate::hardy::{eval_grid, HardySymbol};
use crate::nlft::realize::pole_expansion;
use crate::nlft::{eigen_components, inverse, SpectralData};
use crate::poly;

/// Retries with jittered (ξ, η) before a sweep gives up.
pub const MAX_JITTER_RETRIES: usize = 5;

/// Largest share of the H^s energy allowed past the truncation.
pub const MAX_TAIL_FRACTION: f64 = 1e-2;

/// u0 = α z^{m−1}/(1 − p z^{ℓ+m−1}) with its speed c and frequency ω.
#[derive(Clone, Debug)]
pub struct TravelingWave {
    pub u0: HardySymbol,
    pub c: f64,
    pub omega: f64,
}

pub fn traveling_wave(
    rho: f64,
    sigma: f64,
    m: usize,
    ell: usize,
    phi: f64,
    theta: f64,
    n_modes: usize,
) -> Result<TravelingWave> {
    if !(rho > sigma && sigma >= 0.0) {
        return Err(Error::Domain(format!(
            "need rho > sigma >= 0, got ({rho}, {sigma})"
        )));
    }
    if m == 0 || ell == 0 || n_modes == 0 {
        return Err(Error::Invalid(
            "m, ell and the mode count must be positive".into(),
        ));
    }
    let gap = rho * rho - sigma * sigma;
    let alpha = C64::from_polar(gap / rho, -phi);
    let p = C64::from_polar(sigma / rho, -(phi + theta));
    let period = ell + m - 1;
    let mut coeffs = vec![C64::new(0.0, 0.0); n_modes];
    let mut a = alpha;
    let mut k = m - 1;
    while k < n_modes {
        coeffs[k] = a;
        a *= p;
        k += period;
    }
    let c = gap / period as f64;
    Ok(TravelingWave {
        u0: HardySymbol::new(coeffs),
        c,
        omega: rho * rho - (m - 1) as f64 * c,
    })
}

/// max_k |û(T)(k) − e^{−i(ω+ck)T}û₀(k)| after direct integration.
pub fn check_traveling(u0: &HardySymbol, c: f64, omega: f64, t: f64, dt: f64) -> Result<f64> {
    let mut opts = IntegrateOptions::new(t, dt);
    opts.stride = usize::MAX;
    opts.track_spectrum = false;
    let rec = integrate_direct(u0, &opts)?;
    let u = rec.last();
    Ok(u.coeffs()
        .iter()
        .zip(u0.coeffs())
        .enumerate()
        .map(|(k, (a, b))| (a - b * C64::from_polar(1.0, -(omega + c * k as f64) * t)).norm())
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug)]
pub struct TurbulenceParams {
    /// Even-length block (ρ_a, σ_b) with its Blaschke products.
    pub base: SpectralData,
    pub delta: f64,
    pub eps: f64,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
}

impl TurbulenceParams {
    /// ξ_j = 2π(N − j + 1) and η_k halfway between ξ_k and ξ_{k+1}.
    pub fn new(base: SpectralData, n: usize, delta: f64, eps: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid("the collapsing block needs N >= 2".into()));
        }
        let xi: Vec<f64> = (1..=n).map(|j| TAU * (n - j + 1) as f64).collect();
        let eta = xi.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let p = TurbulenceParams {
            base,
            delta,
            eps,
            xi,
            eta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        TurbulenceParams {
            eps,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.base.n() % 2 != 0 {
            return Err(Error::Invalid(
                "the base block must have even length".into(),
            ));
        }
        if !(self.delta > 0.0 && self.eps > 0.0) {
            return Err(Error::Domain("delta and eps must be positive".into()));
        }
        let n = self.xi.len();
        if n < 2 || self.eta.len() + 1 != n {
            return Err(Error::Invalid(format!(
                "need N >= 2 values of xi and N - 1 of eta, got {} and {}",
                n,
                self.eta.len()
            )));
        }
        let mut chain = Vec::with_capacity(2 * n);
        for j in 0..n {
            chain.push(self.xi[j]);
            if j + 1 < n {
                chain.push(self.eta[j]);
            }
        }
        chain.push(0.0);
        if chain.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::Domain("xi and eta must interlace above zero".into()));
        }
        let smallest = *self.base.s().last().expect("base is nonempty");
        let top = self.delta * (1.0 + self.eps * self.xi[0]);
        if !(top < smallest) {
            return Err(Error::Domain(format!(
                "delta(1 + eps xi_1) = {top} is not below the smallest base value {smallest}"
            )));
        }
        Ok(())
    }

    /// δ(1+εξ_1), δ(1+εη_1), …, δ(1+εξ_N).
    pub fn tail(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.n() - 1);
        for j in 0..self.n() {
            v.push(self.delta * (1.0 + self.eps * self.xi[j]));
            if j < self.eta.len() {
                v.push(self.delta * (1.0 + self.eps * self.eta[j]));
            }
        }
        v
    }

    /// The concatenated spectral data, tail products equal to 1.
    pub fn spectral_data(&self) -> Result<SpectralData> {
        self.validate()?;
        let (mut s, mut psi) = self.base.clone().into_parts();
        for t in self.tail() {
            s.push(t);
            psi.push(BlaschkeProduct::constant(0.0));
        }
        SpectralData::new(s, psi)
    }

    /// Every ξ_j, η_k moved by at most a quarter of the 2π spacing.
    pub fn jittered(&self, rng: &mut impl Rng) -> Result<Self> {
        let spread = 0.25 * PI;
        let mut p = self.clone();
        for x in p.xi.iter_mut().chain(p.eta.iter_mut()) {
            *x += rng.gen_range(-spread..spread);
        }
        p.validate()?;
        Ok(p)
    }
}

pub fn turbulence_family(p: &TurbulenceParams, m: usize, n_out: usize) -> Result<HardySymbol> {
    Ok(inverse(&p.spectral_data()?, m, n_out)?.symbol)
}

/// How ‖u‖_{H^s} is evaluated.
#[derive(Clone, Copy, Debug)]
pub enum NormMethod {
    /// Closed-form sum over the pole expansion; needs degree-zero products.
    Poles,
    /// Grid inverse truncated to `n_out` modes.
    Grid { m: usize, n_out: usize },
}

fn family_norm(sd: &SpectralData, s: f64, method: NormMethod) -> Result<f64> {
    match method {
        NormMethod::Poles => Ok(pole_expansion(sd)?.sobolev_norm(s)),
        NormMethod::Grid { m, n_out } => {
            if 4 * n_out > m {
                return Err(Error::Alias {
                    grid: m,
                    modes: n_out,
                    required: 4 * n_out,
                });
            }
            // weighted energy in modes [n_out, m/4) measures what the truncation misses
            let rec = inverse(sd, m, m / 4)?;
            let weight = |k: usize| (1.0 + k as f64).powf(2.0 * s);
            let (mut kept, mut lost) = (0.0, 0.0);
            for (k, c) in rec.symbol.coeffs().iter().enumerate() {
                let e = weight(k) * c.norm_sqr();
                if k < n_out {
                    kept += e;
                } else {
                    lost += e;
                }
            }
            lost += weight(m / 4) * rec.tail_energy;
            let frac = lost / (kept + lost);
            if frac > MAX_TAIL_FRACTION {
                return Err(Error::Resolution(format!(
                    "modes beyond {n_out} hold {:.2}% of the H^{s} energy; raise the mode count",
                    100.0 * frac
                )));
            }
            Ok(kept.sqrt())
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub delta: f64,
    pub sobolev_s: f64,
    pub norm: f64,
    pub predicted_exponent: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of ln‖u‖ against ln(1/ε).
    pub slope: f64,
    pub expected_slope: f64,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    /// Jittered retries used.
    pub retries: usize,
}

fn sweep_once(
    p: &TurbulenceParams,
    s: f64,
    eps_list: &[f64],
    method: NormMethod,
) -> Result<Vec<SweepRow>> {
    let predicted = (p.n() - 1) as f64 * (2.0 * s - 1.0);
    eps_list
        .par_iter()
        .map(|&eps| {
            let sd = p.with_eps(eps).spectral_data()?;
            Ok(SweepRow {
                eps,
                delta: p.delta,
                sobolev_s: s,
                norm: family_norm(&sd, s, method)?,
                predicted_exponent: predicted,
            })
        })
        .collect()
}

/// ‖u^{δ,ε}‖_{H^s} along `eps_list` with the fitted growth exponent.
pub fn growth_sweep(
    template: &TurbulenceParams,
    s: f64,
    eps_list: &[f64],
    method: NormMethod,
    seed: u64,
) -> Result<SweepResult> {
    if !(s > 0.5 && s < 1.0) {
        return Err(Error::Domain(format!(
            "Sobolev index {s} is outside (1/2, 1)"
        )));
    }
    if eps_list.len() < 2 {
        return Err(Error::Invalid(
            "a sweep needs at least two values of eps".into(),
        ));
    }
    if eps_list.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Invalid(
            "eps values must be strictly decreasing".into(),
        ));
    }
    if !(eps_list[0] <= template.delta && eps_list[eps_list.len() - 1] > 0.0) {
        return Err(Error::Domain(
            "need 0 < eps <= delta throughout the sweep".into(),
        ));
    }
    for &eps in eps_list {
        template.with_eps(eps).validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = template.clone();
    let mut retries = 0;
    let rows = loop {
        match sweep_once(&params, s, eps_list, method) {
            Ok(rows) => break rows,
            Err(e) if e.is_validation() || matches!(e, Error::Resolution(_)) => return Err(e),
            Err(e) => {
                if retries == MAX_JITTER_RETRIES {
                    return Err(e);
                }
                log::warn!("turbulence construction failed ({e}); retrying with jittered xi, eta");
                retries += 1;
                params = template.with_eps(eps_list[0]).jittered(&mut rng)?;
            }
        }
    };
    let xs: Vec<f64> = rows.iter().map(|r| (1.0 / r.eps).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.norm.ln()).collect();
    Ok(SweepResult {
        slope: least_squares_slope(&xs, &ys),
        expected_slope: rows[0].predicted_exponent,
        rows,
        xi: params.xi,
        eta: params.eta,
        retries,
    })
}

/// max_k (1+k)⁴|â(k) − b̂(k)|.
pub fn smooth_distance(a: &HardySymbol, b: &HardySymbol) -> f64 {
    let n = a.n_modes().max(b.n_modes());
    let (a, b) = (a.resized(n), b.resized(n));
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .enumerate()
        .map(|(k, (x, y))| (1.0 + k as f64).powi(4) * (x - y).norm())
        .fold(0.0, f64::max)
}

fn realize(sd: &SpectralData, method: NormMethod, n: usize) -> Result<HardySymbol> {
    match method {
        NormMethod::Poles => Ok(pole_expansion(sd)?.symbol(n)),
        NormMethod::Grid { m, n_out } => Ok(inverse(sd, m, n_out)?.symbol),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReturnCheck {
    /// t* = 1/(2εδ²).
    pub time: f64,
    pub distance: f64,
}

/// Exact flow of u^{δ,ε} to t* against u(base s, base Ψ rotated to t*).
///
/// `phase_error` perturbs the predicted base angles; zero for the actual check.
pub fn return_check(
    p: &TurbulenceParams,
    method: NormMethod,
    n: usize,
    phase_error: f64,
) -> Result<ReturnCheck> {
    let sd = p.spectral_data()?;
    let time = 1.0 / (2.0 * p.eps * p.delta * p.delta);
    let base_n = p.base.n();
    // (−1)^r s_r² t* mod 2π; the tail uses s²t* = 1/(2ε) + x + εx²/2
    let half_inv_eps = (0.5 / p.eps).rem_euclid(TAU);
    let mut theta = Vec::with_capacity(sd.n());
    for (r, s) in p.base.s().iter().enumerate() {
        let a = (s * s * time).rem_euclid(TAU);
        theta.push(if r % 2 == 0 { -a } else { a });
    }
    let mut xs = Vec::new();
    for j in 0..p.n() {
        xs.push(p.xi[j]);
        if j < p.eta.len() {
            xs.push(p.eta[j]);
        }
    }
    for (i, x) in xs.into_iter().enumerate() {
        let a = half_inv_eps + x.rem_euclid(TAU) + (0.5 * p.eps * x * x).rem_euclid(TAU);
        theta.push(if (base_n + i) % 2 == 0 { -a } else { a });
    }
    let evolved = realize(&sd.rotated(&theta), method, n)?;
    let mut base_theta = theta[..base_n].to_vec();
    for t in base_theta.iter_mut().step_by(2) {
        *t += phase_error;
    }
    let predicted = realize(&p.base.rotated(&base_theta), method, n)?;
    Ok(ReturnCheck {
        time,
        distance: smooth_distance(&evolved, &predicted),
    })
}

fn gram_matrix(sd: &SpectralData, index: usize, m: usize, n_out: usize) -> Result<DMatrix<C64>> {
    let r = 2 * index;
    let Some(psi) = sd.psi().get(r) else {
        return Err(Error::Invalid(format!(
            "no H-dominant value with index {index}"
        )));
    };
    let u = inverse(sd, m, n_out)?.symbol;
    let uj = &eigen_components(sd, m, n_out)?[index];
    let hu = eval_grid(&build_pair(&u).apply_h(uj), m)?;
    let d = psi.normalized_denominator();
    let basis: Vec<Vec<C64>> = (0..=psi.degree())
        .map(|a| {
            hu.values()
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let z = crate::hardy::grid_point(j, m);
                    v * z.powu(a as u32) / poly::eval(&d, z)
                })
                .collect()
        })
        .collect();
    let k = basis.len();
    Ok(DMatrix::from_fn(k, k, |a, b| {
        basis[a]
            .iter()
            .zip(&basis[b])
            .map(|(x, y)| x * y.conj())
            .sum::<C64>()
            / m as f64
    }))
}

/// ‖G_u − G_ũ‖_∞ for the eigenspace of ρ_{index+1}, ũ having angles shifted by γ.
pub fn gram_invariance(
    sd: &SpectralData,
    gamma: &[f64],
    index: usize,
    m: usize,
    n_out: usize,
) -> Result<f64> {
    if gamma.len() != sd.n() {
        return Err(Error::Invalid(format!(
            "{} angle shifts for {} singular values",
            gamma.len(),
            sd.n()
        )));
    }
    gram_difference(sd, &sd.rotated(gamma), index, m, n_out)
}

/// ‖G_u − G_v‖_∞ for two spectral data with the same s-list.
pub fn gram_difference(
    a: &SpectralData,
    b: &SpectralData,
    index: usize,
    m: usize,
    n_out: usize,
) -> Result<f64> {
    let ga = gram_matrix(a, index, m, n_out)?;
    let gb = gram_matrix(b, index, m, n_out)?;
    if ga.shape() != gb.shape() {
        return Err(Error::Invalid("eigenspace dimensions differ".into()));
    }
    Ok(ga
        .iter()
        .zip(gb.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}

/// Geometric points from `from` down to `to`.
pub fn geometric_eps(from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
    if !(from > to && to > 0.0 && points >= 2) {
        return Err(Error::Invalid(
            "need from > to > 0 and at least two points".into(),
        ));
    }
    let (a, b) = (from.ln(), to.ln());
    let mut v: Vec<f64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect();
    v[0] = from;
    v[points - 1] = to;
    Ok(v)
}
