#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::Rng;
use szego::blaschke::BlaschkeProduct;
use szego::hankel::hankel_matrix;
use szego::hardy::from_rational;
use szego::nlft::{inverse, Reconstruction, SpectralData};
use szego::{HardySymbol, C64};

pub fn polar(rng: &mut impl Rng, r_min: f64, r_max: f64) -> C64 {
    C64::from_polar(rng.gen_range(r_min..r_max), rng.gen_range(0.0..TAU))
}

/// Distinct nonzero singular values of H_u and K_u, from SVDs of the truncated matrices.
pub fn svd_values(u: &HardySymbol) -> Vec<f64> {
    let mut v: Vec<f64> = [0, 1]
        .into_iter()
        .flat_map(|shift| hankel_matrix(u, shift).singular_values().iter().copied().collect::<Vec<_>>())
        .collect();
    v.sort_by(|a, b| b.total_cmp(a));
    let top = v[0];
    let mut out: Vec<f64> = Vec::new();
    for x in v.into_iter().filter(|x| *x > 1e-9 * top) {
        if out.last().is_none_or(|l| l - x > 1e-9 * top) {
            out.push(x);
        }
    }
    out
}

/// u = A/B with Schur denominator B of degree 1..=3, deg A ≤ 3, and singular
/// values separated from each other and from zero by at least `gap`.
pub fn random_rational(rng: &mut impl Rng, n_modes: usize, gap: f64) -> HardySymbol {
    loop {
        let b = rng.gen_range(1..=3);
        let a = rng.gen_range(0..=3);
        let poles: Vec<C64> = (0..b).map(|_| polar(rng, 0.05, 0.6)).collect();
        let mut denom = vec![C64::new(1.0, 0.0)];
        for p in &poles {
            denom = szego::poly::mul(&denom, &[C64::new(1.0, 0.0), -p]);
        }
        let numer: Vec<C64> = (0..=a).map(|_| polar(rng, 0.1, 1.0)).collect();
        let u = from_rational(&numer, &denom, n_modes).unwrap().symbol;
        let s = svd_values(&u);
        let separated = s.windows(2).all(|w| w[0] - w[1] >= gap) && s.last().is_some_and(|x| *x >= gap);
        if separated {
            return u;
        }
    }
}

/// n ≤ n_max values in (0.05, 1.5) with gaps ≥ `gap`, Blaschke degrees ≤ `max_degree`.
pub fn random_spectral(rng: &mut impl Rng, n_max: usize, max_degree: usize, gap: f64) -> SpectralData {
    let n = rng.gen_range(1..=n_max);
    let s = loop {
        let mut s: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.5)).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        if s.windows(2).all(|w| w[0] - w[1] >= gap) {
            break s;
        }
    };
    let psi = (0..n)
        .map(|_| {
            let d = rng.gen_range(0..=max_degree);
            let zeros = (0..d).map(|_| polar(rng, 0.0, 0.5)).collect();
            BlaschkeProduct::new(rng.gen_range(0.0..TAU), zeros).unwrap()
        })
        .collect();
    SpectralData::new(s, psi).unwrap()
}

/// s_r = 0.5·2^{−r}, r = 1..n, all products equal to 1.
pub fn dyadic(n: usize) -> SpectralData {
    let s: Vec<f64> = (1..=n).map(|r| 0.5 * 0.5f64.powi(r as i32)).collect();
    SpectralData::with_angles(s, &vec![0.0; n]).unwrap()
}

/// Like `random_spectral`, keeping only data whose symbol is resolved at `n` modes.
pub fn resolved_spectral(
    rng: &mut impl Rng,
    n_max: usize,
    max_degree: usize,
    gap: f64,
    m: usize,
    n: usize,
) -> (SpectralData, Reconstruction) {
    loop {
        let sd = random_spectral(rng, n_max, max_degree, gap);
        let rec = inverse(&sd, m, n).unwrap();
        if rec.symbol.tail_fraction() < 1e-24 {
            return (sd, rec);
        }
    }
}
