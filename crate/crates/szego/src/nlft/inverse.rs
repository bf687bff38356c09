use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hardy::{check_grid, grid_point, GridValues, HardySymbol};
use crate::poly;

use super::SpectralData;

/// Condition numbers above this count as a singular system.
const MAX_CONDITION: f64 = 1e14;

/// Blaschke data evaluated at one point: e^{−iψ}P(z) and D(z).
#[derive(Clone, Copy)]
struct Factor {
    num: C64,
    den: C64,
}

struct Prepared {
    rho: Vec<f64>,
    sigma: Vec<f64>,
    odd: Vec<(C64, Vec<C64>, Vec<C64>)>,
    even: Vec<Option<(C64, Vec<C64>, Vec<C64>)>>,
}

impl Prepared {
    fn new(sd: &SpectralData) -> Self {
        let q = sd.q();
        let parts = |r: usize| {
            let p = &sd.psi()[r];
            (p.phase(), p.monic_numerator(), p.normalized_denominator())
        };
        Prepared {
            rho: sd.rho(),
            sigma: sd.sigma_padded(),
            odd: (0..q).map(|j| parts(2 * j)).collect(),
            even: (0..q)
                .map(|k| (2 * k + 1 < sd.n()).then(|| parts(2 * k + 1)))
                .collect(),
        }
    }

    fn factors(&self, z: C64) -> (Vec<Factor>, Vec<Factor>) {
        let at = |(ph, p, d): &(C64, Vec<C64>, Vec<C64>)| Factor {
            num: ph * poly::eval(p, z),
            den: poly::eval(d, z),
        };
        let one = Factor {
            num: C64::new(1.0, 0.0),
            den: C64::new(1.0, 0.0),
        };
        let odd = self.odd.iter().map(at).collect();
        let even = self
            .even
            .iter()
            .map(|e| e.as_ref().map_or(one, at))
            .collect();
        (odd, even)
    }

    fn csharp(&self, z: C64, odd: &[Factor], even: &[Factor]) -> DMatrix<C64> {
        let q = self.rho.len();
        DMatrix::from_fn(q, q, |k, l| {
            let (r, s) = (self.rho[k], self.sigma[l]);
            (r * even[l].den * odd[k].den - s * z * even[l].num * odd[k].num) / (r * r - s * s)
        })
    }
}

/// The matrix 𝒞(z) with c_{jk} = (ρ_j − σ_k zΨ_{2k}(z)Ψ_{2j−1}(z))/(ρ_j² − σ_k²).
pub fn build_c(sd: &SpectralData, z: C64) -> DMatrix<C64> {
    let q = sd.q();
    let rho = sd.rho();
    let sigma = sd.sigma_padded();
    let psi = sd.psi();
    DMatrix::from_fn(q, q, |j, k| {
        let (r, s) = (rho[j], sigma[k]);
        let even = if 2 * k + 1 < sd.n() {
            psi[2 * k + 1].eval(z)
        } else {
            C64::new(1.0, 0.0)
        };
        (r - s * z * even * psi[2 * j].eval(z)) / (r * r - s * s)
    })
}

/// The denominator-free matrix 𝒞#(z) = diag(D_{2k−1})·𝒞(z)·diag(D_{2ℓ}).
pub fn build_csharp(sd: &SpectralData, z: C64) -> DMatrix<C64> {
    let prep = Prepared::new(sd);
    let (odd, even) = prep.factors(z);
    prep.csharp(z, &odd, &even)
}

/// Solution of the linear systems at one point of the closed disc.
#[derive(Clone, Debug)]
pub struct PointSolution {
    pub u: C64,
    /// u_j(z) = Ψ_{2j−1}(z)·h_j(z), the pieces of u in the H-eigenspaces.
    pub parts: Vec<C64>,
    pub det: C64,
    pub condition: f64,
}

fn condition(m: &DMatrix<C64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn solve_prepared(prep: &Prepared, z: C64, index: usize) -> Result<PointSolution> {
    let (odd, even) = prep.factors(z);
    let m = prep.csharp(z, &odd, &even);
    let cond = condition(&m);
    let lu = m.clone().lu();
    let det = lu.determinant();
    let singular = || Error::Singular {
        index,
        det: det.norm(),
    };
    if !(cond < MAX_CONDITION) {
        return Err(singular());
    }
    let rhs = DVector::from_iterator(odd.len(), odd.iter().map(|f| f.num));
    let x = lu.solve(&rhs).ok_or_else(singular)?;
    let u: C64 = x.iter().zip(&even).map(|(x, f)| x * f.den).sum();
    let ones = DVector::from_iterator(even.len(), even.iter().map(|f| f.den));
    let y = m.transpose().lu().solve(&ones).ok_or_else(singular)?;
    let parts = y.iter().zip(&odd).map(|(y, f)| y * f.num).collect();
    if !u.is_finite() {
        return Err(singular());
    }
    Ok(PointSolution {
        u,
        parts,
        det,
        condition: cond,
    })
}

/// Solve 𝒞#(z)X = (e^{−iψ}P_{2j−1}(z))_j and the transposed system at one point.
pub fn solve_point(sd: &SpectralData, z: C64) -> Result<PointSolution> {
    solve_prepared(&Prepared::new(sd), z, 0)
}

/// Output of the inverse transform.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub symbol: HardySymbol,
    /// Σ |û(k)|² over the modes N_out ≤ k < M/2 that were cut off.
    pub tail_energy: f64,
    /// Energy the grid assigns to negative modes; zero in exact arithmetic.
    pub negative_energy: f64,
    pub max_condition: f64,
    pub min_abs_det: f64,
    pub m_grid: usize,
}

fn solve_grid(sd: &SpectralData, m: usize) -> Result<Vec<PointSolution>> {
    let prep = Prepared::new(sd);
    (0..m)
        .into_par_iter()
        .map(|j| solve_prepared(&prep, grid_point(j, m), j))
        .collect()
}

/// u(s, Ψ) on M boundary points, then Fourier coefficients truncated to N_out.
pub fn inverse(sd: &SpectralData, m: usize, n_out: usize) -> Result<Reconstruction> {
    if n_out == 0 {
        return Err(Error::Invalid("output dimension must be positive".into()));
    }
    check_grid(m, n_out, 4)?;
    let sols = solve_grid(sd, m)?;
    let max_condition = sols.iter().map(|s| s.condition).fold(0.0, f64::max);
    let min_abs_det = sols
        .iter()
        .map(|s| s.det.norm())
        .fold(f64::INFINITY, f64::min);
    let grid = GridValues::new(sols.iter().map(|s| s.u).collect());
    let modes = grid.modes();
    let negative_energy = modes[m / 2..].iter().map(|c| c.norm_sqr()).sum();
    let (symbol, tail_energy) = grid.project(n_out);
    Ok(Reconstruction {
        symbol,
        tail_energy,
        negative_energy,
        max_condition,
        min_abs_det,
        m_grid: m,
    })
}

/// The symbols u_j = u_{ρ_j}, truncated to N_out modes.
pub fn eigen_components(sd: &SpectralData, m: usize, n_out: usize) -> Result<Vec<HardySymbol>> {
    check_grid(m, n_out, 4)?;
    let sols = solve_grid(sd, m)?;
    Ok((0..sd.q())
        .map(|j| {
            GridValues::new(sols.iter().map(|s| s.parts[j]).collect())
                .project(n_out)
                .0
        })
        .collect())
}
