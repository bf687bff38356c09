//! Pole realization of u(s, Ψ) when every Blaschke product has degree zero.
//!
//! Then 𝒞(z) = A − zB with constant A, B and u is rational:
//! u(z) = −det([[A − zB, Ψ_odd], [1ᵀ, 0]]) / det(A − zB). Near-collapsing
//! singular values push the poles of u to within 1e−15 of the unit circle, far
//! beyond what a boundary grid can resolve, so the two determinants are
//! interpolated in double-double arithmetic and the Fourier coefficients are
//! kept in closed form û(k) = Q_k + Σ_i c_i w_i^k.

use num_complex::{Complex, Complex64 as C64};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::hardy::HardySymbol;
use crate::poly;
use crate::special::weighted_geometric_sum;

use super::SpectralData;

type Dd = Complex<TwoFloat>;

fn dd(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

fn cdd(z: C64) -> Dd {
    Dd::new(dd(z.re), dd(z.im))
}

fn to_c64(z: Dd) -> C64 {
    C64::new(z.re.hi() + z.re.lo(), z.im.hi() + z.im.lo())
}

/// a/b with a correction step; twofloat's own quotient is only good to about
/// double precision.
fn ddiv(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q0 = a.hi() / b.hi();
    let r = a - b * dd(q0);
    let q1 = r.hi() / b.hi();
    let r = r - b * dd(q1);
    TwoFloat::new_add(q0, q1) + dd(r.hi() / b.hi())
}

fn cdiv(a: Dd, b: Dd) -> Dd {
    let n = b.norm_sqr();
    let p = a * b.conj();
    Dd::new(ddiv(p.re, n), ddiv(p.im, n))
}

fn zero() -> Dd {
    Dd::new(dd(0.0), dd(0.0))
}

fn one() -> Dd {
    Dd::new(dd(1.0), dd(0.0))
}

fn det(mut m: Vec<Vec<Dd>>) -> Dd {
    let n = m.len();
    let mut d = one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| {
                m[a][col]
                    .norm_sqr()
                    .hi()
                    .total_cmp(&m[b][col].norm_sqr().hi())
            })
            .unwrap();
        if m[piv][col].norm_sqr().hi() == 0.0 {
            return zero();
        }
        if piv != col {
            m.swap(piv, col);
            d = -d;
        }
        let p = m[col][col];
        d = d * p;
        for r in col + 1..n {
            let f = cdiv(m[r][col], p);
            for c in col..n {
                let v = m[col][c];
                m[r][c] = m[r][c] - f * v;
            }
        }
    }
    d
}

fn eval_dd(p: &[Dd], z: Dd) -> (Dd, Dd) {
    let mut v = zero();
    let mut d = zero();
    for &c in p.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

/// K-th roots of unity in double-double, K a power of two ≥ 4.
fn roots_of_unity(k: usize) -> Vec<Dd> {
    let (mut c, mut s) = (dd(0.0), dd(1.0));
    let mut order = 4;
    while order < k {
        let half_c = ((dd(1.0) + c) * dd(0.5)).sqrt();
        s = ddiv(s, dd(2.0) * half_c);
        c = half_c;
        order *= 2;
    }
    let w = Dd::new(c, s);
    let mut out = Vec::with_capacity(k);
    let mut p = one();
    for _ in 0..k {
        out.push(p);
        p = p * w;
    }
    out
}

/// û(k) = Q_k + Σ_i c_i w_i^k with |w_i| < 1.
#[derive(Clone, Debug)]
pub struct PoleExpansion {
    /// Polynomial part Q.
    pub polynomial: Vec<C64>,
    pub residues: Vec<C64>,
    /// Poles z_i of u, outside the closed disc.
    pub poles: Vec<C64>,
    poles_dd: Vec<Dd>,
}

impl PoleExpansion {
    pub fn rates(&self) -> Vec<C64> {
        self.poles.iter().map(|z| z.inv()).collect()
    }

    /// min_i (|z_i| − 1).
    pub fn boundary_gap(&self) -> f64 {
        self.poles_dd
            .iter()
            .map(|z| {
                let m2 = z.norm_sqr() - dd(1.0);
                (m2.hi() + m2.lo()) / (1.0 + z.norm_sqr().hi().sqrt())
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn geometric(&self, k: usize) -> C64 {
        self.rates()
            .iter()
            .zip(&self.residues)
            .map(|(w, c)| c * w.powi(k as i32))
            .sum()
    }

    pub fn mode(&self, k: usize) -> C64 {
        self.polynomial.get(k).copied().unwrap_or_default() + self.geometric(k)
    }

    pub fn symbol(&self, n: usize) -> HardySymbol {
        HardySymbol::new((0..n).map(|k| self.mode(k)).collect())
    }

    /// ‖u‖_{H^s}, summed over all modes in closed form.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let nu = 2.0 * s;
        let mut total = C64::new(0.0, 0.0);
        for (i, zi) in self.poles_dd.iter().enumerate() {
            for (l, zl) in self.poles_dd.iter().enumerate() {
                let p = *zi * zl.conj();
                let m2 = p.norm_sqr() - dd(1.0);
                let log_mod = 0.5 * (m2.hi() + m2.lo()).ln_1p();
                let arg = (p.im.hi() + p.im.lo()).atan2(p.re.hi() + p.re.lo());
                let mu = -C64::new(log_mod, arg);
                total +=
                    self.residues[i] * self.residues[l].conj() * weighted_geometric_sum(nu, mu);
            }
        }
        let mut sum = total.re;
        for (k, q) in self.polynomial.iter().enumerate() {
            let g = self.geometric(k);
            sum += (1.0 + k as f64).powf(nu) * ((q + g).norm_sqr() - g.norm_sqr());
        }
        sum.max(0.0).sqrt()
    }
}

pub fn pole_expansion(sd: &SpectralData) -> Result<PoleExpansion> {
    if sd.max_degree() > 0 {
        return Err(Error::Invalid(
            "pole realization needs degree-zero Blaschke products".into(),
        ));
    }
    let q = sd.q();
    let rho: Vec<TwoFloat> = sd.rho().into_iter().map(dd).collect();
    let sigma: Vec<TwoFloat> = sd.sigma_padded().into_iter().map(dd).collect();
    let phase = |r: usize| sd.psi().get(r).map_or(one(), |p| cdd(p.phase()));
    let odd: Vec<Dd> = (0..q).map(|j| phase(2 * j)).collect();
    let even: Vec<Dd> = (0..q).map(|k| phase(2 * k + 1)).collect();
    let mut a = vec![vec![zero(); q]; q];
    let mut b = vec![vec![zero(); q]; q];
    for j in 0..q {
        for k in 0..q {
            let gap = (rho[j] - sigma[k]) * (rho[j] + sigma[k]);
            a[j][k] = Dd::new(ddiv(rho[j], gap), dd(0.0));
            b[j][k] = even[k] * odd[j] * Dd::new(ddiv(sigma[k], gap), dd(0.0));
        }
    }
    let det_a = det(a.clone());
    let kpts = (q + 1).next_power_of_two().max(4);
    let omega = roots_of_unity(kpts);
    let mut den_vals = Vec::with_capacity(kpts);
    let mut num_vals = Vec::with_capacity(kpts);
    for &z in &omega {
        let m: Vec<Vec<Dd>> = (0..q)
            .map(|j| (0..q).map(|k| a[j][k] - z * b[j][k]).collect())
            .collect();
        den_vals.push(det(m.clone()));
        let mut bordered: Vec<Vec<Dd>> = m
            .into_iter()
            .zip(&odd)
            .map(|(mut row, &x)| {
                row.push(x);
                row
            })
            .collect();
        let mut last = vec![one(); q];
        last.push(zero());
        bordered.push(last);
        num_vals.push(-det(bordered));
    }
    let interp = |vals: &[Dd]| -> Vec<Dd> {
        (0..kpts)
            .map(|j| {
                let mut acc = zero();
                for (m, v) in vals.iter().enumerate() {
                    acc = acc + *v * omega[(j * m) % kpts].conj();
                }
                cdiv(acc, det_a * Dd::new(dd(kpts as f64), dd(0.0)))
            })
            .collect()
    };
    let den_full = interp(&den_vals);
    let num_full = interp(&num_vals);
    let r = sd.sigma().len();
    let den: Vec<Dd> = den_full[..=r].to_vec();
    let spill = den_full[r + 1..]
        .iter()
        .map(|c| c.norm_sqr().hi().sqrt())
        .fold(0.0, f64::max);
    if spill > 1e-20 || (to_c64(den[0]) - 1.0).norm() > 1e-20 {
        return Err(Error::IllConditioned(format!(
            "denominator interpolation inconsistent (spill {spill:.3e})"
        )));
    }
    let num: Vec<Dd> = num_full[..=q].to_vec();
    // roots in f64, then Newton in double-double
    let den64: Vec<C64> = den.iter().map(|c| to_c64(*c)).collect();
    let mut poles: Vec<Dd> = poly::roots(&den64)?.into_iter().map(cdd).collect();
    for z in poles.iter_mut() {
        for _ in 0..4 {
            let (v, d) = eval_dd(&den, *z);
            if d.norm_sqr().hi() == 0.0 {
                break;
            }
            *z = *z - cdiv(v, d);
        }
    }
    if let Some(z) = poles
        .iter()
        .find(|z| !(z.norm_sqr() - dd(1.0)).hi().is_sign_positive())
    {
        return Err(Error::Singular {
            index: 0,
            det: to_c64(*z).norm() - 1.0,
        });
    }
    // N = Q·den + R
    let mut rem = num.clone();
    let mut quot = vec![zero(); num.len().saturating_sub(r).max(1)];
    let lead = den[r];
    for k in (r..rem.len()).rev() {
        let f = cdiv(rem[k], lead);
        quot[k - r] = f;
        for (i, &c) in den.iter().enumerate() {
            rem[k - r + i] = rem[k - r + i] - f * c;
        }
    }
    rem.truncate(r.max(1));
    let residues = poles
        .iter()
        .map(|&z| {
            let (v, _) = eval_dd(&rem, z);
            let (_, d) = eval_dd(&den, z);
            to_c64(-cdiv(cdiv(v, d), z))
        })
        .collect();
    Ok(PoleExpansion {
        polynomial: quot.iter().map(|c| to_c64(*c)).collect(),
        residues,
        poles: poles.iter().map(|z| to_c64(*z)).collect(),
        poles_dd: poles,
    })
}
