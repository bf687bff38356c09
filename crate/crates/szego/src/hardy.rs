//! Symbols in the Hardy space: truncated nonnegative Fourier series.
//!
//! A [`HardySymbol`] stores û(0..N−1). Every mode at or beyond N is zero by
//! construction, so the symbol is a polynomial of degree < N and all norms are
//! exact sums. Grid evaluation uses M equispaced points e^{2πim/M} with M a
//! power of two.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;

pub type C64 = Complex64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [C64], direction: FftDirection) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft(buf.len(), direction));
    plan.process(buf);
}

/// Truncated symbol u = Σ_{k<N} û(k) z^k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymbolRepr", into = "SymbolRepr")]
pub struct HardySymbol {
    coeffs: Vec<C64>,
}

/// {"coeffs": [[re, im], ...]}
#[derive(Serialize, Deserialize)]
struct SymbolRepr {
    coeffs: Vec<[f64; 2]>,
}

impl TryFrom<SymbolRepr> for HardySymbol {
    type Error = Error;

    fn try_from(r: SymbolRepr) -> Result<Self> {
        if r.coeffs.is_empty() {
            return Err(Error::Invalid(
                "a symbol needs at least one coefficient".into(),
            ));
        }
        if r.coeffs.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("symbol coefficients must be finite".into()));
        }
        Ok(HardySymbol::new(
            r.coeffs.iter().map(|c| C64::new(c[0], c[1])).collect(),
        ))
    }
}

impl From<HardySymbol> for SymbolRepr {
    fn from(u: HardySymbol) -> Self {
        SymbolRepr {
            coeffs: u.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl HardySymbol {
    pub fn new(coeffs: Vec<C64>) -> Self {
        HardySymbol { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        HardySymbol::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        HardySymbol::new(vec![C64::new(0.0, 0.0); n])
    }

    pub fn constant(c: C64, n: usize) -> Self {
        let mut u = HardySymbol::zeros(n.max(1));
        u.coeffs[0] = c;
        u
    }

    /// The monomial z^k on `n` modes.
    pub fn monomial(k: usize, n: usize) -> Self {
        let mut u = HardySymbol::zeros(n.max(k + 1));
        u.coeffs[k] = C64::new(1.0, 0.0);
        u
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len()
    }

    /// Zero-pad or truncate to `n` modes.
    pub fn resized(&self, n: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(n, C64::new(0.0, 0.0));
        HardySymbol::new(c)
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// L² inner product (u|v) = Σ û(k) conj(v̂(k)).
    pub fn inner(&self, other: &HardySymbol) -> C64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    pub fn scale(&self, a: C64) -> Self {
        HardySymbol::new(self.coeffs.iter().map(|c| c * a).collect())
    }

    /// Mode-wise sum; the result has the larger of the two lengths.
    pub fn add(&self, other: &HardySymbol) -> Self {
        let n = self.n_modes().max(other.n_modes());
        let (a, b) = (self.resized(n), other.resized(n));
        HardySymbol::new(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect())
    }

    pub fn sub(&self, other: &HardySymbol) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Multiplication by z, dropping the mode that leaves the truncation.
    pub fn shift(&self) -> Self {
        let n = self.n_modes();
        let mut c = vec![C64::new(0.0, 0.0); n];
        c[1..n].copy_from_slice(&self.coeffs[..n.saturating_sub(1)]);
        HardySymbol::new(c)
    }

    /// The adjoint shift S*: û(k) ↦ û(k+1).
    pub fn shift_adjoint(&self) -> Self {
        let n = self.n_modes();
        let mut c = vec![C64::new(0.0, 0.0); n];
        if n > 1 {
            c[..n - 1].copy_from_slice(&self.coeffs[1..]);
        }
        HardySymbol::new(c)
    }

    /// Fraction of the total energy carried by the last quarter of the modes.
    pub fn tail_fraction(&self) -> f64 {
        let n = self.n_modes();
        let total = self.norm_sq();
        if total == 0.0 {
            return 0.0;
        }
        let start = n - n / 4;
        self.coeffs[start..]
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            / total
    }

    /// Evaluate the polynomial at an arbitrary point.
    pub fn eval(&self, z: C64) -> C64 {
        poly::eval(&self.coeffs, z)
    }
}

/// Samples at the M points e^{2πim/M}.
#[derive(Clone, Debug, PartialEq)]
pub struct GridValues {
    values: Vec<C64>,
}

impl GridValues {
    pub fn new(values: Vec<C64>) -> Self {
        GridValues { values }
    }

    /// Samples of a function given pointwise.
    pub fn from_fn(m: usize, f: impl Fn(C64) -> C64) -> Self {
        GridValues::new((0..m).map(|j| f(grid_point(j, m))).collect())
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn m_grid(&self) -> usize {
        self.values.len()
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        GridValues::new(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two grids of the same size.
    pub fn zip_with(&self, other: &GridValues, f: impl Fn(C64, C64) -> C64) -> Self {
        GridValues::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// All M Fourier modes, index j holding mode j for j < M/2 and mode
    /// j − M above.
    pub fn modes(&self) -> Vec<C64> {
        let m = self.values.len();
        let mut buf = self.values.clone();
        fft_in_place(&mut buf, FftDirection::Forward);
        let inv = 1.0 / m as f64;
        buf.iter_mut().for_each(|c| *c *= inv);
        buf
    }

    /// Π followed by truncation to `n` modes, with the discarded
    /// nonnegative-mode energy beyond `n`.
    pub fn project(&self, n: usize) -> (HardySymbol, f64) {
        let modes = self.modes();
        let half = modes.len() / 2;
        let n_keep = n.min(half);
        let mut c = modes[..n_keep].to_vec();
        c.resize(n, C64::new(0.0, 0.0));
        let tail = modes[n_keep..half].iter().map(|c| c.norm_sqr()).sum();
        (HardySymbol::new(c), tail)
    }

    /// Mean of |v|² over the grid.
    pub fn mean_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// The m-th of `count` equispaced points on the unit circle.
pub fn grid_point(m: usize, count: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / count as f64)
}

/// Check that `m` is a power of two no smaller than `factor * n`.
pub fn check_grid(m: usize, n: usize, factor: usize) -> Result<()> {
    let required = factor * n;
    if !m.is_power_of_two() || m < required {
        return Err(Error::Alias {
            grid: m,
            modes: n,
            required: required.next_power_of_two(),
        });
    }
    Ok(())
}

/// Smallest admissible grid for `n` modes with the given padding factor.
pub fn min_grid(n: usize, factor: usize) -> usize {
    (factor * n).max(1).next_power_of_two()
}

/// Keep the nonnegative modes of a two-sided coefficient list. `coeffs[i]` is
/// mode `i − offset`.
pub fn szego_project(coeffs: &[C64], offset: usize) -> HardySymbol {
    if offset >= coeffs.len() {
        return HardySymbol::zeros(1);
    }
    HardySymbol::new(coeffs[offset..].to_vec())
}

/// ‖u‖_{H^s} with the convention Σ (1+ℓ)^{2s} |û(ℓ)|².
pub fn sobolev_norm(u: &HardySymbol, s: f64) -> f64 {
    u.coeffs()
        .iter()
        .enumerate()
        .map(|(l, c)| (1.0 + l as f64).powf(2.0 * s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Values of u at the M-th roots of unity.
pub fn eval_grid(u: &HardySymbol, m: usize) -> Result<GridValues> {
    check_grid(m, u.n_modes(), 2)?;
    let mut buf = vec![C64::new(0.0, 0.0); m];
    buf[..u.n_modes()].copy_from_slice(u.coeffs());
    fft_in_place(&mut buf, FftDirection::Inverse);
    Ok(GridValues::new(buf))
}

/// Taylor expansion of a rational function.
#[derive(Clone, Debug)]
pub struct RationalExpansion {
    pub symbol: HardySymbol,
    /// Estimated Σ_{k≥N} |û(k)|², from the geometric decay set by the
    /// smallest root of the denominator.
    pub tail_estimate: f64,
    pub min_root_modulus: f64,
}

/// First `n` Taylor coefficients of A/B at the origin.
pub fn from_rational(numer: &[C64], denom: &[C64], n: usize) -> Result<RationalExpansion> {
    let denom = poly::trim(denom);
    if denom.is_empty() || (denom[0] - C64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::Invalid("denominator must satisfy B(0) = 1".into()));
    }
    let roots = poly::roots(&denom)?;
    let min_root = roots.iter().map(|r| r.norm()).fold(f64::INFINITY, f64::min);
    if min_root <= 1.0 {
        return Err(Error::UnstableDenominator(min_root));
    }
    let mut c = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        let mut acc = numer.get(k).copied().unwrap_or_default();
        for j in 1..denom.len().min(k + 1) {
            acc -= denom[j] * c[k - j];
        }
        c[k] = acc;
    }
    let tail_estimate = if roots.is_empty() {
        // polynomial quotient: exact once n exceeds the numerator degree
        numer.iter().skip(n).map(|c| c.norm_sqr()).sum()
    } else {
        let r = 1.0 / min_root;
        let lookback = denom.len().min(n);
        let last = (n - lookback..n)
            .map(|k| c[k].norm() * r.powi((n - 1 - k) as i32 + 1))
            .fold(0.0, f64::max);
        let mult = roots.len() as f64;
        mult * mult * last * last / (1.0 - r * r)
    };
    Ok(RationalExpansion {
        symbol: HardySymbol::new(c),
        tail_estimate,
        min_root_modulus: min_root,
    })
}

/// E(u) = ¼ mean |u|⁴ over the circle.
pub fn energy(u: &HardySymbol, m: usize) -> Result<f64> {
    check_grid(m, u.n_modes(), 4)?;
    let g = eval_grid(u, m)?;
    let s: f64 = g.values().iter().map(|v| v.norm_sqr().powi(2)).sum();
    Ok(0.25 * s / m as f64)
}

/// Two-sided coefficients of |u|², index j holding mode j − (N−1).
pub fn abs_sq_modes(u: &HardySymbol) -> Vec<C64> {
    let n = u.n_modes();
    let m = min_grid(n, 2);
    let g = eval_grid(u, m).expect("grid sized by min_grid");
    let modes = g.map(|v| C64::new(v.norm_sqr(), 0.0)).modes();
    (0..2 * n - 1)
        .map(|j| {
            let k = j as isize - (n as isize - 1);
            modes[k.rem_euclid(m as isize) as usize]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn json_shape() {
        let u = HardySymbol::new(vec![c(0.75, 0.0), c(0.0, -0.5)]);
        let text = serde_json::to_string(&u).unwrap();
        assert_eq!(text, r#"{"coeffs":[[0.75,0.0],[0.0,-0.5]]}"#);
        assert_eq!(serde_json::from_str::<HardySymbol>(&text).unwrap(), u);
        assert!(serde_json::from_str::<HardySymbol>(r#"{"coeffs":[]}"#).is_err());
    }

    #[test]
    fn projection_keeps_nonnegative_modes() {
        let u = szego_project(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)], 1);
        assert_eq!(u.coeffs(), &[c(2.0, 0.0), c(3.0, 0.0)]);
        let cos = szego_project(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1);
        assert_eq!(cos.coeffs(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(szego_project(&[c(0.0, 0.0); 5], 2).is_zero());
    }

    #[test]
    fn sobolev_examples() {
        assert_abs_diff_eq!(
            sobolev_norm(&HardySymbol::constant(c(1.0, 0.0), 4), 3.7),
            1.0
        );
        assert_abs_diff_eq!(
            sobolev_norm(&HardySymbol::monomial(1, 2), 0.5),
            2f64.sqrt(),
            epsilon = 1e-15
        );
        let geo =
            HardySymbol::from_real(&(0..60).map(|k| 0.75 * 0.5f64.powi(k)).collect::<Vec<_>>());
        assert_abs_diff_eq!(sobolev_norm(&geo, 0.0), 0.75f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn grid_examples() {
        let one = eval_grid(&HardySymbol::constant(c(1.0, 0.0), 1), 8).unwrap();
        assert!(one
            .values()
            .iter()
            .all(|v| (v - c(1.0, 0.0)).norm() < 1e-15));
        let z = eval_grid(&HardySymbol::monomial(1, 2), 4).unwrap();
        let want = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (a, b) in z.values().iter().zip(want) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
        let u = eval_grid(&HardySymbol::from_real(&[1.0, 1.0]), 4).unwrap();
        let want = [c(2.0, 0.0), c(1.0, 1.0), c(0.0, 0.0), c(1.0, -1.0)];
        for (a, b) in u.values().iter().zip(want) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
        assert!(matches!(
            eval_grid(&HardySymbol::zeros(4), 4),
            Err(Error::Alias { .. })
        ));
        assert!(eval_grid(&HardySymbol::zeros(4), 12).is_err());
    }

    #[test]
    fn grid_roundtrip() {
        let u = HardySymbol::new((0..7).map(|k| c(k as f64, -0.5 * k as f64)).collect());
        let (back, tail) = eval_grid(&u, 16).unwrap().project(7);
        assert!(tail < 1e-28);
        for (a, b) in back.coeffs().iter().zip(u.coeffs()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn rational_examples() {
        let e = from_rational(&[c(0.75, 0.0)], &[c(1.0, 0.0), c(-0.5, 0.0)], 8).unwrap();
        for (k, v) in e.symbol.coeffs().iter().enumerate() {
            assert_abs_diff_eq!(v.re, 0.75 * 0.5f64.powi(k as i32), epsilon = 1e-16);
        }
        assert_abs_diff_eq!(e.min_root_modulus, 2.0, epsilon = 1e-12);
        let z = from_rational(&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)], 4).unwrap();
        assert_eq!(
            z.symbol.coeffs(),
            &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
        );
        assert_eq!(z.tail_estimate, 0.0);
        // root at 0.9
        let bad = from_rational(&[c(1.0, 0.0)], &[c(1.0, 0.0), c(-1.0 / 0.9, 0.0)], 4);
        assert!(matches!(bad, Err(Error::UnstableDenominator(_))));
        let bad0 = from_rational(&[c(1.0, 0.0)], &[c(2.0, 0.0)], 4);
        assert!(matches!(bad0, Err(Error::Invalid(_))));
    }

    #[test]
    fn rational_tail_estimate_bounds_true_tail() {
        let e = from_rational(&[c(1.0, 0.0)], &[c(1.0, 0.0), c(-0.8, 0.0)], 20).unwrap();
        let true_tail: f64 = (20..2000).map(|k| 0.64f64.powi(k)).sum();
        assert!(e.tail_estimate >= 0.5 * true_tail && e.tail_estimate <= 10.0 * true_tail);
    }

    #[test]
    fn energy_examples() {
        let cst = HardySymbol::constant(c(0.6, -0.8), 2);
        assert_abs_diff_eq!(energy(&cst, 8).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(energy(&HardySymbol::zeros(2), 8).unwrap(), 0.0);
        assert_abs_diff_eq!(
            energy(&HardySymbol::from_real(&[1.0, 1.0]), 8).unwrap(),
            1.5,
            epsilon = 1e-14
        );
        assert!(energy(&HardySymbol::zeros(4), 8).is_err());
    }

    #[test]
    fn abs_sq_of_one_plus_z() {
        let b = abs_sq_modes(&HardySymbol::from_real(&[1.0, 1.0]));
        let want = [1.0, 2.0, 1.0];
        for (a, w) in b.iter().zip(want) {
            assert_abs_diff_eq!(a.re, w, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn shifts() {
        let u = HardySymbol::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(u.shift(), HardySymbol::from_real(&[0.0, 1.0, 2.0]));
        assert_eq!(u.shift_adjoint(), HardySymbol::from_real(&[2.0, 3.0, 0.0]));
    }
    fn symbol_strategy(max_len: usize) -> impl proptest::strategy::Strategy<Value = HardySymbol> {
        use proptest::prelude::*;
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=max_len)
            .prop_map(|v| HardySymbol::new(v.into_iter().map(|(a, b)| C64::new(a, b)).collect()))
    }

    proptest::proptest! {
        #[test]
        fn parseval(u in symbol_strategy(40)) {
            let m = min_grid(u.n_modes(), 2);
            let g = eval_grid(&u, m).unwrap();
            let lhs = g.mean_sq();
            proptest::prop_assert!((lhs - u.norm_sq()).abs() <= 1e-12 * u.norm_sq().max(1e-300));
        }

        #[test]
        fn projection_idempotent_and_contractive(
            v in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..30),
            offset in 0usize..30,
        ) {
            let two: Vec<C64> = v.into_iter().map(|(a, b)| C64::new(a, b)).collect();
            let p = szego_project(&two, offset);
            let pp = szego_project(p.coeffs(), 0);
            proptest::prop_assert_eq!(&p, &pp);
            let total: f64 = two.iter().map(|c| c.norm_sqr()).sum();
            proptest::prop_assert!(p.norm_sq() <= total + 1e-15);
        }

        #[test]
        fn energy_matches_projection_form(u in symbol_strategy(24)) {
            let m = min_grid(u.n_modes(), 4);
            let e = energy(&u, m).unwrap();
            let b = abs_sq_modes(&u);
            let n = u.n_modes();
            let pb: f64 = b[n - 1..].iter().map(|c| c.norm_sqr()).sum();
            let alt = 0.25 * (2.0 * pb - u.norm_sq().powi(2));
            proptest::prop_assert!((e - alt).abs() <= 1e-10 * e.max(1e-300));
        }

        #[test]
        fn rational_expansion_times_denominator(
            num in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..4),
            roots in proptest::collection::vec((1.2..4.0f64, 0.0..std::f64::consts::TAU), 1..4),
        ) {
            let a: Vec<C64> = num.into_iter().map(|(x, y)| C64::new(x, y)).collect();
            let rs: Vec<C64> = roots.iter().map(|&(r, t)| C64::from_polar(r, t)).collect();
            let mut b = poly::from_roots(&rs);
            let b0 = b[0];
            b.iter_mut().for_each(|c| *c /= b0);
            let n = 40;
            let e = from_rational(&a, &b, n).unwrap();
            let prod = poly::mul(e.symbol.coeffs(), &b);
            for k in 0..n {
                let want = a.get(k).copied().unwrap_or_default();
                proptest::prop_assert!((prod[k] - want).norm() < 1e-12);
            }
        }
    }
}
