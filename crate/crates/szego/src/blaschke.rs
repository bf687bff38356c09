//! Finite Blaschke products Ψ(z) = e^{−iψ} ∏ (z − p_j)/(1 − p̄_j z).

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hardy::{grid_point, GridValues};
use crate::poly;

/// Zeros closer than this to the unit circle are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct BlaschkeProduct {
    angle: f64,
    zeros: Vec<C64>,
}

impl BlaschkeProduct {
    pub fn new(angle: f64, zeros: Vec<C64>) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::Invalid("Blaschke angle must be finite".into()));
        }
        if let Some(p) = zeros.iter().find(|p| !(p.norm() <= 1.0 - BOUNDARY_MARGIN)) {
            return Err(Error::Invalid(format!(
                "Blaschke zero {p} is not inside the open unit disc"
            )));
        }
        Ok(BlaschkeProduct {
            angle: normalize_angle(angle),
            zeros,
        })
    }

    /// Degree-zero product e^{−iψ}.
    pub fn constant(angle: f64) -> Self {
        BlaschkeProduct {
            angle: normalize_angle(angle),
            zeros: Vec::new(),
        }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn zeros(&self) -> &[C64] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    /// The unimodular constant e^{−iψ}.
    pub fn phase(&self) -> C64 {
        C64::from_polar(1.0, -self.angle)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.zeros
            .iter()
            .fold(self.phase(), |acc, &p| acc * (z - p) / (1.0 - p.conj() * z))
    }

    /// The monic Schur polynomial P(z) = ∏ (z − p_j), ascending coefficients.
    pub fn monic_numerator(&self) -> Vec<C64> {
        poly::from_roots(&self.zeros)
    }

    /// D(z) = z^d P̄(1/z) = ∏ (1 − p̄_j z), so that D(0) = 1.
    pub fn normalized_denominator(&self) -> Vec<C64> {
        reversed_conjugate(&self.monic_numerator())
    }

    /// Ψ multiplied by e^{iθ}; zeros unchanged.
    pub fn rotated(&self, theta: f64) -> Self {
        BlaschkeProduct {
            angle: normalize_angle(self.angle - theta),
            zeros: self.zeros.clone(),
        }
    }

    pub fn with_angle(&self, angle: f64) -> Self {
        BlaschkeProduct {
            angle: normalize_angle(angle),
            zeros: self.zeros.clone(),
        }
    }

    pub fn eval_grid(&self, m: usize) -> GridValues {
        GridValues::from_fn(m, |z| self.eval(z))
    }

    /// max |Ψ − Φ| over `m` boundary points.
    pub fn boundary_distance(&self, other: &BlaschkeProduct, m: usize) -> f64 {
        (0..m)
            .map(|j| {
                let z = grid_point(j, m);
                (self.eval(z) - other.eval(z)).norm()
            })
            .fold(0.0, f64::max)
    }
}

pub fn normalize_angle(a: f64) -> f64 {
    // adding zero turns −0 into +0
    let r = a.rem_euclid(TAU) + 0.0;
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Coefficients of z^d conj(p)(1/z) for a degree-d coefficient list.
pub fn reversed_conjugate(p: &[C64]) -> Vec<C64> {
    p.iter().rev().map(|c| c.conj()).collect()
}

/// Schur–Cohn test for z^d + a_1 z^{d−1} + … + a_d, given (a_1, …, a_d).
///
/// True iff every root lies in the open unit disc.
pub fn schur_cohn(a: &[C64]) -> bool {
    let mut a = a.to_vec();
    while let Some(&ad) = a.last() {
        let d = a.len();
        let m = ad.norm_sqr();
        if !(m < 1.0) {
            return false;
        }
        let scale = 1.0 / (1.0 - m);
        a = (1..d)
            .map(|k| (a[k - 1] - ad * a[d - k - 1].conj()) * scale)
            .collect();
    }
    true
}

/// Linearized fit of a unimodular quotient c·P(z)/(z^d P̄(1/z)).
#[derive(Clone, Debug)]
pub struct QuotientFit {
    /// P, ascending coefficients, unit Euclidean norm.
    pub numer: Vec<C64>,
    /// Unimodular constant c.
    pub constant: C64,
    /// Relative distance of the fitted denominator from the reversed conjugate of P.
    pub structure_defect: f64,
    /// max over samples of |fit − ratio|.
    pub residual: f64,
}

impl QuotientFit {
    pub fn eval(&self, z: C64) -> C64 {
        let den = poly::eval(&reversed_conjugate(&self.numer), z);
        self.constant * poly::eval(&self.numer, z) / den
    }
}

/// Null vector of [V | −diag(r) V] for the sampled ratio, with the structure
/// of the denominator read off afterwards.
pub fn fit_quotient(points: &[C64], ratio: &[C64], d: usize) -> Result<QuotientFit> {
    if points.len() != ratio.len() {
        return Err(Error::Invalid("points and ratio differ in length".into()));
    }
    let cols = 2 * d + 2;
    if points.len() < cols {
        return Err(Error::Invalid(format!(
            "{} samples cannot determine a degree-{d} quotient",
            points.len()
        )));
    }
    let a = DMatrix::from_fn(points.len(), cols, |i, j| {
        let z = points[i];
        if j <= d {
            z.powu(j as u32)
        } else {
            -ratio[i] * z.powu((j - d - 1) as u32)
        }
    });
    let svd = a.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::IllConditioned("SVD did not converge".into()))?;
    let imin = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    // rows of v_t are conjugated right singular vectors
    let v: Vec<C64> = (0..cols).map(|j| v_t[(imin, j)].conj()).collect();
    let mut p = v[..=d].to_vec();
    let q = &v[d + 1..];
    let pnorm = p.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let qnorm = q.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if pnorm == 0.0 || qnorm == 0.0 {
        return Err(Error::Structure("null vector has a vanishing half".into()));
    }
    p.iter_mut().for_each(|c| *c /= pnorm);
    let rc = reversed_conjugate(&p);
    // least-squares lambda with q ≈ lambda·rc
    let lambda: C64 = rc.iter().zip(q).map(|(r, x)| r.conj() * x).sum();
    let defect = rc
        .iter()
        .zip(q)
        .map(|(r, x)| (x - lambda * r).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / qnorm;
    if lambda.norm() == 0.0 {
        return Err(Error::Structure(
            "denominator orthogonal to reversed numerator".into(),
        ));
    }
    let constant = lambda.inv() / lambda.inv().norm();
    let mut fit = QuotientFit {
        numer: p,
        constant,
        structure_defect: defect,
        residual: 0.0,
    };
    fit.residual = points
        .iter()
        .zip(ratio)
        .map(|(&z, &r)| (fit.eval(z) - r).norm())
        .fold(0.0, f64::max);
    if !fit.residual.is_finite() {
        fit.residual = f64::INFINITY;
    }
    Ok(fit)
}

/// Fit a degree-d Blaschke product to boundary samples on the full grid.
pub fn fit_from_boundary(ratio: &GridValues, d: usize, tol: f64) -> Result<BlaschkeProduct> {
    let m = ratio.m_grid();
    let points: Vec<C64> = (0..m).map(|j| grid_point(j, m)).collect();
    fit_from_samples(&points, ratio.values(), d, tol)
}

/// Fit a degree-d Blaschke product to samples at arbitrary boundary points.
pub fn fit_from_samples(
    points: &[C64],
    ratio: &[C64],
    d: usize,
    tol: f64,
) -> Result<BlaschkeProduct> {
    let off_circle = ratio
        .iter()
        .map(|r| (r.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    if off_circle > 10.0 * tol {
        return Err(Error::Invalid(format!(
            "ratio is not unimodular (max ||r| - 1| = {off_circle:.3e})"
        )));
    }
    if d == 0 {
        let mean: C64 = ratio.iter().sum::<C64>() / ratio.len().max(1) as f64;
        if mean.norm() == 0.0 {
            return Err(Error::Structure("ratio averages to zero".into()));
        }
        let psi = BlaschkeProduct::constant(-mean.arg());
        let residual = ratio
            .iter()
            .map(|r| (r - psi.phase()).norm())
            .fold(0.0, f64::max);
        if residual > tol {
            return Err(Error::DegreeMismatch {
                residual,
                tol,
                degree: 0,
            });
        }
        return Ok(psi);
    }
    let fit = fit_quotient(points, ratio, d)?;
    if fit.structure_defect > tol.max(1e-8) {
        return Err(Error::Structure(format!(
            "denominator is not the reversed conjugate of the numerator (defect {:.3e})",
            fit.structure_defect
        )));
    }
    let lead = fit.numer[d];
    if lead.norm() < 1e-10 {
        return Err(Error::Structure(
            "numerator degree below the requested degree".into(),
        ));
    }
    let monic: Vec<C64> = fit.numer.iter().map(|c| c / lead).collect();
    let zeros = poly::roots(&monic)?;
    if let Some(p) = zeros.iter().find(|p| p.norm() > 1.0 - BOUNDARY_MARGIN) {
        return Err(Error::Structure(format!(
            "fitted zero {p} lies outside the open unit disc"
        )));
    }
    let unit = fit.constant * lead / lead.conj();
    let psi = BlaschkeProduct::new(-unit.arg(), zeros)?;
    let residual = points
        .iter()
        .zip(ratio)
        .map(|(&z, &r)| (psi.eval(z) - r).norm())
        .fold(0.0, f64::max);
    if residual > tol {
        return Err(Error::DegreeMismatch {
            residual,
            tol,
            degree: d,
        });
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let psi = BlaschkeProduct::constant(PI / 2.0);
        assert_abs_diff_eq!(
            (psi.eval(c(0.3, 0.1)) - c(0.0, -1.0)).norm(),
            0.0,
            epsilon = 1e-15
        );
        let z = BlaschkeProduct::new(0.0, vec![c(0.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(
            (z.eval(c(0.0, 1.0)) - c(0.0, 1.0)).norm(),
            0.0,
            epsilon = 1e-15
        );
        let h = BlaschkeProduct::new(0.0, vec![c(0.5, 0.0)]).unwrap();
        assert_abs_diff_eq!(
            (h.eval(c(0.0, 0.0)) - c(-0.5, 0.0)).norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rejects_boundary_zeros() {
        assert!(BlaschkeProduct::new(0.0, vec![c(1.0, 0.0)]).is_err());
        assert!(BlaschkeProduct::new(0.0, vec![c(0.0, 1.0 - 1e-13)]).is_err());
        assert!(BlaschkeProduct::new(f64::NAN, vec![]).is_err());
    }

    #[test]
    fn angle_is_normalized() {
        assert_abs_diff_eq!(
            BlaschkeProduct::constant(-PI / 2.0).angle(),
            1.5 * PI,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            BlaschkeProduct::constant(5.0 * PI).angle(),
            PI,
            epsilon = 1e-14
        );
    }

    #[test]
    fn schur_cohn_examples() {
        assert!(schur_cohn(&[c(-0.5, 0.0)]));
        assert!(schur_cohn(&[c(0.0, 0.0), c(0.25, 0.0)]));
        assert!(!schur_cohn(&[c(-2.0, 0.0)]));
        assert!(schur_cohn(&[]));
        assert!(!schur_cohn(&[c(0.0, 0.0), c(1.0, 0.0)]));
    }

    #[test]
    fn denominator_examples() {
        assert_eq!(
            BlaschkeProduct::constant(0.3).normalized_denominator(),
            vec![c(1.0, 0.0)]
        );
        let d1 = BlaschkeProduct::new(0.0, vec![c(0.5, 0.0)])
            .unwrap()
            .normalized_denominator();
        assert_abs_diff_eq!((d1[0] - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((d1[1] - c(-0.5, 0.0)).norm(), 0.0, epsilon = 1e-15);
        let d2 = BlaschkeProduct::new(0.0, vec![c(0.5, 0.0), c(-0.5, 0.0)])
            .unwrap()
            .normalized_denominator();
        let want = [c(1.0, 0.0), c(0.0, 0.0), c(-0.25, 0.0)];
        for (a, b) in d2.iter().zip(want) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn fit_examples() {
        let g = GridValues::new(vec![c(0.0, -1.0); 16]);
        let psi = fit_from_boundary(&g, 0, 1e-10).unwrap();
        assert_abs_diff_eq!(psi.angle(), PI / 2.0, epsilon = 1e-14);

        let z = GridValues::from_fn(16, |z| z);
        let psi = fit_from_boundary(&z, 1, 1e-10).unwrap();
        assert_abs_diff_eq!(psi.zeros()[0].norm(), 0.0, epsilon = 1e-12);
        assert!(psi.angle() < 1e-12 || psi.angle() > TAU - 1e-12);

        let target = BlaschkeProduct::new(0.0, vec![c(0.5, 0.0)]).unwrap();
        let psi = fit_from_boundary(&target.eval_grid(32), 1, 1e-10).unwrap();
        assert_abs_diff_eq!((psi.zeros()[0] - c(0.5, 0.0)).norm(), 0.0, epsilon = 1e-12);
        assert!(psi.boundary_distance(&target, 64) < 1e-12);
    }

    #[test]
    fn fit_rejects_wrong_degree() {
        let target = BlaschkeProduct::new(0.7, vec![c(0.5, 0.1), c(-0.3, 0.4)]).unwrap();
        let g = target.eval_grid(64);
        assert!(fit_from_boundary(&g, 1, 1e-8).is_err());
        assert!(fit_from_boundary(&g, 0, 1e-8).is_err());
        assert!(fit_from_boundary(&g, 3, 1e-8).is_err());
        assert!(fit_from_boundary(&g, 2, 1e-8).is_ok());
    }

    #[test]
    fn fit_rejects_non_unimodular() {
        let g = GridValues::new(vec![c(2.0, 0.0); 8]);
        assert!(matches!(
            fit_from_boundary(&g, 0, 1e-6),
            Err(Error::Invalid(_))
        ));
    }

    fn zero_strategy() -> impl Strategy<Value = C64> {
        (0.0..0.95f64, 0.0..TAU).prop_map(|(r, t)| C64::from_polar(r, t))
    }

    fn coeff_strategy() -> impl Strategy<Value = C64> {
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c(a, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn schur_cohn_agrees_with_roots(a in prop::collection::vec(coeff_strategy(), 1..=6)) {
            let mut p: Vec<C64> = a.iter().rev().copied().collect();
            p.push(c(1.0, 0.0));
            let r = poly::roots(&p).unwrap();
            let max = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assume!((max - 1.0).abs() > 1e-6);
            prop_assert_eq!(schur_cohn(&a), max < 1.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn fit_recovers_random_products(
            zeros in prop::collection::vec(zero_strategy(), 0..=4),
            angle in 0.0..TAU,
        ) {
            let target = BlaschkeProduct::new(angle, zeros.clone()).unwrap();
            let psi = fit_from_boundary(&target.eval_grid(64), zeros.len(), 1e-8).unwrap();
            let mut got = psi.zeros().to_vec();
            for w in &zeros {
                let (i, d) = got.iter().enumerate()
                    .map(|(i, g)| (i, (g - w).norm()))
                    .min_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
                prop_assert!(d < 1e-8, "zero {} off by {}", w, d);
                got.remove(i);
            }
            let da = (psi.angle() - angle).rem_euclid(TAU);
            prop_assert!(da.min(TAU - da) < 1e-8);
        }

        #[test]
        fn denominator_reproduces_product(
            zeros in prop::collection::vec(zero_strategy(), 0..=5),
            angle in 0.0..TAU,
        ) {
            let psi = BlaschkeProduct::new(angle, zeros).unwrap();
            let p = psi.monic_numerator();
            let d = psi.normalized_denominator();
            prop_assert!((d[0] - c(1.0, 0.0)).norm() < 1e-14);
            for j in 0..64 {
                let z = grid_point(j, 64);
                let v = psi.phase() * poly::eval(&p, z) / poly::eval(&d, z);
                prop_assert!((v - psi.eval(z)).norm() < 1e-12);
            }
        }
    }
}
