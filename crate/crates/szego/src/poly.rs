//! Dense complex polynomials, coefficients in ascending order.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Drop trailing exact zeros.
pub fn trim(p: &[C64]) -> Vec<C64> {
    let mut v = p.to_vec();
    while v.len() > 1 && v.last().is_some_and(|c| c.norm_sqr() == 0.0) {
        v.pop();
    }
    v
}

pub fn eval(p: &[C64], z: C64) -> C64 {
    p.iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Value and first derivative by Horner's scheme.
pub fn eval_with_derivative(p: &[C64], z: C64) -> (C64, C64) {
    let mut v = C64::new(0.0, 0.0);
    let mut d = C64::new(0.0, 0.0);
    for &c in p.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Monic polynomial with the given roots.
pub fn from_roots(roots: &[C64]) -> Vec<C64> {
    roots.iter().fold(vec![C64::new(1.0, 0.0)], |acc, &r| {
        mul(&acc, &[-r, C64::new(1.0, 0.0)])
    })
}

/// All roots, by Aberth–Ehrlich iteration followed by Newton polishing.
pub fn roots(p: &[C64]) -> Result<Vec<C64>> {
    let p = trim(p);
    let d = p.len().saturating_sub(1);
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = p[d];
    let monic: Vec<C64> = p.iter().map(|c| c / lead).collect();
    if d == 1 {
        return Ok(vec![-monic[0]]);
    }
    // Fujiwara bound for the initial circle
    let radius = (0..d)
        .map(|k| {
            let c = monic[k].norm();
            if k == 0 {
                (c / 2.0).powf(1.0 / d as f64)
            } else {
                c.powf(1.0 / (d - k) as f64)
            }
        })
        .fold(0.0, f64::max)
        * 2.0;
    let radius = if radius > 0.0 { radius } else { 1.0 };
    let mut z: Vec<C64> = (0..d)
        .map(|k| {
            C64::from_polar(
                radius,
                2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4,
            )
        })
        .collect();
    let mut converged = false;
    for _ in 0..1000 {
        let mut max_step: f64 = 0.0;
        for k in 0..d {
            let (v, dv) = eval_with_derivative(&monic, z[k]);
            if v.norm_sqr() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let repulsion: C64 = (0..d)
                .filter(|&j| j != k)
                .map(|j| {
                    let diff = z[k] - z[j];
                    if diff.norm_sqr() == 0.0 {
                        C64::new(0.0, 0.0)
                    } else {
                        diff.inv()
                    }
                })
                .sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged && z.iter().any(|r| !r.is_finite()) {
        return Err(Error::IllConditioned(
            "polynomial root iteration diverged".into(),
        ));
    }
    for r in z.iter_mut() {
        for _ in 0..3 {
            let (v, dv) = eval_with_derivative(&monic, *r);
            if dv.norm_sqr() == 0.0 {
                break;
            }
            let step = v / dv;
            if !step.is_finite() || step.norm() > 1e-6 * r.norm().max(1.0) {
                break;
            }
            *r -= step;
        }
    }
    Ok(z)
}
