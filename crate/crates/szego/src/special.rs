//! Riemann zeta and the weighted geometric series F(ν, μ) = Σ_{k≥0} (1+k)^ν e^{μk}.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

/// B_{2j}/(2j)! for j = 1..10.
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
];

/// ζ(t) for real t > 1, by Euler–Maclaurin summation.
pub fn zeta(t: f64) -> f64 {
    assert!(t > 1.0, "zeta is evaluated only for t > 1");
    const N: usize = 16;
    let n = N as f64;
    let mut sum: f64 = (1..N).rev().map(|k| (k as f64).powf(-t)).sum();
    sum += n.powf(1.0 - t) / (t - 1.0) + 0.5 * n.powf(-t);
    // rising factorial t(t+1)…(t+2j−2) times N^{−t−2j+1}
    let mut rising = t;
    let mut power = n.powf(-t - 1.0);
    for (j, b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = b * rising * power;
        sum += term;
        if term.abs() < 1e-18 * sum {
            break;
        }
        let m = 2.0 * (j + 1) as f64;
        rising *= (t + m - 1.0) * (t + m);
        power /= n * n;
    }
    sum
}

/// ζ(−a) for real a ≥ 0, from the functional equation.
pub fn zeta_negative(a: f64) -> f64 {
    zeta_negative_with_bound(a).0
}

/// ζ(−a) together with the envelope 2Γ(1+a)ζ(1+a)/(2π)^{1+a}, which stays
/// meaningful at the trivial zeros.
fn zeta_negative_with_bound(a: f64) -> (f64, f64) {
    if a == 0.0 {
        return (-0.5, 0.5);
    }
    let s = 1.0 + a;
    let log_mag = libm::lgamma(s) - s * (2.0 * PI).ln();
    let bound = 2.0 * log_mag.exp() * zeta(s);
    ((PI * s / 2.0).cos() * bound, bound)
}

/// F(ν, μ) = Σ_{k≥0} (1+k)^ν e^{μk} for ν ≥ 0 and Re μ < 0.
///
/// Close to the circle the series is replaced by the expansion
/// e^{−μ}[Γ(1+ν)(−μ)^{−1−ν} + Σ_k ζ(−ν−k) μ^k/k!], valid for |μ| < 2π.
pub fn weighted_geometric_sum(nu: f64, mu: C64) -> C64 {
    assert!(mu.re < 0.0, "series diverges for Re mu >= 0");
    if mu.re <= -(2f64.ln()) || mu.norm() >= 5.0 {
        return direct_sum(nu, mu);
    }
    let mut sum = libm::tgamma(1.0 + nu) * (-mu).powf(-1.0 - nu);
    let mut pow = C64::new(1.0, 0.0);
    for k in 0..200 {
        let (z, bound) = zeta_negative_with_bound(nu + k as f64);
        sum += pow * z;
        if k > 4 && pow.norm() * bound < 1e-18 * sum.norm() {
            break;
        }
        pow *= mu / (k + 1) as f64;
    }
    (-mu).exp() * sum
}

fn direct_sum(nu: f64, mu: C64) -> C64 {
    let r = mu.exp();
    let mut acc = C64::new(0.0, 0.0);
    let mut pow = C64::new(1.0, 0.0);
    for k in 0..100_000 {
        let term = pow * (1.0 + k as f64).powf(nu);
        acc += term;
        if term.norm() < 1e-18 * acc.norm().max(1e-300) && k > 8 {
            break;
        }
        pow *= r;
    }
    acc
}
