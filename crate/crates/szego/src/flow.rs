//! Exact and direct time evolution for the cubic Szegő equation and its hierarchy.

use faer::linalg::solvers::Solve;
use faer::{Mat, Scale};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hankel::{build_pair, dominance_split, spectral_clusters, Side};
use crate::hankel::{DEFAULT_TOL_CLUSTER, DEFAULT_TOL_DOMINANCE};
use crate::hardy::{check_grid, energy, eval_grid, min_grid, sobolev_norm, HardySymbol};
use crate::nlft::{forward, inverse, ForwardOptions, SpectralData};

/// Relative invariant drift that aborts a direct integration.
pub const DRIFT_LIMIT: f64 = 1e-4;

/// Ψ_r ↦ e^{i(−1)^r s_r² t}Ψ_r.
pub fn evolve_exact(sd: &SpectralData, t: f64) -> SpectralData {
    let theta: Vec<f64> = sd
        .s()
        .iter()
        .enumerate()
        .map(|(i, s)| if i % 2 == 0 { -s * s * t } else { s * s * t })
        .collect();
    sd.rotated(&theta)
}

/// u(t) by transform, phase rotation and inverse transform.
pub fn evolve_symbol_exact(
    u: &HardySymbol,
    t: f64,
    opts: &ForwardOptions,
    m: usize,
) -> Result<HardySymbol> {
    let sd = forward(u, opts)?.data;
    Ok(inverse(&evolve_exact(&sd, t), m, u.n_modes())?.symbol)
}

/// −iΠ(|u|²u) on a dealiased grid.
pub fn szego_rhs(u: &HardySymbol, m: usize) -> Result<HardySymbol> {
    check_grid(m, u.n_modes(), 4)?;
    let g = eval_grid(u, m)?;
    let minus_i = C64::new(0.0, -1.0);
    Ok(g.map(|v| minus_i * v * v.norm_sqr()).project(u.n_modes()).0)
}

fn rk4_step(
    u: &HardySymbol,
    dt: f64,
    f: &impl Fn(&HardySymbol) -> Result<HardySymbol>,
) -> Result<HardySymbol> {
    let h = C64::new(dt, 0.0);
    let half = C64::new(0.5 * dt, 0.0);
    let k1 = f(u)?;
    let k2 = f(&u.add(&k1.scale(half)))?;
    let k3 = f(&u.add(&k2.scale(half)))?;
    let k4 = f(&u.add(&k3.scale(h)))?;
    let sum = k1
        .add(&k2.scale(C64::new(2.0, 0.0)))
        .add(&k3.scale(C64::new(2.0, 0.0)))
        .add(&k4);
    Ok(u.add(&sum.scale(C64::new(dt / 6.0, 0.0))))
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantSample {
    pub time: f64,
    pub mass: f64,
    pub energy: f64,
    pub h_half_norm: f64,
    pub s: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<HardySymbol>,
    pub invariants: Vec<InvariantSample>,
}

impl TrajectoryRecord {
    pub fn last(&self) -> &HardySymbol {
        self.states
            .last()
            .expect("trajectory has at least one state")
    }
}

/// The interlaced s-list of u, or all positive cluster values when the
/// dominance structure is not clean.
pub fn tracked_singular_values(u: &HardySymbol) -> Vec<f64> {
    if u.is_zero() {
        return Vec::new();
    }
    let pair = build_pair(u);
    let (Ok(h), Ok(k)) = (
        spectral_clusters(&pair, Side::H, DEFAULT_TOL_CLUSTER),
        spectral_clusters(&pair, Side::K, DEFAULT_TOL_CLUSTER),
    ) else {
        return Vec::new();
    };
    match dominance_split(u, &h, &k, DEFAULT_TOL_DOMINANCE) {
        Ok(sk) => sk.s_list(),
        Err(_) => {
            let mut v: Vec<f64> = h.positive().chain(k.positive()).map(|(_, c)| c.s).collect();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        }
    }
}

pub fn sample_invariants(
    u: &HardySymbol,
    time: f64,
    m: usize,
    track_spectrum: bool,
) -> Result<InvariantSample> {
    Ok(InvariantSample {
        time,
        mass: u.norm_sq(),
        energy: energy(u, m)?,
        h_half_norm: sobolev_norm(u, 0.5),
        s: if track_spectrum {
            tracked_singular_values(u)
        } else {
            Vec::new()
        },
    })
}

#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    pub t_final: f64,
    pub dt: f64,
    /// Grid size; the smallest dealiased grid when absent.
    pub m_grid: Option<usize>,
    /// Steps between recorded states.
    pub stride: usize,
    pub track_spectrum: bool,
}

impl IntegrateOptions {
    pub fn new(t_final: f64, dt: f64) -> Self {
        IntegrateOptions {
            t_final,
            dt,
            m_grid: None,
            stride: 100,
            track_spectrum: true,
        }
    }
}

fn step_count(opts: &IntegrateOptions) -> Result<usize> {
    if !(opts.dt > 0.0 && opts.t_final >= 0.0 && opts.stride > 0) {
        return Err(Error::Invalid(
            "need dt > 0, T >= 0 and a positive stride".into(),
        ));
    }
    let steps = (opts.t_final / opts.dt).round();
    if (steps * opts.dt - opts.t_final).abs() > 1e-9 * opts.t_final.max(1.0) {
        return Err(Error::Invalid(format!(
            "T = {} is not a multiple of dt = {}",
            opts.t_final, opts.dt
        )));
    }
    Ok(steps as usize)
}

fn drift(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        b.abs()
    } else {
        ((b - a) / a).abs()
    }
}

fn check_drift(first: &InvariantSample, now: &InvariantSample) -> Result<()> {
    let checks = [
        ("mass", first.mass, now.mass),
        ("energy", first.energy, now.energy),
        ("H^1/2 norm", first.h_half_norm, now.h_half_norm),
    ];
    for (name, a, b) in checks {
        let d = drift(a, b);
        if !(d <= DRIFT_LIMIT) {
            return Err(Error::Drift {
                quantity: name.into(),
                drift: d,
                time: now.time,
            });
        }
    }
    if first.s.len() == now.s.len() {
        for (i, (a, b)) in first.s.iter().zip(&now.s).enumerate() {
            let d = drift(*a, *b);
            if !(d <= DRIFT_LIMIT) {
                return Err(Error::Drift {
                    quantity: format!("s_{}", i + 1),
                    drift: d,
                    time: now.time,
                });
            }
        }
    }
    Ok(())
}

fn integrate(
    u0: &HardySymbol,
    opts: &IntegrateOptions,
    m: usize,
    rhs: impl Fn(&HardySymbol) -> Result<HardySymbol>,
) -> Result<TrajectoryRecord> {
    let steps = step_count(opts)?;
    let first = sample_invariants(u0, 0.0, m, opts.track_spectrum)?;
    let mut rec = TrajectoryRecord {
        times: vec![0.0],
        states: vec![u0.clone()],
        invariants: vec![first.clone()],
    };
    let mut u = u0.clone();
    for step in 1..=steps {
        u = rk4_step(&u, opts.dt, &rhs)?;
        if step % opts.stride == 0 || step == steps {
            let t = step as f64 * opts.dt;
            let sample = sample_invariants(&u, t, m, opts.track_spectrum)?;
            check_drift(&first, &sample)?;
            rec.times.push(t);
            rec.states.push(u.clone());
            rec.invariants.push(sample);
        }
    }
    Ok(rec)
}

fn resolve_grid(u0: &HardySymbol, opts: &IntegrateOptions) -> Result<usize> {
    let m = opts.m_grid.unwrap_or_else(|| min_grid(u0.n_modes(), 4));
    check_grid(m, u0.n_modes(), 4)?;
    let peak = eval_grid(u0, m)?.max_abs();
    if opts.dt * peak * peak > 0.1 {
        return Err(Error::Invalid(format!(
            "step too large: dt·max|u|² = {:.3e} exceeds 0.1",
            opts.dt * peak * peak
        )));
    }
    Ok(m)
}

/// Classical RK4 on i∂_t u = Π(|u|²u).
pub fn integrate_direct(u0: &HardySymbol, opts: &IntegrateOptions) -> Result<TrajectoryRecord> {
    let m = resolve_grid(u0, opts)?;
    integrate(u0, opts, m, |u| szego_rhs(u, m))
}

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyEval {
    pub y: f64,
    /// ((I + yH_u²)^{-1}1 | 1).
    pub j_value: f64,
    /// ∏(1 + yσ²)/(1 + yρ²) when spectral data was supplied.
    pub j_product: Option<f64>,
    #[serde(skip)]
    pub w: HardySymbol,
    pub omegas: Vec<f64>,
}

fn resolvent_unit(u: &HardySymbol, y: f64) -> Result<HardySymbol> {
    let g = build_pair(u).gamma().clone();
    let n = g.nrows();
    let g = Mat::<C64>::from_fn(n, n, |i, j| g[(i, j)]);
    let a = Mat::<C64>::identity(n, n) + (&g * g.adjoint()) * Scale(C64::new(y, 0.0));
    let chol = a
        .llt(faer::Side::Lower)
        .map_err(|_| Error::IllConditioned("I + yH² is not positive definite".into()))?;
    let mut e0 = Mat::<C64>::zeros(n, 1);
    e0[(0, 0)] = C64::new(1.0, 0.0);
    let w = chol.solve(&e0);
    Ok(HardySymbol::new((0..n).map(|i| w[(i, 0)]).collect()))
}

/// J^y from singular values alone.
pub fn j_product(sd: &SpectralData, y: f64) -> f64 {
    sd.rho()
        .iter()
        .zip(sd.sigma_padded())
        .map(|(r, s)| (1.0 + y * s * s) / (1.0 + y * r * r))
        .product()
}

/// ω_r = (−1)^{r−1}·2yJ^y/(1 + ys_r²).
pub fn hierarchy_frequencies(sd: &SpectralData, y: f64) -> Vec<f64> {
    let j = j_product(sd, y);
    sd.s()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * 2.0 * y * j / (1.0 + y * s * s)
        })
        .collect()
}

pub fn j_y(u: &HardySymbol, y: f64, sd: Option<&SpectralData>) -> Result<HierarchyEval> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::Invalid(format!(
            "hierarchy parameter y = {y} must be positive"
        )));
    }
    let w = resolvent_unit(u, y)?;
    Ok(HierarchyEval {
        y,
        j_value: w.coeffs()[0].re,
        j_product: sd.map(|sd| j_product(sd, y)),
        omegas: sd.map_or_else(Vec::new, |sd| hierarchy_frequencies(sd, y)),
        w,
    })
}

/// Ψ_r ↦ e^{iω_r t}Ψ_r.
pub fn hierarchy_evolve_exact(sd: &SpectralData, y: f64, t: f64) -> SpectralData {
    let theta: Vec<f64> = hierarchy_frequencies(sd, y).iter().map(|w| w * t).collect();
    sd.rotated(&theta)
}

fn mul_truncated(a: &HardySymbol, b: &HardySymbol, n: usize) -> HardySymbol {
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (i, x) in a.coeffs().iter().enumerate().take(n) {
        for (j, y) in b.coeffs().iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    HardySymbol::new(out)
}

/// 2iy·w·H_u(w) with w = (I + yH_u²)^{-1}1.
pub fn hierarchy_rhs(u: &HardySymbol, y: f64) -> Result<HardySymbol> {
    let w = resolvent_unit(u, y)?;
    let hw = build_pair(u).apply_h(&w);
    Ok(mul_truncated(&w, &hw, u.n_modes()).scale(C64::new(0.0, 2.0 * y)))
}

/// RK4 on the J^y Hamiltonian flow.
pub fn integrate_hierarchy_direct(
    u0: &HardySymbol,
    y: f64,
    opts: &IntegrateOptions,
) -> Result<TrajectoryRecord> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::Invalid(format!(
            "hierarchy parameter y = {y} must be positive"
        )));
    }
    let m = resolve_grid(u0, opts)?;
    integrate(u0, opts, m, |u| hierarchy_rhs(u, y))
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftSummary {
    pub mass: f64,
    pub energy: f64,
    pub h_half_norm: f64,
    pub s: Vec<f64>,
}

impl DriftSummary {
    pub fn max(&self) -> f64 {
        self.s
            .iter()
            .copied()
            .chain([self.mass, self.energy, self.h_half_norm])
            .fold(0.0, f64::max)
    }

    pub fn max_singular(&self) -> f64 {
        self.s.iter().copied().fold(0.0, f64::max)
    }
}

/// Largest relative deviation of each invariant from its initial value.
pub fn invariant_report(traj: &TrajectoryRecord) -> DriftSummary {
    let Some(first) = traj.invariants.first() else {
        return DriftSummary {
            mass: 0.0,
            energy: 0.0,
            h_half_norm: 0.0,
            s: Vec::new(),
        };
    };
    let mut out = DriftSummary {
        mass: 0.0,
        energy: 0.0,
        h_half_norm: 0.0,
        s: vec![0.0; first.s.len()],
    };
    for now in &traj.invariants {
        out.mass = out.mass.max(drift(first.mass, now.mass));
        out.energy = out.energy.max(drift(first.energy, now.energy));
        out.h_half_norm = out
            .h_half_norm
            .max(drift(first.h_half_norm, now.h_half_norm));
        for (i, slot) in out.s.iter_mut().enumerate() {
            let d = match now.s.get(i) {
                Some(b) => drift(first.s[i], *b),
                None => f64::INFINITY,
            };
            *slot = slot.max(d);
        }
    }
    out
}

/// Terminal L² errors of RK4 against a reference state, and the fitted order.
pub fn convergence_order(
    u0: &HardySymbol,
    reference: &HardySymbol,
    t_final: f64,
    dts: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let mut errors = Vec::with_capacity(dts.len());
    for &dt in dts {
        let mut opts = IntegrateOptions::new(t_final, dt);
        opts.stride = usize::MAX;
        opts.track_spectrum = false;
        let traj = integrate_direct(u0, &opts)?;
        errors.push(traj.last().sub(reference).norm());
    }
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    Ok((errors, least_squares_slope(&xs, &ys)))
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Wrapped angle difference in (−π, π].
pub fn angle_difference(after: f64, before: f64) -> f64 {
    let d = (after - before).rem_euclid(std::f64::consts::TAU);
    if d > std::f64::consts::PI {
        d - std::f64::consts::TAU
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardy::from_rational;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exact_flow_examples() {
        let sd = SpectralData::with_angles(vec![2.0], &[0.3]).unwrap();
        assert_eq!(evolve_exact(&sd, 0.0), sd);
        let u0 = inverse(&sd, 64, 4).unwrap().symbol;
        let u1 = inverse(&evolve_exact(&sd, PI / 4.0), 64, 4).unwrap().symbol;
        assert!(u1.add(&u0).norm() < 1e-13);

        let sd = SpectralData::with_angles(vec![1.0, 0.5], &[0.0, 0.0]).unwrap();
        let e = evolve_exact(&sd, 2.0);
        let p0 = e.psi()[0].eval(c(0.0, 0.0));
        let p1 = e.psi()[1].eval(c(0.0, 0.0));
        assert!((p0 - C64::from_polar(1.0, -2.0)).norm() < 1e-14);
        assert!((p1 - C64::from_polar(1.0, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn rhs_examples() {
        let r = szego_rhs(&HardySymbol::constant(c(0.6, 0.8), 4), 16).unwrap();
        assert!((r.coeffs()[0] - c(0.8, -0.6)).norm() < 1e-15);
        assert!(szego_rhs(&HardySymbol::zeros(4), 16).unwrap().is_zero());
        let r = szego_rhs(&HardySymbol::monomial(1, 4), 16).unwrap();
        assert!(
            r.sub(&HardySymbol::monomial(1, 4).scale(c(0.0, -1.0)))
                .norm()
                < 1e-15
        );
        assert!(matches!(
            szego_rhs(&HardySymbol::zeros(4), 8),
            Err(Error::Alias { .. })
        ));
    }

    #[test]
    fn constant_solution() {
        let cst = c(0.6, 0.8);
        let u0 = HardySymbol::constant(cst, 4);
        let mut opts = IntegrateOptions::new(1.0, 1e-3);
        opts.stride = 1000;
        let traj = integrate_direct(&u0, &opts).unwrap();
        let want = cst * C64::from_polar(1.0, -1.0);
        let err = (traj.last().coeffs()[0] - want).norm();
        assert!(err < 1e-9, "{err}");
        let rep = invariant_report(&traj);
        assert!(rep.max() < 1e-12);
        assert_eq!(traj.times.len(), 2);
    }

    #[test]
    fn direct_matches_exact_rank_two() {
        let u0 = from_rational(&[c(0.75, 0.0)], &[c(1.0, 0.0), c(-0.5, 0.0)], 64)
            .unwrap()
            .symbol;
        let exact = evolve_symbol_exact(&u0, 1.0, &ForwardOptions::default(), 512).unwrap();
        let mut opts = IntegrateOptions::new(1.0, 1e-3);
        opts.stride = 250;
        let traj = integrate_direct(&u0, &opts).unwrap();
        assert!(traj.last().sub(&exact).norm() < 1e-6);
        assert!(invariant_report(&traj).max_singular() < 1e-8);
    }

    #[test]
    fn rejects_large_steps_and_misaligned_horizon() {
        let u0 = HardySymbol::constant(c(2.0, 0.0), 4);
        assert!(integrate_direct(&u0, &IntegrateOptions::new(1.0, 0.05)).is_err());
        let u0 = HardySymbol::constant(c(0.5, 0.0), 4);
        assert!(integrate_direct(&u0, &IntegrateOptions::new(1.0, 0.3)).is_err());
    }

    #[test]
    fn hierarchy_examples() {
        let sd = SpectralData::with_angles(vec![1.0, 0.5], &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(j_product(&sd, 1.0), 0.625, epsilon = 1e-15);
        let w = hierarchy_frequencies(&sd, 1.0);
        assert_abs_diff_eq!(w[0], 0.625, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], -1.0, epsilon = 1e-15);
        let u = inverse(&sd, 512, 64).unwrap().symbol;
        let ev = j_y(&u, 1.0, Some(&sd)).unwrap();
        assert_abs_diff_eq!(ev.j_value, 0.625, epsilon = 1e-12);
        assert!(j_y(&u, 1e-9, None).unwrap().j_value > 1.0 - 1e-8);
        let cst = HardySymbol::constant(c(0.0, 2.0), 3);
        assert_abs_diff_eq!(j_y(&cst, 1.0, None).unwrap().j_value, 0.2, epsilon = 1e-15);
        let one = SpectralData::with_angles(vec![2.0], &[0.0]).unwrap();
        assert_abs_diff_eq!(hierarchy_frequencies(&one, 1.0)[0], 0.08, epsilon = 1e-15);
        assert_eq!(hierarchy_evolve_exact(&sd, 1.0, 0.0), sd);
        assert!(j_y(&u, -1.0, None).is_err());
    }

    #[test]
    fn hierarchy_rank_one_rotation() {
        let cst = c(0.6, 0.8);
        let u0 = HardySymbol::constant(cst, 4);
        let y = 0.7;
        let traj = integrate_hierarchy_direct(&u0, y, &IntegrateOptions::new(1.0, 0.01)).unwrap();
        let sd = forward(&u0, &ForwardOptions::default()).unwrap().data;
        let want = inverse(&hierarchy_evolve_exact(&sd, y, 1.0), 16, 4)
            .unwrap()
            .symbol;
        assert!(traj.last().sub(&want).norm() < 1e-10);
    }

    #[test]
    fn angle_wrap() {
        assert_abs_diff_eq!(
            angle_difference(0.1, 6.2),
            0.1 - 6.2 + 2.0 * PI,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(angle_difference(6.2, 0.1), 6.1 - 2.0 * PI, epsilon = 1e-15);
    }
}
