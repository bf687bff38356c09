//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::aak::best_rank_approx;
use crate::error::{Error, Result};
use crate::experiments::{
    check_traveling, geometric_eps, growth_sweep, traveling_wave, NormMethod, TurbulenceParams,
};
use crate::flow::{
    evolve_exact, integrate_direct, invariant_report, j_y, sample_invariants, HierarchyEval,
    IntegrateOptions, InvariantSample,
};
use crate::hankel::{DEFAULT_TOL_CLUSTER, DEFAULT_TOL_DOMINANCE};
use crate::hardy::{check_grid, sobolev_norm, HardySymbol};
use crate::io;
use crate::nlft::{
    bateman_check, forward, inverse, kernel_diagnostic, norming_constants, BatemanReport,
    ForwardOptions, KernelDiagnostic, NormingConstants, SpectralData,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "szego",
    version,
    about = "Spectral tools for the cubic Szegő equation"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Number of Fourier modes kept in synthesized symbols.
    #[arg(long = "modes", global = true, default_value_t = 256)]
    pub n_modes: usize,
    /// Boundary grid size (power of two).
    #[arg(long = "grid", global = true, default_value_t = 1024)]
    pub grid_m: usize,
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_TOL_CLUSTER)]
    pub tol_cluster: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_TOL_DOMINANCE)]
    pub tol_dominance: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol_fit: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_modes == 0 {
            return Err(Error::Invalid("--modes must be positive".into()));
        }
        check_grid(self.grid_m, self.n_modes, 4)?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Invalid("--dt must be positive".into()));
        }
        if !(self.tol_cluster > 0.0 && self.tol_cluster < 1e-2) {
            return Err(Error::Invalid("--tol-cluster must lie in (0, 1e-2)".into()));
        }
        if !(self.tol_dominance > 0.0 && self.tol_dominance < 1.0) {
            return Err(Error::Invalid("--tol-dominance must lie in (0, 1)".into()));
        }
        if !(self.tol_fit > 0.0 && self.tol_fit < 1.0) {
            return Err(Error::Invalid("--tol-fit must lie in (0, 1)".into()));
        }
        Ok(())
    }

    fn forward_options(&self) -> ForwardOptions {
        ForwardOptions {
            tol_cluster: self.tol_cluster,
            tol_dominance: self.tol_dominance,
            tol_fit: self.tol_fit,
            grid: None,
        }
    }

    fn out(&self) -> Option<&Path> {
        self.output.as_deref()
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Spectral data of a symbol.
    Analyze { input: PathBuf },
    /// Symbol from spectral data.
    Synth { input: PathBuf },
    /// Forward then inverse transform, reporting the H^{1/2} error.
    Roundtrip { input: PathBuf },
    /// Evolve a symbol; writes a CSV trajectory.
    Evolve {
        input: PathBuf,
        #[arg(long = "t")]
        t: f64,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        /// Steps between recorded rows.
        #[arg(long, default_value_t = 100)]
        stride: usize,
    },
    /// Best rank-k Hankel approximation.
    Aak {
        input: PathBuf,
        #[arg(long)]
        rank: usize,
    },
    /// Traveling wave check against direct integration.
    Traveling {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        ell: usize,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long = "t", default_value_t = 1.0)]
        t: f64,
    },
    /// H^s growth of the near-collapse family; writes a CSV sweep.
    Turbulence(TurbulenceArgs),
    /// Conserved quantities, norming constants and identity residuals.
    Invariants {
        input: PathBuf,
        /// Hierarchy parameter for J^y.
        #[arg(long, default_value_t = 1.0)]
        y: f64,
    },
}

#[derive(Args, Debug)]
pub struct TurbulenceArgs {
    #[arg(long = "N", default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 0.75)]
    pub s: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub delta: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub eps_from: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub eps_to: f64,
    #[arg(long, default_value_t = 6)]
    pub points: usize,
    /// Base block ρ_1, σ_1, ..., comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.05])]
    pub base: Vec<f64>,
    #[arg(long, value_enum, default_value_t = NormKind::Poles)]
    pub norm: NormKind,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    Direct,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Poles,
    Grid,
}

/// Parse and execute; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_VALIDATION,
            };
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var("SZEGO_THREADS") else {
        return;
    };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            // a pool that already exists keeps its size
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        _ => log::warn!("ignoring SZEGO_THREADS={v}"),
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let cfg = &cli.config;
    cfg.validate()?;
    match &cli.command {
        Command::Analyze { input } => analyze(cfg, input),
        Command::Synth { input } => synth(cfg, input),
        Command::Roundtrip { input } => roundtrip(cfg, input),
        Command::Evolve {
            input,
            t,
            method,
            stride,
        } => evolve(cfg, input, *t, *method, *stride),
        Command::Aak { input, rank } => aak(cfg, input, *rank),
        Command::Traveling {
            rho,
            sigma,
            m,
            ell,
            phi,
            theta,
            t,
        } => traveling(cfg, *rho, *sigma, *m, *ell, *phi, *theta, *t),
        Command::Turbulence(args) => turbulence(cfg, args),
        Command::Invariants { input, y } => invariants(cfg, input, *y),
    }
}

fn analyze(cfg: &RunConfig, input: &Path) -> Result<()> {
    let u: HardySymbol = io::read_json(input)?;
    let a = forward(&u, &cfg.forward_options())?;
    if a.ambiguous {
        log::warn!("a cluster or dominance decision was within a factor 10 of its tolerance");
    }
    io::emit(cfg.out(), &io::to_json(&a.data)?)
}

fn synth(cfg: &RunConfig, input: &Path) -> Result<()> {
    let sd: SpectralData = io::read_json(input)?;
    let rec = inverse(&sd, cfg.grid_m, cfg.n_modes)?;
    let total = rec.symbol.norm_sq() + rec.tail_energy;
    if rec.tail_energy > 1e-20 * total {
        log::warn!(
            "energy past {} modes: {:.3e} of {:.3e}",
            cfg.n_modes,
            rec.tail_energy,
            total
        );
    }
    io::emit(cfg.out(), &io::to_json(&rec.symbol)?)
}

#[derive(Serialize)]
struct RoundtripReport {
    data: SpectralData,
    /// ‖inverse(forward(u)) − u‖_{H^{1/2}}/‖u‖_{H^{1/2}}.
    relative_error: f64,
    tail_energy: f64,
    max_condition: f64,
    ambiguous: bool,
}

fn roundtrip(cfg: &RunConfig, input: &Path) -> Result<()> {
    let u: HardySymbol = io::read_json(input)?;
    let a = forward(&u, &cfg.forward_options())?;
    let n = cfg.n_modes.max(u.n_modes());
    check_grid(cfg.grid_m, n, 4)?;
    let rec = inverse(&a.data, cfg.grid_m, n)?;
    let report = RoundtripReport {
        relative_error: sobolev_norm(&rec.symbol.sub(&u.resized(n)), 0.5) / sobolev_norm(&u, 0.5),
        tail_energy: rec.tail_energy,
        max_condition: rec.max_condition,
        ambiguous: a.ambiguous,
        data: a.data,
    };
    io::emit(cfg.out(), &io::to_json(&report)?)
}

fn trajectory_csv(samples: &[InvariantSample], gaps: Option<&[f64]>) -> Result<String> {
    let ns = samples.iter().map(|s| s.s.len()).max().unwrap_or(0);
    let mut header: Vec<String> = ["time", "mass", "energy", "h_half_norm"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=ns).map(|i| format!("s_{i}")));
    if gaps.is_some() {
        header.push("exact_gap".into());
    }
    let rows: Vec<Vec<String>> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut r: Vec<String> = [s.time, s.mass, s.energy, s.h_half_norm]
                .iter()
                .map(|&x| io::format_f64(x))
                .collect();
            r.extend((0..ns).map(|k| s.s.get(k).map_or(String::new(), |&x| io::format_f64(x))));
            if let Some(g) = gaps {
                r.push(io::format_f64(g[i]));
            }
            r
        })
        .collect();
    io::to_csv(&header, &rows)
}

fn evolve(cfg: &RunConfig, input: &Path, t: f64, method: Method, stride: usize) -> Result<()> {
    let u: HardySymbol = io::read_json(input)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Invalid("--t must be a nonnegative time".into()));
    }
    let mut opts = IntegrateOptions::new(t, cfg.dt);
    opts.stride = stride;
    opts.m_grid = Some(cfg.grid_m);
    let n = u.n_modes();
    let exact_at = |sd: &SpectralData, time: f64| -> Result<HardySymbol> {
        Ok(inverse(&evolve_exact(sd, time), cfg.grid_m, n)?.symbol)
    };
    let csv = match method {
        Method::Direct => {
            let rec = integrate_direct(&u, &opts)?;
            log::info!("max relative drift {:.3e}", invariant_report(&rec).max());
            trajectory_csv(&rec.invariants, None)?
        }
        Method::Exact => {
            if stride == 0 || !(cfg.dt > 0.0) {
                return Err(Error::Invalid("need a positive stride".into()));
            }
            let sd = forward(&u, &cfg.forward_options())?.data;
            let step = cfg.dt * stride as f64;
            let count = (t / step).floor() as usize;
            let mut times: Vec<f64> = (0..=count).map(|i| i as f64 * step).collect();
            if times.last().is_some_and(|&l| t - l > 1e-12 * t.max(1.0)) {
                times.push(t);
            }
            let samples = times
                .iter()
                .map(|&time| sample_invariants(&exact_at(&sd, time)?, time, cfg.grid_m, true))
                .collect::<Result<Vec<_>>>()?;
            trajectory_csv(&samples, None)?
        }
        Method::Both => {
            let rec = integrate_direct(&u, &opts)?;
            let sd = forward(&u, &cfg.forward_options())?.data;
            let gaps = rec
                .times
                .iter()
                .zip(&rec.states)
                .map(|(&time, st)| Ok(exact_at(&sd, time)?.sub(st).norm()))
                .collect::<Result<Vec<f64>>>()?;
            let worst = gaps.iter().copied().fold(0.0, f64::max);
            eprintln!("exact-vs-direct L2 gap: {worst:.6e}");
            trajectory_csv(&rec.invariants, Some(&gaps))?
        }
    };
    io::emit(cfg.out(), &csv)
}

#[derive(Serialize)]
struct AakReport {
    err: f64,
    s: f64,
    rank: usize,
    tail_energy: f64,
    dropped: usize,
    max_modulus_deviation: f64,
    r: HardySymbol,
}

fn aak(cfg: &RunConfig, input: &Path, rank: usize) -> Result<()> {
    let u: HardySymbol = io::read_json(input)?;
    let n = cfg.n_modes.max(u.n_modes());
    let a = best_rank_approx(&u, rank, cfg.grid_m, n)?;
    let report = AakReport {
        err: a.err,
        s: a.s,
        rank: a.rank,
        tail_energy: a.tail_energy,
        dropped: a.dropped,
        max_modulus_deviation: a.max_modulus_deviation,
        r: a.r,
    };
    io::emit(cfg.out(), &io::to_json(&report)?)
}

#[derive(Serialize)]
struct TravelingReport {
    c: f64,
    omega: f64,
    t: f64,
    deviation: f64,
    u0: HardySymbol,
}

#[allow(clippy::too_many_arguments)]
fn traveling(
    cfg: &RunConfig,
    rho: f64,
    sigma: f64,
    m: usize,
    ell: usize,
    phi: f64,
    theta: f64,
    t: f64,
) -> Result<()> {
    let w = traveling_wave(rho, sigma, m, ell, phi, theta, cfg.n_modes)?;
    let deviation = check_traveling(&w.u0, w.c, w.omega, t, cfg.dt)?;
    let report = TravelingReport {
        c: w.c,
        omega: w.omega,
        t,
        deviation,
        u0: w.u0,
    };
    io::emit(cfg.out(), &io::to_json(&report)?)
}

fn turbulence(cfg: &RunConfig, args: &TurbulenceArgs) -> Result<()> {
    if args.base.is_empty() {
        return Err(Error::Invalid("--base needs at least two values".into()));
    }
    let base = SpectralData::with_angles(args.base.clone(), &vec![0.0; args.base.len()])?;
    let template = TurbulenceParams::new(base, args.n, args.delta, args.eps_to)?;
    let eps = geometric_eps(args.eps_from, args.eps_to, args.points)?;
    let method = match args.norm {
        NormKind::Poles => NormMethod::Poles,
        NormKind::Grid => NormMethod::Grid {
            m: cfg.grid_m,
            n_out: cfg.n_modes,
        },
    };
    let r = growth_sweep(&template, args.s, &eps, method, cfg.seed)?;
    eprintln!(
        "fitted slope {:.6} (expected {:.6}, {} retries)",
        r.slope, r.expected_slope, r.retries
    );
    let header: Vec<String> = ["eps", "delta", "sobolev_s", "norm", "predicted_exponent"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| {
            [
                row.eps,
                row.delta,
                row.sobolev_s,
                row.norm,
                row.predicted_exponent,
            ]
            .iter()
            .map(|&x| io::format_f64(x))
            .collect()
        })
        .collect();
    io::emit(cfg.out(), &io::to_csv(&header, &rows)?)
}

#[derive(Serialize)]
struct InvariantsReport {
    mass: f64,
    energy: f64,
    h_half_norm: f64,
    data: SpectralData,
    norming: NormingConstants,
    bateman: BatemanReport,
    kernel: KernelDiagnostic,
    hierarchy: HierarchyEval,
}

fn invariants(cfg: &RunConfig, input: &Path, y: f64) -> Result<()> {
    let u: HardySymbol = io::read_json(input)?;
    let m = cfg.grid_m.max(crate::hardy::min_grid(u.n_modes(), 4));
    let sample = sample_invariants(&u, 0.0, m, false)?;
    let sd = forward(&u, &cfg.forward_options())?.data;
    let norming = norming_constants(&sd);
    let report = InvariantsReport {
        mass: sample.mass,
        energy: sample.energy,
        h_half_norm: sample.h_half_norm,
        bateman: bateman_check(&sd, &norming, cfg.seed),
        kernel: kernel_diagnostic(sd.s(), false)?,
        hierarchy: j_y(&u, y, Some(&sd))?,
        norming,
        data: sd,
    };
    io::emit(cfg.out(), &io::to_json(&report)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_validation() {
        let cli =
            Cli::try_parse_from(["szego", "--modes", "512", "--grid", "1024", "analyze", "x"])
                .unwrap();
        assert!(matches!(cli.config.validate(), Err(Error::Alias { .. })));
        let cli = Cli::try_parse_from(["szego", "--tol-cluster", "0.5", "analyze", "x"]).unwrap();
        assert!(cli.config.validate().is_err());
        let cli = Cli::try_parse_from(["szego", "analyze", "x", "--dt", "0.01"]).unwrap();
        assert!(cli.config.validate().is_ok());
        assert_eq!(cli.config.dt, 0.01);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["szego", "--bogus"]), EXIT_VALIDATION);
        assert_eq!(
            run(["szego", "analyze", "/nonexistent/u.json"]),
            EXIT_VALIDATION
        );
    }
}
