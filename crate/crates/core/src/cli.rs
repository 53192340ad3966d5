//! Command-line front end.
//!
//! Every command writes either to `--out` (atomically) or to standard
//! output. Files start with a `#` block holding the resolved parameters and
//! the rotating frame the numbers refer to.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;

use crate::config::Config;
use crate::correlation::{self, QuadratureWitness};
use crate::error::{Error, Result};
use crate::hilbert::{build_hamiltonian, Interaction, OperatorSet, ProbeConvention, Truncation};
use crate::lindblad::{
    collapse_operators, evolve, expectation, liouvillian, steady_state_with, DensityMatrix, Observables,
    SteadyStateOptions,
};
use crate::model::{from_hz, to_hz, FrameSpec, SystemParams};
use crate::ode::OdeOptions;
use crate::output::{self, comment_block, csv_text, fmt, join, ResumableTable};
use crate::phase::{self, DiffusionCoefficients, DriftConvention, PolarState};
use crate::reduced::{self, atom_steady_state, coefficients, emission_modes, MomentState, MomentSystem};
use crate::spectroscopy::{self, TransmissionPoint};

#[derive(Debug, Parser)]
#[command(
    name = "celsim",
    version,
    about = "Correlated-emission lasing of two resonator modes and a three-level atom"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Parameter file (key = value, Hz); defaults to the built-in working point.
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Fock truncation N1,N2 of the two modes.
    #[arg(long, global = true, default_value = "15,10", value_parser = parse_trunc)]
    pub trunc: Truncation,
    /// Rotating frame of the full model.
    #[arg(long, global = true, value_enum, default_value_t = FrameArg::Slow)]
    pub frame: FrameArg,
    /// Relative tolerance of time integrations.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    /// Rotating at the pump frequency on mode 1 and the upper level.
    Pump,
    /// Co-rotating with both modes; only detuning-scale frequencies remain.
    Slow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    /// Adiabatically eliminated moment equations.
    Reduced,
    /// Lindblad master equation on the truncated space.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Half,
    Unit,
}

impl From<ConventionArg> for ProbeConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Half => ProbeConvention::HalfPrefactors,
            ConventionArg::Unit => ProbeConvention::UnitPrefactors,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the resolved parameter set.
    Params,
    /// Steady-state photon numbers.
    Steady {
        #[arg(long, value_enum, default_value_t = ModelArg::Reduced)]
        model: ModelArg,
    },
    /// Trajectory from the vacuum with the atom in |g⟩.
    Evolve {
        #[arg(long, value_enum, default_value_t = ModelArg::Reduced)]
        model: ModelArg,
        /// Final time in s (default 1/kappa1).
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Quadrature entanglement witness along the reduced trajectory.
    Duan {
        /// Final time in s (default 10/kappa1).
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long, default_value_t = 1001)]
        points: usize,
    },
    /// Phase drift and diffusion coefficients over eta in [0, 2π).
    Diffusion {
        #[arg(long, default_value_t = 360)]
        samples: usize,
        /// Photon number of mode 1 (default: reduced steady state).
        #[arg(long)]
        n1: Option<f64>,
        /// Photon number of mode 2 (default: reduced steady state).
        #[arg(long)]
        n2: Option<f64>,
    },
    /// Weak-probe transmission of mode 2 over flux bias and probe frequency.
    Transmit {
        /// Probe frequencies in Hz: start:stop:count, a comma list or one value.
        #[arg(long, value_parser = parse_grid)]
        wd: Grid,
        /// Flux biases in flux quanta (default: the configured delta_phi).
        #[arg(long, value_parser = parse_grid)]
        dphi: Option<Grid>,
        /// Probe strength in photons.
        #[arg(long, default_value_t = 0.01)]
        n_probe: f64,
        #[arg(long, value_enum, default_value_t = ConventionArg::Half)]
        convention: ConventionArg,
    },
    /// 1D or 2D grid over parameter-file keys, resumable.
    Sweep {
        /// First axis: KEY=GRID, e.g. Omega=0:9e8:10.
        #[arg(long, value_parser = parse_axis)]
        x: Axis,
        /// Optional second axis (inner loop).
        #[arg(long, value_parser = parse_axis)]
        y: Option<Axis>,
        #[arg(long, value_enum, default_value_t = ModelArg::Reduced)]
        model: ModelArg,
    },
    /// Minimal splitting of the levels exchanged by one coupling.
    Gap {
        /// One of g1..g5.
        #[arg(long, default_value = "g4")]
        coupling: String,
        /// Scan the flux bias over LO:HI instead of the bare level frequency.
        #[arg(long, value_parser = parse_range)]
        flux: Option<(f64, f64)>,
    },
}

/// Values of one grid axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<f64>,
}

fn parse_trunc(s: &str) -> std::result::Result<Truncation, String> {
    Truncation::parse(s).map_err(|e| e.to_string())
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got `{s}`"))?;
    let (a, b) = (parse_f64(a)?, parse_f64(b)?);
    if a < b {
        Ok((a, b))
    } else {
        Err(format!("empty range `{s}`"))
    }
}

/// `start:stop:count` (inclusive, evenly spaced), `v1,v2,…` or a single value.
pub fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, count] => {
            let (a, b) = (parse_f64(start)?, parse_f64(stop)?);
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("grid count `{count}` is not a positive integer"))?;
            match n {
                0 => Err("grid must have at least one point".into()),
                1 => Ok(Grid(vec![a])),
                _ => Ok(Grid((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())),
            }
        }
        [list] => {
            let v = list
                .split(',')
                .map(parse_f64)
                .collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(Grid(v))
        }
        _ => Err(format!("expected start:stop:count or a comma list, got `{s}`")),
    }
}

fn parse_axis(s: &str) -> std::result::Result<Axis, String> {
    let (key, grid) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=GRID, got `{s}`"))?;
    let key = key.trim().to_string();
    if crate::model::default_working_point().get_field(&key).is_none() {
        return Err(format!("`{key}` is not a parameter-file key"));
    }
    Ok(Axis {
        key,
        values: parse_grid(grid)?.0,
    })
}

/// Process exit status for an error: 2 configuration, 3 solver, 4 I/O.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::InvalidParams(_)
        | Error::InvalidFrame(_)
        | Error::InvalidMode(_)
        | Error::NegativeRate { .. } => 2,
        Error::Io { .. } => 4,
        _ => 3,
    }
}

struct Context {
    cfg: Config,
    common: Common,
}

impl Context {
    fn params(&self) -> &SystemParams {
        &self.cfg.params
    }

    fn frame(&self, params: &SystemParams) -> FrameSpec {
        match self.common.frame {
            FrameArg::Pump => FrameSpec::PumpFrame,
            FrameArg::Slow => FrameSpec::slow(params),
        }
    }

    fn ode(&self) -> OdeOptions {
        OdeOptions::with_tol(self.common.tol)
    }

    /// Header block shared by all outputs.
    fn header(&self, command: &str, frame: &str, extra: &[String]) -> String {
        let mut meta = String::new();
        let _ = writeln!(meta, "celsim {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(meta, "command: {command}");
        let _ = writeln!(meta, "frame: {frame}");
        for line in extra {
            let _ = writeln!(meta, "{line}");
        }
        let _ = writeln!(meta, "parameters:");
        meta.push_str(&self.cfg.render());
        comment_block(&meta)
    }

    fn emit(&self, contents: &str) -> Result<()> {
        output::emit(self.common.out.as_deref(), contents)
    }
}

fn reduced_frame(params: &SystemParams) -> String {
    format!("reduced moments, {}", FrameSpec::slow(params).describe())
}

pub fn run(cli: Cli) -> Result<()> {
    if !(cli.common.tol > 0.0) {
        return Err(Error::Config(format!("--tol must be > 0, got {}", cli.common.tol)));
    }
    if cli.common.jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let cfg = match &cli.common.params {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let ctx = Context {
        cfg,
        common: cli.common,
    };
    match cli.command {
        Command::Params => ctx.emit(&ctx.cfg.render()),
        Command::Steady { model } => steady(&ctx, model),
        Command::Evolve { model, t_end, points } => evolve_cmd(&ctx, model, t_end, points),
        Command::Duan { t_end, points } => duan(&ctx, t_end, points),
        Command::Diffusion { samples, n1, n2 } => diffusion(&ctx, samples, n1, n2),
        Command::Transmit {
            wd,
            dphi,
            n_probe,
            convention,
        } => transmit(&ctx, &wd, dphi.as_ref(), n_probe, convention.into()),
        Command::Sweep { x, y, model } => sweep(&ctx, &x, y.as_ref(), model),
        Command::Gap { coupling, flux } => gap(&ctx, &coupling, flux),
    }
}

fn time_grid(t_end: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_end > 0.0) || points < 2 {
        return Err(Error::Config("need t_end > 0 and at least 2 points".into()));
    }
    Ok((0..points).map(|k| t_end * k as f64 / (points - 1) as f64).collect())
}

/// Full-model steady state of `params` and the observables it implies.
pub struct FullSteady {
    pub obs: Observables,
    pub c: C64,
    pub residual: f64,
    pub unknowns: usize,
}

pub fn full_steady(params: &SystemParams, frame: FrameSpec, trunc: Truncation) -> Result<FullSteady> {
    let h = build_hamiltonian(params, frame, trunc)?.into_time_independent()?;
    let l = liouvillian(&h, &collapse_operators(params, trunc)?)?;
    let report = steady_state_with(&l, &SteadyStateOptions::default())?;
    let ops = OperatorSet::new(trunc);
    let obs = Observables::of(&report.rho, &ops)?;
    let c = expectation(&report.rho, &(&ops.a1 * &ops.a2))?;
    Ok(FullSteady {
        obs,
        c,
        residual: report.residual,
        unknowns: report.unknowns,
    })
}

fn steady(ctx: &Context, model: ModelArg) -> Result<()> {
    let p = ctx.params();
    let ass = atom_steady_state(p)?;
    let rc = coefficients(p)?;
    let modes = emission_modes(&rc, &ass);
    let mut body = String::new();
    let frame = match model {
        ModelArg::Reduced => {
            let s = reduced::steady_photons_from(&MomentSystem::new(&rc, &ass))?;
            let _ = writeln!(body, "model = reduced");
            let _ = writeln!(body, "n1 = {}", fmt(s.n1));
            let _ = writeln!(body, "n2 = {}", fmt(s.n2));
            let _ = writeln!(body, "re_c = {}", fmt(s.c.re));
            let _ = writeln!(body, "im_c = {}", fmt(s.c.im));
            let _ = writeln!(body, "abscissa_hz = {}", fmt(to_hz(s.abscissa)));
            reduced_frame(p)
        }
        ModelArg::Full => {
            let frame = ctx.frame(p);
            let s = full_steady(p, frame, ctx.common.trunc)?;
            let _ = writeln!(body, "model = full");
            let _ = writeln!(body, "truncation = {}", ctx.common.trunc);
            let _ = writeln!(body, "n1 = {}", fmt(s.obs.n1));
            let _ = writeln!(body, "n2 = {}", fmt(s.obs.n2));
            let _ = writeln!(body, "re_c = {}", fmt(s.c.re));
            let _ = writeln!(body, "im_c = {}", fmt(s.c.im));
            let _ = writeln!(body, "P_g = {}", fmt(s.obs.pg));
            let _ = writeln!(body, "P_e = {}", fmt(s.obs.pe));
            let _ = writeln!(body, "P_d = {}", fmt(s.obs.pd));
            let _ = writeln!(body, "residual = {}", fmt(s.residual));
            let _ = writeln!(body, "unknowns = {}", s.unknowns);
            frame.describe()
        }
    };
    let _ = writeln!(body, "rho_gg0 = {}", fmt(ass.rho_gg0));
    let _ = writeln!(body, "rho_ee0 = {}", fmt(ass.rho_ee0));
    let _ = writeln!(body, "rho_dd0 = {}", fmt(ass.rho_dd0));
    let _ = writeln!(body, "omega_e1_hz = {}", fmt(to_hz(modes[0].omega1)));
    let _ = writeln!(body, "omega_e2_hz = {}", fmt(to_hz(modes[0].omega2)));
    let _ = writeln!(
        body,
        "frequency_sum_error = {}",
        fmt(spectroscopy::frequency_sum_error(
            modes[0].omega1,
            modes[0].omega2,
            p.omega_p
        ))
    );
    ctx.emit(&(ctx.header("steady", &frame, &[]) + &body))
}

fn evolve_cmd(ctx: &Context, model: ModelArg, t_end: Option<f64>, points: usize) -> Result<()> {
    let p = ctx.params();
    let grid = time_grid(t_end.unwrap_or(1.0 / p.kappa1), points)?;
    let mut body = String::new();
    let frame = match model {
        ModelArg::Reduced => {
            let traj = reduced::integrate_moments(
                &MomentState::vacuum(),
                &coefficients(p)?,
                &atom_steady_state(p)?,
                &grid,
                &ctx.ode(),
            )?;
            body.push_str("t,re_m1,im_m1,re_m2,im_m2,n1,n2,re_c,im_c\n");
            for (t, s) in grid.iter().zip(&traj) {
                let _ = writeln!(
                    body,
                    "{}",
                    join(&[*t, s.m1.re, s.m1.im, s.m2.re, s.m2.im, s.n1, s.n2, s.c.re, s.c.im])
                );
            }
            reduced_frame(p)
        }
        ModelArg::Full => {
            let trunc = ctx.common.trunc;
            let frame = ctx.frame(p);
            let h = build_hamiltonian(p, frame, trunc)?.into_time_independent()?;
            let l = liouvillian(&h, &collapse_operators(p, trunc)?)?;
            let traj = evolve(&DensityMatrix::vacuum(trunc), &l, &grid, &ctx.ode())?;
            let ops = OperatorSet::new(trunc);
            body.push_str(Observables::CSV_HEADER);
            body.push('\n');
            for (t, rho) in grid.iter().zip(&traj) {
                let obs = Observables::of(rho, &ops)?;
                let _ = writeln!(body, "{},{}", fmt(*t), join(&obs.csv_fields()));
            }
            format!("{}, truncation {}", frame.describe(), trunc)
        }
    };
    ctx.emit(&(ctx.header("evolve", &frame, &[]) + &body))
}

fn duan(ctx: &Context, t_end: Option<f64>, points: usize) -> Result<()> {
    let p = ctx.params();
    let grid = time_grid(t_end.unwrap_or(10.0 / p.kappa1), points)?;
    let traj = correlation::duan_trajectory(p, &grid, &ctx.ode())?;
    let mut extra = Vec::new();
    if let Some(m) = correlation::minimum(&traj) {
        extra.push(format!("minimum duan_sum {} at g2_t {}", fmt(m.duan_sum), fmt(m.g2_t)));
    }
    let mut body = String::from(QuadratureWitness::CSV_HEADER);
    body.push('\n');
    for w in &traj {
        let _ = writeln!(
            body,
            "{},{}",
            join(&[w.g2_t, w.duan_sum, w.var_u, w.var_v]),
            u8::from(w.entangled())
        );
    }
    ctx.emit(&(ctx.header("duan", &reduced_frame(p), &extra) + &body))
}

fn diffusion(ctx: &Context, samples: usize, n1: Option<f64>, n2: Option<f64>) -> Result<()> {
    if samples == 0 {
        return Err(Error::Config("--samples must be at least 1".into()));
    }
    let p = ctx.params();
    let rc = coefficients(p)?;
    let ass = atom_steady_state(p)?;
    let (n1, n2) = match (n1, n2) {
        (Some(a), Some(b)) => (a, b),
        (a, b) => {
            let s = reduced::steady_photons_from(&MomentSystem::new(&rc, &ass))?;
            (a.unwrap_or(s.n1), b.unwrap_or(s.n2))
        }
    };
    let base = PolarState::from_photons(n1, n2, 0.0, 0.0)?;
    let mut extra = vec![format!("n1 = {}, n2 = {}", fmt(n1), fmt(n2))];
    for lp in phase::lock_points(&rc, &ass, base.r1, base.r2, 720)? {
        extra.push(format!(
            "lock point eta = {}, slope = {}, d_etaeta = {}, stable under transport drift: {}",
            fmt(lp.eta),
            fmt(lp.slope),
            fmt(lp.coefficients.d_etaeta),
            lp.is_stable(DriftConvention::Transport)
        ));
    }
    let mut body = String::from(DiffusionCoefficients::CSV_HEADER);
    body.push('\n');
    for k in 0..samples {
        let eta = TAU * k as f64 / samples as f64;
        let d = phase::diffusion_coefficients(&rc, &ass, &PolarState { eta, ..base })?;
        let _ = writeln!(
            body,
            "{}",
            join(&[eta, d.d_eta, d.d_etaeta, d.d_theta, d.d_thetatheta, d.d_thetaeta])
        );
    }
    ctx.emit(&(ctx.header("diffusion", &reduced_frame(p), &extra) + &body))
}

/// Evaluate `f` on indices `start..n` with `jobs` threads and hand the
/// results to `sink` in index order.
pub fn ordered_parallel<T, F, S>(start: usize, n: usize, jobs: usize, f: F, mut sink: S) -> Result<()>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
    S: FnMut(usize, T) -> Result<()>,
{
    if start >= n {
        return Ok(());
    }
    let next = AtomicUsize::new(start);
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        for _ in 0..jobs.max(1).min(n - start) {
            let tx = tx.clone();
            let (next, f) = (&next, &f);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n || tx.send((i, f(i))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut want = start;
        for (i, v) in rx {
            pending.insert(i, v);
            while let Some(v) = pending.remove(&want) {
                sink(want, v)?;
                want += 1;
            }
        }
        Ok(())
    })
}

fn transmit(ctx: &Context, wd: &Grid, dphi: Option<&Grid>, n_probe: f64, convention: ProbeConvention) -> Result<()> {
    let p = ctx.params();
    let dphi = dphi.map_or_else(|| vec![ctx.cfg.flux.delta_phi], |g| g.0.clone());
    let wd: Vec<f64> = wd.0.iter().map(|&f| from_hz(f)).collect();
    let trunc = ctx.common.trunc;
    let n = dphi.len() * wd.len();
    let mut points: Vec<TransmissionPoint> = Vec::with_capacity(n);
    ordered_parallel(
        0,
        n,
        ctx.common.jobs,
        |i| -> Result<TransmissionPoint> {
            let (dp, w) = (dphi[i / wd.len()], wd[i % wd.len()]);
            let q = ctx.cfg.level.apply(p, &ctx.cfg.flux, dp)?;
            let t = spectroscopy::transmission(&q, w, n_probe, trunc, convention)?;
            Ok(TransmissionPoint {
                omega_d: w,
                delta_phi: dp,
                t,
                t_normalized: 0.0,
            })
        },
        |_, r| {
            points.push(r?);
            Ok(())
        },
    )?;
    let t0 = points.iter().map(|q| q.t.norm()).fold(0.0, f64::max);
    let mut body = String::from(TransmissionPoint::CSV_HEADER);
    body.push('\n');
    for q in &points {
        let norm = if t0 > 0.0 { q.t.norm() / t0 } else { 0.0 };
        let _ = writeln!(body, "{}", join(&[q.delta_phi, to_hz(q.omega_d), q.t.re, q.t.im, norm]));
    }
    let extra = vec![
        format!("probe photons {}, convention {convention:?}", fmt(n_probe)),
        format!("truncation 0,{}", trunc.n2_max),
    ];
    ctx.emit(&(ctx.header("transmit", "rotating at the probe frequency", &extra) + &body))
}

const SWEEP_COLUMNS: &str = "n1,n2,re_c,im_c,omega_e1_hz,omega_e2_hz,freq_sum_error,error";

fn sweep_point(ctx: &Context, p: &SystemParams, model: ModelArg) -> Result<[f64; 7]> {
    p.validate()?;
    let rc = coefficients(p)?;
    let ass = atom_steady_state(p)?;
    let (n1, n2, c) = match model {
        ModelArg::Reduced => {
            let s = reduced::steady_photons_from(&MomentSystem::new(&rc, &ass))?;
            (s.n1, s.n2, s.c)
        }
        ModelArg::Full => {
            let s = full_steady(p, ctx.frame(p), ctx.common.trunc)?;
            (s.obs.n1, s.obs.n2, s.c)
        }
    };
    let m = emission_modes(&rc, &ass)[0];
    Ok([
        n1,
        n2,
        c.re,
        c.im,
        to_hz(m.omega1),
        to_hz(m.omega2),
        spectroscopy::frequency_sum_error(m.omega1, m.omega2, p.omega_p),
    ])
}

fn sweep(ctx: &Context, x: &Axis, y: Option<&Axis>, model: ModelArg) -> Result<()> {
    let out = ctx
        .common
        .out
        .as_deref()
        .ok_or_else(|| Error::Config("sweep needs --out so it can be resumed".into()))?;
    let ny = y.map_or(1, |a| a.values.len());
    let n = x.values.len() * ny;
    if n == 0 {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let base = *ctx.params();
    let point_params = |i: usize| -> Result<SystemParams> {
        let mut p = base;
        p.set_field(&x.key, x.values[i / ny])?;
        if let Some(y) = y {
            p.set_field(&y.key, y.values[i % ny])?;
        }
        Ok(p)
    };

    // The full grids go into the header so a resumed run can only continue
    // the exact same sweep.
    let mut axes = vec![format!("x: {} = {}", x.key, join(&x.values))];
    if let Some(y) = y {
        axes.push(format!("y: {} = {}", y.key, join(&y.values)));
    }
    let model_name = match model {
        ModelArg::Reduced => "reduced".to_string(),
        ModelArg::Full => format!("full, truncation {}", ctx.common.trunc),
    };
    axes.push(format!("model: {model_name}"));
    let frame = match model {
        ModelArg::Reduced => reduced_frame(&base),
        ModelArg::Full => match ctx.common.frame {
            FrameArg::Pump => FrameSpec::PumpFrame.describe(),
            FrameArg::Slow => "slow co-rotating frame of each grid point".into(),
        },
    };
    let mut header = ctx.header("sweep", &frame, &axes);
    let mut columns = format!("index,{}", x.key);
    if let Some(y) = y {
        let _ = write!(columns, ",{}", y.key);
    }
    let _ = writeln!(columns, ",{SWEEP_COLUMNS}");
    header.push_str(&columns);

    let mut table = ResumableTable::open(out, &header)?;
    let start = table.completed().min(n);
    ordered_parallel(
        start,
        n,
        ctx.common.jobs,
        |i| point_params(i).and_then(|p| sweep_point(ctx, &p, model)),
        |i, r| {
            let mut line = format!("{i},{}", fmt(x.values[i / ny]));
            if let Some(y) = y {
                let _ = write!(line, ",{}", fmt(y.values[i % ny]));
            }
            match r {
                Ok(v) => {
                    let _ = write!(line, ",{},", join(&v));
                }
                Err(e) => {
                    let _ = write!(line, ",,,,,,,,{}", csv_text(&e.to_string()));
                }
            }
            table.append(&line)
        },
    )?;
    table.finish()
}

fn gap(ctx: &Context, coupling: &str, flux: Option<(f64, f64)>) -> Result<()> {
    let which = Interaction::parse(coupling)?;
    let p = ctx.params();
    let trunc = ctx.common.trunc;
    let mut body = String::new();
    let _ = writeln!(body, "coupling = {coupling}");
    let _ = writeln!(body, "coupling_hz = {}", fmt(to_hz(which.strength(p))));
    match flux {
        None => {
            let a = spectroscopy::anticrossing_gap(p, which, trunc)?;
            let _ = writeln!(body, "gap_hz = {}", fmt(to_hz(a.gap)));
            let scanned = if matches!(which, Interaction::G2 | Interaction::G3) {
                "omega_eg_hz"
            } else {
                "omega_dg_hz"
            };
            let _ = writeln!(body, "{scanned} = {}", fmt(to_hz(a.at)));
        }
        Some((lo, hi)) => {
            let a = spectroscopy::flux_anticrossing(p, &ctx.cfg.flux, &ctx.cfg.level, which, lo, hi, trunc)?;
            let _ = writeln!(body, "gap_hz = {}", fmt(to_hz(a.gap)));
            let _ = writeln!(body, "delta_phi = {}", fmt(a.at));
        }
    }
    let extra = vec![format!("truncation {trunc}")];
    ctx.emit(&(ctx.header("gap", "lab frame, bare levels", &extra) + &body))
}

/// Parse arguments, run, and map errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
