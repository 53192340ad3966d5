//! Weak-probe transmission, level anticrossings and emission bookkeeping.

use faer::Side;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{
    bare_coupled_hamiltonian, probe_amplitude, probe_hamiltonian, Interaction, OperatorSet, ProbeConvention, Truncation,
};
use crate::lindblad::{expectation, liouvillian, probe_collapse_operators, steady_state};
use crate::model::{transition_frequency, FluxParams, SystemParams};

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Transmission at one probe frequency and flux bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionPoint {
    pub omega_d: f64,
    pub delta_phi: f64,
    pub t: C64,
    /// |t| / max |t| over the sweep.
    pub t_normalized: f64,
}

impl TransmissionPoint {
    pub const CSV_HEADER: &'static str = "delta_phi,omega_d_hz,re_t,im_t,abs_t_norm";
}

/// Complex transmission t = −iκ₂⟨a₂⟩/Ω_d of the weakly probed mode 2.
///
/// Mode 1 does not take part in the probe model, so the solve always uses
/// `n1_max = 0` with the given `n2_max`. Fails with a truncation error when
/// the probe fills more than a third of the retained Fock space.
pub fn transmission(
    params: &SystemParams,
    omega_d: f64,
    n_probe: f64,
    trunc: Truncation,
    convention: ProbeConvention,
) -> Result<C64> {
    let trunc = Truncation::new(0, trunc.n2_max);
    let drive = probe_amplitude(params, n_probe);
    if !(drive > 0.0) {
        return Err(Error::InvalidParams(
            "transmission needs a nonzero probe (n_probe > 0 and kappa2 > 0)".into(),
        ));
    }
    let h = probe_hamiltonian(params, omega_d, n_probe, trunc, convention)?;
    let l = liouvillian(&h, &probe_collapse_operators(params, trunc)?)?;
    let rho = steady_state(&l)?;
    let ops = OperatorSet::new(trunc);
    let n2 = expectation(&rho, &ops.n2)?.re;
    if n2 > trunc.n2_max as f64 / 3.0 {
        return Err(Error::Truncation(format!(
            "probe occupation {n2:.3} approaches n2_max = {}; lower n_probe or raise the truncation",
            trunc.n2_max
        )));
    }
    let a2 = expectation(&rho, &ops.a2)?;
    Ok(C64::new(0.0, -params.kappa2) * a2 / drive)
}

/// Dependence of ω_dg on the flux bias.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum LevelModel {
    /// Keep the template's ω_dg.
    #[default]
    Fixed,
    /// ω_dg = √((slope·δΦ)² + gap²).
    Hyperbolic { gap: f64, slope: f64 },
    /// Piecewise-linear table of (δΦ, ω_dg), sorted by δΦ.
    Table(Vec<(f64, f64)>),
}

impl LevelModel {
    pub fn omega_dg(&self, delta_phi: f64, template: &SystemParams) -> Result<f64> {
        match self {
            LevelModel::Fixed => Ok(template.omega_dg),
            LevelModel::Hyperbolic { gap, slope } => Ok((slope * delta_phi).hypot(*gap)),
            LevelModel::Table(rows) => {
                let first = rows.first().ok_or_else(|| Error::Config("empty level table".into()))?;
                let last = rows.last().expect("nonempty");
                if delta_phi < first.0 || delta_phi > last.0 {
                    return Err(Error::InvalidParams(format!(
                        "delta_phi {delta_phi} outside level table [{}, {}]",
                        first.0, last.0
                    )));
                }
                let k = rows.partition_point(|r| r.0 <= delta_phi).clamp(1, rows.len() - 1);
                let (x0, y0) = rows[k - 1];
                let (x1, y1) = rows[k];
                if x1 == x0 {
                    return Ok(y0);
                }
                Ok(y0 + (y1 - y0) * (delta_phi - x0) / (x1 - x0))
            }
        }
    }

    /// Parameters with both flux-dependent levels moved to `delta_phi`.
    pub fn apply(&self, template: &SystemParams, flux: &FluxParams, delta_phi: f64) -> Result<SystemParams> {
        let mut p = *template;
        p.omega_eg = transition_frequency(&flux.with_delta_phi(delta_phi));
        p.omega_dg = self.omega_dg(delta_phi, template)?;
        p.validate()?;
        Ok(p)
    }
}

/// Transmission over a (δΦ × ω_d) grid, normalized to the largest |t|.
#[allow(clippy::too_many_arguments)]
pub fn flux_sweep(
    template: &SystemParams,
    flux: &FluxParams,
    level: &LevelModel,
    delta_phi_grid: &[f64],
    omega_d_grid: &[f64],
    n_probe: f64,
    trunc: Truncation,
    convention: ProbeConvention,
) -> Result<Vec<Vec<TransmissionPoint>>> {
    if delta_phi_grid.is_empty() || omega_d_grid.is_empty() {
        return Err(Error::Config("flux sweep grids must be nonempty".into()));
    }
    let mut rows = Vec::with_capacity(delta_phi_grid.len());
    for &dphi in delta_phi_grid {
        let p = level.apply(template, flux, dphi)?;
        let mut row = Vec::with_capacity(omega_d_grid.len());
        for &wd in omega_d_grid {
            let t = transmission(&p, wd, n_probe, trunc, convention)
                .map_err(|e| Error::Solver(format!("at delta_phi = {dphi:e}, omega_d = {wd:e} rad/s: {e}")))?;
            row.push(TransmissionPoint {
                omega_d: wd,
                delta_phi: dphi,
                t,
                t_normalized: 0.0,
            });
        }
        rows.push(row);
    }
    normalize(&mut rows);
    Ok(rows)
}

fn normalize(rows: &mut [Vec<TransmissionPoint>]) {
    let t0 = rows.iter().flatten().map(|p| p.t.norm()).fold(0.0, f64::max);
    for p in rows.iter_mut().flatten() {
        p.t_normalized = if t0 > 0.0 { p.t.norm() / t0 } else { 0.0 };
    }
}

/// Result of an avoided-crossing search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anticrossing {
    /// Minimal splitting of the two coupled levels (rad/s).
    pub gap: f64,
    /// Value of the scanned quantity at the minimum.
    pub at: f64,
}

/// Splitting of the two eigenvalues whose eigenvectors overlap most with
/// the bare pair exchanged by `which`.
fn pair_splitting(params: &SystemParams, which: Interaction, trunc: Truncation) -> Result<f64> {
    let h = bare_coupled_hamiltonian(params, &[which], trunc).to_dense();
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigen decomposition failed: {e:?}")))?;
    let (a, b) = which.bare_pair(trunc);
    let u = eig.U();
    let s = eig.S();
    let n = h.nrows();
    let mut weights: Vec<(f64, f64)> = (0..n)
        .map(|k| (u[(a, k)].norm_sqr() + u[(b, k)].norm_sqr(), s[k].re))
        .collect();
    weights.sort_by(|x, y| y.0.total_cmp(&x.0));
    Ok((weights[0].1 - weights[1].1).abs())
}

/// Minimize the splitting over `x ∈ [lo, hi]` where `scan(x)` yields the
/// parameters at x: coarse grid, then golden-section refinement.
pub fn minimize_gap<F>(scan: F, lo: f64, hi: f64, which: Interaction, trunc: Truncation) -> Result<Anticrossing>
where
    F: Fn(f64) -> Result<SystemParams>,
{
    let gap_at = |x: f64| -> Result<f64> { pair_splitting(&scan(x)?, which, trunc) };
    let n = 200;
    let xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let mut best = (0usize, f64::INFINITY);
    for (k, &x) in xs.iter().enumerate() {
        let g = gap_at(x)?;
        if g < best.1 {
            best = (k, g);
        }
    }
    if best.0 == 0 || best.0 == n {
        return Err(Error::NoCrossing(format!(
            "{which:?} splitting is smallest at the edge of [{lo:e}, {hi:e}]"
        )));
    }
    let (mut a, mut b) = (xs[best.0 - 1], xs[best.0 + 1]);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = gap_at(c)?;
    let mut fd = gap_at(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * a.abs().max(b.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = gap_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = gap_at(d)?;
        }
    }
    let at = 0.5 * (a + b);
    Ok(Anticrossing { gap: gap_at(at)?, at })
}

/// Minimal splitting for one interaction, scanning the atomic frequency that
/// tunes its two bare levels through resonance.
///
/// G2 and G3 scan ω_eg (through ω₂ and ω₁); G1, G4 and G5 scan ω_dg (through
/// ω_eg + ω₁, ω_eg + ω₂ and ω₂). The window is ±max(20 g, 2π·1 GHz).
pub fn anticrossing_gap(params: &SystemParams, which: Interaction, trunc: Truncation) -> Result<Anticrossing> {
    let g = which.strength(params);
    let window = (20.0 * g).max(2.0 * std::f64::consts::PI * 1e9);
    let center = match which {
        Interaction::G2 => params.omega2,
        Interaction::G3 => params.omega1,
        Interaction::G1 => params.omega_eg + params.omega1,
        Interaction::G4 => params.omega_eg + params.omega2,
        Interaction::G5 => params.omega2,
    };
    let scans_eg = matches!(which, Interaction::G2 | Interaction::G3);
    let scan = |x: f64| -> Result<SystemParams> {
        let mut p = *params;
        if scans_eg {
            p.omega_eg = x;
            // Keep the level ordering intact while ω_eg moves.
            p.omega_dg = p.omega_dg.max(x + params.omega_de().abs());
        } else {
            p.omega_dg = x;
        }
        Ok(p)
    };
    minimize_gap(scan, center - window, center + window, which, trunc)
}

/// Flux bias (within `[lo, hi]`) at which the `which` levels anticross as
/// ω_eg(δΦ) and the level model tune them.
pub fn flux_anticrossing(
    params: &SystemParams,
    flux: &FluxParams,
    level: &LevelModel,
    which: Interaction,
    lo: f64,
    hi: f64,
    trunc: Truncation,
) -> Result<Anticrossing> {
    minimize_gap(|x| level.apply(params, flux, x), lo, hi, which, trunc)
}

/// dBm to W: P = 10^{(P_dBm − 30)/10}.
pub fn dbm_to_watts(power_dbm: f64) -> f64 {
    10f64.powf((power_dbm - 30.0) / 10.0)
}

/// Intracavity photon number ⟨N⟩ = 2P/(ħωκ) of a mode emitting power P.
pub fn photons_from_power(power_dbm: f64, omega: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParams(format!("kappa must be > 0, got {kappa}")));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidParams(format!("omega must be > 0, got {omega}")));
    }
    Ok(2.0 * dbm_to_watts(power_dbm) / (HBAR * omega * kappa))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionEstimate {
    pub power: f64,
    pub omega: f64,
    pub kappa: f64,
    pub photons: f64,
}

impl EmissionEstimate {
    pub fn from_dbm(power_dbm: f64, omega: f64, kappa: f64) -> Result<Self> {
        Ok(Self {
            power: dbm_to_watts(power_dbm),
            omega,
            kappa,
            photons: photons_from_power(power_dbm, omega, kappa)?,
        })
    }
}

/// Photon-pair bookkeeping of the two outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBalance {
    pub rate1: f64,
    pub rate2: f64,
    /// |n₁κ₁ − n₂κ₂| / max(n₁κ₁, n₂κ₂).
    pub imbalance: f64,
}

pub fn energy_balance(n1: f64, n2: f64, kappa1: f64, kappa2: f64) -> EnergyBalance {
    let rate1 = n1 * kappa1;
    let rate2 = n2 * kappa2;
    let top = rate1.abs().max(rate2.abs());
    EnergyBalance {
        rate1,
        rate2,
        imbalance: if top > 0.0 { (rate1 - rate2).abs() / top } else { 0.0 },
    }
}

/// Relative violation of ω_e1 + ω_e2 = ω_p.
pub fn frequency_sum_error(omega_e1: f64, omega_e2: f64, omega_p: f64) -> f64 {
    (omega_e1 + omega_e2 - omega_p).abs() / omega_p.abs()
}
