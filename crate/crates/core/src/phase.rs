//! Drift and diffusion of the phase difference θ = θ₁ − θ₂ and the phase
//! sum η = (θ₁ + θ₂)/2 in the Fokker–Planck description of the two fields.
//!
//! Amplitudes are frozen (∂/∂rᵢ = 0), so every coefficient is a function of
//! η alone for given r₁, r₂.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use crate::reduced::{AtomSteadyState, ReducedCoefficients};

const I: C64 = C64::new(0.0, 1.0);

/// Field amplitudes and phases; r = √n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarState {
    pub r1: f64,
    pub r2: f64,
    pub eta: f64,
    pub theta: f64,
}

impl PolarState {
    pub fn new(r1: f64, r2: f64, eta: f64, theta: f64) -> Result<Self> {
        let s = Self { r1, r2, eta, theta };
        s.validate()?;
        Ok(s)
    }

    /// Amplitudes from photon numbers.
    pub fn from_photons(n1: f64, n2: f64, eta: f64, theta: f64) -> Result<Self> {
        Self::new(n1.max(0.0).sqrt(), n2.max(0.0).sqrt(), eta, theta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r1 > 0.0 && self.r2 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "field amplitudes must be positive (r1 = {}, r2 = {})",
                self.r1, self.r2
            )));
        }
        if !(self.eta.is_finite() && self.theta.is_finite()) {
            return Err(Error::InvalidParams("phases must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionCoefficients {
    pub d_theta: f64,
    pub d_eta: f64,
    pub d_thetatheta: f64,
    pub d_etaeta: f64,
    pub d_thetaeta: f64,
}

impl DiffusionCoefficients {
    pub const CSV_HEADER: &'static str = "eta,d_eta,d_etaeta,d_theta,d_thetatheta,d_thetaeta";
}

/// Relative size of imaginary parts tolerated after the `+ H.c.` combinations.
pub const REALNESS_TOL: f64 = 1e-12;

/// Accumulates `z + z*` terms and tracks any imaginary residue.
struct RealSum {
    value: C64,
    scale: f64,
}

impl RealSum {
    fn new(base: f64) -> Self {
        Self {
            value: C64::new(base, 0.0),
            scale: base.abs(),
        }
    }

    fn hc(&mut self, z: C64) -> &mut Self {
        self.value += z + z.conj();
        self.scale += 2.0 * z.norm();
        self
    }

    fn plus(&mut self, z: C64) -> &mut Self {
        self.value += z;
        self.scale += z.norm();
        self
    }

    fn finish(&self, name: &str) -> Result<f64> {
        let residue = self.value.im.abs();
        if residue > REALNESS_TOL * self.scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Numerical(format!("{name} has imaginary residue {residue:e}")));
        }
        Ok(self.value.re)
    }
}

/// Evaluate the five drift/diffusion coefficients at `ps`.
pub fn diffusion_coefficients(
    rc: &ReducedCoefficients,
    ass: &AtomSteadyState,
    ps: &PolarState,
) -> Result<DiffusionCoefficients> {
    ps.validate()?;
    let (r1, r2) = (ps.r1, ps.r2);
    let (gg, ee, dd) = (ass.rho_gg0, ass.rho_ee0, ass.rho_dd0);
    let (gd, dg) = (ass.rho_gd0, ass.rho_dg0());
    let (a1, a2, b1, b2) = (rc.alpha1, rc.alpha2, rc.beta1, rc.beta2);
    let (mu1, mu2, nu1, nu2) = (rc.mu1, rc.mu2, rc.nu1, rc.nu2);
    let e2 = C64::from_polar(1.0, 2.0 * ps.eta);
    let rotation = rc.delta1 + rc.omega2;

    let local = a1 * ee / (r2 * r2) + (a2 * dd + mu2 * dg) / (r1 * r1);
    let pair = (b1 * gd + nu2.conj() * dd + nu1 * ee) * e2 / (r1 * r2);

    let d_thetatheta = RealSum::new(0.0)
        .hc(local / 4.0)
        .hc(-pair / 4.0)
        .finish("D_thetatheta")?;
    let d_etaeta = RealSum::new(0.0).hc(local / 16.0).hc(pair / 16.0).finish("D_etaeta")?;
    let d_thetaeta = RealSum::new(0.0)
        .hc((a2 * dd + mu2.conj() * gd) / (4.0 * r1 * r1) - a1 * ee / (4.0 * r2 * r2))
        .finish("D_thetaeta")?;

    let x = (a2.conj() + a1.conj()) * ee + (a1 * gg - mu1 * gd);
    let d_eta = RealSum::new(0.5 * rotation)
        .plus(I / 4.0 * (x - x.conj()))
        .hc(I / 4.0 * (a2 * dd - mu2 * dg))
        .hc(I * r2 / (4.0 * r1) * (nu1 * ee - b2 * gd - nu1 * gg) * e2)
        .hc(I * r1 / (4.0 * r2) * (b1 * gd + nu2.conj() * dd - nu2.conj() * ee) * e2)
        .hc(I / (4.0 * r2 * r1) * (b1.conj() * dg + nu2 * dd + nu1.conj() * ee) / e2)
        .finish("D_eta")?;

    let d_theta = RealSum::new(rotation)
        .hc(I / 2.0 * (a2 * (dd - ee) - mu2 * dg))
        .hc(I / 2.0 * (mu1 * gd - a1 * (gg - ee)))
        .hc(I * r1 / (2.0 * r2) * (nu2.conj() * (ee - dd) - b1 * gd) * e2)
        .hc(I * r2 / (2.0 * r1) * (nu1 * (ee - gg) - b2 * gd) * e2)
        .finish("D_theta")?;

    Ok(DiffusionCoefficients {
        d_theta,
        d_eta,
        d_thetatheta,
        d_etaeta,
        d_thetaeta,
    })
}

/// Sign convention relating the drift coefficient to deterministic motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftConvention {
    /// dη/dt = +D_η.
    Direct,
    /// dη/dt = −D_η, the deterministic flow implied by a Fokker–Planck
    /// equation written as ∂P/∂t = ∂(D_η P)/∂η + ….
    Transport,
}

/// A zero of D_η(η).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockPoint {
    pub eta: f64,
    /// dD_η/dη at the root.
    pub slope: f64,
    pub coefficients: DiffusionCoefficients,
}

impl LockPoint {
    pub fn is_stable(&self, convention: DriftConvention) -> bool {
        match convention {
            DriftConvention::Direct => self.slope < 0.0,
            DriftConvention::Transport => self.slope > 0.0,
        }
    }
}

fn d_eta_at(rc: &ReducedCoefficients, ass: &AtomSteadyState, r1: f64, r2: f64, eta: f64) -> Result<f64> {
    Ok(diffusion_coefficients(rc, ass, &PolarState::new(r1, r2, eta, 0.0)?)?.d_eta)
}

/// All zeros of D_η on one period η ∈ [0, π), located by sign changes on a
/// grid of `samples` points and refined by bisection.
pub fn lock_points(
    rc: &ReducedCoefficients,
    ass: &AtomSteadyState,
    r1: f64,
    r2: f64,
    samples: usize,
) -> Result<Vec<LockPoint>> {
    let samples = samples.max(8);
    let h = PI / samples as f64;
    let mut values = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        values.push(d_eta_at(rc, ass, r1, r2, k as f64 * h)?);
    }
    let mut out = Vec::new();
    for k in 0..samples {
        let (fa, fb) = (values[k], values[k + 1]);
        if fa == 0.0 || fa.signum() != fb.signum() {
            let (mut lo, mut hi) = (k as f64 * h, (k + 1) as f64 * h);
            let mut flo = fa;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = d_eta_at(rc, ass, r1, r2, mid)?;
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-14 {
                    break;
                }
            }
            let eta = 0.5 * (lo + hi);
            let dh = 1e-6;
            let slope = (d_eta_at(rc, ass, r1, r2, eta + dh)? - d_eta_at(rc, ass, r1, r2, eta - dh)?) / (2.0 * dh);
            let coefficients = diffusion_coefficients(rc, ass, &PolarState::new(r1, r2, eta, 0.0)?)?;
            out.push(LockPoint {
                eta,
                slope,
                coefficients,
            });
        }
    }
    Ok(out)
}

/// The lock point that attracts η under `convention`, if any.
pub fn stable_lock_point(
    rc: &ReducedCoefficients,
    ass: &AtomSteadyState,
    r1: f64,
    r2: f64,
    convention: DriftConvention,
) -> Result<Option<LockPoint>> {
    Ok(lock_points(rc, ass, r1, r2, 720)?
        .into_iter()
        .find(|p| p.is_stable(convention)))
}

/// Mean of D_ηη over one period of η.
pub fn mean_d_etaeta(rc: &ReducedCoefficients, ass: &AtomSteadyState, r1: f64, r2: f64) -> Result<f64> {
    let n = 256;
    let mut sum = 0.0;
    for k in 0..n {
        let eta = PI * k as f64 / n as f64;
        sum += diffusion_coefficients(rc, ass, &PolarState::new(r1, r2, eta, 0.0)?)?.d_etaeta;
    }
    Ok(sum / n as f64)
}

/// Integrate dθ/dt = D_θ, dη/dt = D_η with r₁, r₂ frozen.
pub fn phase_drift_odes(
    ps0: &PolarState,
    rc: &ReducedCoefficients,
    ass: &AtomSteadyState,
    t_grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<PolarState>> {
    ps0.validate()?;
    let (r1, r2) = (ps0.r1, ps0.r2);
    let mut failure: Option<Error> = None;
    let out = ode::integrate(
        |_, y: &[f64], dy: &mut [f64]| match PolarState::new(r1, r2, y[0], y[1])
            .and_then(|ps| diffusion_coefficients(rc, ass, &ps))
        {
            Ok(d) => {
                dy[0] = d.d_eta;
                dy[1] = d.d_theta;
            }
            Err(e) => {
                failure.get_or_insert(e);
                dy[0] = f64::NAN;
                dy[1] = f64::NAN;
            }
        },
        &[ps0.eta, ps0.theta],
        t_grid,
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(out?
        .into_iter()
        .map(|y| PolarState {
            r1,
            r2,
            eta: y[0],
            theta: y[1],
        })
        .collect())
}

/// Linewidth (κ₁ + κ₂)/(2·N_tot) for a total photon number N_tot.
pub fn schawlow_townes(kappa1: f64, kappa2: f64, n_tot: f64) -> Result<f64> {
    if !(n_tot > 0.0) {
        return Err(Error::InvalidParams(format!(
            "total photon number must be > 0, got {n_tot}"
        )));
    }
    Ok((kappa1 + kappa2) / (2.0 * n_tot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{default_working_point, from_hz};
    use crate::reduced::{atom_steady_state, coefficients};

    fn setup(p: &crate::model::SystemParams) -> (ReducedCoefficients, AtomSteadyState) {
        (coefficients(p).unwrap(), atom_steady_state(p).unwrap())
    }

    #[test]
    fn uncoupled_fields_only_rotate() {
        let mut p = default_working_point();
        p.g1 = 0.0;
        p.g2 = 0.0;
        let (rc, a) = setup(&p);
        let d = diffusion_coefficients(&rc, &a, &PolarState::new(1.0, 1.0, 0.3, 0.0).unwrap()).unwrap();
        assert_eq!(d.d_thetatheta, 0.0);
        assert_eq!(d.d_etaeta, 0.0);
        assert_eq!(d.d_thetaeta, 0.0);
        assert_eq!(d.d_theta, rc.delta1 + rc.omega2);
    }

    #[test]
    fn period_is_pi() {
        let (rc, a) = setup(&default_working_point());
        let r1 = 5f64.sqrt();
        let r2 = 2f64.sqrt();
        for eta in [0.0, 0.4, 1.7] {
            let x = diffusion_coefficients(&rc, &a, &PolarState::new(r1, r2, eta, 0.0).unwrap()).unwrap();
            let y = diffusion_coefficients(&rc, &a, &PolarState::new(r1, r2, eta + PI, 0.0).unwrap()).unwrap();
            for (u, v) in [
                (x.d_eta, y.d_eta),
                (x.d_theta, y.d_theta),
                (x.d_etaeta, y.d_etaeta),
                (x.d_thetatheta, y.d_thetatheta),
                (x.d_thetaeta, y.d_thetaeta),
            ] {
                assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0));
            }
        }
    }

    #[test]
    fn nonpositive_amplitudes_rejected() {
        assert!(PolarState::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(PolarState::new(1.0, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn linewidth_formula() {
        let k = from_hz(1e6);
        assert_eq!(schawlow_townes(k, k, 1.0).unwrap(), k);
        assert!(schawlow_townes(k, k, 0.0).is_err());
        let st = schawlow_townes(from_hz(0.63e6), from_hz(1.94e6), 10.0).unwrap();
        assert!((st - from_hz(128.5e3)).abs() < 1e-6);
    }

    #[test]
    fn lock_points_are_roots() {
        let (rc, a) = setup(&default_working_point());
        let pts = lock_points(&rc, &a, 5f64.sqrt(), 2f64.sqrt(), 360).unwrap();
        assert!(!pts.is_empty());
        for p in &pts {
            assert!(p.coefficients.d_eta.abs() < 1e-6 * from_hz(1e6));
        }
    }
}
