//! Adiabatically eliminated two-mode model.
//!
//! The atom is replaced by its driven steady state; the fields then obey a
//! closed linear system for ⟨a₁⟩, ⟨a₂⟩, ⟨a₁†a₁⟩, ⟨a₂†a₂⟩ and ⟨a₁a₂⟩.
//!
//! Conventions: level labels 1, 2, 3 of the elimination formulas are g, e, d;
//! the undefined transition frequency ω₂₁ is taken as ω_eg; the drive
//! frequency of the pair-correlation equation is ω_p.
//!
//! The first moments are stored in the slow co-rotating frame
//! (ν₁ = ω_p − ω₂ on mode 1, ν₂ = ω₂ on mode 2), i.e.
//! `m₁ = ⟨a₁⟩_pump·e^{−iω₂t}` and `m₂ = ⟨a₂⟩_pump·e^{+iω₂t}`. Photon numbers
//! and ⟨a₁a₂⟩ are the same in both frames.

use std::ops::{Add, Mul, Sub};

use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{detunings, SystemParams};
use crate::ode::{self, OdeOptions};

const I: C64 = C64::new(0.0, 1.0);

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Driven steady state of the bare atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSteadyState {
    pub rho_gg0: f64,
    pub rho_ee0: f64,
    pub rho_dd0: f64,
    pub rho_gd0: C64,
}

impl AtomSteadyState {
    pub fn rho_dg0(&self) -> C64 {
        self.rho_gd0.conj()
    }
}

/// Closed-form atomic steady state under the g–d pump.
///
/// The coherence is linear in Ω; this is what an exact three-level solve
/// gives and keeps |ρ_gd| within the bound ½ for every Ω.
pub fn atom_steady_state(params: &SystemParams) -> Result<AtomSteadyState> {
    let d = detunings(params);
    let g2 = params.gamma33 + params.gamma32 + params.gamma31;
    let om2 = params.rabi * params.rabi;
    let a = (params.gamma31 + params.gamma32) * params.gamma21 * (d.delta2 * d.delta2 + 0.25 * g2 * g2);
    let den = a + om2 * g2 * (2.0 * params.gamma21 + params.gamma32);
    if !(den > 0.0) {
        return Err(Error::ZeroDenominator {
            name: "atomic steady state",
            detail: format!("(γ31+γ32)γ21(Δ2²+Γ2²/4) + Ω²Γ2(2γ21+γ32) = {den:e}; all relevant decay rates vanish"),
        });
    }
    let rho_gg0 = (a + g2 * params.gamma21 * om2) / den;
    let rho_ee0 = params.gamma32 * om2 * g2 / den;
    let rho_gd0 = I
        * (params.gamma31 + params.gamma32)
        * params.gamma21
        * C64::new(0.5 * g2, d.delta2)
        * C64::from_polar(params.rabi, params.phi)
        / den;
    Ok(AtomSteadyState {
        rho_gg0,
        rho_ee0,
        rho_dd0: 1.0 - rho_ee0 - rho_gg0,
        rho_gd0,
    })
}

/// Rates, denominators and the α, β, μ, ν coefficients of the reduced model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCoefficients {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub d1: C64,
    pub d2: C64,
    pub alpha1: C64,
    pub alpha2: C64,
    pub beta1: C64,
    pub beta2: C64,
    pub mu1: C64,
    pub mu2: C64,
    pub nu1: C64,
    pub nu2: C64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub omega21: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub omega_p: f64,
    pub g1: f64,
    pub g2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

pub fn coefficients(params: &SystemParams) -> Result<ReducedCoefficients> {
    let d = detunings(params);
    let (g1, g2, om, phi) = (params.g1, params.g2, params.rabi, params.phi);
    let w2 = params.omega2;
    let w21 = params.omega_eg;
    let gamma1 = params.gamma21 + params.gamma22;
    let gamma2 = params.gamma33 + params.gamma32 + params.gamma31;
    let gamma3 = params.gamma33 + params.gamma22 + params.gamma21 + params.gamma32 + params.gamma31;

    let d1 = C64::new(0.5 * gamma1, w2 - w21) * C64::new(0.5 * gamma3, w2 + d.delta3) + om * om;
    let d2 = C64::new(0.5 * gamma1, -w21 - d.delta1) * C64::new(0.5 * gamma3, d.delta3 - d.delta1) + om * om;
    for (name, val) in [("D1", d1), ("D2", d2)] {
        if !(val.norm() > 0.0) {
            return Err(Error::ZeroDenominator {
                name: if name == "D1" { "D1" } else { "D2" },
                detail: format!(
                    "{name} = {val} for Ω = {om:e}, Γ1 = {gamma1:e}, Γ3 = {gamma3:e}, Δ1 = {:e}, Δ3 = {:e}",
                    d.delta1, d.delta3
                ),
            });
        }
    }

    let alpha1 = g2 * g2 / d1 * C64::new(0.5 * gamma3, d.delta3 + w2);
    let alpha2 = g1 * g1 / d2 * C64::new(0.5 * gamma1, -w21 - d.delta1);
    let beta1 = g1 * g2 / d2 * C64::new(0.5 * gamma3, d.delta3 - d.delta1);
    let beta2 = g1 * g2 / d1.conj() * C64::new(0.5 * gamma1, w21 - w2);
    let e_plus = C64::from_polar(1.0, phi);
    let e_minus = e_plus.conj();
    let mu1 = I * om * g2 * g2 / d1.conj() * e_minus;
    let mu2 = I * om * g1 * g1 / d2.conj() * e_plus;
    let nu1 = I * om * g1 * g2 / d1.conj() * e_plus;
    let nu2 = I * om * g1 * g2 / d2.conj() * e_minus;

    Ok(ReducedCoefficients {
        gamma1,
        gamma2,
        gamma3,
        d1,
        d2,
        alpha1,
        alpha2,
        beta1,
        beta2,
        mu1,
        mu2,
        nu1,
        nu2,
        delta1: d.delta1,
        delta2: d.delta2,
        delta3: d.delta3,
        omega21: w21,
        omega1: params.omega1,
        omega2: w2,
        omega_p: params.omega_p,
        g1,
        g2,
        kappa1: params.kappa1,
        kappa2: params.kappa2,
    })
}

/// First and second field moments (slow-frame first moments).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentState {
    pub m1: C64,
    pub m2: C64,
    pub n1: f64,
    pub n2: f64,
    /// ⟨a₁a₂⟩; ⟨a₁†a₂†⟩ is its conjugate.
    pub c: C64,
}

impl MomentState {
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.m1.re, self.m1.im, self.m2.re, self.m2.im, self.n1, self.n2, self.c.re, self.c.im,
        ]
    }

    pub fn from_array(x: &[f64]) -> Self {
        Self {
            m1: C64::new(x[0], x[1]),
            m2: C64::new(x[2], x[3]),
            n1: x[4],
            n2: x[5],
            c: C64::new(x[6], x[7]),
        }
    }

    /// Check n ≥ −tol and |c|² ≤ (n₁+1)(n₂+1) + tol.
    pub fn check(&self, tol: f64) -> Result<()> {
        if self.n1 < -tol || self.n2 < -tol {
            return Err(Error::Numerical(format!(
                "negative photon number (n1 = {:e}, n2 = {:e})",
                self.n1, self.n2
            )));
        }
        let bound = (self.n1 + 1.0) * (self.n2 + 1.0);
        if self.c.norm_sqr() > bound + tol {
            return Err(Error::Numerical(format!(
                "|<a1 a2>|^2 = {:e} exceeds (n1+1)(n2+1) = {bound:e}",
                self.c.norm_sqr()
            )));
        }
        Ok(())
    }
}

impl Add for MomentState {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            m1: self.m1 + o.m1,
            m2: self.m2 + o.m2,
            n1: self.n1 + o.n1,
            n2: self.n2 + o.n2,
            c: self.c + o.c,
        }
    }
}

impl Sub for MomentState {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + o * -1.0
    }
}

impl Mul<f64> for MomentState {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self {
            m1: self.m1 * s,
            m2: self.m2 * s,
            n1: self.n1 * s,
            n2: self.n2 * s,
            c: self.c * s,
        }
    }
}

/// The linear moment system `ds/dt = M s + b` with all coefficients
/// evaluated once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSystem {
    /// dm₁/dt = m1_self·m₁ + m1_cross·m₂*.
    pub m1_self: C64,
    pub m1_cross: C64,
    /// dm₂/dt = m2_self·m₂ + m2_cross·m₁*.
    pub m2_self: C64,
    pub m2_cross: C64,
    pub n1_source: f64,
    pub n1_gain: C64,
    pub n1_pair: C64,
    pub n2_source: f64,
    pub n2_gain: C64,
    pub n2_pair: C64,
    /// d⟨a₁†a₂†⟩/dt = pair_self·C + pair_source + pair_n1·n₁ + pair_n2·n₂.
    pub pair_self: C64,
    pub pair_source: C64,
    pub pair_n1: C64,
    pub pair_n2: C64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl MomentSystem {
    pub fn new(rc: &ReducedCoefficients, ass: &AtomSteadyState) -> Self {
        let (gg, ee, dd) = (re(ass.rho_gg0), re(ass.rho_ee0), re(ass.rho_dd0));
        let gd = ass.rho_gd0;
        let dg = ass.rho_dg0();
        let (a1, a2, b1, b2) = (rc.alpha1, rc.alpha2, rc.beta1, rc.beta2);
        let (mu1, mu2, nu1, nu2) = (rc.mu1, rc.mu2, rc.nu1, rc.nu2);
        let (g1, g2) = (rc.g1, rc.g2);

        // Pump-frame first-moment equations, then the shift to the slow frame.
        let m1_pump = C64::new(-rc.kappa1, -rc.delta1) + g1 * g1 / rc.d2 * a2 * (dd - ee) - mu2.conj() * gd;
        let m1_cross = -nu1.conj() * (ee - gg) - g1 * g2 / rc.d1 * b2 * dg;
        let m2_pump = C64::new(-rc.kappa2, -rc.omega2) + g2 * g2 / rc.d1.conj() * a1.conj() * (ee - gg) - mu1 * gd;
        let m2_cross = -(g1 * g2 / rc.d2.conj()) * b1.conj() * dg + nu2 * (ee - dd);

        let n1_source = mu2.conj() * gd + a2 * dd;
        let n1_gain = mu2.conj() * gd + a2 * dd - a2 * ee;
        let n1_pair = nu1 * gg - nu1 * ee + b2 * gd;
        let n2_source = (a1 + a1.conj()) * ee;
        let n2_gain = a1 * ee - a1 * gg - mu1 * gd;
        let n2_pair = b1 * gd + nu2.conj() * dd - nu2.conj() * ee;

        let pair_self = C64::new(-(rc.kappa1 + rc.kappa2), rc.omega1 + rc.omega2 - rc.omega_p)
            + a1 * (ee - gg)
            + (mu2 - mu1.conj()) * dg
            + a2 * (dd - ee);
        let pair_source = -b1 * gd - nu2.conj() * dd - nu1 * ee;
        let pair_n1 = -(b1 * gd + nu2.conj() * dd - nu2.conj() * ee);
        let pair_n2 = nu1 * (gg - ee) + b2 * gd;

        Self {
            m1_self: m1_pump - I * rc.omega2,
            m1_cross,
            m2_self: m2_pump + I * rc.omega2,
            m2_cross,
            n1_source: 2.0 * n1_source.re,
            n1_gain,
            n1_pair,
            n2_source: n2_source.re,
            n2_gain,
            n2_pair,
            pair_self,
            pair_source,
            pair_n1,
            pair_n2,
            kappa1: rc.kappa1,
            kappa2: rc.kappa2,
        }
    }

    pub fn rhs(&self, s: &MomentState) -> MomentState {
        let big_c = s.c.conj();
        let dn1 =
            -2.0 * self.kappa1 * s.n1 + self.n1_source + 2.0 * self.n1_gain.re * s.n1 + 2.0 * (self.n1_pair * s.c).re;
        let dn2 =
            -2.0 * self.kappa2 * s.n2 + self.n2_source + 2.0 * self.n2_gain.re * s.n2 - 2.0 * (self.n2_pair * s.c).re;
        let d_big_c = self.pair_self * big_c + self.pair_source + self.pair_n1 * s.n1 + self.pair_n2 * s.n2;
        MomentState {
            m1: self.m1_self * s.m1 + self.m1_cross * s.m2.conj(),
            m2: self.m2_self * s.m2 + self.m2_cross * s.m1.conj(),
            n1: dn1,
            n2: dn2,
            c: d_big_c.conj(),
        }
    }

    /// Real 4×4 matrix and source of the (n₁, n₂, Re c, Im c) block.
    pub fn second_moment_block(&self) -> ([[f64; 4]; 4], [f64; 4]) {
        let mut a = [[0.0; 4]; 4];
        let (p1, p2, ac) = (self.n1_pair, self.n2_pair, self.pair_self);
        a[0][0] = -2.0 * self.kappa1 + 2.0 * self.n1_gain.re;
        a[0][2] = 2.0 * p1.re;
        a[0][3] = -2.0 * p1.im;
        a[1][1] = -2.0 * self.kappa2 + 2.0 * self.n2_gain.re;
        a[1][2] = -2.0 * p2.re;
        a[1][3] = 2.0 * p2.im;
        // dc/dt = conj(pair_self)·c + conj(source) + conj(pair_n1)·n1 + conj(pair_n2)·n2
        a[2][0] = self.pair_n1.re;
        a[3][0] = -self.pair_n1.im;
        a[2][1] = self.pair_n2.re;
        a[3][1] = -self.pair_n2.im;
        a[2][2] = ac.re;
        a[2][3] = ac.im;
        a[3][2] = -ac.im;
        a[3][3] = ac.re;
        let b = [
            self.n1_source,
            self.n2_source,
            self.pair_source.re,
            -self.pair_source.im,
        ];
        (a, b)
    }
}

/// d/dt of every tracked moment.
pub fn moment_rhs(s: &MomentState, rc: &ReducedCoefficients, ass: &AtomSteadyState) -> MomentState {
    MomentSystem::new(rc, ass).rhs(s)
}

/// Integrate the moment equations on `t_grid` (first point is the initial time).
pub fn integrate_moments(
    s0: &MomentState,
    rc: &ReducedCoefficients,
    ass: &AtomSteadyState,
    t_grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<MomentState>> {
    let sys = MomentSystem::new(rc, ass);
    let fastest = [sys.m1_self, sys.m2_self, sys.pair_self]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let mut opts = *opts;
    if opts.min_step == 0.0 {
        opts = opts.with_stiffness_guard(fastest);
    }
    let out = ode::integrate(
        |_, x: &[f64], dx: &mut [f64]| {
            let d = sys.rhs(&MomentState::from_array(x));
            dx.copy_from_slice(&d.to_array());
        },
        &s0.to_array(),
        t_grid,
        &opts,
    )?;
    Ok(out.iter().map(|x| MomentState::from_array(x)).collect())
}

/// Fixed point of the second-moment block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyPhotons {
    pub n1: f64,
    pub n2: f64,
    pub c: C64,
    /// Largest real part of the block's eigenvalues (rad/s).
    pub abscissa: f64,
}

fn block_matrix(a: &[[f64; 4]; 4]) -> Mat<f64> {
    Mat::from_fn(4, 4, |i, j| a[i][j])
}

pub fn spectral_abscissa(sys: &MomentSystem) -> Result<f64> {
    let (a, _) = sys.second_moment_block();
    let evs = block_matrix(&a)
        .eigenvalues()
        .map_err(|e| Error::Numerical(format!("eigenvalues of the moment block: {e:?}")))?;
    Ok(evs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Solve the moment system for its stationary photon numbers.
pub fn steady_photon_numbers(params: &SystemParams) -> Result<SteadyPhotons> {
    let rc = coefficients(params)?;
    let ass = atom_steady_state(params)?;
    steady_photons_from(&MomentSystem::new(&rc, &ass))
}

pub fn steady_photons_from(sys: &MomentSystem) -> Result<SteadyPhotons> {
    let abscissa = spectral_abscissa(sys)?;
    if !(abscissa < 0.0) {
        return Err(Error::Unstable { real: abscissa });
    }
    let (a, b) = sys.second_moment_block();
    let m = block_matrix(&a);
    let rhs = Mat::from_fn(4, 1, |i, _| -b[i]);
    let x = m.partial_piv_lu().solve(&rhs);
    Ok(SteadyPhotons {
        n1: x[(0, 0)],
        n2: x[(1, 0)],
        c: C64::new(x[(2, 0)], x[(3, 0)]),
        abscissa,
    })
}

/// Oscillation of the coupled first moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionMode {
    /// Eigenvalue of the (m₁, m₂*) system in the slow frame.
    pub eigenvalue: C64,
    /// Lab-frame angular frequency of mode 1.
    pub omega1: f64,
    /// Lab-frame angular frequency of mode 2.
    pub omega2: f64,
}

impl EmissionMode {
    /// ω_e1 + ω_e2 − ω_p, zero by construction of a parametric process.
    pub fn frequency_sum_error(&self, omega_p: f64) -> f64 {
        self.omega1 + self.omega2 - omega_p
    }
}

/// Eigenmodes of the linear (m₁, m₂*) system, most weakly damped first.
pub fn emission_modes(rc: &ReducedCoefficients, ass: &AtomSteadyState) -> [EmissionMode; 2] {
    let sys = MomentSystem::new(rc, ass);
    let (a, b) = (sys.m1_self, sys.m1_cross);
    let (c, d) = (sys.m2_cross.conj(), sys.m2_self.conj());
    let half_tr = 0.5 * (a + d);
    let root = (half_tr * half_tr - (a * d - b * c)).sqrt();
    let nu1 = rc.omega_p - rc.omega2;
    let nu2 = rc.omega2;
    let mut modes = [half_tr + root, half_tr - root].map(|lambda| EmissionMode {
        eigenvalue: lambda,
        omega1: nu1 - lambda.im,
        omega2: nu2 + lambda.im,
    });
    if modes[1].eigenvalue.re > modes[0].eigenvalue.re {
        modes.swap(0, 1);
    }
    modes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::default_working_point;

    #[test]
    fn no_pump_leaves_atom_in_ground_state() {
        let mut p = default_working_point();
        p.rabi = 0.0;
        let a = atom_steady_state(&p).unwrap();
        assert_eq!(a.rho_gg0, 1.0);
        assert_eq!(a.rho_ee0, 0.0);
        assert_eq!(a.rho_gd0, C64::new(0.0, 0.0));
    }

    #[test]
    fn strong_pump_limit() {
        let mut p = default_working_point();
        let g2 = p.gamma31 + p.gamma32 + p.gamma33;
        p.rabi = 1e6 * g2;
        let a = atom_steady_state(&p).unwrap();
        let limit = p.gamma32 / (2.0 * p.gamma21 + p.gamma32);
        assert!((a.rho_ee0 - limit).abs() < 1e-9);
        assert!((limit - 0.5).abs() < 1e-12);
    }

    #[test]
    fn working_point_atom_is_physical() {
        let a = atom_steady_state(&default_working_point()).unwrap();
        assert!((a.rho_gg0 + a.rho_ee0 + a.rho_dd0 - 1.0).abs() < 1e-15);
        for p in [a.rho_gg0, a.rho_ee0, a.rho_dd0] {
            assert!((0.0..=1.0).contains(&p));
        }
        assert!(a.rho_gd0.norm() <= 0.5);
        assert!(a.rho_gd0.norm_sqr() <= a.rho_gg0 * a.rho_dd0 + 1e-12);
    }

    #[test]
    fn zero_rates_are_an_error() {
        let mut p = default_working_point();
        p.gamma21 = 0.0;
        p.gamma31 = 0.0;
        p.gamma32 = 0.0;
        assert!(matches!(atom_steady_state(&p), Err(Error::ZeroDenominator { .. })));
    }

    #[test]
    fn vanishing_rules() {
        let mut p = default_working_point();
        p.rabi = 0.0;
        let rc = coefficients(&p).unwrap();
        for z in [rc.mu1, rc.mu2, rc.nu1, rc.nu2] {
            assert_eq!(z, C64::new(0.0, 0.0));
        }
        let mut p = default_working_point();
        p.g1 = 0.0;
        let rc = coefficients(&p).unwrap();
        for z in [rc.alpha2, rc.beta1, rc.beta2, rc.nu1, rc.nu2, rc.mu2] {
            assert_eq!(z.norm(), 0.0);
        }
    }

    #[test]
    fn decay_rate_sums() {
        let p = default_working_point();
        let rc = coefficients(&p).unwrap();
        assert_eq!(rc.gamma1, p.gamma21 + p.gamma22);
        assert_eq!(rc.gamma2, p.gamma33 + p.gamma32 + p.gamma31);
        assert_eq!(rc.gamma3, p.gamma33 + p.gamma22 + p.gamma21 + p.gamma32 + p.gamma31);
    }

    #[test]
    fn vacuum_source_term() {
        let p = default_working_point();
        let rc = coefficients(&p).unwrap();
        let a = atom_steady_state(&p).unwrap();
        let d = moment_rhs(&MomentState::vacuum(), &rc, &a);
        let expected = 2.0 * (rc.mu2.conj() * a.rho_gd0 + rc.alpha2 * a.rho_dd0).re;
        assert!((d.n1 - expected).abs() <= 1e-12 * expected.abs());
        assert_eq!(d.m1, C64::new(0.0, 0.0));
    }

    #[test]
    fn block_matches_rhs() {
        let p = default_working_point();
        let sys = MomentSystem::new(&coefficients(&p).unwrap(), &atom_steady_state(&p).unwrap());
        let (a, b) = sys.second_moment_block();
        let s = MomentState {
            m1: C64::new(0.0, 0.0),
            m2: C64::new(0.0, 0.0),
            n1: 1.3,
            n2: 0.7,
            c: C64::new(-0.4, 0.25),
        };
        let x = [s.n1, s.n2, s.c.re, s.c.im];
        let d = sys.rhs(&s);
        let got = [d.n1, d.n2, d.c.re, d.c.im];
        for i in 0..4 {
            let lin: f64 = (0..4).map(|j| a[i][j] * x[j]).sum::<f64>() + b[i];
            assert!((lin - got[i]).abs() <= 1e-9 * got[i].abs().max(1.0), "row {i}");
        }
    }

    #[test]
    fn no_pump_gives_dark_fields() {
        let mut p = default_working_point();
        p.rabi = 0.0;
        let s = steady_photon_numbers(&p).unwrap();
        assert_eq!(s.n1, 0.0);
        assert_eq!(s.n2, 0.0);
    }

    #[test]
    fn bare_decay() {
        let mut p = default_working_point().uncoupled();
        p.rabi = 0.0;
        let rc = coefficients(&p).unwrap();
        let a = atom_steady_state(&p).unwrap();
        let s0 = MomentState {
            n1: 3.0,
            ..MomentState::vacuum()
        };
        let t: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1 / p.kappa1).collect();
        let traj = integrate_moments(&s0, &rc, &a, &t, &OdeOptions::with_tol(1e-10)).unwrap();
        for (ti, s) in t.iter().zip(&traj) {
            let exact = 3.0 * (-2.0 * p.kappa1 * ti).exp();
            assert!((s.n1 - exact).abs() < 1e-8 * 3.0);
        }
    }

    #[test]
    fn frequency_sum_is_exact() {
        let p = default_working_point();
        let modes = emission_modes(&coefficients(&p).unwrap(), &atom_steady_state(&p).unwrap());
        for m in modes {
            assert!(m.frequency_sum_error(p.omega_p).abs() <= 1e-12 * p.omega_p);
        }
    }
}
