//! Physical parameters of the atom-resonator system.
//!
//! Everything here is stored in angular frequency (rad/s). Parameter files
//! use ordinary frequencies in Hz; the conversion happens only in
//! [`crate::config`].

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Convert an ordinary frequency in Hz to rad/s.
#[inline]
pub fn from_hz(f: f64) -> f64 {
    TAU * f
}

/// Convert an angular frequency in rad/s to Hz.
#[inline]
pub fn to_hz(omega: f64) -> f64 {
    omega / TAU
}

const GHZ: f64 = 1e9 * TAU;
const MHZ: f64 = 1e6 * TAU;

/// Frequencies, couplings and decay rates of the two-mode / three-level system.
///
/// Level ordering is g < e < d. `omega_de` is derived from the two stored
/// transition frequencies and never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega1: f64,
    pub omega2: f64,
    pub omega_eg: f64,
    pub omega_dg: f64,
    pub omega_p: f64,
    /// Pump Rabi amplitude Ω.
    pub rabi: f64,
    /// Pump phase φ in rad.
    pub phi: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub g4: f64,
    pub g5: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub gamma21: f64,
    pub gamma22: f64,
    pub gamma31: f64,
    pub gamma32: f64,
    pub gamma33: f64,
}

/// How a field is represented in a parameter file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldUnit {
    /// Stored as rad/s, written as Hz.
    Frequency,
    /// Stored and written as rad.
    Phase,
}

/// Parameter-file keys, in canonical output order.
pub const FIELDS: [(&str, FieldUnit); 19] = [
    ("omega1", FieldUnit::Frequency),
    ("omega2", FieldUnit::Frequency),
    ("omega_eg", FieldUnit::Frequency),
    ("omega_dg", FieldUnit::Frequency),
    ("omega_p", FieldUnit::Frequency),
    ("Omega", FieldUnit::Frequency),
    ("phi", FieldUnit::Phase),
    ("g1", FieldUnit::Frequency),
    ("g2", FieldUnit::Frequency),
    ("g3", FieldUnit::Frequency),
    ("g4", FieldUnit::Frequency),
    ("g5", FieldUnit::Frequency),
    ("kappa1", FieldUnit::Frequency),
    ("kappa2", FieldUnit::Frequency),
    ("gamma21", FieldUnit::Frequency),
    ("gamma22", FieldUnit::Frequency),
    ("gamma31", FieldUnit::Frequency),
    ("gamma32", FieldUnit::Frequency),
    ("gamma33", FieldUnit::Frequency),
];

impl SystemParams {
    pub fn omega_de(&self) -> f64 {
        self.omega_dg - self.omega_eg
    }

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "omega1" => &mut self.omega1,
            "omega2" => &mut self.omega2,
            "omega_eg" => &mut self.omega_eg,
            "omega_dg" => &mut self.omega_dg,
            "omega_p" => &mut self.omega_p,
            "Omega" => &mut self.rabi,
            "phi" => &mut self.phi,
            "g1" => &mut self.g1,
            "g2" => &mut self.g2,
            "g3" => &mut self.g3,
            "g4" => &mut self.g4,
            "g5" => &mut self.g5,
            "kappa1" => &mut self.kappa1,
            "kappa2" => &mut self.kappa2,
            "gamma21" => &mut self.gamma21,
            "gamma22" => &mut self.gamma22,
            "gamma31" => &mut self.gamma31,
            "gamma32" => &mut self.gamma32,
            "gamma33" => &mut self.gamma33,
            _ => return None,
        })
    }

    fn unit_of(key: &str) -> Option<FieldUnit> {
        FIELDS.iter().find(|(k, _)| *k == key).map(|(_, u)| *u)
    }

    /// Read a field in file units (Hz for frequencies, rad for the phase).
    pub fn get_field(&self, key: &str) -> Option<f64> {
        let unit = Self::unit_of(key)?;
        let mut copy = *self;
        let v = *copy.slot(key)?;
        Some(match unit {
            FieldUnit::Frequency => to_hz(v),
            FieldUnit::Phase => v,
        })
    }

    /// Set a field from a value in file units.
    pub fn set_field(&mut self, key: &str, value: f64) -> Result<()> {
        let unit = Self::unit_of(key).ok_or_else(|| Error::InvalidParams(format!("unknown parameter `{key}`")))?;
        let slot = self.slot(key).expect("FIELDS and slot() agree");
        *slot = match unit {
            FieldUnit::Frequency => from_hz(value),
            FieldUnit::Phase => value,
        };
        Ok(())
    }

    /// Check the invariants: finite values, positive frequencies,
    /// nonnegative couplings and rates, and g < e < d ordering.
    pub fn validate(&self) -> Result<()> {
        for (key, _) in FIELDS {
            let v = self.get_field(key).unwrap_or(f64::NAN);
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{key} is not finite")));
            }
        }
        let positive = [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("omega_eg", self.omega_eg),
            ("omega_dg", self.omega_dg),
            ("omega_p", self.omega_p),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        let nonneg = [
            ("Omega", self.rabi),
            ("g1", self.g1),
            ("g2", self.g2),
            ("g3", self.g3),
            ("g4", self.g4),
            ("g5", self.g5),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("gamma21", self.gamma21),
            ("gamma22", self.gamma22),
            ("gamma31", self.gamma31),
            ("gamma32", self.gamma32),
            ("gamma33", self.gamma33),
        ];
        for (name, v) in nonneg {
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.omega_dg <= self.omega_eg {
            return Err(Error::InvalidParams(format!(
                "level ordering requires omega_dg > omega_eg ({} <= {})",
                self.omega_dg, self.omega_eg
            )));
        }
        Ok(())
    }

    /// Copy with every coupling (g1..g5) and the pump amplitude set to zero.
    pub fn uncoupled(&self) -> Self {
        Self {
            rabi: 0.0,
            g1: 0.0,
            g2: 0.0,
            g3: 0.0,
            g4: 0.0,
            g5: 0.0,
            ..*self
        }
    }
}

/// The three rotating-frame detunings Δ₁, Δ₂, Δ₃ (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detunings {
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
}

pub fn detunings(params: &SystemParams) -> Detunings {
    Detunings {
        delta1: params.omega1 - params.omega_p,
        delta2: params.omega_dg - params.omega_p,
        delta3: params.omega_dg - params.omega_p - params.omega_eg,
    }
}

/// Operating point of the two-mode lasing experiment.
pub fn default_working_point() -> SystemParams {
    let omega_eg = 11.4979 * GHZ;
    let omega_de = 6.5376 * GHZ;
    SystemParams {
        omega1: 6.0016 * GHZ,
        omega2: 11.9979 * GHZ,
        omega_eg,
        omega_dg: omega_eg + omega_de,
        omega_p: 18.0055 * GHZ,
        rabi: 900.0 * MHZ,
        phi: 0.0,
        g1: 90.0 * MHZ,
        g2: 78.0 * MHZ,
        g3: 36.0 * MHZ,
        g4: 205.0 * MHZ,
        g5: 225.0 * MHZ,
        kappa1: 0.63 * MHZ,
        kappa2: 1.94 * MHZ,
        gamma21: 1.5 * MHZ,
        gamma22: 6.0 * MHZ,
        gamma31: 8.0 * MHZ,
        gamma32: 3.0 * MHZ,
        gamma33: 4.0 * MHZ,
    }
}

/// Flux-qubit dispersion parameters near a half-integer flux point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxParams {
    /// Tunneling gap Δ(Φ_N) as an angular frequency.
    pub gap_delta: f64,
    /// 2·I_p·Φ₀/ħ, rad/s per unit of δΦ/Φ₀.
    pub ip_slope: f64,
    pub phi_n_index: i64,
    /// Bias δΦ in units of Φ₀.
    pub delta_phi: f64,
}

impl FluxParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gap_delta > 0.0) {
            return Err(Error::InvalidParams(format!(
                "gap_delta must be > 0, got {}",
                self.gap_delta
            )));
        }
        if !(self.ip_slope > 0.0) {
            return Err(Error::InvalidParams(format!(
                "ip_slope must be > 0, got {}",
                self.ip_slope
            )));
        }
        if !self.delta_phi.is_finite() || self.delta_phi.abs() >= 0.5 {
            return Err(Error::InvalidParams(format!(
                "delta_phi must satisfy |delta_phi| << 1, got {}",
                self.delta_phi
            )));
        }
        Ok(())
    }

    pub fn with_delta_phi(&self, delta_phi: f64) -> Self {
        Self { delta_phi, ..*self }
    }

    /// Flux point used for the lasing experiment: N = 1, gap 1.51 GHz,
    /// δΦ = −18·10⁻³ Φ₀, with the slope derived so that ω_eg lands on the
    /// working-point value.
    pub fn working_point() -> Self {
        let gap = 1.51 * GHZ;
        let delta_phi = -18e-3;
        let slope = derive_ip_slope(gap, delta_phi, default_working_point().omega_eg)
            .expect("working-point flux values are consistent");
        Self {
            gap_delta: gap,
            ip_slope: slope,
            phi_n_index: 1,
            delta_phi,
        }
    }
}

/// ω_eg(δΦ) = sqrt((ip_slope·δΦ)² + Δ²). The Φ-dependence of the gap is ignored.
pub fn transition_frequency(flux: &FluxParams) -> f64 {
    (flux.ip_slope * flux.delta_phi).hypot(flux.gap_delta)
}

/// Solve the dispersion law for the slope that puts the transition at
/// `omega_target` when biased at `delta_phi`.
///
/// The persistent current is not a measured input, so the slope is always a
/// derived quantity and should be reported as such.
pub fn derive_ip_slope(gap_delta: f64, delta_phi: f64, omega_target: f64) -> Result<f64> {
    if delta_phi == 0.0 {
        return Err(Error::InvalidParams("cannot derive ip_slope at delta_phi = 0".into()));
    }
    if omega_target <= gap_delta {
        return Err(Error::InvalidParams(format!(
            "target frequency {omega_target} must exceed the gap {gap_delta}"
        )));
    }
    Ok((omega_target * omega_target - gap_delta * gap_delta).sqrt() / delta_phi.abs())
}

/// Nonnegative bias |δΦ| at which the transition reaches `omega_target`.
pub fn resonant_delta_phi(flux: &FluxParams, omega_target: f64) -> Result<f64> {
    if omega_target < flux.gap_delta {
        return Err(Error::InvalidParams(format!(
            "target frequency {omega_target} lies below the gap {}",
            flux.gap_delta
        )));
    }
    Ok((omega_target * omega_target - flux.gap_delta * flux.gap_delta).sqrt() / flux.ip_slope)
}

/// Which rotating frame a Hamiltonian is expressed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameSpec {
    Lab,
    /// Generator ω_p·(a₁†a₁ + σ_dd).
    PumpFrame,
    /// Generator ν₁a₁†a₁ + ν₂a₂†a₂ + ν₂σ_ee + ω_pσ_dd; time-independent only
    /// when ν₁ + ν₂ = ω_p.
    CustomCoRotating {
        nu1: f64,
        nu2: f64,
    },
}

impl FrameSpec {
    pub fn co_rotating(params: &SystemParams, nu1: f64, nu2: f64) -> Result<Self> {
        let frame = FrameSpec::CustomCoRotating { nu1, nu2 };
        frame.check(params)?;
        Ok(frame)
    }

    /// Frame co-rotating with mode 2 at ω₂ and mode 1 at ω_p − ω₂, which
    /// leaves only slow (detuning-scale) frequencies in the Hamiltonian.
    pub fn slow(params: &SystemParams) -> Self {
        FrameSpec::CustomCoRotating {
            nu1: params.omega_p - params.omega2,
            nu2: params.omega2,
        }
    }

    pub fn check(&self, params: &SystemParams) -> Result<()> {
        if let FrameSpec::CustomCoRotating { nu1, nu2 } = *self {
            let mismatch = (nu1 + nu2 - params.omega_p).abs();
            if !(mismatch <= 1e-12 * params.omega_p.abs().max(1.0)) {
                return Err(Error::InvalidFrame(format!(
                    "nu1 + nu2 = {} must equal omega_p = {}",
                    nu1 + nu2,
                    params.omega_p
                )));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match *self {
            FrameSpec::Lab => "lab".into(),
            FrameSpec::PumpFrame => "pump (omega_p on a1+a1 and sigma_dd)".into(),
            FrameSpec::CustomCoRotating { nu1, nu2 } => format!(
                "co-rotating (nu1 = {:.11e} Hz, nu2 = {:.11e} Hz)",
                to_hz(nu1),
                to_hz(nu2)
            ),
        }
    }
}
