//! Truncated composite space |N₁, atom, N₂⟩ and sparse operators on it.
//!
//! Basis ordering is fixed: `index = N₁·(3·(n2_max+1)) + atom·(n2_max+1) + N₂`
//! with atom levels g = 0, e = 1, d = 2.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::ops::{Add, Mul, Neg, Sub};

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{FrameSpec, SystemParams};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Atomic level of the three-level artificial atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    G = 0,
    E = 1,
    D = 2,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::G, Level::E, Level::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Level> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::G => "g",
            Level::E => "e",
            Level::D => "d",
        })
    }
}

/// Highest Fock index kept in each mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Truncation {
    pub n1_max: usize,
    pub n2_max: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { n1_max: 15, n2_max: 10 }
    }
}

impl Truncation {
    pub fn new(n1_max: usize, n2_max: usize) -> Self {
        Self { n1_max, n2_max }
    }

    pub fn dim(&self) -> usize {
        3 * (self.n1_max + 1) * (self.n2_max + 1)
    }

    pub fn index(&self, n1: usize, level: Level, n2: usize) -> usize {
        debug_assert!(n1 <= self.n1_max && n2 <= self.n2_max);
        n1 * 3 * (self.n2_max + 1) + level.index() * (self.n2_max + 1) + n2
    }

    pub fn decompose(&self, index: usize) -> (usize, Level, usize) {
        let block = 3 * (self.n2_max + 1);
        let n1 = index / block;
        let rest = index % block;
        let level = Level::from_index(rest / (self.n2_max + 1)).expect("index within dim");
        (n1, level, rest % (self.n2_max + 1))
    }

    pub fn states(&self) -> impl Iterator<Item = (usize, Level, usize)> + '_ {
        (0..=self.n1_max).flat_map(move |n1| {
            Level::ALL
                .into_iter()
                .flat_map(move |l| (0..=self.n2_max).map(move |n2| (n1, l, n2)))
        })
    }

    /// Parse `"N1,N2"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("truncation `{s}` must look like N1,N2")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|e| Error::Config(format!("truncation `{s}`: {e}")))
        };
        Ok(Self::new(parse(a)?, parse(b)?))
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.n1_max, self.n2_max)
    }
}

/// Sparse complex matrix on a truncated composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    trunc: Truncation,
    entries: BTreeMap<(usize, usize), C64>,
}

impl Operator {
    pub fn zeros(trunc: Truncation) -> Self {
        Self {
            trunc,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(trunc: Truncation) -> Self {
        let entries = (0..trunc.dim()).map(|i| ((i, i), ONE)).collect();
        Self { trunc, entries }
    }

    /// Build from explicit entries; indices are checked against the dimension.
    pub fn from_entries(trunc: Truncation, entries: impl IntoIterator<Item = ((usize, usize), C64)>) -> Result<Self> {
        let mut op = Self::zeros(trunc);
        for ((r, c), v) in entries {
            op.add_entry(r, c, v)?;
        }
        Ok(op)
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn dim(&self) -> usize {
        self.trunc.dim()
    }

    /// Identifier of the basis ordering, stored alongside serialized operators.
    pub fn basis_tag(&self) -> String {
        format!("n1-atom-n2;n1_max={};n2_max={}", self.trunc.n1_max, self.trunc.n2_max)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries.get(&(row, col)).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.entries.iter().map(|(&(r, c), &v)| (r, c, v))
    }

    pub fn add_entry(&mut self, row: usize, col: usize, value: C64) -> Result<()> {
        let dim = self.dim();
        if row >= dim || col >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.max(col) + 1,
            });
        }
        if value != ZERO {
            *self.entries.entry((row, col)).or_insert(ZERO) += value;
        }
        Ok(())
    }

    fn check_same(&self, other: &Operator) -> Result<()> {
        if self.trunc != other.trunc {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    pub fn dagger(&self) -> Operator {
        Operator {
            trunc: self.trunc,
            entries: self.iter().map(|(r, c, v)| ((c, r), v.conj())).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Operator {
        if s == ZERO {
            return Operator::zeros(self.trunc);
        }
        Operator {
            trunc: self.trunc,
            entries: self.iter().map(|(r, c, v)| ((r, c), v * s)).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Operator {
        self.scale(C64::new(s, 0.0))
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (r, c, v) in other.iter() {
            *out.entries.entry((r, c)).or_insert(ZERO) += v;
        }
        out.entries.retain(|_, v| *v != ZERO);
        Ok(out)
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        self.check_same(other)?;
        let mut out = Operator::zeros(self.trunc);
        for (&(i, k), &v) in &self.entries {
            for (&(_, j), &w) in other.entries.range((k, 0)..(k + 1, 0)) {
                *out.entries.entry((i, j)).or_insert(ZERO) += v * w;
            }
        }
        out.entries.retain(|_, v| *v != ZERO);
        Ok(out)
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        let ab = self.try_mul(other)?;
        let ba = other.try_mul(self)?;
        ab.try_add(&ba.scale_real(-1.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest |A − A†| entry relative to the largest |A| entry.
    pub fn hermiticity_error(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let worst = self
            .iter()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max);
        worst / scale
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_error() <= rel_tol
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut y = vec![ZERO; x.len()];
        for (r, c, v) in self.iter() {
            y[r] += v * x[c];
        }
        Ok(y)
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let n = self.dim();
        let mut m = Mat::<C64>::zeros(n, n);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    /// Write `row col re im` lines, preceded by a `#` comment with the basis tag.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# basis {}", self.basis_tag())?;
        writeln!(w, "# dim {}", self.dim())?;
        for (r, c, v) in self.iter() {
            writeln!(w, "{r} {c} {:.16e} {:.16e}", v.re, v.im)?;
        }
        Ok(())
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operators on different truncations")
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.try_add(&rhs.scale_real(-1.0))
            .expect("operators on different truncations")
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.try_mul(rhs).expect("operators on different truncations")
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale_real(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

/// Annihilation operator of mode 1 or 2.
pub fn annihilation(mode: usize, trunc: Truncation) -> Result<Operator> {
    let mut op = Operator::zeros(trunc);
    for (n1, l, n2) in trunc.states() {
        let (src, dst, n) = match mode {
            1 if n1 > 0 => (trunc.index(n1, l, n2), trunc.index(n1 - 1, l, n2), n1),
            2 if n2 > 0 => (trunc.index(n1, l, n2), trunc.index(n1, l, n2 - 1), n2),
            1 | 2 => continue,
            _ => return Err(Error::InvalidMode(mode)),
        };
        op.add_entry(dst, src, C64::new((n as f64).sqrt(), 0.0))?;
    }
    Ok(op)
}

pub fn creation(mode: usize, trunc: Truncation) -> Result<Operator> {
    Ok(annihilation(mode, trunc)?.dagger())
}

/// `a†a` of the given mode (diagonal, exact on the whole truncated space).
pub fn number(mode: usize, trunc: Truncation) -> Result<Operator> {
    let mut op = Operator::zeros(trunc);
    for (n1, l, n2) in trunc.states() {
        let n = match mode {
            1 => n1,
            2 => n2,
            _ => return Err(Error::InvalidMode(mode)),
        };
        op.add_entry(trunc.index(n1, l, n2), trunc.index(n1, l, n2), C64::new(n as f64, 0.0))?;
    }
    Ok(op)
}

/// `σ_jk = |j⟩⟨k|` on the atom, identity on both modes.
pub fn atomic_op(j: Level, k: Level, trunc: Truncation) -> Operator {
    let mut op = Operator::zeros(trunc);
    for n1 in 0..=trunc.n1_max {
        for n2 in 0..=trunc.n2_max {
            op.entries.insert((trunc.index(n1, j, n2), trunc.index(n1, k, n2)), ONE);
        }
    }
    op
}

/// Frequently used operators of one truncation, built once.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub trunc: Truncation,
    pub a1: Operator,
    pub a2: Operator,
    pub n1: Operator,
    pub n2: Operator,
    sigma: [[Operator; 3]; 3],
}

impl OperatorSet {
    pub fn new(trunc: Truncation) -> Self {
        let sigma = Level::ALL.map(|j| Level::ALL.map(|k| atomic_op(j, k, trunc)));
        Self {
            trunc,
            a1: annihilation(1, trunc).expect("mode 1"),
            a2: annihilation(2, trunc).expect("mode 2"),
            n1: number(1, trunc).expect("mode 1"),
            n2: number(2, trunc).expect("mode 2"),
            sigma,
        }
    }

    pub fn sigma(&self, j: Level, k: Level) -> &Operator {
        &self.sigma[j.index()][k.index()]
    }
}

/// A Hamiltonian split into a static part and an optional harmonic drive
/// `H(t) = H₀ + V e^{iωt} + V† e^{−iωt}`.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub static_part: Operator,
    pub drive: Option<Drive>,
}

#[derive(Debug, Clone)]
pub struct Drive {
    pub op: Operator,
    /// Carrier angular frequency ω in rad/s.
    pub carrier: f64,
}

impl Hamiltonian {
    /// The operator for frames where the Hamiltonian is time independent.
    pub fn time_independent(&self) -> Result<&Operator> {
        match &self.drive {
            None => Ok(&self.static_part),
            Some(_) => Err(Error::InvalidFrame(
                "lab-frame Hamiltonian is time dependent; use a rotating frame".into(),
            )),
        }
    }

    pub fn into_time_independent(self) -> Result<Operator> {
        match self.drive {
            None => Ok(self.static_part),
            Some(_) => Err(Error::InvalidFrame(
                "lab-frame Hamiltonian is time dependent; use a rotating frame".into(),
            )),
        }
    }

    /// H(t) assembled at time t (only meaningful for small test systems).
    pub fn at(&self, t: f64) -> Operator {
        match &self.drive {
            None => self.static_part.clone(),
            Some(d) => {
                let phase = C64::from_polar(1.0, d.carrier * t);
                let v = d.op.scale(phase);
                &(&self.static_part + &v) + &v.dagger()
            }
        }
    }
}

/// System Hamiltonian (in units of ħ) in the requested frame.
///
/// Rotating frames use the generator ν₁a₁†a₁ + ν₂(a₂†a₂ + σ_ee) + ω_p σ_dd;
/// the pump frame is the special case ν₁ = ω_p, ν₂ = 0. In the lab frame the
/// pump appears as `V = Ω e^{iφ} σ_gd` with carrier ω_p.
pub fn build_hamiltonian(params: &SystemParams, frame: FrameSpec, trunc: Truncation) -> Result<Hamiltonian> {
    frame.check(params)?;
    let ops = OperatorSet::new(trunc);
    build_hamiltonian_with(params, frame, &ops)
}

pub fn build_hamiltonian_with(params: &SystemParams, frame: FrameSpec, ops: &OperatorSet) -> Result<Hamiltonian> {
    use Level::*;
    frame.check(params)?;
    let (nu1, nu2, nu_d) = match frame {
        FrameSpec::Lab => (0.0, 0.0, 0.0),
        FrameSpec::PumpFrame => (params.omega_p, 0.0, params.omega_p),
        FrameSpec::CustomCoRotating { nu1, nu2 } => (nu1, nu2, params.omega_p),
    };
    let mut h = &ops.n1 * (params.omega1 - nu1);
    h = &h + &(&ops.n2 * (params.omega2 - nu2));
    h = &h + &(ops.sigma(E, E) * (params.omega_eg - nu2));
    h = &h + &(ops.sigma(D, D) * (params.omega_dg - nu_d));

    let a1d = ops.a1.dagger();
    let a2d = ops.a2.dagger();
    let coupling = &(&(&a1d * ops.sigma(E, D)) * params.g1) + &(&(&a2d * ops.sigma(G, E)) * params.g2);
    h = &(&h + &coupling) + &coupling.dagger();

    let pump = ops.sigma(G, D).scale(C64::from_polar(params.rabi, params.phi));
    match frame {
        FrameSpec::Lab => Ok(Hamiltonian {
            static_part: h,
            drive: Some(Drive {
                op: pump,
                carrier: params.omega_p,
            }),
        }),
        _ => {
            h = &(&h + &pump) + &pump.dagger();
            Ok(Hamiltonian {
                static_part: h,
                drive: None,
            })
        }
    }
}

/// Which coupling of the circuit an anticrossing refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interaction {
    /// `a₁†σ_ed`: |0,d,0⟩ ↔ |1,e,0⟩.
    G1,
    /// `a₂†σ_ge`: |0,e,0⟩ ↔ |0,g,1⟩.
    G2,
    /// `a₁†σ_ge`: |0,e,0⟩ ↔ |1,g,0⟩.
    G3,
    /// `a₂†σ_ed`: |0,d,0⟩ ↔ |0,e,1⟩.
    G4,
    /// `a₂†σ_gd`: |0,d,0⟩ ↔ |0,g,1⟩.
    G5,
}

impl Interaction {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "g1" => Self::G1,
            "g2" => Self::G2,
            "g3" => Self::G3,
            "g4" => Self::G4,
            "g5" => Self::G5,
            _ => return Err(Error::Config(format!("unknown interaction `{s}`"))),
        })
    }

    pub fn strength(self, p: &SystemParams) -> f64 {
        match self {
            Self::G1 => p.g1,
            Self::G2 => p.g2,
            Self::G3 => p.g3,
            Self::G4 => p.g4,
            Self::G5 => p.g5,
        }
    }

    /// (mode, lower level, upper level) of the `a†σ_lower,upper` term.
    pub fn structure(self) -> (usize, Level, Level) {
        match self {
            Self::G1 => (1, Level::E, Level::D),
            Self::G2 => (2, Level::G, Level::E),
            Self::G3 => (1, Level::G, Level::E),
            Self::G4 => (2, Level::E, Level::D),
            Self::G5 => (2, Level::G, Level::D),
        }
    }

    /// The two bare states exchanged by this coupling: (atom excited, photon emitted).
    pub fn bare_pair(self, trunc: Truncation) -> (usize, usize) {
        let (mode, lower, upper) = self.structure();
        let excited = trunc.index(0, upper, 0);
        let emitted = match mode {
            1 => trunc.index(1, lower, 0),
            _ => trunc.index(0, lower, 1),
        };
        (excited, emitted)
    }
}

/// Undriven lab-frame Hamiltonian with a chosen set of resonator couplings,
/// used for level-crossing analysis.
pub fn bare_coupled_hamiltonian(params: &SystemParams, couplings: &[Interaction], trunc: Truncation) -> Operator {
    let ops = OperatorSet::new(trunc);
    let mut h = &ops.n1 * params.omega1;
    h = &h + &(&ops.n2 * params.omega2);
    h = &h + &(ops.sigma(Level::E, Level::E) * params.omega_eg);
    h = &h + &(ops.sigma(Level::D, Level::D) * params.omega_dg);
    for &which in couplings {
        let (mode, lower, upper) = which.structure();
        let ad = if mode == 1 { ops.a1.dagger() } else { ops.a2.dagger() };
        let term = &(&ad * ops.sigma(lower, upper)) * which.strength(params);
        h = &(&h + &term) + &term.dagger();
    }
    h
}

/// Prefactor convention on the atomic energies of the probe Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbeConvention {
    /// ½(ω_dg − ω_d)σ_dd + ½(ω_eg − ω_d)σ_ee.
    #[default]
    HalfPrefactors,
    /// (ω_dg − ω_d)σ_dd + (ω_eg − ω_d)σ_ee, which is what a frame rotating at
    /// ω_d on a₂†a₂, σ_ee and σ_dd gives for the one-excitation g–e block.
    UnitPrefactors,
}

impl ProbeConvention {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(Self::HalfPrefactors),
            "unit" => Ok(Self::UnitPrefactors),
            _ => Err(Error::Config(format!(
                "unknown probe convention `{s}` (expected half|unit)"
            ))),
        }
    }

    fn factor(self) -> f64 {
        match self {
            Self::HalfPrefactors => 0.5,
            Self::UnitPrefactors => 1.0,
        }
    }
}

/// Probe amplitude Ω_d = κ₂√n for a drive quoted in photons.
pub fn probe_amplitude(params: &SystemParams, n_probe: f64) -> f64 {
    params.kappa2 * n_probe.sqrt()
}

/// Weak-probe Hamiltonian of mode 2 driven at ω_d, in the frame rotating at ω_d.
///
/// The couplings use the energy-conserving pairings a₂†σ_ge, a₂†σ_ed, a₂†σ_gd
/// (photon emitted while the atom relaxes). Mode 1 is a spectator; callers
/// normally pass `n1_max = 0`.
pub fn probe_hamiltonian(
    params: &SystemParams,
    omega_d: f64,
    n_probe: f64,
    trunc: Truncation,
    convention: ProbeConvention,
) -> Result<Operator> {
    use Level::*;
    if !(n_probe >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "probe photon number must be >= 0, got {n_probe}"
        )));
    }
    let ops = OperatorSet::new(trunc);
    let f = convention.factor();
    let mut h = &ops.n2 * (params.omega2 - omega_d);
    h = &h + &(ops.sigma(D, D) * (f * (params.omega_dg - omega_d)));
    h = &h + &(ops.sigma(E, E) * (f * (params.omega_eg - omega_d)));

    let drive = probe_amplitude(params, n_probe);
    if drive > 0.0 {
        let a2d = ops.a2.dagger();
        let term = (&a2d - &ops.a2).scale(C64::new(0.0, drive / 2.0));
        h = &h + &term;
    }

    let a2d = ops.a2.dagger();
    for (g, lower, upper) in [(params.g4, E, D), (params.g2, G, E), (params.g5, G, D)] {
        if g != 0.0 {
            let term = &(&a2d * ops.sigma(lower, upper)) * g;
            h = &(&h + &term) + &term.dagger();
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::default_working_point;

    fn approx(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn basis_index_round_trip() {
        let t = Truncation::new(3, 2);
        for (i, (n1, l, n2)) in t.states().enumerate() {
            assert_eq!(t.index(n1, l, n2), i);
            assert_eq!(t.decompose(i), (n1, l, n2));
        }
        assert_eq!(t.states().count(), t.dim());
    }

    #[test]
    fn lowering_matrix_element() {
        let t = Truncation::new(1, 0);
        let a1 = annihilation(1, t).unwrap();
        let v = a1.get(t.index(0, Level::G, 0), t.index(1, Level::G, 0));
        assert!(approx(v, ONE));
        assert!(annihilation(3, t).is_err());
    }

    #[test]
    fn lowering_against_dense_construction() {
        for nmax in 0..=4 {
            let t = Truncation::new(nmax, nmax);
            for mode in [1, 2] {
                let a = annihilation(mode, t).unwrap();
                for (n1, l, n2) in t.states() {
                    for (m1, k, m2) in t.states() {
                        let expected = match mode {
                            1 if k == l && m2 == n2 && m1 == n1 + 1 => (m1 as f64).sqrt(),
                            2 if k == l && m1 == n1 && m2 == n2 + 1 => (m2 as f64).sqrt(),
                            _ => 0.0,
                        };
                        let got = a.get(t.index(n1, l, n2), t.index(m1, k, m2));
                        assert!(approx(got, C64::new(expected, 0.0)));
                    }
                }
            }
        }
    }

    #[test]
    fn projector_algebra() {
        use Level::*;
        let t = Truncation::new(2, 1);
        let sum = &(&atomic_op(G, G, t) + &atomic_op(E, E, t)) + &atomic_op(D, D, t);
        assert_eq!(sum, Operator::identity(t));
        assert_eq!(&atomic_op(G, E, t) * &atomic_op(E, G, t), atomic_op(G, G, t));
        for j in Level::ALL {
            for k in Level::ALL {
                assert_eq!(atomic_op(j, k, t).dagger(), atomic_op(k, j, t));
            }
        }
    }

    #[test]
    fn modes_and_atom_commute() {
        let t = Truncation::new(2, 2);
        let ops = OperatorSet::new(t);
        assert_eq!(ops.a1.commutator(&ops.a2).unwrap().nnz(), 0);
        for j in Level::ALL {
            for k in Level::ALL {
                assert_eq!(ops.a1.commutator(ops.sigma(j, k)).unwrap().nnz(), 0);
                assert_eq!(ops.a2.commutator(ops.sigma(j, k)).unwrap().nnz(), 0);
            }
        }
    }

    #[test]
    fn canonical_commutator_below_cutoff() {
        let t = Truncation::new(4, 3);
        let ops = OperatorSet::new(t);
        let c = ops.a1.commutator(&ops.a1.dagger()).unwrap();
        for (n1, l, n2) in t.states() {
            let i = t.index(n1, l, n2);
            if n1 < t.n1_max {
                assert!(approx(c.get(i, i), ONE));
            }
        }
    }

    #[test]
    fn pump_frame_is_special_rotating_frame() {
        let p = default_working_point();
        let t = Truncation::new(2, 2);
        let a = build_hamiltonian(&p, FrameSpec::PumpFrame, t).unwrap();
        let b = build_hamiltonian(
            &p,
            FrameSpec::CustomCoRotating {
                nu1: p.omega_p,
                nu2: 0.0,
            },
            t,
        )
        .unwrap();
        assert_eq!(a.static_part, b.static_part);
        assert!(a.static_part.is_hermitian(1e-12));
    }

    #[test]
    fn invalid_frame_rejected() {
        let p = default_working_point();
        let bad = FrameSpec::CustomCoRotating { nu1: 1.0, nu2: 1.0 };
        assert!(build_hamiltonian(&p, bad, Truncation::new(1, 1)).is_err());
    }

    #[test]
    fn lab_frame_reduces_to_pump_frame_at_t0_diagonal() {
        let p = default_working_point();
        let t = Truncation::new(1, 1);
        let lab = build_hamiltonian(&p, FrameSpec::Lab, t).unwrap();
        assert!(lab.time_independent().is_err());
        let h0 = lab.at(0.0);
        assert!(h0.is_hermitian(1e-12));
        let i = t.index(0, Level::D, 0);
        assert_eq!(h0.get(i, i).re, p.omega_dg);
    }

    #[test]
    fn probe_drive_absent_at_zero() {
        let p = default_working_point();
        let t = Truncation::new(0, 3);
        let h = probe_hamiltonian(&p, p.omega2, 0.0, t, ProbeConvention::default()).unwrap();
        let i = t.index(0, Level::G, 0);
        let j = t.index(0, Level::G, 1);
        assert_eq!(h.get(i, j), ZERO);
        assert!(h.is_hermitian(1e-12));
        let h = probe_hamiltonian(&p, p.omega2, 0.5, t, ProbeConvention::default()).unwrap();
        assert!(h.get(i, j) != ZERO);
        assert!(h.is_hermitian(1e-12));
    }

    #[test]
    fn triplet_dump_lists_every_entry() {
        let t = Truncation::new(1, 1);
        let a = annihilation(2, t).unwrap();
        let mut buf = Vec::new();
        a.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), a.nnz());
    }
}
