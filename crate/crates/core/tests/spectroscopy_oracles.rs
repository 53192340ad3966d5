use std::f64::consts::TAU;

use celsim::hilbert::{bare_coupled_hamiltonian, Interaction, ProbeConvention, Truncation};
use celsim::model::{default_working_point, from_hz, FluxParams, SystemParams};
use celsim::phase::schawlow_townes;
use celsim::reduced::steady_photon_numbers;
use celsim::spectroscopy::{
    anticrossing_gap, energy_balance, flux_anticrossing, flux_sweep, photons_from_power, transmission, LevelModel,
};
use num_complex::Complex64 as C64;

fn bare_probe_params() -> SystemParams {
    let mut p = default_working_point().uncoupled();
    p.g2 = 0.0;
    p
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn jaynes_cummings_splitting_is_twice_g2() {
    let mut p = default_working_point().uncoupled();
    p.g2 = default_working_point().g2;
    p.omega_eg = p.omega2;
    let trunc = Truncation::new(0, 1);
    let h = bare_coupled_hamiltonian(&p, &[Interaction::G2], trunc).to_dense();
    let evs = h.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
    // One-excitation block: |0,e,0⟩ and |0,g,1⟩ at ω₂ ± g₂.
    let near: Vec<f64> = evs
        .iter()
        .copied()
        .filter(|e| (e - p.omega2).abs() < 10.0 * p.g2)
        .collect();
    assert_eq!(near.len(), 2, "{evs:?}");
    let split = (near[1] - near[0]).abs();
    assert!(rel(split, 2.0 * p.g2) < 1e-6, "split {split}, 2g2 {}", 2.0 * p.g2);
    assert!(rel(split, from_hz(156e6)) < 1e-6);

    let gap = anticrossing_gap(&p, Interaction::G2, Truncation::new(1, 2)).unwrap();
    assert!(rel(gap.gap, 2.0 * p.g2) < 1e-6, "scanned gap {}", gap.gap);
    assert!(rel(gap.at, p.omega2) < 1e-6);
}

#[test]
fn g4_anticrossing_is_410_mhz() {
    let p = default_working_point();
    let a = anticrossing_gap(&p, Interaction::G4, Truncation::new(1, 2)).unwrap();
    assert!(rel(a.gap, from_hz(410e6)) < 0.05, "gap {} Hz", a.gap / TAU);
    assert!(rel(a.gap, 2.0 * p.g4) < 1e-6);
    assert!(rel(a.at, p.omega_eg + p.omega2) < 1e-6);
}

#[test]
fn zero_coupling_levels_cross() {
    let mut p = default_working_point();
    p.g4 = 0.0;
    let a = anticrossing_gap(&p, Interaction::G4, Truncation::new(1, 2)).unwrap();
    assert!(a.gap < 1e-6 * p.omega2, "gap {}", a.gap);
}

#[test]
fn bare_cavity_resonance_is_minus_i_half() {
    let p = bare_probe_params();
    let t = transmission(&p, p.omega2, 0.01, Truncation::new(0, 6), ProbeConvention::default()).unwrap();
    assert!((t - C64::new(0.0, -0.5)).norm() < 1e-9, "t = {t}");
    let far = transmission(
        &p,
        p.omega2 + 1000.0 * p.kappa2,
        0.01,
        Truncation::new(0, 6),
        ProbeConvention::default(),
    )
    .unwrap();
    assert!(far.norm() < 1e-3);
}

#[test]
fn bare_cavity_lineshape_has_half_width_kappa2() {
    let p = bare_probe_params();
    let trunc = Truncation::new(0, 6);
    let power = |delta: f64| {
        let t = transmission(&p, p.omega2 + delta, 0.01, trunc, ProbeConvention::default()).unwrap();
        (t.norm() / 0.5).powi(2)
    };
    // Fine grid to 3κ₂, then bisection on the half-maximum crossing.
    let n = 600;
    let grid: Vec<f64> = (0..=n).map(|k| 3.0 * p.kappa2 * k as f64 / n as f64).collect();
    let k = grid.iter().position(|&d| power(d) < 0.5).unwrap();
    let (mut lo, mut hi) = (grid[k - 1], grid[k]);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if power(mid) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let hwhm = 0.5 * (lo + hi);
    assert!(rel(hwhm, p.kappa2) < 0.02, "half width {hwhm}, kappa2 {}", p.kappa2);
    assert!((power(-hwhm) - 0.5).abs() < 1e-6, "line is not symmetric");
}

/// Positions of the two largest local maxima of |t(ω_d)|.
fn rabi_peaks(p: &SystemParams, convention: ProbeConvention) -> (f64, f64) {
    let trunc = Truncation::new(0, 3);
    let abs_t = |wd: f64| transmission(p, wd, 0.001, trunc, convention).unwrap().norm();
    let span = 4.0 * p.g2;
    let n = 800;
    let xs: Vec<f64> = (0..=n)
        .map(|k| p.omega2 - span + 2.0 * span * k as f64 / n as f64)
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| abs_t(x)).collect();
    let mut peaks: Vec<(f64, usize)> = (1..n)
        .filter(|&k| ys[k] > ys[k - 1] && ys[k] >= ys[k + 1])
        .map(|k| (ys[k], k))
        .collect();
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
    assert!(peaks.len() >= 2, "fewer than two maxima");
    let refine = |k: usize| {
        let (mut a, mut b) = (xs[k - 1], xs[k + 1]);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..60 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if abs_t(c) > abs_t(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    };
    let (x0, x1) = (refine(peaks[0].1), refine(peaks[1].1));
    (x0.min(x1), x0.max(x1))
}

#[test]
fn vacuum_rabi_doublet_with_unit_prefactors_is_split_by_2g2() {
    let mut p = bare_probe_params();
    p.g2 = default_working_point().g2;
    p.omega_eg = p.omega2;
    let (lo, hi) = rabi_peaks(&p, ProbeConvention::UnitPrefactors);
    assert!(rel(hi - lo, 2.0 * p.g2) < 0.05, "split {} MHz", (hi - lo) / TAU / 1e6);
}

#[test]
fn half_prefactors_widen_the_doublet_by_sqrt2() {
    // The probe Hamiltonian with halved atomic energies detunes the atom by
    // (ω_eg − ω_d)/2, which turns the 2g splitting into 2√2 g.
    let mut p = bare_probe_params();
    p.g2 = default_working_point().g2;
    p.omega_eg = p.omega2;
    let (lo, hi) = rabi_peaks(&p, ProbeConvention::HalfPrefactors);
    let expected = 2.0 * 2f64.sqrt() * p.g2;
    assert!(rel(hi - lo, expected) < 0.02, "split {} MHz", (hi - lo) / TAU / 1e6);
}

#[test]
fn mode2_crossing_sits_near_19_5_milli_flux_quanta() {
    let p = default_working_point();
    let flux = FluxParams::working_point();
    let a = flux_anticrossing(
        &p,
        &flux,
        &LevelModel::Fixed,
        Interaction::G2,
        0.01,
        0.025,
        Truncation::new(1, 2),
    )
    .unwrap();
    assert!(rel(a.at, 19.5e-3) < 0.05, "crossing at {}", a.at);
    assert!(rel(a.gap, 2.0 * p.g2) < 1e-3);
}

#[test]
fn flux_sweep_is_even_in_bias_and_normalized() {
    let mut p = default_working_point();
    p.g1 = 0.0;
    p.g3 = 0.0;
    let flux = FluxParams::working_point();
    let level = LevelModel::Hyperbolic {
        gap: from_hz(3.0e9),
        slope: from_hz(9.0e11),
    };
    let wd: Vec<f64> = (0..5).map(|k| p.omega2 + (k as f64 - 2.0) * 4.0 * p.kappa2).collect();
    let rows = flux_sweep(
        &p,
        &flux,
        &level,
        &[-0.021, 0.021],
        &wd,
        0.01,
        Truncation::new(0, 4),
        ProbeConvention::default(),
    )
    .unwrap();
    for (a, b) in rows[0].iter().zip(&rows[1]) {
        assert!((a.t - b.t).norm() <= 1e-12 * a.t.norm().max(1e-300));
    }
    let top = rows.iter().flatten().map(|q| q.t_normalized).fold(0.0, f64::max);
    assert_eq!(top, 1.0);
    assert!(rows.iter().flatten().all(|q| q.t.norm() <= 1.0 + 1e-9));
}

#[test]
fn photon_numbers_from_emitted_power() {
    let p = default_working_point();
    let n1 = photons_from_power(-134.4, p.omega1, p.kappa1).unwrap();
    let n2 = photons_from_power(-129.4, p.omega2, p.kappa2).unwrap();
    // Independent evaluation: P[W] = 1e-3·10^(dBm/10), N = 2P/(ħωκ), with ħ
    // from the exact Planck constant (agrees with the 10-digit ħ to 1e-9).
    let hbar = 6.626_070_15e-34 / TAU;
    let direct = |dbm: f64, w: f64, k: f64| 2.0 * 1e-3 * 10f64.powf(dbm / 10.0) / (hbar * w * k);
    assert!(rel(n1, direct(-134.4, p.omega1, p.kappa1)) < 1e-9);
    assert!(rel(n2, direct(-129.4, p.omega2, p.kappa2)) < 1e-9);
    assert!(rel(n1, 5.0) < 0.3, "n1 = {n1}");
    assert!(rel(n2, 2.0) < 0.3, "n2 = {n2}");
}

#[test]
fn schawlow_townes_and_energy_balance() {
    let p = default_working_point();
    let st = schawlow_townes(p.kappa1, p.kappa2, 10.0).unwrap();
    assert!(rel(st, from_hz(128.5e3)) < 1e-12, "{} Hz", st / TAU);

    let b = energy_balance(5.0, 2.0, from_hz(0.63e6), from_hz(1.94e6));
    assert!((b.imbalance - 0.188_144_329_896_907_2).abs() < 1e-12, "{}", b.imbalance);
    assert_eq!(energy_balance(2.0, 1.0, 1.0, 2.0).imbalance, 0.0);
    let s = steady_photon_numbers(&p).unwrap();
    assert!(energy_balance(s.n1, s.n2, p.kappa1, p.kappa2).imbalance < 0.3);
}
