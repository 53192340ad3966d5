//! Adaptive Dormand–Prince 5(4) integrator for real or complex state vectors.

use std::ops::{Add, Mul};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Element type the integrator can work with.
pub trait Scalar: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {
    fn abs(self) -> f64;
}

impl Scalar for f64 {
    fn abs(self) -> f64 {
        f64::abs(self)
    }
}

impl Scalar for C64 {
    fn abs(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; 0 picks one from the output spacing.
    pub initial_step: f64,
    /// Steps below this abort with a stiffness diagnosis.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            initial_step: 0.0,
            min_step: 0.0,
            max_steps: 5_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol * 1e-2,
            ..Self::default()
        }
    }

    /// Minimum step that keeps at least 1e−3 of a period of the fastest
    /// frequency in the problem.
    pub fn with_stiffness_guard(mut self, omega_max: f64) -> Self {
        if omega_max > 0.0 {
            self.min_step = 1e-3 / omega_max;
        }
        self
    }
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine<T: Scalar>(out: &mut [T], y: &[T], h: f64, terms: &[(f64, &[T])]) {
    for i in 0..y.len() {
        let mut acc = T::default();
        for &(c, k) in terms {
            if c != 0.0 {
                acc = acc + k[i] * c;
            }
        }
        out[i] = y[i] + acc * h;
    }
}

/// Integrate `dy/dt = f(t, y)` and return the state at every point of `t_grid`.
///
/// The first grid point is the initial time; its output is `y0` unchanged.
pub fn integrate<T, F>(mut f: F, y0: &[T], t_grid: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<T>>>
where
    T: Scalar,
    F: FnMut(f64, &[T], &mut [T]),
{
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Integrator {
            t: t_grid[0],
            reason: "time grid must be strictly increasing".into(),
        });
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(y.clone());

    let mut k = vec![vec![T::default(); n]; 7];
    let mut tmp = vec![T::default(); n];
    let mut y_new = vec![T::default(); n];

    let mut t = t_grid[0];
    let span = t_grid[t_grid.len() - 1] - t;
    let mut h = if opts.initial_step > 0.0 {
        opts.initial_step
    } else {
        (t_grid.get(1).map_or(span, |t1| t1 - t) * 1e-2)
            .max(10.0 * opts.min_step)
            .max(f64::MIN_POSITIVE)
    };
    f(t, &y, &mut k[0]);
    let mut steps = 0usize;

    for &t_target in &t_grid[1..] {
        while t < t_target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integrator {
                    t,
                    reason: format!("exceeded {} steps", opts.max_steps),
                });
            }
            let remaining = t_target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };

            let (k0, rest) = k.split_at_mut(1);
            let k0 = &k0[0];
            combine(&mut tmp, &y, step, &[(A21, k0)]);
            f(t + C2 * step, &tmp, &mut rest[0]);
            combine(&mut tmp, &y, step, &[(A31, k0), (A32, &rest[0])]);
            f(t + C3 * step, &tmp, &mut rest[1]);
            combine(&mut tmp, &y, step, &[(A41, k0), (A42, &rest[0]), (A43, &rest[1])]);
            f(t + C4 * step, &tmp, &mut rest[2]);
            combine(
                &mut tmp,
                &y,
                step,
                &[(A51, k0), (A52, &rest[0]), (A53, &rest[1]), (A54, &rest[2])],
            );
            f(t + C5 * step, &tmp, &mut rest[3]);
            combine(
                &mut tmp,
                &y,
                step,
                &[
                    (A61, k0),
                    (A62, &rest[0]),
                    (A63, &rest[1]),
                    (A64, &rest[2]),
                    (A65, &rest[3]),
                ],
            );
            f(t + step, &tmp, &mut rest[4]);
            combine(
                &mut y_new,
                &y,
                step,
                &[(B1, k0), (B3, &rest[1]), (B4, &rest[2]), (B5, &rest[3]), (B6, &rest[4])],
            );
            f(t + step, &y_new, &mut rest[5]);

            let mut err = 0.0f64;
            for i in 0..n {
                let e = k0[i] * E1
                    + rest[1][i] * E3
                    + rest[2][i] * E4
                    + rest[3][i] * E5
                    + rest[4][i] * E6
                    + rest[5][i] * E7;
                let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                let r = (e * step).abs() / scale;
                err = err.max(r);
            }
            if !err.is_finite() {
                return Err(Error::Integrator {
                    t,
                    reason: "non-finite state or error estimate".into(),
                });
            }

            if err <= 1.0 {
                t = if last { t_target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                let (k0, rest) = k.split_at_mut(1);
                std::mem::swap(&mut k0[0], &mut rest[5]);
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            let new_h = step * factor;
            if err <= 1.0 && last {
                // Keep the unconstrained step size for the next interval.
                h = h.max(new_h);
            } else {
                h = new_h;
            }
            if h < opts.min_step && !(last && remaining <= 10.0 * opts.min_step) {
                return Err(Error::Integrator {
                    t,
                    reason: format!(
                        "step size {h:.3e} s fell below {:.3e} s; the problem is too stiff \
                         for this frame, integrate in the slow co-rotating frame instead",
                        opts.min_step
                    ),
                });
            }
            if h <= f64::EPSILON * t.abs().max(span) {
                return Err(Error::Integrator {
                    t,
                    reason: "step size underflow".into(),
                });
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
