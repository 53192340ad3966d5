//! Dissipators, the vectorized Liouvillian, time evolution and steady states.
//!
//! Density matrices are vectorized row-major: `vec(ρ)[i·dim + j] = ρ_ij`.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{Level, Operator, OperatorSet, Truncation};
use crate::model::SystemParams;
use crate::ode::{self, OdeOptions};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub const TRACE_TOL: f64 = 1e-9;
pub const HERMITIAN_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = -1e-8;

/// A validated density matrix on a truncated composite space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    trunc: Truncation,
    data: Mat<C64>,
}

impl DensityMatrix {
    /// Validate trace, Hermiticity and positivity.
    pub fn new(trunc: Truncation, data: Mat<C64>) -> Result<Self> {
        let dim = trunc.dim();
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.nrows(),
            });
        }
        let rho = Self { trunc, data };
        rho.validate()?;
        Ok(rho)
    }

    /// Build from a row-major vectorized matrix. The Hermitian part is taken
    /// before validation so that round-off asymmetry of a solver is removed.
    pub fn from_vec(trunc: Truncation, v: &[C64]) -> Result<Self> {
        let dim = trunc.dim();
        if v.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: v.len(),
            });
        }
        let data = Mat::from_fn(dim, dim, |i, j| 0.5 * (v[i * dim + j] + v[j * dim + i].conj()));
        Self::new(trunc, data)
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn pure(trunc: Truncation, psi: &[C64]) -> Result<Self> {
        let dim = trunc.dim();
        if psi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: psi.len(),
            });
        }
        let data = Mat::from_fn(dim, dim, |i, j| psi[i] * psi[j].conj());
        Self::new(trunc, data)
    }

    pub fn basis_state(trunc: Truncation, n1: usize, level: Level, n2: usize) -> Self {
        let dim = trunc.dim();
        let k = trunc.index(n1, level, n2);
        let data = Mat::from_fn(dim, dim, |i, j| if i == k && j == k { ONE } else { ZERO });
        Self { trunc, data }
    }

    /// |0, g, 0⟩⟨0, g, 0|.
    pub fn vacuum(trunc: Truncation) -> Self {
        Self::basis_state(trunc, 0, Level::G, 0)
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn dim(&self) -> usize {
        self.trunc.dim()
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.data[(i, i)]).sum()
    }

    pub fn to_vec(&self) -> Vec<C64> {
        let dim = self.dim();
        (0..dim * dim).map(|k| self.data[(k / dim, k % dim)]).collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..=i {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let evs = self
            .data
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigenvalue solver failed: {e:?}")))?;
        Ok(evs.first().copied().unwrap_or(0.0))
    }

    pub fn purity(&self) -> f64 {
        let dim = self.dim();
        let mut p = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                p += self.data[(i, j)].norm_sqr();
            }
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max |ρ − ρ†| = {herm:.3e})"
            )));
        }
        let min = self.min_eigenvalue()?;
        if min < POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}; increase the truncation"
            )));
        }
        Ok(())
    }

    /// Population of each atomic level, traced over both modes.
    pub fn atomic_populations(&self) -> [f64; 3] {
        let mut p = [0.0; 3];
        for (i, (_, level, _)) in self.trunc.states().enumerate() {
            p[level.index()] += self.data[(i, i)].re;
        }
        p
    }

    /// Fock distribution of one mode.
    pub fn photon_distribution(&self, mode: usize) -> Result<Vec<f64>> {
        let len = match mode {
            1 => self.trunc.n1_max + 1,
            2 => self.trunc.n2_max + 1,
            _ => return Err(Error::InvalidMode(mode)),
        };
        let mut p = vec![0.0; len];
        for (i, (n1, _, n2)) in self.trunc.states().enumerate() {
            p[if mode == 1 { n1 } else { n2 }] += self.data[(i, i)].re;
        }
        Ok(p)
    }
}

/// `Tr(ρ·A)`.
pub fn expectation(rho: &DensityMatrix, op: &Operator) -> Result<C64> {
    if op.truncation() != rho.truncation() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: op.dim(),
        });
    }
    Ok(op.iter().map(|(r, c, v)| v * rho.data[(c, r)]).sum())
}

/// One dissipation channel with its rate folded into the operator.
#[derive(Debug, Clone)]
pub struct Collapse {
    pub name: &'static str,
    /// `√rate · bare operator`.
    pub op: Operator,
    pub rate: f64,
    pub rate_folded: bool,
}

#[derive(Debug, Clone, Default)]
pub struct CollapseSet {
    pub channels: Vec<Collapse>,
}

impl CollapseSet {
    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Channels with a nonzero rate.
    pub fn active(&self) -> impl Iterator<Item = &Collapse> {
        self.channels.iter().filter(|c| c.rate > 0.0)
    }

    pub fn get(&self, name: &str) -> Option<&Collapse> {
        self.channels.iter().find(|c| c.name == name)
    }
}

fn channel(name: &'static str, bare: &Operator, rate: f64) -> Result<Collapse> {
    if !(rate >= 0.0) {
        return Err(Error::NegativeRate { name, value: rate });
    }
    Ok(Collapse {
        name,
        op: bare.scale_real(rate.sqrt()),
        rate,
        rate_folded: true,
    })
}

fn atomic_channels(params: &SystemParams, ops: &OperatorSet) -> Result<Vec<Collapse>> {
    use Level::*;
    Ok(vec![
        channel("gamma31", ops.sigma(G, D), params.gamma31)?,
        channel("gamma32", ops.sigma(E, D), params.gamma32)?,
        channel("gamma21", ops.sigma(G, E), params.gamma21)?,
        channel("gamma22", ops.sigma(E, E), params.gamma22)?,
        channel("gamma33", ops.sigma(D, D), params.gamma33)?,
    ])
}

/// The seven channels of the full model. Atomic lines of the form
/// (γ/2)(2LρL† − {L†L, ρ}) get amplitude √γ; the cavity lines
/// κ(2aρa† − {a†a, ρ}) get amplitude √(2κ).
pub fn collapse_operators(params: &SystemParams, trunc: Truncation) -> Result<CollapseSet> {
    collapse_operators_with(params, &OperatorSet::new(trunc))
}

pub fn collapse_operators_with(params: &SystemParams, ops: &OperatorSet) -> Result<CollapseSet> {
    let mut channels = atomic_channels(params, ops)?;
    channels.push(channel("kappa1", &ops.a1, 2.0 * params.kappa1)?);
    channels.push(channel("kappa2", &ops.a2, 2.0 * params.kappa2)?);
    Ok(CollapseSet { channels })
}

/// Dissipators of the weak-probe model: the atomic set plus mode-2 loss only.
pub fn probe_collapse_operators(params: &SystemParams, trunc: Truncation) -> Result<CollapseSet> {
    let ops = OperatorSet::new(trunc);
    let mut channels = atomic_channels(params, &ops)?;
    channels.push(channel("kappa2", &ops.a2, 2.0 * params.kappa2)?);
    Ok(CollapseSet { channels })
}

/// Sparse superoperator in compressed-row form.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    trunc: Truncation,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    /// Largest |H_ij|, used for the stiffness guard of `evolve`.
    omega_max: f64,
    pub hamiltonian_nnz: usize,
    pub channel_names: Vec<&'static str>,
}

/// Assemble `L vec(ρ) = vec(−i[H,ρ] + Σ (LρL† − ½{L†L, ρ}))`.
pub fn liouvillian(h: &Operator, c: &CollapseSet) -> Result<Liouvillian> {
    let trunc = h.truncation();
    let dim = trunc.dim();
    for ch in &c.channels {
        if ch.op.truncation() != trunc {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: ch.op.dim(),
            });
        }
    }
    // K = −iH − ½ Σ L†L, so that Lρ = Kρ + ρK† + Σ LρL†.
    let mut k = h.scale(C64::new(0.0, -1.0));
    for ch in c.active() {
        let ldl = &ch.op.dagger() * &ch.op;
        k = &k + &ldl.scale_real(-0.5);
    }

    let mut trip: Vec<(usize, usize, C64)> = Vec::new();
    for (i, kk, v) in k.iter() {
        for j in 0..dim {
            trip.push((i * dim + j, kk * dim + j, v));
        }
    }
    for (j, kk, v) in k.iter() {
        let v = v.conj();
        for i in 0..dim {
            trip.push((i * dim + j, i * dim + kk, v));
        }
    }
    for ch in c.active() {
        let entries: Vec<_> = ch.op.iter().collect();
        for &(i, kk, v) in &entries {
            for &(j, l, w) in &entries {
                trip.push((i * dim + j, kk * dim + l, v * w.conj()));
            }
        }
    }
    trip.sort_unstable_by_key(|&(r, c, _)| (r, c));

    let n = dim * dim;
    let mut row_ptr = vec![0usize; n + 1];
    let mut cols = Vec::with_capacity(trip.len());
    let mut vals: Vec<C64> = Vec::with_capacity(trip.len());
    let mut last: Option<(usize, usize)> = None;
    for (r, col, v) in trip {
        if last == Some((r, col)) {
            *vals.last_mut().expect("nonempty") += v;
        } else {
            cols.push(col);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, col));
        }
    }
    for r in 0..n {
        row_ptr[r + 1] += row_ptr[r];
    }
    Ok(Liouvillian {
        trunc,
        row_ptr,
        cols,
        vals,
        omega_max: h.max_abs(),
        hamiltonian_nnz: h.nnz(),
        channel_names: c.active().map(|c| c.name).collect(),
    })
}

impl Liouvillian {
    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    /// Side length dim² of the superoperator.
    pub fn size(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                got: x.len(),
            });
        }
        let mut y = vec![ZERO; x.len()];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    /// Tr(L[ρ]) for a vectorized ρ.
    pub fn trace_of_image(&self, x: &[C64]) -> Result<C64> {
        let y = self.apply(x)?;
        let dim = self.trunc.dim();
        Ok((0..dim).map(|i| y[i * dim + i]).sum())
    }
}

/// Time-evolve `rho0` under `l` and return the state at each grid time.
///
/// Every output is checked for trace, Hermiticity and positivity.
pub fn evolve(rho0: &DensityMatrix, l: &Liouvillian, t_grid: &[f64], opts: &OdeOptions) -> Result<Vec<DensityMatrix>> {
    if rho0.truncation() != l.truncation() {
        return Err(Error::DimensionMismatch {
            expected: l.truncation().dim(),
            got: rho0.dim(),
        });
    }
    let mut opts = *opts;
    if opts.min_step == 0.0 {
        opts = opts.with_stiffness_guard(l.omega_max());
    }
    let trajectory = ode::integrate(
        |_, x: &[C64], dx: &mut [C64]| l.apply_into(x, dx),
        &rho0.to_vec(),
        t_grid,
        &opts,
    )?;
    trajectory
        .iter()
        .zip(t_grid)
        .map(|(v, &t)| {
            DensityMatrix::from_vec(l.truncation(), v).map_err(|e| Error::Integrator {
                t,
                reason: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateOptions {
    /// Above this many unknowns the direct solve is followed by iterative
    /// refinement sweeps.
    pub direct_limit: usize,
    pub refinement_sweeps: usize,
    /// Largest tolerated difference between the two independently
    /// normalized solves before the null space is declared degenerate.
    pub uniqueness_tol: f64,
    /// Check uniqueness with a second factorization.
    pub check_uniqueness: bool,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            direct_limit: 400_000,
            refinement_sweeps: 3,
            uniqueness_tol: 1e-7,
            check_uniqueness: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyStateReport {
    pub rho: DensityMatrix,
    /// ‖L vec(ρ)‖ / ‖L‖_F.
    pub residual: f64,
    /// Unknowns in the solved symmetry sector.
    pub unknowns: usize,
    /// Largest entry difference between the two differently normalized solves.
    pub spread: f64,
}

/// Union-find over the sparsity graph of the Liouvillian.
fn components(l: &Liouvillian) -> Vec<usize> {
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let n = l.size();
    let mut parent: Vec<usize> = (0..n).collect();
    for r in 0..n {
        for (c, _) in l.row(r) {
            let (a, b) = (find(&mut parent, r), find(&mut parent, c));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    (0..n).map(|x| find(&mut parent, x)).collect()
}

/// Indices of vec(ρ) that can be nonzero in a steady state: the connected
/// components of the Liouvillian graph that contain diagonal entries.
///
/// Operators with a weak U(1) symmetry (here N₁ − N₂ − σ_ee) split into
/// independent blocks; only the block holding populations carries the
/// steady state, which cuts the linear system by an order of magnitude.
pub fn steady_state_support(l: &Liouvillian) -> Vec<usize> {
    let dim = l.truncation().dim();
    let comp = components(l);
    let mut keep = vec![false; l.size()];
    let mut roots: Vec<usize> = (0..dim).map(|i| comp[i * dim + i]).collect();
    roots.sort_unstable();
    roots.dedup();
    for (idx, c) in comp.iter().enumerate() {
        if roots.binary_search(c).is_ok() {
            keep[idx] = true;
        }
    }
    (0..l.size()).filter(|&i| keep[i]).collect()
}

struct Restricted {
    support: Vec<usize>,
    local: Vec<usize>,
    diag_local: Vec<usize>,
}

fn restrict(l: &Liouvillian) -> Restricted {
    let dim = l.truncation().dim();
    let support = steady_state_support(l);
    let mut local = vec![usize::MAX; l.size()];
    for (k, &g) in support.iter().enumerate() {
        local[g] = k;
    }
    let diag_local = (0..dim).map(|i| local[i * dim + i]).collect();
    Restricted {
        support,
        local,
        diag_local,
    }
}

fn solve_with_trace_row(
    l: &Liouvillian,
    sys: &Restricted,
    replaced: usize,
    opts: &SteadyStateOptions,
) -> Result<Vec<C64>> {
    let n = sys.support.len();
    let mut trip = Vec::with_capacity(l.nnz());
    for (k, &g) in sys.support.iter().enumerate() {
        if k == replaced {
            continue;
        }
        for (c, v) in l.row(g) {
            let lc = sys.local[c];
            debug_assert!(lc != usize::MAX, "support is closed under L");
            trip.push(Triplet::new(k, lc, v));
        }
    }
    for &d in &sys.diag_local {
        trip.push(Triplet::new(replaced, d, ONE));
    }
    let mat = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::Solver(format!("assembling sparse system: {e:?}")))?;
    let lu = mat
        .sp_lu()
        .map_err(|e| Error::Solver(format!("sparse LU failed: {e:?}")))?;
    let mut rhs = Mat::<C64>::zeros(n, 1);
    rhs[(replaced, 0)] = ONE;
    let mut x = rhs.clone();
    lu.solve_in_place(x.as_mut());

    let sweeps = if n > opts.direct_limit {
        opts.refinement_sweeps
    } else {
        0
    };
    for _ in 0..sweeps {
        // r = b − A x, then x += A⁻¹ r.
        let mut r = rhs.clone();
        for (k, &g) in sys.support.iter().enumerate() {
            let ax: C64 = if k == replaced {
                sys.diag_local.iter().map(|&d| x[(d, 0)]).sum()
            } else {
                l.row(g).map(|(c, v)| v * x[(sys.local[c], 0)]).sum()
            };
            r[(k, 0)] -= ax;
        }
        lu.solve_in_place(r.as_mut());
        for k in 0..n {
            let dx = r[(k, 0)];
            x[(k, 0)] += dx;
        }
    }
    Ok((0..n).map(|k| x[(k, 0)]).collect())
}

/// Steady state of `l` with the default options.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    Ok(steady_state_with(l, &SteadyStateOptions::default())?.rho)
}

/// Null vector of `l`, normalized by replacing one equation with Tr ρ = 1.
///
/// Uniqueness is checked by repeating the solve with the trace condition
/// placed on a different row: a unique null space gives the same answer.
pub fn steady_state_with(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<SteadyStateReport> {
    let trunc = l.truncation();
    let dim = trunc.dim();
    let sys = restrict(l);
    let first_row = sys.diag_local[0];
    let x = solve_with_trace_row(l, &sys, first_row, opts)?;

    let embed = |x: &[C64]| {
        let mut full = vec![ZERO; dim * dim];
        for (k, &g) in sys.support.iter().enumerate() {
            full[g] = x[k];
        }
        full
    };
    let full = embed(&x);
    let norm_l = l.frobenius_norm().max(f64::MIN_POSITIVE);
    let residual_of = |v: &[C64]| -> f64 {
        let y = l.apply(v).expect("dimension matches");
        y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / norm_l
    };
    let residual = residual_of(&full);

    let mut spread = 0.0;
    if opts.check_uniqueness && dim > 1 {
        let second_row = *sys.diag_local.last().expect("dim > 1");
        let y = solve_with_trace_row(l, &sys, second_row, opts)?;
        spread = x.iter().zip(&y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let finite = x.iter().chain(&y).all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite || !(spread <= opts.uniqueness_tol) {
            let second = residual_of(&embed(&y));
            return Err(Error::DegenerateSteadyState {
                first: residual,
                second,
                spread,
            });
        }
    }
    if !residual.is_finite() {
        return Err(Error::Solver("steady-state solve produced non-finite values".into()));
    }
    let rho = DensityMatrix::from_vec(trunc, &full)?;
    Ok(SteadyStateReport {
        rho,
        residual,
        unknowns: sys.support.len(),
        spread,
    })
}

/// Standard observables of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub trace: f64,
    pub n1: f64,
    pub n2: f64,
    pub pg: f64,
    pub pe: f64,
    pub pd: f64,
    pub a1: C64,
    pub a2: C64,
}

impl Observables {
    pub fn of(rho: &DensityMatrix, ops: &OperatorSet) -> Result<Self> {
        let [pg, pe, pd] = rho.atomic_populations();
        Ok(Self {
            trace: rho.trace().re,
            n1: expectation(rho, &ops.n1)?.re,
            n2: expectation(rho, &ops.n2)?.re,
            pg,
            pe,
            pd,
            a1: expectation(rho, &ops.a1)?,
            a2: expectation(rho, &ops.a2)?,
        })
    }

    pub const CSV_HEADER: &'static str = "t,Tr,n1,n2,P_g,P_e,P_d,re_a1,im_a1,re_a2,im_a2";

    pub fn csv_fields(&self) -> [f64; 10] {
        [
            self.trace, self.n1, self.n2, self.pg, self.pe, self.pd, self.a1.re, self.a1.im, self.a2.re, self.a2.im,
        ]
    }
}
