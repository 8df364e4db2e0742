//! Truncated Fock-space Liouvillian used as an independent check of the
//! Gaussian moment solver.
//!
//! The spin wave is treated as a bosonic mode. The product basis is ordered
//! mechanics-major, |m, s⟩ ↦ m * dim_spin + s, and density matrices are
//! vectorized column by column, so vec(AρB) = (Bᵀ ⊗ A) vec ρ.

use faer::linalg::solvers::Solve;
use faer::Mat;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{Coupling, HamiltonianChoice, MechanicalBath, Mode};
use crate::rates::RateSet;

/// Product of mechanical and spin Fock truncations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TruncatedSpace {
    pub dim_mech: usize,
    pub dim_spin: usize,
    /// Largest allowed product dimension. The dense generator has dim² rows.
    pub cap: usize,
}

impl TruncatedSpace {
    pub const DEFAULT_CAP: usize = 96;

    pub fn new(dim_mech: usize, dim_spin: usize) -> Result<Self> {
        Self::with_cap(dim_mech, dim_spin, Self::DEFAULT_CAP)
    }

    pub fn with_cap(dim_mech: usize, dim_spin: usize, cap: usize) -> Result<Self> {
        if dim_mech < 2 {
            return Err(Error::invalid("dim_mech", "must be >= 2"));
        }
        if dim_spin < 2 {
            return Err(Error::invalid("dim_spin", "must be >= 2"));
        }
        let dim = dim_mech * dim_spin;
        if dim > cap {
            return Err(Error::CapExceeded { dim, cap });
        }
        Ok(TruncatedSpace { dim_mech, dim_spin, cap })
    }

    pub fn dim(&self) -> usize {
        self.dim_mech * self.dim_spin
    }

    pub fn index(&self, m: usize, s: usize) -> usize {
        m * self.dim_spin + s
    }

    fn levels(&self, i: usize) -> (usize, usize) {
        (i / self.dim_spin, i % self.dim_spin)
    }

    fn parity(&self, i: usize) -> usize {
        let (m, s) = self.levels(i);
        (m + s) % 2
    }

    /// Number operator of one mode, as its diagonal.
    fn number_diagonal(&self, mode: Mode) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let (m, s) = self.levels(i);
                match mode {
                    Mode::Mechanics => m as f64,
                    Mode::Spin => s as f64,
                }
            })
            .collect()
    }
}

/// Real sparse operator on the product space.
#[derive(Debug, Clone, Default)]
struct SparseOp {
    entries: Vec<(usize, usize, f64)>,
}

impl SparseOp {
    fn lowering(space: &TruncatedSpace, mode: Mode) -> Self {
        let mut entries = Vec::new();
        for m in 0..space.dim_mech {
            for s in 0..space.dim_spin {
                let (to, n) = match mode {
                    Mode::Mechanics if m > 0 => (space.index(m - 1, s), m),
                    Mode::Spin if s > 0 => (space.index(m, s - 1), s),
                    _ => continue,
                };
                entries.push((to, space.index(m, s), (n as f64).sqrt()));
            }
        }
        SparseOp { entries }
    }

    fn adjoint(&self) -> Self {
        SparseOp { entries: self.entries.iter().map(|&(i, j, v)| (j, i, v)).collect() }
    }

    fn to_dense(&self, dim: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(dim, dim);
        for &(i, j, v) in &self.entries {
            out[(i, j)] += v;
        }
        out
    }

    fn position(space: &TruncatedSpace, mode: Mode) -> Self {
        let a = Self::lowering(space, mode);
        let mut entries: Vec<_> = a.entries.iter().map(|&(i, j, v)| (i, j, v / 2f64.sqrt())).collect();
        entries.extend(a.adjoint().entries.iter().map(|&(i, j, v)| (i, j, v / 2f64.sqrt())));
        SparseOp { entries }
    }
}

/// Lindblad generator stored as its non-Hermitian part K = -iH - ½ Σ γ L†L
/// and the jump operators, so that Lρ = Kρ + ρK† + Σ γ LρL†.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    space: TruncatedSpace,
    effective: DMatrix<Complex64>,
    hamiltonian: DMatrix<f64>,
    jumps: Vec<(f64, SparseOp)>,
    parity_blocks: bool,
}

fn dense_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Builds the generator, splitting γ_m^th into damping and `occupation` as the
/// Gaussian solver does.
pub fn build_liouvillian(
    space: &TruncatedSpace,
    h: &HamiltonianChoice,
    rates: &RateSet,
    occupation: f64,
) -> Result<Liouvillian> {
    let bath = MechanicalBath::from_thermal_rate(rates.gamma_m_th, occupation)?;
    build_liouvillian_with_bath(space, h, rates, &bath)
}

pub fn build_liouvillian_with_bath(
    space: &TruncatedSpace,
    h: &HamiltonianChoice,
    rates: &RateSet,
    bath: &MechanicalBath,
) -> Result<Liouvillian> {
    if space.dim() > space.cap {
        return Err(Error::CapExceeded { dim: space.dim(), cap: space.cap });
    }
    h.check_coupling(rates.g_eff)?;
    let dim = space.dim();
    let a = SparseOp::lowering(space, Mode::Mechanics);
    let s = SparseOp::lowering(space, Mode::Spin);
    let xm = SparseOp::position(space, Mode::Mechanics);
    let xs = SparseOp::position(space, Mode::Spin);

    let a_d = a.to_dense(dim);
    let s_d = s.to_dense(dim);
    let mut ham = DMatrix::<f64>::zeros(dim, dim);
    for (i, (nm, ns)) in space
        .number_diagonal(Mode::Mechanics)
        .into_iter()
        .zip(space.number_diagonal(Mode::Spin))
        .enumerate()
    {
        ham[(i, i)] = h.omega_m * nm + h.omega_spin() * ns;
    }
    let g = rates.g_eff;
    match h.coupling {
        Coupling::FullQuadrature => ham -= xm.to_dense(dim) * xs.to_dense(dim) * g,
        Coupling::BeamsplitterRwa => {
            let hop = a_d.transpose() * &s_d;
            ham -= (&hop + hop.transpose()) * g;
        }
    }

    let jumps = vec![
        (rates.gamma_m_diff, xm),
        (rates.gamma_at_tot(), s),
        (bath.damping * (bath.occupation + 1.0), a.clone()),
        (bath.damping * bath.occupation, a.adjoint()),
    ];
    let mut decay = DMatrix::<f64>::zeros(dim, dim);
    for (rate, op) in &jumps {
        if *rate != 0.0 {
            let l = op.to_dense(dim);
            decay += l.transpose() * l * (0.5 * rate);
        }
    }
    let effective = ham.map(|v| Complex64::new(0.0, -v)) - dense_complex(&decay);
    let jumps: Vec<_> = jumps.into_iter().filter(|(r, _)| *r != 0.0).collect();

    // Every jump flips the total excitation parity and H conserves it, so the
    // generator never mixes blocks with different parity(i) xor parity(j).
    let parity_blocks = jumps
        .iter()
        .all(|(_, op)| op.entries.iter().all(|&(i, j, _)| space.parity(i) != space.parity(j)))
        && (0..dim).all(|i| (0..dim).all(|j| ham[(i, j)] == 0.0 || space.parity(i) == space.parity(j)));
    Ok(Liouvillian { space: *space, effective, hamiltonian: ham, jumps, parity_blocks })
}

impl Liouvillian {
    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    pub fn hamiltonian(&self) -> &DMatrix<f64> {
        &self.hamiltonian
    }

    /// Applies the generator to a density matrix.
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let k = &self.effective;
        let mut out = k * rho + rho * k.adjoint();
        for (rate, op) in &self.jumps {
            let l = dense_complex(&op.to_dense(self.space.dim()));
            out += &l * rho * l.adjoint() * Complex64::new(*rate, 0.0);
        }
        out
    }

    /// Fills the generator restricted to the vectorized indices in `keep`.
    fn restricted(&self, keep: &[usize]) -> Mat<Complex64> {
        let dim = self.space.dim();
        let mut position = vec![usize::MAX; dim * dim];
        for (k, &v) in keep.iter().enumerate() {
            position[v] = k;
        }
        let n = keep.len();
        let mut out = Mat::<Complex64>::zeros(n, n);
        let mut add = |row: usize, col: usize, v: Complex64| {
            let (r, c) = (position[row], position[col]);
            if r != usize::MAX && c != usize::MAX {
                out[(r, c)] += v;
            }
        };
        let k = &self.effective;
        for p in 0..dim {
            for i in 0..dim {
                let v = k[(i, p)];
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..dim {
                    // (I ⊗ K) and (conj K ⊗ I)
                    add(j * dim + i, j * dim + p, v);
                    add(i * dim + j, p * dim + j, v.conj());
                }
            }
        }
        for (rate, op) in &self.jumps {
            for &(i, p, l1) in &op.entries {
                for &(j, q, l2) in &op.entries {
                    add(j * dim + i, q * dim + p, Complex64::new(rate * l1 * l2, 0.0));
                }
            }
        }
        out
    }

    /// Full dense superoperator, dim² x dim².
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = self.space.dim();
        let all: Vec<usize> = (0..dim * dim).collect();
        let m = self.restricted(&all);
        DMatrix::from_fn(dim * dim, dim * dim, |i, j| m[(i, j)])
    }

    /// Vectorized indices of density-matrix entries whose row and column share parity.
    fn even_block(&self) -> Vec<usize> {
        let dim = self.space.dim();
        let mut keep = Vec::with_capacity(dim * dim / 2 + dim);
        for j in 0..dim {
            for i in 0..dim {
                if !self.parity_blocks || self.space.parity(i) == self.space.parity(j) {
                    keep.push(j * dim + i);
                }
            }
        }
        keep
    }
}

/// Dense density matrix on a truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedDensityOperator {
    pub space: TruncatedSpace,
    pub matrix: DMatrix<Complex64>,
}

impl TruncatedDensityOperator {
    pub fn from_matrix(space: TruncatedSpace, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::invalid("matrix", "shape does not match the truncated space"));
        }
        Ok(TruncatedDensityOperator { space, matrix })
    }

    /// Pure product state |m, s⟩.
    pub fn basis_state(space: TruncatedSpace, m: usize, s: usize) -> Result<Self> {
        if m >= space.dim_mech || s >= space.dim_spin {
            return Err(Error::invalid("basis_state", "level outside the truncation"));
        }
        let mut matrix = DMatrix::zeros(space.dim(), space.dim());
        let i = space.index(m, s);
        matrix[(i, i)] = Complex64::new(1.0, 0.0);
        Ok(TruncatedDensityOperator { space, matrix })
    }

    /// Product of truncated, renormalized thermal states.
    pub fn thermal(space: TruncatedSpace, n_mech: f64, n_spin: f64) -> Self {
        let weights = |n: f64, d: usize| -> Vec<f64> {
            let q = if n > 0.0 { n / (n + 1.0) } else { 0.0 };
            let w: Vec<f64> = (0..d).map(|k| q.powi(k as i32)).collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|v| v / z).collect()
        };
        let wm = weights(n_mech, space.dim_mech);
        let ws = weights(n_spin, space.dim_spin);
        let mut matrix = DMatrix::zeros(space.dim(), space.dim());
        for m in 0..space.dim_mech {
            for s in 0..space.dim_spin {
                let i = space.index(m, s);
                matrix[(i, i)] = Complex64::new(wm[m] * ws[s], 0.0);
            }
        }
        TruncatedDensityOperator { space, matrix }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest entry of ρ - ρ†.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Checks Hermiticity and unit trace (1e-10) and positivity (-1e-8).
    pub fn check_invariants(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::invalid("density_matrix", format!("not Hermitian (error {herm:e})")));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::invalid("density_matrix", format!("trace {tr} differs from one")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::invalid("density_matrix", format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn occupation(&self, mode: Mode) -> f64 {
        self.space
            .number_diagonal(mode)
            .iter()
            .enumerate()
            .map(|(i, n)| n * self.matrix[(i, i)].re)
            .sum()
    }

    /// Population in the highest retained level of either mode.
    pub fn boundary_population(&self) -> f64 {
        let sp = &self.space;
        (0..sp.dim())
            .filter(|&i| {
                let (m, s) = sp.levels(i);
                m + 1 == sp.dim_mech || s + 1 == sp.dim_spin
            })
            .map(|i| self.matrix[(i, i)].re)
            .sum()
    }

    /// Expectation value of a real operator given as a dense matrix.
    pub fn expect(&self, op: &DMatrix<f64>) -> Complex64 {
        (dense_complex(op) * &self.matrix).trace()
    }

    /// Trace distance ½‖ρ - σ‖₁.
    pub fn trace_distance(&self, other: &TruncatedDensityOperator) -> f64 {
        let diff = &self.matrix - &other.matrix;
        let h = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        0.5 * h.symmetric_eigenvalues().iter().map(|v| v.abs()).sum::<f64>()
    }
}

/// Quadrature operators (X_m, P_m, X_s, P_s) as dense complex matrices.
pub fn quadratures(space: &TruncatedSpace) -> [DMatrix<Complex64>; 4] {
    let dim = space.dim();
    let quad = |mode| {
        let a = dense_complex(&SparseOp::lowering(space, mode).to_dense(dim));
        let x = (&a + a.adjoint()) / Complex64::new(2f64.sqrt(), 0.0);
        let p = (a.adjoint() - &a) * Complex64::new(0.0, 1.0 / 2f64.sqrt());
        (x, p)
    };
    let (xm, pm) = quad(Mode::Mechanics);
    let (xs, ps) = quad(Mode::Spin);
    [xm, pm, xs, ps]
}

/// Settings for [`steady_state_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullspaceOptions {
    /// Largest allowed population in the top level of either mode.
    pub boundary_threshold: f64,
    /// Relative residual bound, ‖Lρ‖ <= tol ‖L‖ ‖ρ‖.
    pub residual_tolerance: f64,
    /// Smallest singular value of the trace-bordered generator, relative to its scale,
    /// below which the stationary state counts as non-unique.
    pub degeneracy_threshold: f64,
}

impl Default for NullspaceOptions {
    fn default() -> Self {
        NullspaceOptions { boundary_threshold: 1e-4, residual_tolerance: 1e-9, degeneracy_threshold: 1e-10 }
    }
}

/// Stationary state with default checks.
pub fn steady_state_nullspace(l: &Liouvillian) -> Result<TruncatedDensityOperator> {
    steady_state_with(l, &NullspaceOptions::default())
}

/// Solves Lρ = 0 with Tr ρ = 1 by replacing the equation for ρ₀₀ with the trace.
///
/// Only the block of entries with equal row and column parity is solved when the
/// generator conserves that structure; the stationary state lives there.
/// Uniqueness is checked through the smallest singular value of the bordered
/// matrix, estimated by inverse iteration on the LU factors.
pub fn steady_state_with(l: &Liouvillian, opts: &NullspaceOptions) -> Result<TruncatedDensityOperator> {
    let dim = l.space.dim();
    let keep = l.even_block();
    let mut m = l.restricted(&keep);
    let n = keep.len();
    let mut norm_sq = 0.0;
    let mut scale: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let v = m[(i, j)].norm();
            norm_sq += v * v;
            scale = scale.max(v);
        }
    }
    let l_norm = norm_sq.sqrt();
    if scale == 0.0 {
        return Err(Error::DegenerateSteadyState { smallest: 0.0 });
    }
    let original = m.clone();
    // Row of the ρ₀₀ equation becomes the trace functional.
    let anchor = keep.iter().position(|&v| v == 0).expect("diagonal entries are always kept");
    for j in 0..n {
        m[(anchor, j)] = Complex64::new(0.0, 0.0);
    }
    for d in 0..dim {
        let pos = keep.iter().position(|&v| v == d * dim + d).expect("diagonal entries are always kept");
        m[(anchor, pos)] = Complex64::new(scale, 0.0);
    }
    let lu = m.partial_piv_lu();
    let mut rhs = Mat::<Complex64>::zeros(n, 1);
    rhs[(anchor, 0)] = Complex64::new(scale, 0.0);
    let x = lu.solve(&rhs);
    if (0..n).any(|i| !x[(i, 0)].re.is_finite() || !x[(i, 0)].im.is_finite()) {
        return Err(Error::DegenerateSteadyState { smallest: 0.0 });
    }

    let smallest = smallest_singular_value(&lu, n) / scale;
    if smallest < opts.degeneracy_threshold {
        return Err(Error::DegenerateSteadyState { smallest });
    }

    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for (k, &v) in keep.iter().enumerate() {
        rho[(v % dim, v / dim)] = x[(k, 0)];
    }
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let tr = rho.trace();
    let rho = rho / tr;

    let mut vec_rho = Mat::<Complex64>::zeros(n, 1);
    for (k, &v) in keep.iter().enumerate() {
        vec_rho[(k, 0)] = rho[(v % dim, v / dim)];
    }
    let lr = &original * &vec_rho;
    let residual = (0..n).map(|i| lr[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
    let rho_norm = rho.norm();
    let bound = opts.residual_tolerance * l_norm * rho_norm;
    if residual > bound {
        return Err(Error::SteadyStateResidual { residual, bound });
    }
    let state = TruncatedDensityOperator { space: l.space, matrix: rho };
    let population = state.boundary_population();
    if population > opts.boundary_threshold {
        return Err(Error::TruncationSuspect { population, threshold: opts.boundary_threshold });
    }
    Ok(state)
}

fn smallest_singular_value(lu: &faer::linalg::solvers::PartialPivLu<Complex64>, n: usize) -> f64 {
    // Power iteration on (MᴴM)⁻¹ from a fixed, non-degenerate start vector.
    let mut v = Mat::<Complex64>::from_fn(n, 1, |i, _| Complex64::new(1.0 + (i % 7) as f64 * 0.1, 0.0));
    let mut estimate = 0.0;
    for _ in 0..12 {
        let norm = (0..n).map(|i| v[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return 0.0;
        }
        for i in 0..n {
            v[(i, 0)] /= norm;
        }
        let y = lu.solve_adjoint(&v);
        let z = lu.solve(&y);
        let growth = (0..n).map(|i| z[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
        if !growth.is_finite() {
            return 0.0;
        }
        estimate = growth;
        v = z;
    }
    if estimate > 0.0 {
        1.0 / estimate.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Propagates ρ₀ for time `t` with the exponential of the dense generator.
pub fn evolve_fock(
    space: &TruncatedSpace,
    h: &HamiltonianChoice,
    rates: &RateSet,
    occupation: f64,
    rho0: &TruncatedDensityOperator,
    t: f64,
) -> Result<TruncatedDensityOperator> {
    let l = build_liouvillian(space, h, rates, occupation)?;
    evolve_with(&l, rho0, t)
}

/// Largest parity block, in vectorized entries, that [`evolve_with`] exponentiates.
pub const EVOLVE_BLOCK_LIMIT: usize = 2048;

/// Propagates ρ₀ under an already built generator.
///
/// The generator is exponentiated densely, one parity block at a time, so
/// evolution is limited to spaces whose blocks stay below [`EVOLVE_BLOCK_LIMIT`].
pub fn evolve_with(l: &Liouvillian, rho0: &TruncatedDensityOperator, t: f64) -> Result<TruncatedDensityOperator> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    if rho0.space != l.space {
        return Err(Error::invalid("rho0", "lives on a different truncated space"));
    }
    let dim = l.space.dim();
    let even = l.even_block();
    let blocks = if even.len() == dim * dim {
        vec![even]
    } else {
        let mut is_even = vec![false; dim * dim];
        even.iter().for_each(|&v| is_even[v] = true);
        let odd = (0..dim * dim).filter(|&v| !is_even[v]).collect();
        vec![even, odd]
    };
    if let Some(big) = blocks.iter().map(Vec::len).find(|&n| n > EVOLVE_BLOCK_LIMIT) {
        return Err(Error::CapExceeded { dim: big, cap: EVOLVE_BLOCK_LIMIT });
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    for keep in &blocks {
        let v = nalgebra::DVector::from_iterator(keep.len(), keep.iter().map(|&k| rho0.matrix[(k % dim, k / dim)]));
        if v.iter().all(|z| z.norm() == 0.0) {
            continue;
        }
        let m = l.restricted(keep);
        let generator = DMatrix::from_fn(keep.len(), keep.len(), |i, j| m[(i, j)] * t);
        let out = generator.exp() * v;
        for (&k, z) in keep.iter().zip(out.iter()) {
            matrix[(k % dim, k / dim)] = *z;
        }
    }
    let matrix = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(TruncatedDensityOperator { space: l.space, matrix })
}

/// Operating point for the Gaussian cross-check, with every rate in units of
/// the mechanical frequency and both modes resonant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OraclePoint {
    pub g_eff: f64,
    pub gamma_m_diff: f64,
    pub gamma_at_tot: f64,
    pub damping: f64,
    pub occupation: f64,
}

/// Points with steady-state occupation below 3, chosen to exercise every rate.
pub const DEFAULT_ORACLE_POINTS: [OraclePoint; 5] = [
    OraclePoint { g_eff: 0.1, gamma_m_diff: 0.02, gamma_at_tot: 0.3, damping: 0.1, occupation: 0.5 },
    OraclePoint { g_eff: 0.15, gamma_m_diff: 0.0, gamma_at_tot: 0.2, damping: 0.02, occupation: 1.0 },
    OraclePoint { g_eff: 0.3, gamma_m_diff: 0.03, gamma_at_tot: 0.6, damping: 0.1, occupation: 0.3 },
    OraclePoint { g_eff: 0.2, gamma_m_diff: 0.01, gamma_at_tot: 0.4, damping: 0.05, occupation: 0.2 },
    OraclePoint { g_eff: 0.25, gamma_m_diff: 0.0, gamma_at_tot: 0.5, damping: 0.02, occupation: 0.1 },
];

impl OraclePoint {
    /// Rates of a device scaled by its mechanical frequency, with the bath
    /// occupation lowered to `occupation` at fixed thermal rate γ_m N_m.
    pub fn rescaled(rates: &RateSet, omega_m: f64, occupation: f64) -> Result<Self> {
        if !(omega_m > 0.0) {
            return Err(Error::invalid("omega_m", "must be > 0"));
        }
        if !(occupation > 0.0 && occupation.is_finite()) {
            return Err(Error::invalid("occupation", "must be finite and > 0"));
        }
        Ok(OraclePoint {
            g_eff: rates.g_eff / omega_m,
            gamma_m_diff: rates.gamma_m_diff / omega_m,
            gamma_at_tot: rates.gamma_at_tot() / omega_m,
            damping: rates.gamma_m_th / omega_m / occupation,
            occupation,
        })
    }

    fn model(&self) -> Result<(HamiltonianChoice, RateSet, MechanicalBath)> {
        let h = HamiltonianChoice::full_quadrature(1.0, 0.0)?;
        let rates = RateSet::from_effective(self.g_eff, self.gamma_m_diff, self.gamma_at_tot, 0.0, 0.0)?;
        let bath = MechanicalBath::new(self.damping, self.occupation)?;
        Ok((h, rates, bath))
    }
}

/// Steady-state mechanical occupation from both solvers at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleComparison {
    pub point: OraclePoint,
    pub n_gaussian: f64,
    pub n_fock: f64,
    pub relative_error: f64,
    /// ‖Aσ + σAᵀ + D‖ / (‖A‖‖σ‖ + ‖D‖).
    pub lyapunov_residual: f64,
    pub boundary_population: f64,
}

pub fn compare_with_gaussian(point: &OraclePoint, space: &TruncatedSpace) -> Result<OracleComparison> {
    use crate::gaussian::{build_model_with_bath, lyapunov, occupation, steady_state};
    let (h, rates, bath) = point.model()?;
    let model = build_model_with_bath(&h, &rates, &bath)?;
    let state = steady_state(&model)?;
    let n_gaussian = occupation(&state, Mode::Mechanics)?;
    let scale = lyapunov::residual_bound(&model.drift, &model.diffusion, &state.cov) / lyapunov::RESIDUAL_TOLERANCE;
    let lyapunov_residual = lyapunov::residual(&model.drift, &model.diffusion, &state.cov) / scale;
    let l = build_liouvillian_with_bath(space, &h, &rates, &bath)?;
    let rho = steady_state_nullspace(&l)?;
    rho.check_invariants()?;
    let n_fock = rho.occupation(Mode::Mechanics);
    Ok(OracleComparison {
        point: *point,
        n_gaussian,
        n_fock,
        relative_error: (n_fock - n_gaussian).abs() / n_gaussian.abs().max(f64::MIN_POSITIVE),
        lyapunov_residual,
        boundary_population: rho.boundary_population(),
    })
}
