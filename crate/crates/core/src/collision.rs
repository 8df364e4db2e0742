//! Time-bin collision model of the cascaded light-matter interaction.
//!
//! Each bin carries two fresh vacuum field modes (the two polarizations c and d)
//! that interact first with the atoms, then with the mirror, then with the atoms
//! again. Tracing out the bin gives a one-step map on mechanics and spin whose
//! Lindblad generator is fitted by least squares. The ordering inside the bin is
//! the only trace of the propagation delay that is kept.
//!
//! Operators act on mech ⊗ spin ⊗ c ⊗ d. Couplings are in rad/s and each bin
//! contributes interactions of strength g√dt, matching vacuum noise increments
//! with [ΔB, ΔB†] = dt.

use std::collections::BTreeMap;

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest allowed dt·g² and dt·ω.
pub const HIERARCHY_LIMIT: f64 = 1e-2;
/// Default relative residual above which a generator fit is rejected.
pub const DEFAULT_FIT_THRESHOLD: f64 = 0.05;

/// Labels of the system quadratures, in fitting order.
pub const QUADRATURE_LABELS: [&str; 4] = ["X_m", "P_m", "X_s", "P_s"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CascadeCouplings {
    /// Mirror-light coupling g_m.
    pub mirror: f64,
    /// Collective atom-light coupling √N g_at.
    pub spin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CascadeConfig {
    pub dt_bin: f64,
    pub dim_field: usize,
    pub dim_mech: usize,
    pub dim_spin: usize,
    /// Quarter-wave polarization rotation between the two atomic passes.
    pub phase_shift_enabled: bool,
    pub couplings: CascadeCouplings,
    pub n_bins: usize,
    /// Free mechanical frequency during a bin, rad/s.
    pub omega_mech: f64,
    /// Free spin-wave frequency during a bin, rad/s.
    pub omega_spin: f64,
    /// Relative residual above which [`extract_generator`] fails.
    pub fit_threshold: f64,
}

impl CascadeConfig {
    /// Field truncation 2, system truncation 6 x 6, no free evolution.
    pub fn new(dt_bin: f64, couplings: CascadeCouplings, phase_shift_enabled: bool) -> Result<Self> {
        let cfg = CascadeConfig {
            dt_bin,
            dim_field: 2,
            dim_mech: 6,
            dim_spin: 6,
            phase_shift_enabled,
            couplings,
            n_bins: 100,
            omega_mech: 0.0,
            omega_spin: 0.0,
            fit_threshold: DEFAULT_FIT_THRESHOLD,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_bin > 0.0 && self.dt_bin.is_finite()) {
            return Err(Error::invalid("dt_bin", format!("must be finite and > 0, got {}", self.dt_bin)));
        }
        if self.dim_field < 2 {
            return Err(Error::invalid("dim_field", "must be >= 2"));
        }
        // The fit probes levels 0..3 and compares on levels 0..5.
        if self.dim_mech < PROBE_LEVELS + 2 || self.dim_spin < PROBE_LEVELS + 2 {
            return Err(Error::invalid("dim_mech/dim_spin", format!("must be >= {}", PROBE_LEVELS + 2)));
        }
        for (name, v) in [
            ("couplings.mirror", self.couplings.mirror),
            ("couplings.spin", self.couplings.spin),
            ("omega_mech", self.omega_mech),
            ("omega_spin", self.omega_spin),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        let g2 = self.couplings.mirror.powi(2).max(self.couplings.spin.powi(2));
        if self.dt_bin * g2 > HIERARCHY_LIMIT {
            return Err(Error::HierarchyViolation { quantity: "dt_bin*g^2", value: self.dt_bin * g2 });
        }
        let w = self.omega_mech.abs().max(self.omega_spin.abs());
        if self.dt_bin * w > HIERARCHY_LIMIT {
            return Err(Error::HierarchyViolation { quantity: "dt_bin*omega", value: self.dt_bin * w });
        }
        if !(self.fit_threshold > 0.0) {
            return Err(Error::invalid("fit_threshold", "must be > 0"));
        }
        Ok(())
    }

    pub fn with_dt(&self, dt_bin: f64) -> Result<Self> {
        let cfg = CascadeConfig { dt_bin, ..*self };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn system_dim(&self) -> usize {
        self.dim_mech * self.dim_spin
    }

    fn bin_dim(&self) -> usize {
        self.dim_field * self.dim_field
    }

    /// Expected coefficient of X_m X_s in the fitted Hamiltonian.
    pub fn target_coupling(&self) -> f64 {
        let product = self.couplings.mirror * self.couplings.spin;
        if self.phase_shift_enabled {
            -2.0 * product
        } else {
            -std::f64::consts::SQRT_2 * product
        }
    }

    /// Expected rate of the X_m dissipator, 2 g_m².
    pub fn target_mech_diffusion(&self) -> f64 {
        2.0 * self.couplings.mirror.powi(2)
    }

    /// Expected spin self-interaction N g_at², present only without the phase shift.
    pub fn target_backaction(&self) -> f64 {
        if self.phase_shift_enabled {
            0.0
        } else {
            self.couplings.spin.powi(2)
        }
    }
}

const PROBE_LEVELS: usize = 3;

type CMat = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn lowering(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if j == i + 1 { c((j as f64).sqrt()) } else { c(0.0) })
}

fn position(n: usize) -> CMat {
    let a = lowering(n);
    (&a + a.adjoint()) * c(std::f64::consts::FRAC_1_SQRT_2)
}

fn momentum(n: usize) -> CMat {
    let a = lowering(n);
    (a.adjoint() - &a) * Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2)
}

fn kron_all(parts: &[&CMat]) -> CMat {
    parts.iter().skip(1).fold(parts[0].clone(), |acc, m| acc.kronecker(m))
}

/// Quadratures (X_m, P_m, X_s, P_s) on the system space.
fn system_quadratures(cfg: &CascadeConfig) -> [CMat; 4] {
    let (dm, ds) = (cfg.dim_mech, cfg.dim_spin);
    let (im, is) = (CMat::identity(dm, dm), CMat::identity(ds, ds));
    [
        position(dm).kronecker(&is),
        momentum(dm).kronecker(&is),
        im.kronecker(&position(ds)),
        im.kronecker(&momentum(ds)),
    ]
}

fn exp_hermitian(h: &CMat, scale: f64) -> CMat {
    (h * Complex64::new(0.0, -scale)).exp()
}

/// Unitary of one collision on system ⊗ bin.
pub fn step_unitary(cfg: &CascadeConfig) -> Result<CMat> {
    cfg.validate()?;
    let (dm, ds, df) = (cfg.dim_mech, cfg.dim_spin, cfg.dim_field);
    let (im, is, i_f) = (CMat::identity(dm, dm), CMat::identity(ds, ds), CMat::identity(df, df));
    let xm = kron_all(&[&position(dm), &is, &i_f, &i_f]);
    let xs = kron_all(&[&im, &position(ds), &i_f, &i_f]);
    let ps = kron_all(&[&im, &momentum(ds), &i_f, &i_f]);
    let xc = kron_all(&[&im, &is, &position(df), &i_f]);
    let xd = kron_all(&[&im, &is, &i_f, &position(df)]);
    let pd = kron_all(&[&im, &is, &i_f, &momentum(df)]);
    // Quadratures of d rotated by a quarter wave.
    let r = c(std::f64::consts::FRAC_1_SQRT_2);
    let xbar = (&xd + &pd) * r;
    let pbar = (&pd - &xd) * r;

    let sqrt2 = std::f64::consts::SQRT_2;
    let spin = c(sqrt2 * cfg.couplings.spin);
    let mirror = c(sqrt2 * cfg.couplings.mirror);
    let first = (&xbar * &ps - &pbar * &xs) * spin;
    let (middle, last) = if cfg.phase_shift_enabled {
        ((&xc + &xbar) * &xm * mirror, -first.clone())
    } else {
        ((&xc + &xd) * &xm * mirror, (&xbar * &xs + &pbar * &ps) * spin)
    };

    let root = cfg.dt_bin.sqrt();
    let mut u = exp_hermitian(&last, root) * exp_hermitian(&middle, root) * exp_hermitian(&first, root);
    if cfg.omega_mech != 0.0 || cfg.omega_spin != 0.0 {
        let bin = df * df;
        let free = CMat::from_fn(u.nrows(), u.ncols(), |i, j| {
            if i != j {
                return c(0.0);
            }
            let sys = i / bin;
            let (m, s) = (sys / ds, sys % ds);
            let e = cfg.omega_mech * m as f64 + cfg.omega_spin * s as f64;
            Complex64::from_polar(1.0, -e * cfg.dt_bin)
        });
        u = free * u;
    }
    Ok(u)
}

/// One-collision map on the system, in Kraus form.
#[derive(Debug, Clone)]
pub struct ReducedMap {
    kraus: Vec<CMat>,
}

impl ReducedMap {
    pub fn apply(&self, rho: &CMat) -> CMat {
        self.kraus.iter().fold(CMat::zeros(rho.nrows(), rho.ncols()), |acc, k| acc + k * rho * k.adjoint())
    }

    pub fn kraus_operators(&self) -> &[CMat] {
        &self.kraus
    }
}

/// Reduced map ρ ↦ Tr_bin[U (ρ ⊗ |vac⟩⟨vac|) U†] with Kraus operators ⟨k|U|vac⟩.
pub fn reduced_map(cfg: &CascadeConfig) -> Result<ReducedMap> {
    let u = step_unitary(cfg)?;
    let (d, f) = (cfg.system_dim(), cfg.bin_dim());
    let kraus = (0..f).map(|k| CMat::from_fn(d, d, |i, j| u[(i * f + k, j * f)])).collect();
    Ok(ReducedMap { kraus })
}

/// Fitted Lindblad generator
/// ρ̇ = -i[H, ρ] + Σ_ij C_ij (q_i ρ q_j - ½{q_j q_i, ρ}) over the quadratures q.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratorEstimate {
    /// H as a matrix on the truncated system space.
    #[serde(skip)]
    pub hamiltonian_part: CMat,
    /// Coefficients of the linear and symmetrized quadratic terms of H.
    pub hamiltonian_terms: BTreeMap<String, f64>,
    /// Diagonal of C, keyed by the Hermitian jump operator.
    pub dissipator_rates: BTreeMap<String, f64>,
    /// Full Kossakowski matrix C.
    #[serde(skip)]
    pub kossakowski: Matrix4<Complex64>,
    /// ‖fit - data‖ / ‖data‖ over all probes.
    pub fit_residual: f64,
}

impl GeneratorEstimate {
    /// Coefficient of the symmetrized product q_i q_j in H.
    pub fn quadratic(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.hamiltonian_terms[&quadratic_label(a, b)]
    }

    /// Coefficient of X_m X_s in H.
    pub fn coupling(&self) -> f64 {
        self.quadratic(0, 2)
    }

    /// Rate of the X_m dissipator.
    pub fn mech_diffusion(&self) -> f64 {
        self.kossakowski[(0, 0)].re
    }

    /// Coefficient b of the spin self-interaction H ⊃ -b (X_s² + P_s²).
    pub fn backaction(&self) -> f64 {
        -0.5 * (self.quadratic(2, 2) + self.quadratic(3, 3))
    }
}

fn quadratic_label(i: usize, j: usize) -> String {
    format!("{} {}", QUADRATURE_LABELS[i], QUADRATURE_LABELS[j])
}

type Superop = Box<dyn Fn(&CMat) -> CMat>;

fn fit_basis(q: &[CMat; 4]) -> (Vec<String>, Vec<Superop>) {
    let mut names = Vec::new();
    let mut gens: Vec<Superop> = Vec::new();
    let commutator = |m: CMat| -> Superop {
        Box::new(move |r: &CMat| (&m * r - r * &m) * Complex64::new(0.0, -1.0))
    };
    for (i, qi) in q.iter().enumerate() {
        names.push(QUADRATURE_LABELS[i].to_string());
        gens.push(commutator(qi.clone()));
    }
    for i in 0..4 {
        for j in i..4 {
            names.push(quadratic_label(i, j));
            gens.push(commutator((&q[i] * &q[j] + &q[j] * &q[i]) * c(0.5)));
        }
    }
    let dissipator = |a: CMat, b: CMat| -> Box<dyn Fn(&CMat) -> CMat> {
        let ba = &b * &a;
        Box::new(move |r: &CMat| &a * r * &b - (&ba * r + r * &ba) * c(0.5))
    };
    for i in 0..4 {
        names.push(format!("C {} {}", QUADRATURE_LABELS[i], QUADRATURE_LABELS[i]));
        gens.push(dissipator(q[i].clone(), q[i].clone()));
    }
    for i in 0..4 {
        for j in i + 1..4 {
            let dij = dissipator(q[i].clone(), q[j].clone());
            let dji = dissipator(q[j].clone(), q[i].clone());
            names.push(format!("Re C {} {}", QUADRATURE_LABELS[i], QUADRATURE_LABELS[j]));
            gens.push(Box::new(move |r: &CMat| dij(r) + dji(r)));
            let dij = dissipator(q[i].clone(), q[j].clone());
            let dji = dissipator(q[j].clone(), q[i].clone());
            names.push(format!("Im C {} {}", QUADRATURE_LABELS[i], QUADRATURE_LABELS[j]));
            gens.push(Box::new(move |r: &CMat| (dij(r) - dji(r)) * Complex64::new(0.0, 1.0)));
        }
    }
    (names, gens)
}

/// Fits the generator of one collision, (Φ - id)/dt, over all operators up to
/// quadratic order in the quadratures.
///
/// Probes are the matrix units on the lowest three levels of each mode and the
/// comparison uses levels below five, away from the truncation edge. The fitted
/// generator differs from the continuum one by O(dt_bin).
pub fn extract_generator(cfg: &CascadeConfig) -> Result<GeneratorEstimate> {
    let map = reduced_map(cfg)?;
    let q = system_quadratures(cfg);
    let (names, gens) = fit_basis(&q);
    let ds = cfg.dim_spin;
    let d = cfg.system_dim();
    let probes: Vec<usize> =
        (0..PROBE_LEVELS).flat_map(|m| (0..PROBE_LEVELS).map(move |s| m * ds + s)).collect();
    let kept: Vec<usize> =
        (0..PROBE_LEVELS + 2).flat_map(|m| (0..PROBE_LEVELS + 2).map(move |s| m * ds + s)).collect();
    let per_probe = kept.len() * kept.len();
    let rows = 2 * per_probe * probes.len() * probes.len();
    let mut design = Mat::<f64>::zeros(rows, gens.len());
    let mut data = Mat::<f64>::zeros(rows, 1);

    let mut block = 0;
    for &a in &probes {
        for &b in &probes {
            let mut unit = CMat::zeros(d, d);
            unit[(a, b)] = c(1.0);
            let mut change = map.apply(&unit) - &unit;
            change /= c(cfg.dt_bin);
            let base = 2 * per_probe * block;
            let fill = |m: &CMat, mut put: Box<dyn FnMut(usize, f64) + '_>| {
                let mut k = 0;
                for &i in &kept {
                    for &j in &kept {
                        put(base + 2 * k, m[(i, j)].re);
                        put(base + 2 * k + 1, m[(i, j)].im);
                        k += 1;
                    }
                }
            };
            fill(&change, Box::new(|r, v| data[(r, 0)] = v));
            for (col, g) in gens.iter().enumerate() {
                let out = g(&unit);
                fill(&out, Box::new(|r, v| design[(r, col)] = v));
            }
            block += 1;
        }
    }

    let theta = design.qr().solve_lstsq(&data);
    let fitted = &design * &theta;
    let (mut err, mut norm) = (0.0, 0.0);
    for r in 0..rows {
        err += (fitted[(r, 0)] - data[(r, 0)]).powi(2);
        norm += data[(r, 0)].powi(2);
    }
    let fit_residual = if norm > 0.0 { (err / norm).sqrt() } else { 0.0 };

    let coef: Vec<f64> = (0..gens.len()).map(|k| theta[(k, 0)]).collect();
    let mut hamiltonian_terms = BTreeMap::new();
    let mut hamiltonian_part = CMat::zeros(d, d);
    for (k, name) in names.iter().take(14).enumerate() {
        hamiltonian_terms.insert(name.clone(), coef[k]);
    }
    for (i, qi) in q.iter().enumerate() {
        hamiltonian_part += qi * c(coef[i]);
    }
    let mut k = 4;
    for i in 0..4 {
        for j in i..4 {
            hamiltonian_part += (&q[i] * &q[j] + &q[j] * &q[i]) * c(0.5 * coef[k]);
            k += 1;
        }
    }
    let mut kossakowski = Matrix4::<Complex64>::zeros();
    let mut dissipator_rates = BTreeMap::new();
    for i in 0..4 {
        kossakowski[(i, i)] = c(coef[14 + i]);
        dissipator_rates.insert(QUADRATURE_LABELS[i].to_string(), coef[14 + i]);
    }
    let mut k = 18;
    for i in 0..4 {
        for j in i + 1..4 {
            let z = Complex64::new(coef[k], coef[k + 1]);
            kossakowski[(i, j)] = z;
            kossakowski[(j, i)] = z.conj();
            k += 2;
        }
    }
    if !(fit_residual <= cfg.fit_threshold) {
        return Err(Error::PoorFit { residual: fit_residual, threshold: cfg.fit_threshold });
    }
    Ok(GeneratorEstimate { hamiltonian_part, hamiltonian_terms, dissipator_rates, kossakowski, fit_residual })
}

/// Fitted spin self-interaction b in H ⊃ -b (X_s² + P_s²), in rad/s.
pub fn detect_backaction(cfg: &CascadeConfig) -> Result<f64> {
    Ok(extract_generator(cfg)?.backaction())
}

/// Per-bin diagnostics of repeated collisions.
#[derive(Debug, Clone, Serialize)]
pub struct CascadeTrajectory {
    pub times: Vec<f64>,
    pub mech_occupation: Vec<f64>,
    pub spin_occupation: Vec<f64>,
    /// Largest |Tr ρ - 1| over all bins.
    pub max_trace_error: f64,
    /// Smallest eigenvalue of ρ over all bins.
    pub min_eigenvalue: f64,
    #[serde(skip)]
    pub final_state: CMat,
}

/// Applies `cfg.n_bins` collisions to the system state `rho0`.
pub fn run_cascade(cfg: &CascadeConfig, rho0: &CMat) -> Result<CascadeTrajectory> {
    let d = cfg.system_dim();
    if rho0.nrows() != d || rho0.ncols() != d {
        return Err(Error::invalid("rho0", format!("expected a {d}x{d} matrix")));
    }
    let map = reduced_map(cfg)?;
    let (dm, ds) = (cfg.dim_mech, cfg.dim_spin);
    let n_mech = CMat::from_diagonal(&nalgebra::DVector::from_fn(d, |i, _| c((i / ds) as f64)));
    let n_spin = CMat::from_diagonal(&nalgebra::DVector::from_fn(d, |i, _| c((i % ds) as f64)));
    debug_assert_eq!(d, dm * ds);
    let mut rho = rho0.clone();
    let mut out = CascadeTrajectory {
        times: Vec::with_capacity(cfg.n_bins + 1),
        mech_occupation: Vec::with_capacity(cfg.n_bins + 1),
        spin_occupation: Vec::with_capacity(cfg.n_bins + 1),
        max_trace_error: 0.0,
        min_eigenvalue: f64::INFINITY,
        final_state: CMat::zeros(0, 0),
    };
    for bin in 0..=cfg.n_bins {
        if bin > 0 {
            rho = map.apply(&rho);
        }
        out.times.push(bin as f64 * cfg.dt_bin);
        out.mech_occupation.push((&n_mech * &rho).trace().re);
        out.spin_occupation.push((&n_spin * &rho).trace().re);
        out.max_trace_error = out.max_trace_error.max((rho.trace() - c(1.0)).norm());
        let herm = (&rho + rho.adjoint()) * c(0.5);
        let min = herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        out.min_eigenvalue = out.min_eigenvalue.min(min);
    }
    out.final_state = rho;
    Ok(out)
}

/// Error of the fitted coupling coefficient as dt_bin is halved.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub dt_bins: Vec<f64>,
    pub coupling: Vec<f64>,
    pub errors: Vec<f64>,
    /// log₂ of successive error ratios.
    pub orders: Vec<f64>,
}

pub fn convergence_study(cfg: &CascadeConfig, halvings: usize) -> Result<ConvergenceStudy> {
    let target = cfg.target_coupling();
    let mut study = ConvergenceStudy { dt_bins: vec![], coupling: vec![], errors: vec![], orders: vec![] };
    let mut dt = cfg.dt_bin;
    for _ in 0..=halvings {
        let est = extract_generator(&cfg.with_dt(dt)?)?;
        study.dt_bins.push(dt);
        study.coupling.push(est.coupling());
        study.errors.push((est.coupling() - target).abs());
        dt /= 2.0;
    }
    study.orders = study.errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(study)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dt: f64, gm: f64, gs: f64, phase: bool) -> CascadeConfig {
        CascadeConfig::new(dt, CascadeCouplings { mirror: gm, spin: gs }, phase).unwrap()
    }

    fn vacuum(cfg: &CascadeConfig) -> CMat {
        let mut r = CMat::zeros(cfg.system_dim(), cfg.system_dim());
        r[(0, 0)] = c(1.0);
        r
    }

    #[test]
    fn hierarchy_is_enforced() {
        let g = CascadeCouplings { mirror: 1.0, spin: 2.0 };
        assert!(matches!(CascadeConfig::new(5e-3, g, true), Err(Error::HierarchyViolation { .. })));
        assert!(CascadeConfig::new(2.5e-3, g, true).is_ok());
        let mut ok = CascadeConfig::new(1e-3, g, true).unwrap();
        ok.omega_mech = 20.0;
        assert!(matches!(ok.validate(), Err(Error::HierarchyViolation { quantity: "dt_bin*omega", .. })));
        assert!(CascadeConfig::new(0.0, g, true).is_err());
    }

    #[test]
    fn zero_coupling_is_identity() {
        let u = step_unitary(&cfg(1e-2, 0.0, 0.0, true)).unwrap();
        let id = CMat::identity(u.nrows(), u.ncols());
        assert!((u - id).norm() < 1e-14);
    }

    #[test]
    fn step_is_unitary() {
        for phase in [true, false] {
            let u = step_unitary(&cfg(5e-3, 1.0, 1.2, phase)).unwrap();
            let id = CMat::identity(u.nrows(), u.ncols());
            assert!((u.adjoint() * &u - id).norm() < 1e-10);
        }
    }

    #[test]
    fn uncoupled_system_leaves_bins_in_vacuum() {
        let mut c0 = cfg(1e-2, 0.0, 0.0, true);
        c0.omega_mech = 0.5;
        c0.omega_spin = 0.7;
        let map = reduced_map(&c0).unwrap();
        for k in &map.kraus_operators()[1..] {
            assert!(k.norm() < 1e-14);
        }
    }

    #[test]
    fn single_collision_deviation_is_first_order_in_dt() {
        let dev = |dt: f64| {
            let cf = cfg(dt, 0.8, 0.6, true);
            let map = reduced_map(&cf).unwrap();
            let r = vacuum(&cf);
            (map.apply(&r) - &r).norm()
        };
        let ratio = dev(4e-3) / dev(2e-3);
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn collisions_preserve_trace_and_positivity() {
        let mut cf = cfg(5e-3, 1.0, 1.0, false);
        cf.n_bins = 40;
        let traj = run_cascade(&cf, &vacuum(&cf)).unwrap();
        assert!(traj.max_trace_error < 1e-12);
        assert!(traj.min_eigenvalue > -1e-12);
        assert_eq!(traj.times.len(), 41);
        // Diffusion heats the mechanics at rate γ/2 = g_m² from the vacuum.
        let t = traj.times[40];
        let heating = traj.mech_occupation[40] / t;
        assert!(heating > 0.5 && heating < 1.5, "{heating}");
    }

    #[test]
    fn mirror_alone_gives_position_diffusion() {
        let est = extract_generator(&cfg(2.5e-3, 1.0, 0.0, true)).unwrap();
        assert!((est.mech_diffusion() - 2.0).abs() / 2.0 < 0.05);
        assert!(est.coupling().abs() < 1e-8);
        assert!(est.backaction().abs() < 1e-8);
        assert!(est.dissipator_rates["X_s"].abs() < 0.01 * est.mech_diffusion());
    }

    #[test]
    fn phase_shift_recovers_effective_coupling() {
        let cf = cfg(2.5e-3, 1.0, 1.0, true);
        let est = extract_generator(&cf).unwrap();
        assert!((est.coupling() - cf.target_coupling()).abs() / 2.0 < 0.05, "{}", est.coupling());
        assert!((est.mech_diffusion() - cf.target_mech_diffusion()).abs() / 2.0 < 0.05);
        assert!(est.backaction().abs() < 0.05);
        assert!(est.fit_residual < DEFAULT_FIT_THRESHOLD);
    }

    #[test]
    fn missing_phase_shift_exposes_backaction() {
        let cf = cfg(2.5e-3, 0.1, 1.0, false);
        let est = extract_generator(&cf).unwrap();
        let b = est.backaction();
        assert!((b - 1.0).abs() < 0.1, "{b}");
        assert!(b > est.coupling().abs());
    }

    #[test]
    fn no_atoms_no_backaction() {
        let b = detect_backaction(&cfg(2.5e-3, 1.0, 0.0, false)).unwrap();
        assert!(b.abs() < 1e-8);
    }

    #[test]
    fn strict_threshold_flags_poor_fit() {
        let mut cf = cfg(1e-2, 1.0, 1.0, true);
        cf.fit_threshold = 1e-4;
        assert!(matches!(extract_generator(&cf), Err(Error::PoorFit { .. })));
    }

    #[test]
    fn coupling_converges_at_first_order() {
        let study = convergence_study(&cfg(1e-2, 1.0, 1.0, true), 2).unwrap();
        for order in &study.orders {
            assert!((0.8..=1.2).contains(order), "{:?}", study.orders);
        }
    }
}
