use std::path::PathBuf;

use nalgebra::Matrix4;
use num_complex::Complex64;
use optospin::collision::{self, CascadeConfig, CascadeCouplings};
use optospin::config::Config;
use optospin::constants::TWO_PI;
use optospin::fock::{self, TruncatedSpace};
use optospin::gaussian::{self, lyapunov, EvolveOptions, HamiltonianChoice, Mode, MomentState};
use optospin::optimizer;
use optospin::params::{MechVariant, PhysicalParams};
use optospin::rates::{self, RateSet, Stability};
use optospin::units::parse_angular;
use proptest::prelude::*;

fn zipper() -> PhysicalParams {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/zipper.toml");
    Config::load(&path).unwrap().params
}

fn rate_set(g: f64, diff: f64, at: f64, th: f64, cool: f64) -> RateSet {
    RateSet::from_effective(g, diff, at, th, cool).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mirror_coupling_routes_agree(power in 1e-9f64..1e-4, detuning_mhz in 1.0f64..1e4, waist in 10e-6f64..200e-6) {
        let mut p = zipper().with_operating_point(power, TWO_PI * detuning_mhz * 1e6, waist);
        p.mechanics.variant = MechVariant::IdealMirror;
        let d = p.derive().unwrap();
        let composed = rates::g_eff(&d, rates::g_m_mirror(&d), rates::g_at(&d, p.laser.detuning).unwrap());
        let direct = rates::g_eff_mirror_direct(&d, p.laser.detuning).unwrap();
        prop_assert!((composed / direct - 1.0).abs() < 1e-12, "{composed} vs {direct}");
    }

    #[test]
    fn coupling_is_linear_in_power(power in 1e-9f64..1e-5) {
        let p = zipper();
        let g1 = rates::compute_rates(&p.with_operating_point(power, p.laser.detuning, p.laser.waist_w0)).unwrap().g_eff;
        let g4 = rates::compute_rates(&p.with_operating_point(4.0 * power, p.laser.detuning, p.laser.waist_w0)).unwrap().g_eff;
        prop_assert!((g4 / g1 - 4.0).abs() < 1e-9);
    }

    #[test]
    fn spin_diffusion_falls_with_detuning(rabi in 1e5f64..1e8, d1 in 1e6f64..1e10, factor in 1.01f64..10.0) {
        let gamma = TWO_PI * 5.75e6;
        let near = rates::gamma_at_diff(gamma, rabi, d1).unwrap();
        let far = rates::gamma_at_diff(gamma, rabi, d1 * factor).unwrap();
        prop_assert!(far < near);
    }

    #[test]
    fn cooperativity_routes_are_identical(g in 1e3f64..1e8, diff in 1e2f64..1e7, at in 1e2f64..1e7, th in 0.0f64..1e7) {
        let r = rate_set(g, diff, at, th, 0.0);
        let direct = rates::cooperativity(g, r.gamma_m_tot(), r.gamma_at_tot()).unwrap();
        prop_assert_eq!(direct.to_bits(), r.c_from_fields().to_bits());
    }

    #[test]
    fn stability_region_shrinks_with_coupling(omega in 1e5f64..1e8, gamma in 1e3f64..1e8, g in 1e3f64..1e8, factor in 1.0f64..3.0) {
        let weaker = rates::stability_inequality(g, omega, gamma, 0.0);
        let stronger = rates::stability_inequality(g * factor, omega, gamma, 0.0);
        if matches!(weaker, Stability::Unstable) {
            prop_assert!(matches!(stronger, Stability::Unstable));
        }
    }

    #[test]
    fn stable_models_give_physical_steady_states(
        g_frac in 0.01f64..0.95,
        diff in 0.0f64..0.2,
        at in 0.05f64..1.0,
        th in 1e-3f64..0.2,
        n_bath in 0.0f64..20.0,
        rwa in any::<bool>(),
    ) {
        let omega = 1.0;
        let at_tot = at;
        let limit = if rwa { omega } else { rates::stability_boundary(omega, at_tot) };
        let g = g_frac * limit;
        let r = rate_set(g, diff, at, th, 0.0);
        let h = if rwa {
            HamiltonianChoice::beamsplitter_rwa(omega, 0.0, g).unwrap()
        } else {
            HamiltonianChoice::full_quadrature(omega, 0.0).unwrap()
        };
        let model = gaussian::build_model(&h, &r, n_bath).unwrap();
        let s = gaussian::steady_state(&model).unwrap();
        let res = lyapunov::residual(&model.drift, &model.diffusion, &s.cov);
        prop_assert!(res <= lyapunov::residual_bound(&model.drift, &model.diffusion, &s.cov));
        prop_assert!(gaussian::physicality_margin(&s.cov) >= -1e-10);
        prop_assert!((s.cov - s.cov.transpose()).amax() < 1e-12 * s.cov.amax());
    }

    #[test]
    fn integrators_agree(g in 0.05f64..0.4, at in 0.1f64..1.0, th in 1e-3f64..0.1, t in 0.1f64..30.0) {
        let r = rate_set(g, 0.02, at, th, 0.0);
        let h = HamiltonianChoice::full_quadrature(1.0, 0.0).unwrap();
        let model = gaussian::build_model(&h, &r, 2.0).unwrap();
        let s0 = MomentState::thermal(3.0, 0.0);
        let a = gaussian::evolve(&model, &s0, t, &EvolveOptions::dormand_prince(0.5)).unwrap();
        let b = gaussian::evolve(&model, &s0, t, &EvolveOptions::matrix_exponential(0.5)).unwrap();
        let scale = b.cov.amax();
        prop_assert!((a.cov - b.cov).amax() <= 1e-7 * scale, "{}", (a.cov - b.cov).amax());
    }

    #[test]
    fn frequency_strings_round_trip(v in 1e-3f64..1e3) {
        let mhz = parse_angular(&format!("2π·{v} MHz")).unwrap();
        let hz = parse_angular(&format!("{} Hz", v * 1e6)).unwrap();
        let rad = parse_angular(&format!("{} rad/s", TWO_PI * v * 1e6)).unwrap();
        prop_assert!((mhz / hz - 1.0).abs() < 1e-12);
        prop_assert!((mhz / rad - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn collision_step_preserves_trace(mirror in 0.1f64..1.5, spin in 0.1f64..1.5, phase in any::<bool>(), seed in any::<u64>()) {
        let cfg = CascadeConfig::new(2.5e-3, CascadeCouplings { mirror, spin }, phase).unwrap();
        let map = collision::reduced_map(&cfg).unwrap();
        let dim = cfg.system_dim();
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m = nalgebra::DMatrix::from_fn(dim, dim, |_, _| Complex64::new(next(), next()));
        let rho = &m * m.adjoint();
        let rho = &rho / rho.trace();
        let out = map.apply(&rho);
        prop_assert!((out.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        prop_assert!((&out - out.adjoint()).camax() < 1e-12);
    }
}

#[test]
fn optimizer_is_deterministic() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/zipper.toml");
    let cfg = Config::load(&path).unwrap();
    let spec = cfg.search.clone().unwrap();
    let a = optimizer::optimize(&spec, &cfg.params).unwrap();
    let b = optimizer::optimize(&spec, &cfg.params).unwrap();
    assert_eq!(a.best.point, b.best.point);
    assert_eq!(a.best.objective.to_bits(), b.best.objective.to_bits());
}

#[test]
fn fock_occupation_converges_with_truncation() {
    let point = fock::DEFAULT_ORACLE_POINTS[1];
    let small = fock::compare_with_gaussian(&point, &TruncatedSpace::new(10, 8).unwrap()).unwrap();
    let large = fock::compare_with_gaussian(&point, &TruncatedSpace::new(12, 8).unwrap()).unwrap();
    assert!((large.n_fock / small.n_fock - 1.0).abs() < 2e-3, "{} vs {}", small.n_fock, large.n_fock);
}

#[test]
fn vacuum_covariance_is_half_identity() {
    assert_eq!(MomentState::vacuum().cov, Matrix4::identity() * 0.5);
    let s = MomentState::thermal(1.5, 0.0);
    assert_eq!(gaussian::occupation(&s, Mode::Mechanics).unwrap(), 1.5);
}
