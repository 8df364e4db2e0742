//! Acceptance checks. Run with `cargo test -p optospin --test acceptance`;
//! prints one PASS/FAIL line per criterion and exits non-zero if any fails.

use std::path::PathBuf;

use optospin::collision::{self, CascadeConfig, CascadeCouplings};
use optospin::config::Config;
use optospin::constants::TWO_PI;
use optospin::fock::{self, TruncatedDensityOperator, TruncatedSpace, DEFAULT_ORACLE_POINTS};
use optospin::gaussian::{self, HamiltonianChoice, Mode};
use optospin::optimizer::{self, OperatingPoint};
use optospin::rates::{self, RateSet};
use optospin::reference::{self, MEMBRANE, ZIPPER};

// Tolerances, relative unless noted.
const THERMAL_TOL: f64 = 0.05;
const DIFFUSION_TOL: f64 = 0.05;
const ZIPPER_C0_TOL: f64 = 0.02;
const MEMBRANE_C0_TOL: f64 = 0.03;
const MEMBRANE_TOL: f64 = 0.10;
const COOLING_GRID_POINTS: usize = 200;
const ORACLE_TOL: f64 = 0.01;
const LYAPUNOV_TOL: f64 = 1e-10;
const ELIMINATION_TOL: f64 = 0.05;
const BACKACTION_TOL: f64 = 0.10;
const ORDER_RANGE: (f64, f64) = (0.8, 1.2);
const SWAP_OCCUPATION: f64 = 1e-3;
const SWAP_TIME_TOL: f64 = 1e-3;
const DETUNING_FACTOR: f64 = 3.0;
const MIN_MEMBRANE_WAIST: f64 = 50e-6;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn config(name: &str) -> Config {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    Config::load(&path).expect("shipped configuration parses")
}

fn rel(got: f64, want: f64) -> f64 {
    got / want - 1.0
}

fn khz(rad: f64) -> f64 {
    rad / TWO_PI / 1e3
}

fn thermal_rate() -> Verdict {
    let p = config("zipper.toml").params;
    let rate = rates::gamma_m_th(&p.mechanics, p.laser.power_w).unwrap();
    // k_B (T0 + dT/dP P) / (ħ Q) with T = 4 K + 12 K/mW * 2.5e-4 mW = 4.003 K.
    let hand = 1.380649e-23 * 4.003 / (1.054571817e-34 * 1e5);
    let e = rel(rate, ZIPPER.gamma_m_th);
    verdict(
        e.abs() <= THERMAL_TOL && rel(rate, hand).abs() < 1e-12,
        format!("gamma_m_th = 2pi*{:.1} kHz vs 2pi*844 kHz ({:+.2}%), hand value 2pi*{:.1} kHz", khz(rate), 100.0 * e, khz(hand)),
    )
}

fn mechanical_diffusion() -> Verdict {
    let rates = rates::compute_rates(&config("zipper.toml").params).unwrap();
    let e = rel(rates.gamma_m_diff, ZIPPER.gamma_m_diff);
    verdict(e.abs() <= DIFFUSION_TOL, format!("gamma_m_diff = 2pi*{:.1} kHz vs 2pi*541 kHz ({:+.2}%)", khz(rates.gamma_m_diff), 100.0 * e))
}

fn cooperativity_consistency() -> Verdict {
    let z = ZIPPER.implied_c0().unwrap();
    let m = MEMBRANE.implied_c0().unwrap();
    let (ez, em) = (rel(z, ZIPPER.coop_c0), rel(m, MEMBRANE.coop_c0));
    verdict(
        ez.abs() <= ZIPPER_C0_TOL && em.abs() <= MEMBRANE_C0_TOL,
        format!("C0 from published rates: zipper {z:.2} vs 124.4 ({:+.2}%), membrane {m:.3} vs 6.5 ({:+.2}%)", 100.0 * ez, 100.0 * em),
    )
}

fn membrane_rates() -> Verdict {
    let p = config("membrane.toml").params;
    let diff = reference::membrane_cavity_diffusion(&p).unwrap();
    let th = rates::gamma_m_th(&p.mechanics, p.laser.power_w).unwrap();
    let (ed, et) = (rel(diff, MEMBRANE.gamma_m_diff), rel(th, MEMBRANE.gamma_m_th));
    verdict(
        ed.abs() <= MEMBRANE_TOL && et.abs() <= MEMBRANE_TOL,
        format!(
            "gamma_m_diff = 2pi*{:.2} kHz ({:+.2}%), gamma_m_th = 2pi*{:.1} kHz ({:+.2}%)",
            khz(diff),
            100.0 * ed,
            khz(th),
            100.0 * et
        ),
    )
}

fn convention_pair() -> Verdict {
    let p = config("zipper.toml").params;
    let report = reference::discrepancy_report(&p).unwrap();
    let outputs: Vec<String> = report
        .convention_scan
        .rows
        .iter()
        .map(|r| format!("{:?}/{}: {:+.1}%", r.conventions.area, r.conventions.rabi_halving, 100.0 * r.relative_error))
        .collect();
    let angular = report.text_figures.iter().all(|f| f.angular_reading);
    let pass = report.selected.is_some() && report.convention_scan.rows.len() == 4 && !report.text_figures.is_empty();
    verdict(
        pass,
        format!(
            "unique match {:?}; scan [{}]; text figures read as angular values: {}",
            report.selected,
            outputs.join(", "),
            angular
        ),
    )
}

fn cooling() -> Verdict {
    let p = config("zipper.toml").params;
    let omega_m = p.mechanics.omega_m;
    let n_bath = rates::thermal_occupation(&p.mechanics, p.laser.power_w);
    let base = RateSet::from_effective(ZIPPER.g_eff, ZIPPER.gamma_m_diff, ZIPPER.gamma_at_diff, ZIPPER.gamma_m_th, 0.0).unwrap();
    let h = HamiltonianChoice::full_quadrature(omega_m, 0.0).unwrap();
    let g_max = 1.2 * omega_m;
    let step = g_max / COOLING_GRID_POINTS as f64;
    let grid: Vec<f64> = (1..=COOLING_GRID_POINTS).map(|i| i as f64 * step).collect();

    let curve = gaussian::cooling_curve(&h, &base, &grid, &[0.0, 2e7], n_bath).unwrap();
    let min_plain = curve.min_occupation(0.0).map(|m| m.1).unwrap_or(f64::NAN);
    let a = min_plain > 1.0 && min_plain < 10.0;

    let cooled = base.with_cooling(2e7);
    let model = gaussian::build_model(&h, &cooled, n_bath).unwrap();
    let n_cooled = gaussian::occupation(&gaussian::steady_state(&model).unwrap(), Mode::Mechanics).unwrap();
    let b = n_cooled < 1.0;

    let mut cold = base;
    cold.gamma_m_th = 0.0;
    let mut c = true;
    let mut cutoffs = Vec::new();
    for cool in [0.0, 2e7] {
        let curve = gaussian::cooling_curve(&h, &cold, &grid, &[cool], n_bath).unwrap();
        let first = curve.first_unstable(cool).unwrap_or(f64::INFINITY);
        let boundary = rates::stability_boundary(omega_m, cold.with_cooling(cool).gamma_at_tot());
        c &= first >= boundary && first - boundary <= step;
        cutoffs.push(format!("2pi*{:.3}/{:.3} MHz", first / TWO_PI / 1e6, boundary / TWO_PI / 1e6));
    }
    verdict(
        a && b && c,
        format!(
            "(a) min n_ss = {min_plain:.3}; (b) n_ss = {n_cooled:.3} at 2pi*2.5 MHz; (c) first unstable/boundary {}",
            cutoffs.join(", ")
        ),
    )
}

fn gaussian_fock() -> Verdict {
    let space = TruncatedSpace::new(12, 8).unwrap();
    let mut worst: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let mut max_n: f64 = 0.0;
    for p in &DEFAULT_ORACLE_POINTS {
        let c = fock::compare_with_gaussian(p, &space).unwrap();
        worst = worst.max(c.relative_error);
        worst_residual = worst_residual.max(c.lyapunov_residual);
        max_n = max_n.max(c.n_gaussian);
    }
    verdict(
        DEFAULT_ORACLE_POINTS.len() >= 5 && max_n <= 3.0 && worst <= ORACLE_TOL && worst_residual <= LYAPUNOV_TOL,
        format!(
            "{} points, largest n_ss {max_n:.3}, worst relative difference {worst:.2e}, worst Lyapunov residual {worst_residual:.1e}",
            DEFAULT_ORACLE_POINTS.len()
        ),
    )
}

fn elimination() -> Verdict {
    let on = CascadeConfig::new(2.5e-3, CascadeCouplings { mirror: 1.0, spin: 1.0 }, true).unwrap();
    let est = collision::extract_generator(&on).unwrap();
    let ec = rel(est.coupling(), on.target_coupling());
    let ed = rel(est.mech_diffusion(), on.target_mech_diffusion());

    let off = CascadeConfig::new(2.5e-3, CascadeCouplings { mirror: 0.1, spin: 1.0 }, false).unwrap();
    let est_off = collision::extract_generator(&off).unwrap();
    let eb = rel(est_off.backaction(), off.target_backaction());
    let dominates = est_off.backaction() > est_off.coupling().abs();

    let study = collision::convergence_study(&on.with_dt(1e-2).unwrap(), 2).unwrap();
    let order_ok = study.orders.iter().all(|o| (ORDER_RANGE.0..=ORDER_RANGE.1).contains(o));
    verdict(
        ec.abs() <= ELIMINATION_TOL && ed.abs() <= ELIMINATION_TOL && eb.abs() <= BACKACTION_TOL && dominates && order_ok,
        format!(
            "coupling {:+.2}%, diffusion {:+.2}%, backaction {:+.2}% (cross term {:.3}), orders {:?}",
            100.0 * ec,
            100.0 * ed,
            100.0 * eb,
            est_off.coupling().abs(),
            study.orders.iter().map(|o| (o * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ),
    )
}

fn rwa_swap() -> Verdict {
    let omega_m = TWO_PI * 10e6;
    let g = TWO_PI * 2.5e6;
    let space = TruncatedSpace::new(3, 3).unwrap();
    let h = HamiltonianChoice::beamsplitter_rwa(omega_m, 0.0, g).unwrap();
    let rates = RateSet::from_effective(g, 0.0, 0.0, 0.0, 0.0).unwrap();
    let l = fock::build_liouvillian(&space, &h, &rates, 0.0).unwrap();
    let rho0 = TruncatedDensityOperator::basis_state(space, 1, 0).unwrap();
    let t_swap = std::f64::consts::PI / (2.0 * g);
    let n_at = |t: f64| fock::evolve_with(&l, &rho0, t).unwrap().occupation(Mode::Mechanics);
    let n_swap = n_at(t_swap);
    let (t_min, _) = (-40..=40)
        .map(|k| t_swap * (1.0 + 2.5e-4 * k as f64))
        .map(|t| (t, n_at(t)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let dt = rel(t_min, t_swap);
    verdict(
        n_swap <= SWAP_OCCUPATION && dt.abs() <= SWAP_TIME_TOL,
        format!("n_m(pi/2g) = {n_swap:.2e}, minimum at {:+.3}% of pi/2g = {:.1} ns", 100.0 * dt, 1e9 * t_swap),
    )
}

fn optimizer_sanity() -> Verdict {
    let zipper = config("zipper.toml");
    let spec = zipper.search.clone().expect("zipper config has a search section");
    let result = optimizer::optimize(&spec, &zipper.params).unwrap();
    let laser = zipper.params.laser;
    let published = OperatingPoint { power_w: laser.power_w, detuning: laser.detuning, waist_w0: laser.waist_w0 };
    let reference_eval = optimizer::evaluate(&published, &zipper.params, spec.objective, &spec.constraints).unwrap();
    let zipper_ok = result.best.feasible && result.best.objective >= reference_eval.unconstrained_objective;

    let membrane = config("membrane.toml");
    let mspec = membrane.search.clone().expect("membrane config has a search section");
    let m = optimizer::optimize(&mspec, &membrane.params).unwrap();
    let ratio = m.best.point.detuning.abs() / (TWO_PI * 1.1e9);
    let membrane_ok = m.best.feasible
        && ratio <= DETUNING_FACTOR
        && ratio >= 1.0 / DETUNING_FACTOR
        && m.best.point.waist_w0 >= MIN_MEMBRANE_WAIST;
    verdict(
        zipper_ok && membrane_ok,
        format!(
            "zipper objective {:.3} vs published point {:.3} (published point feasible: {}, tightest {}); membrane detuning 2pi*{:.0} MHz (x{:.2}), waist {:.1} um",
            result.best.objective,
            reference_eval.unconstrained_objective,
            reference_eval.feasible,
            reference_eval.slacks.tightest().0,
            m.best.point.detuning / TWO_PI / 1e6,
            ratio,
            1e6 * m.best.point.waist_w0
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("thermal rate", thermal_rate),
        ("mechanical diffusion", mechanical_diffusion),
        ("cooperativity consistency", cooperativity_consistency),
        ("membrane rates", membrane_rates),
        ("convention pair", convention_pair),
        ("sympathetic cooling", cooling),
        ("gaussian/fock equivalence", gaussian_fock),
        ("elimination", elimination),
        ("rwa swap", rwa_swap),
        ("optimizer", optimizer_sanity),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failures += 1;
        }
        println!("criterion {:>2} {:<27} {}  {}", i + 1, name, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
