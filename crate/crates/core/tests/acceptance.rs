//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test --test acceptance -- --nocapture --test-threads=1` to see them.

use std::f64::consts::{LN_2, PI};
use std::time::{Duration, Instant};

use schwinger_sim::band::{solve_bands, zone_grid, Lattice};
use schwinger_sim::bandmap::{band_map, ensemble_distribution, Occupation};
use schwinger_sim::experiments::{
    half_max_scaling, linspace, masses_for_ratios, run, run_collapse, run_sweep, run_vacuum, Experiment,
    ExperimentConfig, SWEEP_TF_MS, VACUUM_FORCE_RATIOS,
};
use schwinger_sim::lz;
use schwinger_sim::propagator::{bloch_oscillations, Propagator};
use schwinger_sim::units::{critical_force, to_recoil_units, Drive, PhysicalConstants, SimulationParams};

fn report(criterion: &str, pass: bool, detail: String) {
    println!("{} {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{criterion}: {detail}");
}

fn force_at(tf_ms: f64) -> f64 {
    to_recoil_units(&PhysicalConstants::default(), 0.0, Drive::SweepTime(tf_ms * 1e-3))
        .unwrap()
        .force
}

fn base() -> SimulationParams {
    SimulationParams::new(0.0).unwrap()
}

#[test]
fn c1_zone_edge_gap() {
    let start = Instant::now();
    let mut worst = Vec::new();
    let mut pass = true;
    for v in [0.048, 0.536, 1.236] {
        let states = Lattice::new(v, 21).unwrap().bloch_states(1.0, 2).unwrap();
        let gap = states.energies[1] - states.energies[0];
        let rel = (gap - v / 2.0).abs() / (v / 2.0);
        let tol = if v <= 0.6 { 0.05 } else { 0.15 };
        pass &= rel < tol;
        worst.push(format!("v={v}: gap {gap:.6} rel {rel:.2e} (tol {tol})"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(1);
    report("1 zone-edge gap", pass, format!("{}; {elapsed:?}", worst.join(", ")));
}

#[test]
fn c2_single_crossing_sweep() {
    let start = Instant::now();
    let f = force_at(3.7);
    let masses = linspace(0.01, 0.35, 20);
    let sweep = run_sweep(&base(), &masses, f).unwrap();
    let elapsed = start.elapsed();
    let p: Vec<f64> = sweep.rows.iter().map(|r| r.p_simulated.expect("row failed")).collect();
    let worst = sweep.rows.iter().map(|r| r.residual().unwrap().abs()).fold(0.0, f64::max);
    let monotone = p.windows(2).all(|w| w[1] < w[0]);
    report(
        "2 transfer vs mass at t_F = 3.7 ms",
        worst < 0.02 && monotone && elapsed < Duration::from_secs(30),
        format!("max |P - P_LZ| = {worst:.4}, monotone = {monotone}, {elapsed:?}"),
    );
}

#[test]
fn c3_half_max_scaling() {
    let forces: Vec<f64> = SWEEP_TF_MS.iter().map(|&t| force_at(t)).collect();
    let scaling = half_max_scaling(&base(), &forces).unwrap();
    let fit = scaling.fit;
    let target = LN_2 / PI;
    let closed_form = 2.0 * LN_2 / PI;
    let slope_rel = (fit.slope - target).abs() / target;
    let intercept_ok = fit.intercept.abs() < 1e-3;
    println!(
        "     half-max mu^2 = {:.5} f + {:.2e} (R^2 {:.6}); slope / (2 ln2/pi) = {:.4}",
        fit.slope,
        fit.intercept,
        fit.r_squared,
        fit.slope / closed_form
    );
    report(
        "3 half-max mu^2 linear in f",
        intercept_ok && slope_rel < 0.05,
        format!(
            "intercept {:.2e} (|b| < 1e-3: {intercept_ok}), slope {:.5} vs ln2/pi = {target:.5} (rel {slope_rel:.3}, tol 0.05)",
            fit.intercept, fit.slope
        ),
    );
}

#[test]
fn c4_collapse() {
    // Powers of sqrt(2) from 1/4 to 16; i = 0 is exactly f = f_c.
    let ratios: Vec<f64> = (-4..=8).map(|i| 2f64.powf(i as f64 / 2.0)).collect();
    let sweeps: Vec<_> = SWEEP_TF_MS
        .iter()
        .map(|&t| {
            let f = force_at(t);
            run_sweep(&base(), &masses_for_ratios(f, &ratios), f).unwrap()
        })
        .collect();
    let collapse = run_collapse(&sweeps).unwrap();
    let spread = collapse.max_spread(1e-9);
    let at_one: Vec<f64> = collapse
        .rows
        .iter()
        .filter(|r| (r.force_ratio - 1.0).abs() < 1e-9)
        .filter_map(|r| r.p_simulated)
        .collect();
    let threshold = (-PI).exp();
    let worst_one = at_one.iter().map(|p| (p - threshold).abs()).fold(0.0, f64::max);
    report(
        "4 collapse onto f/f_c",
        spread < 0.02 && at_one.len() == SWEEP_TF_MS.len() && worst_one < 0.02,
        format!(
            "max spread {spread:.2e}; P(f/f_c = 1) within {worst_one:.4} of e^-pi over {} sweeps",
            at_one.len()
        ),
    );
}

#[test]
fn c5_constant_vacuum_rate() {
    let start = Instant::now();
    let mu = 0.2;
    let f = force_at(3.4);
    let p = SimulationParams::from_rest_mass(mu).unwrap().with_force(f).unwrap();
    let run = run_vacuum(&p, 128, p.bloch_period(), 15).unwrap();
    let elapsed = start.elapsed();
    let rate = run.rate.expect("rate fit");
    let predicted = lz::vacuum_rate(mu, f).unwrap();
    let rel = (rate.fit.slope / predicted - 1.0).abs();
    report(
        "5a vacuum rate at t_F = 3.4 ms",
        rate.fit.points == 16 && rate.fit.r_squared > 0.99 && rel < 0.15 && elapsed < Duration::from_secs(120),
        format!(
            "{} samples, R^2 {:.5}, slope {:.4e} vs p_lz f/2 = {predicted:.4e} (rel {rel:.3}), {elapsed:?}",
            rate.fit.points, rate.fit.r_squared, rate.fit.slope
        ),
    );

    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for r in VACUUM_FORCE_RATIOS {
        let f = r * critical_force(mu);
        let p = SimulationParams::from_rest_mass(mu).unwrap().with_force(f).unwrap();
        let run = run_vacuum(&p, 128, p.bloch_period(), 15).unwrap();
        let slope = run.rate.expect("rate fit").fit.slope;
        let rel = (slope / lz::vacuum_rate(mu, f).unwrap() - 1.0).abs();
        worst = worst.max(rel);
        lines.push(format!("{r}:{rel:.3}"));
    }
    report(
        "5b rate universality over seven force ratios",
        worst < 0.15,
        format!("relative deviation per f/f_c [{}], worst {worst:.3}", lines.join(" ")),
    );
}

#[test]
fn c6a_norm_conservation() {
    let p = SimulationParams::from_rest_mass(0.2).unwrap().with_force(force_at(3.4)).unwrap();
    let prop = Propagator::new(&p).unwrap();
    let mut worst: f64 = 0.0;
    for q0 in [0.0, 0.3, -0.7] {
        let mut s = prop.bloch_state(q0, 0).unwrap();
        let traj = prop.evolve(&mut s, p.force, 3.0 * p.bloch_period(), p.bloch_period() / 8.0).unwrap();
        assert_eq!(traj.len(), 25);
        worst = worst.max((s.norm() - 1.0).abs());
    }
    report("6a norm conservation", worst < 1e-8, format!("max |norm - 1| = {worst:.2e} over three periods"));
}

#[test]
fn c6b_time_reversal() {
    let mut worst: f64 = 1.0;
    for (mu, f, q0, t) in [(0.15, 0.05, 0.2, 57.3), (0.309, 0.0426, 0.0, 46.9), (0.05, 0.08, -0.6, 30.0)] {
        let p = SimulationParams::from_rest_mass(mu).unwrap().with_force(f).unwrap();
        let prop = Propagator::new(&p).unwrap();
        let start = prop.bloch_state(q0, 0).unwrap();
        let mut s = start.clone();
        prop.advance(&mut s, f, t).unwrap();
        let mut s = s.time_reversed();
        prop.advance(&mut s, -f, t).unwrap();
        worst = worst.min(s.time_reversed().fidelity(&start));
    }
    report("6b time-reversal fidelity", worst > 1.0 - 1e-6, format!("min fidelity 1 - {:.2e}", 1.0 - worst));
}

#[test]
fn c6c_step_halving() {
    let mut worst: f64 = 0.0;
    for mu in [0.05, 0.134, 0.3] {
        let pops: Vec<Vec<f64>> = [2e-3, 1e-3]
            .iter()
            .map(|&dt| {
                let p = SimulationParams::from_rest_mass(mu)
                    .unwrap()
                    .with_force(0.0426)
                    .unwrap()
                    .with_dt_max(dt)
                    .unwrap();
                bloch_oscillations(&p, 0.0, 1).unwrap().final_populations().unwrap().bands
            })
            .collect();
        for (a, b) in pops[0].iter().zip(&pops[1]) {
            worst = worst.max((a - b).abs());
        }
    }
    report("6c step-halving convergence", worst < 1e-6, format!("max population change {worst:.2e}"));
}

#[test]
fn c6d_band_parity() {
    let grid = zone_grid(201);
    let mut worst: f64 = 0.0;
    for v in [0.048, 0.536, 1.236, 4.0] {
        let sol = solve_bands(&grid, v, 21, 5).unwrap();
        let n = grid.len();
        for i in 0..n {
            for (a, b) in sol.energies[i].iter().zip(&sol.energies[n - 1 - i]) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    report("6d band parity E_n(Q) = E_n(-Q)", worst < 1e-10, format!("max asymmetry {worst:.2e}"));
}

#[test]
fn c6e_band_map_round_trip() {
    let n_bands = 5;
    // Inverse map: |k| in [n, n+1) belongs to band n.
    let mut worst_k: f64 = 0.0;
    for band in 0..n_bands {
        // Even count keeps Q = 0, where odd bands touch the next zone, off the grid.
        for q in linspace(-0.995, 0.995, 40) {
            let k = band_map(band, q, n_bands).unwrap();
            let back_band = (k.abs().floor() as usize).min(n_bands - 1);
            let shift = 2.0 * back_band.div_ceil(2) as f64;
            let back_q = if back_band % 2 == 1 {
                -k.signum() * (shift - k.abs())
            } else {
                k.signum() * (k.abs() - shift)
            };
            assert_eq!(back_band, band, "k = {k}");
            worst_k = worst_k.max((back_q - q).abs());
        }
    }
    // Populations survive histogramming band by band.
    let occs: Vec<Occupation> = linspace(-0.99, 0.99, 64)
        .into_iter()
        .enumerate()
        .map(|(i, q)| {
            let raw: Vec<f64> = (0..n_bands).map(|b| 1.0 + ((i * 7 + b * 3) % 5) as f64).collect();
            let total: f64 = raw.iter().sum();
            Occupation { quasimomentum: q, weight: 1.0 / 64.0, populations: raw.iter().map(|x| x / total).collect() }
        })
        .collect();
    let dist = ensemble_distribution(&occs, n_bands, 200, 0.0).unwrap();
    let mut worst_w: f64 = 0.0;
    for band in 0..n_bands {
        let expected: f64 = occs.iter().map(|o| o.weight * o.populations[band]).sum();
        let b = band as f64;
        let got = if band == 0 {
            dist.mass_between(-1.0, 1.0)
        } else {
            dist.mass_between(b, b + 1.0) + dist.mass_between(-b - 1.0, -b)
        };
        worst_w = worst_w.max((got - expected).abs());
    }
    report(
        "6e band-map round trip",
        worst_k < 1e-3 && worst_w < 1e-3,
        format!("max quasimomentum error {worst_k:.2e}, max band-weight error {worst_w:.2e}"),
    );
}

#[test]
fn c6f_deterministic_reruns() {
    let mut vacuum = ExperimentConfig::new(Experiment::Vacuum);
    vacuum.mass_el = Some(0.2);
    vacuum.tf_ms = Some(3.4);
    vacuum.n_states = Some(32);
    let mut sweep = ExperimentConfig::new(Experiment::Sweep);
    sweep.masses = Some(vec![0.05, 0.15, 0.3]);
    let mut mapdist = ExperimentConfig::new(Experiment::Mapdist);
    mapdist.n_states = Some(32);
    mapdist.blur_sigma = Some(0.05);

    let mut identical = true;
    for config in [&vacuum, &sweep, &mapdist] {
        let first = run(config).unwrap();
        let second = run(config).unwrap();
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run(config).unwrap());
        identical &= first.files == second.files && first.files == serial.files;
    }
    report("6f byte-identical reruns", identical, "vacuum, sweep and mapdist across thread counts".into());
}

#[test]
fn c7_force_ratio_cross_check() {
    let ratio = force_at(3.4) / critical_force(0.2);
    report(
        "7 f/f_c for mu = 0.2 at t_F = 3.4 ms",
        (1.7..=2.9).contains(&ratio),
        format!("{ratio:.4} in [1.7, 2.9]"),
    );
}
