//! Acceptance gate: one test per criterion, each line of the test report is
//! one pass/fail verdict. Criteria are checked as specified even where the
//! pinned settings are known to be unattainable; those tests fail red and
//! print the measured numbers.

use std::sync::OnceLock;
use superarrival::dynamics::{
    ermakov_invariant, evolve_barrier, evolve_free, BarrierParams, PhysicalParams,
    TrajectorySolution,
};
use superarrival::oracle::{self, CnSolver, Grid, PotentialSpec};
use superarrival::protocol::{roundtrip, Codebook, EveParams, RunConfig};
use superarrival::superarrival::{perturbation_start, sweep_k, KeyTable, SweepScenario};
use superarrival::trajectories::{integrate_ensemble, propagate_by_kernel, EnsembleConfig};
use superarrival::wavepacket::{erfc, psi, transmission_curve, DetectorParams};

fn fig2_params() -> PhysicalParams {
    PhysicalParams { m: 1.0, hbar: 1.0, q0: -1000.0, p0: 2.0, alpha0_sq: 5.0, t0: 0.0 }
}

fn fig2_scenario() -> SweepScenario {
    SweepScenario {
        params: fig2_params(),
        barrier: BarrierParams { k: 0.0, g: 1.0 / 500.0, t_b: 500.0 },
        det: DetectorParams { x_t: 500.0 },
        eps_dev: 1e-4,
        eps_w: 1e-3,
        t_end: 2000.0,
        ode_tol: 1e-10,
    }
}

const FIG2_KS: [f64; 7] = [
    1.0 / 10000.0,
    1.0 / 5000.0,
    1.0 / 2500.0,
    1.0 / 1000.0,
    1.0 / 500.0,
    1.0 / 200.0,
    1.0 / 100.0,
];

fn fig2_table() -> &'static KeyTable {
    static TABLE: OnceLock<KeyTable> = OnceLock::new();
    TABLE.get_or_init(|| sweep_k(&fig2_scenario(), &FIG2_KS).expect("fig2 sweep runs"))
}

#[test]
fn criterion_01_superarrival_exists_for_every_fig2_strength() {
    let sc = fig2_scenario();
    let table = fig2_table();
    let curve_f = sc.free_curve().unwrap();
    for entry in &table.entries {
        let r = entry.result.as_ref().unwrap_or_else(|e| {
            panic!("k = {}: no superarrival window detected ({e})", entry.k)
        });
        assert!(r.t_k < r.t_d && r.t_d < r.t_c, "ordering broken for k = {}", entry.k);
        let curve_k = sc.barrier_curve(entry.k).unwrap();
        for i in 1..=1000 {
            let t = r.t_d + (r.t_c - r.t_d) * i as f64 / 1001.0;
            assert!(
                curve_k.eval(t) > curve_f.eval(t),
                "T_k <= T_f at t = {t} for k = {}",
                entry.k
            );
        }
    }
}

#[test]
fn criterion_02_key_curves_strictly_increase() {
    let table = fig2_table();
    let reports: Vec<_> = table.ok_entries().collect();
    assert_eq!(reports.len(), FIG2_KS.len());
    for pair in reports.windows(2) {
        assert!(pair[0].eta < pair[1].eta, "eta not increasing at k = {}", pair[1].k);
        assert!(pair[0].v_i < pair[1].v_i, "v_I not increasing at k = {}", pair[1].k);
    }
    let largest = reports.last().unwrap();
    assert!(largest.v_ratio > 1.0, "v_I/v_g = {} for the largest k", largest.v_ratio);
}

#[test]
fn criterion_03_pinned_grid_oracle_equivalence() {
    // grid [-3000, 4000], n = 2^14, dt = 0.05 as specified; dx = 0.43 does
    // not resolve the p0 = 2 wavelength, so the measured errors are printed
    let sc = fig2_scenario();
    let grid = Grid::new(-3000.0, 4000.0, 1 << 14).unwrap();
    let solver = CnSolver::new(grid, &sc.params, 0.05).unwrap();
    let record: Vec<f64> = (0..40).map(|i| 2000.0 * i as f64 / 39.0).collect();

    let free_sol = TrajectorySolution::free(sc.params, 2000.0).unwrap();
    let free = oracle::compare_run(&solver, &free_sol, &PotentialSpec::free(), &record, 500.0)
        .unwrap();
    eprintln!(
        "criterion 3 free: max |dT| = {:e} (required <= 1e-4), leak at {:?}",
        free.report.max_delta_t, free.leak_time
    );

    let b = BarrierParams { k: 1.0 / 500.0, g: 1.0 / 500.0, t_b: 500.0 };
    let bar_sol = evolve_barrier(&sc.params, &b, 2000.0, sc.ode_tol).unwrap();
    let bar = oracle::compare_run(&solver, &bar_sol, &PotentialSpec::barrier(&b), &record, 500.0)
        .unwrap();
    eprintln!(
        "criterion 3 barrier: max |dT| = {:e} (required <= 1e-3), leak at {:?}",
        bar.report.max_delta_t, bar.leak_time
    );

    assert!(free.report.max_delta_t <= 1e-4, "free max |dT| = {:e}", free.report.max_delta_t);
    assert!(bar.report.max_delta_t <= 1e-3, "barrier max |dT| = {:e}", bar.report.max_delta_t);
}

#[test]
fn criterion_04_ansatz_satisfies_schroedinger_equation() {
    use rand::{Rng, SeedableRng};
    let p = fig2_params();
    let b = BarrierParams { k: 1.0 / 500.0, g: 1.0 / 500.0, t_b: 500.0 };
    let sol = evolve_barrier(&p, &b, 2000.0, 1e-11).unwrap();
    let pot = PotentialSpec::barrier(&b);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let t = rng.gen_range(1.0..1999.0);
        let st = sol.state_at(t);
        let sigma = st.alpha / (2.0 * p.m.sqrt());
        let x = st.q + rng.gen_range(-3.0..3.0) * sigma;
        let r = oracle::tdse_residual(&sol, &pot, x, t);
        assert!(r <= 1e-5, "residual {r:e} at x = {x}, t = {t}");
    }
}

#[test]
fn criterion_05_conservation_suite() {
    // Ermakov invariant over the full fig2 barrier run
    let p = fig2_params();
    let b = BarrierParams { k: 1.0 / 500.0, g: 1.0 / 500.0, t_b: 500.0 };
    let sol = evolve_barrier(&p, &b, 2000.0, 1e-11).unwrap();
    let i0 = ermakov_invariant(&sol.state_at(0.0), &p);
    for i in 0..=200 {
        let t = 2000.0 * i as f64 / 200.0;
        let it = ermakov_invariant(&sol.state_at(t), &p);
        assert!(((it - i0) / i0).abs() <= 1e-8, "invariant drift at t = {t}");
    }

    // grid-solver norm over a full desk run (Crank-Nicolson is unitary)
    let dp = PhysicalParams { m: 1.0, hbar: 1.0, q0: -10.0, p0: 1.0, alpha0_sq: 9.0, t0: 0.0 };
    let grid = Grid::new(-120.0, 140.0, 4096).unwrap();
    let solver = CnSolver::new(grid, &dp, 0.005).unwrap();
    let mut state = oracle::init_gaussian(&grid, &dp).unwrap();
    let n0 = state.norm(&grid);
    let db = BarrierParams { k: 0.02, g: 0.1, t_b: 10.0 };
    let pot = PotentialSpec::barrier(&db);
    for _ in 0..4000 {
        state = solver.step(&state, &pot);
    }
    let drift = ((state.norm(&grid) - n0) / n0).abs();
    assert!(drift <= 1e-9, "norm drift {drift:e}");

    // erfc on [-6, 6] against 30-digit reference values
    const REF: &[(f64, f64)] = &[
        (-6.0, 1.99999999999999997848),
        (-3.0, 1.999977909503001414559),
        (-2.0, 1.995322265018952734162),
        (-1.2, 1.910313978229635368366),
        (-0.5, 1.520499877813046537683),
        (0.0, 1.0),
        (0.3, 0.6713732405408725838104),
        (0.7, 0.3221988061625815577231),
        (1.0, 0.1572992070502851306588),
        (1.5, 0.03389485352468927293302),
        (1.75, 0.01332832878081755622779),
        (2.0, 0.004677734981047265837931),
        (3.0, 0.00002209049699858544137278),
        (4.0, 1.541725790028001885216e-8),
        (5.0, 1.537459794428034850188e-12),
        (6.0, 2.151973671249891311659e-17),
    ];
    for &(z, want) in REF {
        assert!((erfc(z) - want).abs() <= 1e-13, "erfc({z})");
    }
}

#[test]
fn criterion_06_closed_form_free_limit() {
    let p = fig2_params();
    // integrate with a zero-strength window: same code path, no force
    let b = BarrierParams { k: 0.0, g: 1.0 / 500.0, t_b: 500.0 };
    let sol = evolve_barrier(&p, &b, 2000.0, 1e-11).unwrap();
    for i in 1..=100 {
        let t = 2000.0 * i as f64 / 100.0;
        let got = sol.state_at(t);
        let want = evolve_free(&p, t);
        let alpha_sq_want = p.alpha0_sq + 4.0 * p.hbar * p.hbar * t * t / p.alpha0_sq;
        assert!(((got.q - want.q) / want.q.abs().max(1.0)).abs() <= 1e-9);
        assert!(((got.alpha * got.alpha - alpha_sq_want) / alpha_sq_want).abs() <= 1e-9);
    }

    // slow heavy packet: free center reaches the barrier exactly at t_b
    let fig1 = PhysicalParams {
        m: 5.0e4,
        hbar: 1.0,
        q0: -1.0e3,
        p0: 10.0,
        alpha0_sq: 1.0e7,
        t0: 0.0,
    };
    let st = evolve_free(&fig1, 5.0e6);
    assert_eq!(st.q, 0.0);
}

#[test]
fn criterion_07_kernel_propagation_matches_closed_form() {
    let p = fig2_params();
    let t = 500.0;
    for k in [0.0, 1.0 / 500.0] {
        let b = BarrierParams { k, g: 1.0 / 500.0, t_b: 500.0 };
        let sol = if k == 0.0 {
            TrajectorySolution::free(p, t + 1.0).unwrap()
        } else {
            evolve_barrier(&p, &b, t + 1.0, 1e-11).unwrap()
        };
        let st = sol.state_at(t);
        let sigma = st.alpha / 2.0;
        let n = 80;
        let xs: Vec<f64> = (0..=n)
            .map(|i| st.q - 4.0 * sigma + 8.0 * sigma * i as f64 / n as f64)
            .collect();
        let kernel = propagate_by_kernel(&p, &b, t, &xs).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let a = psi(x, &st, &p);
            num += (kernel[i] - a).norm_sqr();
            den += a.norm_sqr();
        }
        let l2 = (num / den).sqrt();
        assert!(l2 <= 1e-2, "k = {k}: relative L2 = {l2:e}");
    }
}

#[test]
fn criterion_08_trajectories_turn_back_and_outrun_free_arrivals() {
    let p = fig2_params();
    let t_grid: Vec<f64> = (0..=2000).map(|i| i as f64).collect();
    let cfg = EnsembleConfig { n_traj: 200, seed: 1, t_grid };
    let barrier = BarrierParams { k: 1.0 / 500.0, g: 1.0 / 500.0, t_b: 500.0 };
    let with_barrier = integrate_ensemble(&p, &barrier, &cfg).unwrap();
    let free = integrate_ensemble(&p, &BarrierParams { k: 0.0, ..barrier }, &cfg).unwrap();

    let turned_back = with_barrier.iter().filter(|t| t.final_position() < 0.0).count();
    eprintln!("criterion 8: {turned_back}/200 barrier trajectories turned back");
    assert!(turned_back > 0, "no turned-back trajectory");

    let x_t = 500.0;
    let earliest_free = free
        .iter()
        .filter_map(|t| t.arrival_time(x_t))
        .fold(f64::INFINITY, f64::min);
    let earliest_barrier = with_barrier
        .iter()
        .filter_map(|t| t.arrival_time(x_t))
        .fold(f64::INFINITY, f64::min);
    eprintln!(
        "criterion 8: earliest arrival at x_T = {x_t}: barrier {earliest_barrier}, free {earliest_free}"
    );
    assert!(
        earliest_barrier < earliest_free,
        "no barrier trajectory beats the free ensemble to the detector \
         (barrier {earliest_barrier}, free {earliest_free})"
    );
}

#[test]
fn criterion_09_protocol_roundtrip_accuracy_and_security() {
    let sc = fig2_scenario();
    let ks = [1.0 / 2500.0, 1.0 / 1000.0, 1.0 / 500.0, 1.0 / 200.0, 1.0 / 100.0];
    let table = sweep_k(&sc, &ks).unwrap();
    let n = 100_000;
    let book = Codebook::from_key_table(&table, n).unwrap();
    assert_eq!(book.symbols.len(), 5);
    let cfg = RunConfig {
        n_particles: n,
        readout_times: (0..=2000).map(|i| i as f64).collect(),
        seed: 20260823,
        d: sc.det.x_t,
        t_k: perturbation_start(&BarrierParams { k: 1.0, ..sc.barrier }, sc.eps_w).unwrap(),
        delta_sec: 0.05,
    };
    let message: Vec<usize> = (0..200).map(|i| i % 5).collect();

    let clean = roundtrip(&sc, &book, &message, &cfg, None).unwrap();
    eprintln!(
        "criterion 9 clean: accuracy {} security pass {}",
        clean.accuracy, clean.security_pass_rate
    );
    assert!(clean.accuracy >= 0.99, "decode accuracy {}", clean.accuracy);
    assert!(clean.security_pass_rate >= 0.99, "security pass rate {}", clean.security_pass_rate);

    let eve = EveParams { k_e: 1.0 / 500.0, x_e: 250.0, g_e: 1.0 / 500.0, t_e: 450.0 };
    let tapped = roundtrip(&sc, &book, &message, &cfg, Some(&eve)).unwrap();
    let flagged = tapped
        .outcomes
        .iter()
        .filter(|o| o.security_pass != Some(true))
        .count();
    eprintln!("criterion 9 intercepted: {flagged}/200 runs flagged");
    assert!(flagged as f64 / 200.0 >= 0.90, "only {flagged}/200 flagged");
}

#[test]
fn criterion_10_slow_heavy_preset_runs_end_to_end() {
    let sc = SweepScenario {
        params: PhysicalParams {
            m: 5.0e4,
            hbar: 1.0,
            q0: -1.0e3,
            p0: 10.0,
            alpha0_sq: 1.0e7,
            t0: 0.0,
        },
        barrier: BarrierParams { k: 0.0, g: 1.0e-10, t_b: 5.0e6 },
        det: DetectorParams { x_t: 5.0e5 },
        eps_dev: 1e-4,
        eps_w: 1e-3,
        t_end: 6.0e9,
        ode_tol: 1e-10,
    };
    let ks = [1.0e-11, 3.0e-11, 6.0e-11, 9.0e-11, 15.0e-11];
    let table = sweep_k(&sc, &ks).unwrap();
    let reports: Vec<_> = table.ok_entries().collect();
    assert_eq!(reports.len(), 5, "every strength must exhibit superarrival");
    for r in &reports {
        assert!(r.t_k < r.t_d && r.t_d < r.t_c);
        assert!(r.eta > 0.0 && r.eta.is_finite());
        assert!(r.v_i.is_finite() && r.v_ratio.is_finite());
    }
    // transmission curves stay finite and inside [0, 1] over the whole span
    let curve = sc.barrier_curve(15.0e-11).unwrap();
    for i in 0..=1000 {
        let t = 6.0e9 * i as f64 / 1000.0;
        let v = curve.eval(t);
        assert!((0.0..=1.0).contains(&v) && v.is_finite(), "T = {v} at t = {t}");
    }
}
