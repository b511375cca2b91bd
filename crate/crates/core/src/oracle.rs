//! Independent grid solver for the time-dependent Schrödinger equation:
//! Crank-Nicolson on a uniform grid with Dirichlet walls and an edge-leak
//! guard. Used to cross-check the analytic Gaussian ansatz and to simulate
//! potentials that break its solvability assumptions.

use crate::dynamics::{BarrierParams, PhysicalParams, QuadraticTerm, TrajectorySolution};
use crate::wavepacket;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("grid needs x_max > x_min and at least 256 points")]
    BadGrid,
    #[error("time step must be positive and finite")]
    BadDt,
    #[error("packet support (q0 +- 12 sigma) exceeds the grid domain")]
    SupportOverflow,
    #[error("initialized state norm deviates from 1 by {0:e}")]
    BadNorm(f64),
    #[error("probability density reached the domain edge at t = {t} (edge density {density:e})")]
    EdgeLeak { t: f64, density: f64 },
}

/// Uniform spatial grid on [x_min, x_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self, OracleError> {
        if !(x_max > x_min) || n < 256 || !x_min.is_finite() || !x_max.is_finite() {
            return Err(OracleError::BadGrid);
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }
}

/// Wave function sampled on a grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub t: f64,
    pub values: Vec<Complex64>,
}

impl GridState {
    /// Discrete norm  sum |psi|^2 dx.
    pub fn norm(&self, grid: &Grid) -> f64 {
        let dx = grid.dx();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx
    }

    /// Discrete mean position.
    pub fn mean_x(&self, grid: &Grid) -> f64 {
        let dx = grid.dx();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| grid.x(i) * v.norm_sqr())
            .sum::<f64>()
            * dx
            / self.norm(grid)
    }

    /// Discrete mean momentum via the central-difference derivative.
    pub fn mean_p(&self, grid: &Grid, hbar: f64) -> f64 {
        let dx = grid.dx();
        let v = &self.values;
        let mut acc = 0.0;
        for i in 1..v.len() - 1 {
            let dpsi = (v[i + 1] - v[i - 1]) / (2.0 * dx);
            acc += (v[i].conj() * dpsi).im;
        }
        hbar * acc * dx / self.norm(grid)
    }
}

/// Sum of transient quadratic wells V(x,t) = sum_i -1/2 m k_i w_i(t) (x-x_i)^2.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub terms: Vec<QuadraticTerm>,
}

impl PotentialSpec {
    pub fn free() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn barrier(b: &BarrierParams) -> Self {
        Self { terms: vec![b.term()] }
    }

    pub fn eval(&self, m: f64, x: f64, t: f64) -> f64 {
        let mut v = 0.0;
        for term in &self.terms {
            let d = x - term.x_center;
            v -= 0.5 * m * term.k * term.window(t) * d * d;
        }
        v
    }

    /// True when every window factor is so small that the potential is
    /// indistinguishable from zero at double precision over this grid.
    fn negligible(&self, grid: &Grid, m: f64, dt: f64, hbar: f64, t: f64) -> bool {
        let span = (grid.x_max - grid.x_min).abs();
        self.terms.iter().all(|term| {
            let reach = span + term.x_center.abs();
            0.5 * m * term.k * term.window(t) * reach * reach * dt / hbar < 1e-18
        })
    }
}

/// Sample the analytic initial packet on the grid.
pub fn init_gaussian(grid: &Grid, params: &PhysicalParams) -> Result<GridState, OracleError> {
    let sigma = params.sigma0();
    if params.q0 - 12.0 * sigma < grid.x_min || params.q0 + 12.0 * sigma > grid.x_max {
        return Err(OracleError::SupportOverflow);
    }
    let state0 = crate::dynamics::evolve_free(params, params.t0);
    let values: Vec<Complex64> = (0..grid.n)
        .map(|i| wavepacket::psi(grid.x(i), &state0, params))
        .collect();
    let out = GridState { t: params.t0, values };
    let norm = out.norm(grid);
    if (norm - 1.0).abs() > 1e-8 {
        return Err(OracleError::BadNorm((norm - 1.0).abs()));
    }
    Ok(out)
}

struct FreeFactor {
    cp: Vec<Complex64>,
    minv: Vec<Complex64>,
}

/// Crank-Nicolson stepper:  (1 + i dt H/(2 hbar)) psi' = (1 - i dt H/(2 hbar)) psi
/// with H evaluated at the mid-step time. Dirichlet walls.
pub struct CnSolver {
    pub grid: Grid,
    pub m: f64,
    pub hbar: f64,
    pub dt: f64,
    free_factor: RefCell<Option<FreeFactor>>,
}

impl CnSolver {
    pub fn new(grid: Grid, params: &PhysicalParams, dt: f64) -> Result<Self, OracleError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(OracleError::BadDt);
        }
        Ok(Self {
            grid,
            m: params.m,
            hbar: params.hbar,
            dt,
            free_factor: RefCell::new(None),
        })
    }

    fn off(&self) -> f64 {
        -self.hbar * self.hbar / (2.0 * self.m * self.grid.dx() * self.grid.dx())
    }

    /// One step. The potential is sampled at t + dt/2.
    pub fn step(&self, state: &GridState, pot: &PotentialSpec) -> GridState {
        let n = self.grid.n;
        let dt = self.dt;
        let t_mid = state.t + 0.5 * dt;
        let a = Complex64::new(0.0, dt / (2.0 * self.hbar));
        let off = self.off();
        let diag_kin = -2.0 * off;
        let a_off = a * off;

        let free = pot.negligible(&self.grid, self.m, dt, self.hbar, t_mid);

        // rhs = (1 - a H) psi
        let v = &state.values;
        let mut d = vec![Complex64::default(); n];
        if free {
            for i in 0..n {
                let lap = if i == 0 {
                    v[1]
                } else if i == n - 1 {
                    v[n - 2]
                } else {
                    v[i - 1] + v[i + 1]
                };
                d[i] = v[i] * (1.0 - a * diag_kin) - a_off * lap;
            }
            let mut cache = self.free_factor.borrow_mut();
            let fac = cache.get_or_insert_with(|| {
                let b = Complex64::new(1.0, 0.0) + a * diag_kin;
                let mut cp = vec![Complex64::default(); n];
                let mut minv = vec![Complex64::default(); n];
                minv[0] = b.inv();
                cp[0] = a_off * minv[0];
                for i in 1..n {
                    let m = b - a_off * cp[i - 1];
                    minv[i] = m.inv();
                    cp[i] = a_off * minv[i];
                }
                FreeFactor { cp, minv }
            });
            let mut out = vec![Complex64::default(); n];
            d[0] *= fac.minv[0];
            for i in 1..n {
                d[i] = (d[i] - a_off * d[i - 1]) * fac.minv[i];
            }
            out[n - 1] = d[n - 1];
            for i in (0..n - 1).rev() {
                out[i] = d[i] - fac.cp[i] * out[i + 1];
            }
            return GridState { t: state.t + dt, values: out };
        }

        let mut b = vec![Complex64::default(); n];
        for i in 0..n {
            let h_diag = diag_kin + pot.eval(self.m, self.grid.x(i), t_mid);
            b[i] = Complex64::new(1.0, 0.0) + a * h_diag;
            let lap = if i == 0 {
                v[1]
            } else if i == n - 1 {
                v[n - 2]
            } else {
                v[i - 1] + v[i + 1]
            };
            d[i] = v[i] * (2.0 - b[i]) - a_off * lap;
        }
        // Thomas with constant off-diagonals
        let mut cp = vec![Complex64::default(); n];
        cp[0] = a_off / b[0];
        d[0] /= b[0];
        for i in 1..n {
            let m = (b[i] - a_off * cp[i - 1]).inv();
            cp[i] = a_off * m;
            d[i] = (d[i] - a_off * d[i - 1]) * m;
        }
        let mut out = vec![Complex64::default(); n];
        out[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            out[i] = d[i] - cp[i] * out[i + 1];
        }
        GridState { t: state.t + dt, values: out }
    }
}

const EDGE_DENSITY_LIMIT: f64 = 1e-10;

/// Evolve to t_end, recording the state at each requested time (snapped to
/// the step grid). Aborts with EdgeLeak if probability reaches a wall.
pub fn evolve_grid(
    solver: &CnSolver,
    state0: GridState,
    pot: &PotentialSpec,
    t_end: f64,
    record_times: &[f64],
) -> Result<Vec<GridState>, OracleError> {
    let t0 = state0.t;
    if t_end < t0 {
        return Err(OracleError::BadDt);
    }
    let n_steps = ((t_end - t0) / solver.dt).round() as usize;
    // map each record time to a step index
    let mut record_steps: Vec<usize> = record_times
        .iter()
        .map(|&t| (((t - t0) / solver.dt).round() as usize).min(n_steps))
        .collect();
    record_steps.sort_unstable();
    record_steps.dedup();

    let mut out = Vec::with_capacity(record_steps.len().max(1));
    let mut state = state0;
    let mut next_record = record_steps.iter().copied().peekable();
    let check_edge = |s: &GridState| -> Result<(), OracleError> {
        let d0 = s.values[0].norm_sqr();
        let d1 = s.values[s.values.len() - 1].norm_sqr();
        let d = d0.max(d1);
        if d >= EDGE_DENSITY_LIMIT {
            return Err(OracleError::EdgeLeak { t: s.t, density: d });
        }
        Ok(())
    };
    check_edge(&state)?;
    if next_record.peek() == Some(&0) {
        out.push(state.clone());
        next_record.next();
    }
    if n_steps == 0 {
        if out.is_empty() {
            out.push(state);
        }
        return Ok(out);
    }
    for step_idx in 1..=n_steps {
        state = solver.step(&state, pot);
        check_edge(&state)?;
        if next_record.peek() == Some(&step_idx) {
            out.push(state.clone());
            next_record.next();
        }
    }
    if out.is_empty() {
        out.push(state);
    }
    Ok(out)
}

/// Probability beyond x_T: trapezoid over whole cells plus a linear
/// sub-cell correction at the detector position.
pub fn transmission_grid(state: &GridState, grid: &Grid, x_t: f64) -> f64 {
    let dx = grid.dx();
    let n = grid.n;
    if x_t <= grid.x_min {
        return state.norm(grid);
    }
    if x_t >= grid.x_max {
        return 0.0;
    }
    let pos = (x_t - grid.x_min) / dx;
    let i = pos.floor() as usize; // x_i <= x_t < x_{i+1}
    let frac = pos - i as f64;
    let rho = |j: usize| state.values[j].norm_sqr();
    // full trapezoid from x_{i+1} to the end
    let mut total = 0.0;
    for j in (i + 1)..(n - 1) {
        total += 0.5 * (rho(j) + rho(j + 1)) * dx;
    }
    // partial cell [x_t, x_{i+1}] with density interpolated linearly
    let rho_t = rho(i) * (1.0 - frac) + rho(i + 1) * frac;
    total += 0.5 * (rho_t + rho(i + 1)) * (1.0 - frac) * dx;
    total
}

/// Agreement between the analytic solution and a recorded grid run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    /// max over recorded times of |T_analytic - T_grid|
    pub max_delta_t: f64,
    /// max over recorded times of min_theta || psi_grid - e^{i theta} psi_analytic ||
    pub max_l2: f64,
}

/// Per-snapshot deviation (|Delta T| at the detector, phase-free L2 distance).
pub fn compare_state(
    sol: &TrajectorySolution,
    gs: &GridState,
    grid: &Grid,
    x_t: f64,
) -> (f64, f64) {
    let params = sol.params;
    let dx = grid.dx();
    let st = sol.state_at(gs.t);
    let t_analytic = wavepacket::transmission(x_t, &st, &params);
    let t_grid = transmission_grid(gs, grid, x_t);
    let delta_t = (t_analytic - t_grid).abs();

    let mut na = 0.0;
    let mut ng = 0.0;
    let mut inner = Complex64::default();
    for (i, &vg) in gs.values.iter().enumerate() {
        let va = wavepacket::psi(grid.x(i), &st, &params);
        na += va.norm_sqr();
        ng += vg.norm_sqr();
        inner += va.conj() * vg;
    }
    na *= dx;
    ng *= dx;
    let overlap = inner.norm() * dx;
    let dist_sq = (na + ng - 2.0 * overlap).max(0.0);
    (delta_t, dist_sq.sqrt())
}

pub fn compare(
    sol: &TrajectorySolution,
    states: &[GridState],
    grid: &Grid,
    x_t: f64,
) -> CompareReport {
    let mut max_delta_t: f64 = 0.0;
    let mut max_l2: f64 = 0.0;
    for gs in states {
        let (dt, l2) = compare_state(sol, gs, grid, x_t);
        max_delta_t = max_delta_t.max(dt);
        max_l2 = max_l2.max(l2);
    }
    CompareReport { max_delta_t, max_l2 }
}

/// Result of an incremental analytic-vs-grid comparison run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareRun {
    pub report: CompareReport,
    /// Number of record times actually compared.
    pub compared: usize,
    /// Time at which probability reached a wall, if the run stopped early.
    pub leak_time: Option<f64>,
}

/// Step the grid solver alongside the analytic solution, comparing at each
/// record time. Unlike `evolve_grid` + `compare`, probability reaching a
/// wall ends the run gracefully with the partial maxima collected so far.
pub fn compare_run(
    solver: &CnSolver,
    sol: &TrajectorySolution,
    pot: &PotentialSpec,
    record_times: &[f64],
    x_t: f64,
) -> Result<CompareRun, OracleError> {
    let params = sol.params;
    let mut state = init_gaussian(&solver.grid, &params)?;
    let t0 = state.t;
    let t_end = record_times.iter().copied().fold(t0, f64::max);
    let n_steps = ((t_end - t0) / solver.dt).round() as usize;
    let mut record_steps: Vec<usize> = record_times
        .iter()
        .map(|&t| (((t - t0) / solver.dt).round() as usize).min(n_steps))
        .collect();
    record_steps.sort_unstable();
    record_steps.dedup();
    let mut next_record = record_steps.iter().copied().peekable();

    let mut run = CompareRun {
        report: CompareReport { max_delta_t: 0.0, max_l2: 0.0 },
        compared: 0,
        leak_time: None,
    };
    let observe = |s: &GridState, run: &mut CompareRun| {
        let (dt, l2) = compare_state(sol, s, &solver.grid, x_t);
        run.report.max_delta_t = run.report.max_delta_t.max(dt);
        run.report.max_l2 = run.report.max_l2.max(l2);
        run.compared += 1;
    };
    if next_record.peek() == Some(&0) {
        observe(&state, &mut run);
        next_record.next();
    }
    for step_idx in 1..=n_steps {
        state = solver.step(&state, pot);
        let d = state.values[0]
            .norm_sqr()
            .max(state.values[state.values.len() - 1].norm_sqr());
        if d >= EDGE_DENSITY_LIMIT {
            run.leak_time = Some(state.t);
            return Ok(run);
        }
        if next_record.peek() == Some(&step_idx) {
            observe(&state, &mut run);
            next_record.next();
        }
    }
    Ok(run)
}

/// Relative residual of the closed-form packet in the Schrödinger equation
/// i hbar psi_t = -(hbar^2/2m) psi_xx + V psi at one spacetime point, with
/// both derivatives taken by 4th-order central finite differences. The
/// residual is normalized by the sum of the magnitudes of the three terms.
pub fn tdse_residual(sol: &TrajectorySolution, pot: &PotentialSpec, x: f64, t: f64) -> f64 {
    let params = sol.params;
    let psi_at = |x: f64, t: f64| wavepacket::psi(x, &sol.state_at(t), &params);
    // step sizes must resolve the local oscillation: after the barrier the
    // width velocity alpha' is large and the chirp phase m alpha' (x-q)^2 /
    // (2 hbar alpha) oscillates quickly both in x and in t
    let st = sol.state_at(t);
    let hbar = params.hbar;
    let dxq = x - st.q;
    let k_loc = (st.p + params.m * st.alpha_prime * dxq / st.alpha).abs() / hbar
        + 2.0 * params.m * dxq.abs() / (st.alpha * st.alpha)
        + 2.0 / st.alpha;
    let omega_loc = hbar * k_loc * k_loc / params.m
        + pot.eval(params.m, x, t).abs() / hbar
        + (st.alpha_prime / st.alpha).abs()
        + hbar / (st.alpha * st.alpha);
    // the accumulated phase reaches ~1e6 rad at late times, so psi values
    // carry relative roundoff of phase * eps; the 1/h^2 amplification of
    // that noise (not truncation) sets the optimal step at ~0.03 of the
    // local wavelength
    let h_x = 3e-2 / (1.0 + k_loc);
    let h_t = 3e-2 / (1.0 + omega_loc);
    let psi = psi_at(x, t);
    let psi_xx = (-psi_at(x - 2.0 * h_x, t) + 16.0 * psi_at(x - h_x, t) - 30.0 * psi
        + 16.0 * psi_at(x + h_x, t)
        - psi_at(x + 2.0 * h_x, t))
        / (12.0 * h_x * h_x);
    let psi_t = (psi_at(x, t - 2.0 * h_t) - 8.0 * psi_at(x, t - h_t)
        + 8.0 * psi_at(x, t + h_t)
        - psi_at(x, t + 2.0 * h_t))
        / (12.0 * h_t);
    let hbar = params.hbar;
    let lhs = Complex64::new(0.0, hbar) * psi_t;
    let kin = -hbar * hbar / (2.0 * params.m) * psi_xx;
    let pot_term = Complex64::from(pot.eval(params.m, x, t)) * psi;
    let scale = lhs.norm() + kin.norm() + pot_term.norm();
    (lhs - kin - pot_term).norm() / scale
}

/// CSV dump of one snapshot: header `x,re,im,density`.
pub fn snapshot_csv(state: &GridState, grid: &Grid) -> String {
    let mut out = String::from("x,re,im,density\n");
    for (i, v) in state.values.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            crate::superarrival::g17(grid.x(i)),
            crate::superarrival::g17(v.re),
            crate::superarrival::g17(v.im),
            crate::superarrival::g17(v.norm_sqr()),
        );
    }
    out
}
