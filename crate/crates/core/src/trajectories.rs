//! Classical-trajectory ensemble and the Van Vleck propagator: the
//! path-based picture in which superarrival appears as diffraction of a
//! pencil of trajectories by the transient barrier.

use crate::dynamics::{self, BarrierParams, PhysicalParams, QuadraticTerm};
use crate::ode::{self, IntegrateOptions, Tolerances};
use crate::wavepacket;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("ensemble needs at least one trajectory and an increasing time grid")]
    BadConfig,
    #[error("shooting did not converge after 100 iterations (endpoint residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("caustic: boundary-value problem is singular for this endpoint pair")]
    Caustic,
    #[error("kernel quadrature did not converge (error estimate {estimate:e})")]
    Quadrature { estimate: f64 },
    #[error("integrator failure: {0}")]
    Integrator(#[from] ode::OdeError),
    #[error("dynamics failure: {0}")]
    Dynamics(#[from] dynamics::DynamicsError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    pub seed: u64,
    pub t_grid: Vec<f64>,
}

impl EnsembleConfig {
    fn validate(&self) -> Result<(), TrajectoryError> {
        if self.n_traj < 1
            || self.t_grid.len() < 2
            || !self.t_grid.windows(2).all(|w| w[0] < w[1])
        {
            return Err(TrajectoryError::BadConfig);
        }
        Ok(())
    }
}

/// One classical path q(t) sampled on the ensemble time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x_init: f64,
    pub path: Vec<(f64, f64)>,
}

impl Trajectory {
    pub fn final_position(&self) -> f64 {
        self.path.last().unwrap().1
    }

    /// Earliest grid time with q >= x, if any.
    pub fn arrival_time(&self, x: f64) -> Option<f64> {
        self.path.iter().find(|(_, q)| *q >= x).map(|(t, _)| *t)
    }
}

/// Initial positions drawn i.i.d. from |psi(x, t0)|^2, i.e. normal with
/// mean q0 and variance alpha0^2/(4m). All paths share the momentum p0.
pub fn sample_initial(params: &PhysicalParams, cfg: &EnsembleConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sigma = params.sigma0();
    let normal = Normal::new(params.q0, sigma).expect("finite sigma");
    (0..cfg.n_traj).map(|_| normal.sample(&mut rng)).collect()
}

fn barrier_terms(barrier: &BarrierParams) -> Vec<QuadraticTerm> {
    if barrier.k > 0.0 {
        vec![barrier.term()]
    } else {
        Vec::new()
    }
}

/// Integrate q'' = omega^2(t) q for every sampled initial position.
pub fn integrate_ensemble(
    params: &PhysicalParams,
    barrier: &BarrierParams,
    cfg: &EnsembleConfig,
) -> Result<Vec<Trajectory>, TrajectoryError> {
    cfg.validate()?;
    let inits = sample_initial(params, cfg);
    let terms = barrier_terms(barrier);
    let t_end = *cfg.t_grid.last().unwrap();
    inits
        .into_iter()
        .map(|x_init| {
            let sol = integrate_path(params, &terms, cfg.t_grid[0], x_init, params.p0, t_end)?;
            let path = cfg.t_grid.iter().map(|&t| (t, sol.eval(t)[0])).collect();
            Ok(Trajectory { x_init, path })
        })
        .collect()
}

/// CSV export: `traj_id,t,q` rows.
pub fn trajectories_csv(trajectories: &[Trajectory]) -> String {
    let mut out = String::from("traj_id,t,q\n");
    for (id, traj) in trajectories.iter().enumerate() {
        for &(t, q) in &traj.path {
            let _ = writeln!(
                out,
                "{},{},{}",
                id,
                crate::superarrival::g17(t),
                crate::superarrival::g17(q)
            );
        }
    }
    out
}

const SHOOT_TOL: Tolerances = Tolerances { rtol: 1e-11, atol: 1e-13 };

/// Integrate [q, p, S] from (x0, p0) at t0 to t_end, forcing steps through
/// every barrier window. S accumulates the Lagrangian T - V.
fn integrate_path(
    params: &PhysicalParams,
    terms: &[QuadraticTerm],
    t0: f64,
    x0: f64,
    p0: f64,
    t_end: f64,
) -> Result<ode::OdeSolution<3>, TrajectoryError> {
    let m = params.m;
    let rhs = move |t: f64, y: &[f64; 3]| {
        // force from term i is m k_i w_i (q - x_i); the centered barrier
        // gives m omega^2 q. L = T - V = p^2/(2m) + 1/2 m sum k_i w_i (q - x_i)^2
        let mut force = 0.0;
        let mut pot = 0.0;
        for term in terms {
            let s = t - term.t_peak;
            let w = (-term.g * s * s).exp();
            let d = y[0] - term.x_center;
            force += m * term.k * w * d;
            pot += 0.5 * m * term.k * w * d * d;
        }
        let v = y[1] / m;
        [v, force, 0.5 * m * v * v + pot]
    };

    let mut solution: Option<ode::OdeSolution<3>> = None;
    let mut y = [x0, p0, 0.0];
    let mut t_cur = t0;
    for (seg_end, cap) in dynamics::window_segments(terms, t0, t_end) {
        if seg_end <= t_cur {
            continue;
        }
        let opts = IntegrateOptions { tol: SHOOT_TOL, max_step: cap };
        let seg = ode::integrate(rhs, t_cur, y, seg_end, &opts)?;
        y = seg.eval(seg_end);
        t_cur = seg_end;
        match &mut solution {
            None => solution = Some(seg),
            Some(s) => s.extend(seg),
        }
    }
    Ok(solution.expect("non-empty span"))
}

/// Classical action and initial momentum of the path from (x_src, t0) to
/// (x_dst, t), found by secant shooting on the initial velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionResult {
    pub s_cl: f64,
    pub p_src: f64,
}

pub fn classical_action(
    x_src: f64,
    x_dst: f64,
    t0: f64,
    t: f64,
    params: &PhysicalParams,
    barrier: &BarrierParams,
) -> Result<ActionResult, TrajectoryError> {
    if !(t > t0) {
        return Err(TrajectoryError::BadConfig);
    }
    let terms = barrier_terms(barrier);
    let m = params.m;
    let tol = 1e-10 * (x_dst.abs() + 1.0);

    let endpoint = |v0: f64| -> Result<[f64; 3], TrajectoryError> {
        let sol = integrate_path(params, &terms, t0, x_src, m * v0, t)?;
        Ok(sol.eval(t))
    };

    // secant iteration; the dynamics is linear in the state, so this
    // typically converges in one correction
    let mut v0 = (x_dst - x_src) / (t - t0);
    let mut v1 = v0 + 1.0 + 0.1 * v0.abs();
    let mut f0 = endpoint(v0)?[0] - x_dst;
    let mut f1 = endpoint(v1)?[0] - x_dst;
    for _ in 0..100 {
        if f1.abs() <= tol {
            let y = endpoint(v1)?;
            return Ok(ActionResult { s_cl: y[2], p_src: m * v1 });
        }
        let df = f1 - f0;
        if df == 0.0 {
            // endpoint insensitive to the initial velocity
            return Err(TrajectoryError::Caustic);
        }
        let v2 = v1 - f1 * (v1 - v0) / df;
        if !v2.is_finite() {
            return Err(TrajectoryError::Caustic);
        }
        v0 = v1;
        f0 = f1;
        v1 = v2;
        f1 = endpoint(v1)?[0] - x_dst;
    }
    Err(TrajectoryError::NoConvergence { residual: f1.abs() })
}

/// One evaluation of the semiclassical kernel
///   K = sqrt((i/(2 pi hbar)) d2s) exp(i S_cl / hbar),
/// with d2s = d^2 S / dx dx' = -dp_src/dx_dst by central difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorSample {
    pub x_src: f64,
    pub x_dst: f64,
    pub t0: f64,
    pub t: f64,
    pub s_cl: f64,
    pub d2s: f64,
    pub amplitude: Complex64,
}

pub fn van_vleck(
    x_src: f64,
    x_dst: f64,
    t0: f64,
    t: f64,
    params: &PhysicalParams,
    barrier: &BarrierParams,
) -> Result<PropagatorSample, TrajectoryError> {
    let center = classical_action(x_src, x_dst, t0, t, params, barrier)?;
    let h = 1e-4 * (x_dst.abs() + 1.0);
    let plus = classical_action(x_src, x_dst + h, t0, t, params, barrier)?;
    let minus = classical_action(x_src, x_dst - h, t0, t, params, barrier)?;
    let d2s = -(plus.p_src - minus.p_src) / (2.0 * h);
    if d2s == 0.0 || !d2s.is_finite() {
        return Err(TrajectoryError::Caustic);
    }
    // For the repulsive transient barrier d2s stays negative (as in the
    // free case d2s = -m/(t - t0)); the principal square root is then the
    // continuous branch from k = 0.
    let arg = Complex64::new(0.0, d2s / (2.0 * PI * params.hbar));
    let amplitude = arg.sqrt() * Complex64::new(0.0, center.s_cl / params.hbar).exp();
    Ok(PropagatorSample { x_src, x_dst, t0, t, s_cl: center.s_cl, d2s, amplitude })
}

/// psi(x, t) = integral of K(x, x', t - t0) psi(x', t0) dx' over the packet
/// support [q0 - 10 sigma, q0 + 10 sigma], by panel-subdivided adaptive
/// Simpson on the complex integrand.
pub fn propagate_by_kernel(
    params: &PhysicalParams,
    barrier: &BarrierParams,
    t: f64,
    x_points: &[f64],
) -> Result<Vec<Complex64>, TrajectoryError> {
    let t0 = params.t0;
    if !(t > t0) {
        return Err(TrajectoryError::BadConfig);
    }
    let sigma = params.sigma0();
    let (a, b) = (params.q0 - 10.0 * sigma, params.q0 + 10.0 * sigma);
    let psi0_state = dynamics::evolve_free(params, t0);

    let mut out = Vec::with_capacity(x_points.len());
    for &x in x_points {
        let integrand = |xp: f64| -> Result<Complex64, TrajectoryError> {
            let k = van_vleck(xp, x, t0, t, params, barrier)?;
            Ok(k.amplitude * wavepacket::psi(xp, &psi0_state, params))
        };
        // initial panel count resolves the kernel phase oscillation
        // d(phase)/dx' ~ p_src variation ~ m (b - a)/(t - t0) plus p0
        let phase_span = params.m * (b - a) * (b - a) / (params.hbar * (t - t0))
            + params.p0.abs() * (b - a) / params.hbar;
        let panels = ((phase_span / PI).ceil() as usize).clamp(16, 4096);
        let mut total = Complex64::default();
        let hpanel = (b - a) / panels as f64;
        for i in 0..panels {
            let lo = a + i as f64 * hpanel;
            total += adaptive_simpson_complex(&integrand, lo, lo + hpanel, 1e-8 / panels as f64)?;
        }
        out.push(total);
    }
    Ok(out)
}

fn adaptive_simpson_complex<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<Complex64, TrajectoryError>
where
    F: Fn(f64) -> Result<Complex64, TrajectoryError>,
{
    let fa = f(a)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let fb = f(b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    asc_recurse(f, a, b, fa, fm, fb, whole, tol, 30)
}

#[allow(clippy::too_many_arguments)]
fn asc_recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Result<Complex64, TrajectoryError>
where
    F: Fn(f64) -> Result<Complex64, TrajectoryError>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(TrajectoryError::Quadrature { estimate: delta.norm() / 15.0 });
    }
    let l = asc_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = asc_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}
