//! Classical/Ermakov dynamics of the Gaussian packet parameters.
//!
//! The packet is fully described by (q, p, alpha, alpha', phi). In free flight
//! everything is closed form; with transient quadratic potential terms the
//! first-order system
//!
//!   q' = p/m,  p' = m (K(t) q - sum_i k_i w_i(t) x_i),
//!   alpha'' = K(t) alpha + 4 hbar^2 / alpha^3,  phi' = hbar / alpha^2
//!
//! (K = sum_i k_i w_i) is integrated adaptively with dense output. A single
//! term centered at x = 0 is the transient parabolic barrier.

use crate::ode::{self, IntegrateOptions, OdeError, OdeSolution, Tolerances};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Packet and world constants, atomic units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub m: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    pub q0: f64,
    pub p0: f64,
    /// Initial squared width parameter alpha_0^2.
    pub alpha0_sq: f64,
    #[serde(default)]
    pub t0: f64,
}

fn default_hbar() -> f64 {
    1.0
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.m > 0.0) || !(self.alpha0_sq > 0.0) || !(self.hbar > 0.0) {
            return Err(DynamicsError::InvalidParams);
        }
        if ![self.m, self.hbar, self.q0, self.p0, self.alpha0_sq, self.t0]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(DynamicsError::InvalidParams);
        }
        Ok(())
    }

    /// Group velocity p0/m of the free packet.
    pub fn group_velocity(&self) -> f64 {
        self.p0 / self.m
    }

    /// Initial position standard deviation alpha_0 / (2 sqrt(m)).
    pub fn sigma0(&self) -> f64 {
        self.alpha0_sq.sqrt() / (2.0 * self.m.sqrt())
    }
}

/// Transient parabolic barrier V(x,t) = -1/2 m k exp(-g (t - t_b)^2) x^2.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierParams {
    /// Barrier strength (>= 0).
    pub k: f64,
    /// Inverse squared window width (> 0).
    pub g: f64,
    /// Window peak time.
    pub t_b: f64,
}

impl BarrierParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.k >= 0.0) || !(self.g > 0.0) || !self.t_b.is_finite() {
            return Err(DynamicsError::InvalidParams);
        }
        Ok(())
    }

    /// Characteristic window width 1/sqrt(g).
    pub fn window_width(&self) -> f64 {
        1.0 / self.g.sqrt()
    }

    pub fn term(&self) -> QuadraticTerm {
        QuadraticTerm { k: self.k, g: self.g, t_peak: self.t_b, x_center: 0.0 }
    }
}

/// One transient quadratic potential term -1/2 m k w(t) (x - x_c)^2.
/// x_center = 0 is the barrier of the single-center problem; off-center
/// terms model a second (eavesdropper) perturbation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticTerm {
    pub k: f64,
    pub g: f64,
    pub t_peak: f64,
    #[serde(default)]
    pub x_center: f64,
}

impl QuadraticTerm {
    pub fn window(&self, t: f64) -> f64 {
        let s = t - self.t_peak;
        (-self.g * s * s).exp()
    }

    pub fn omega_sq(&self, t: f64) -> f64 {
        self.k * self.window(t)
    }
}

/// Gaussian time window exp(-g (t - t_b)^2).
pub fn window(t: f64, barrier: &BarrierParams) -> f64 {
    let s = t - barrier.t_b;
    (-barrier.g * s * s).exp()
}

/// Squared frequency omega^2(t) = k exp(-g (t - t_b)^2).
pub fn omega_sq(t: f64, barrier: &BarrierParams) -> f64 {
    barrier.k * window(t, barrier)
}

/// Everything needed to evaluate psi(x, t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicalState {
    pub t: f64,
    pub q: f64,
    pub p: f64,
    pub alpha: f64,
    pub alpha_prime: f64,
    pub phi: f64,
}

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("non-finite or out-of-range physical parameters")]
    InvalidParams,
    #[error("t_end must lie beyond t0")]
    BadSpan,
    #[error("width parameter alpha fell below the positivity floor at t = {t}")]
    AlphaFloor { t: f64 },
    #[error("integrator failure: {0}")]
    Integrator(#[from] OdeError),
}

/// Closed-form free evolution.
pub fn evolve_free(params: &PhysicalParams, t: f64) -> DynamicalState {
    let dt = t - params.t0;
    let h2 = params.hbar * params.hbar;
    let a0sq = params.alpha0_sq;
    let alpha_sq = a0sq + 4.0 * h2 * dt * dt / a0sq;
    let alpha = alpha_sq.sqrt();
    DynamicalState {
        t,
        q: params.q0 + params.p0 * dt / params.m,
        p: params.p0,
        alpha,
        alpha_prime: 4.0 * h2 * dt / (a0sq * alpha),
        phi: 0.5 * (2.0 * params.hbar * dt / a0sq).atan(),
    }
}

/// The conserved Ermakov-Lewis combination
/// I = 1/2 [ (q/alpha)^2 + ((alpha p/m - alpha' q) / (2 hbar))^2 ].
pub fn ermakov_invariant(state: &DynamicalState, params: &PhysicalParams) -> f64 {
    let a = state.q / state.alpha;
    let b = (state.alpha * state.p / params.m - state.alpha_prime * state.q)
        / (2.0 * params.hbar);
    0.5 * (a * a + b * b)
}

enum SolutionKind {
    Free { t_end: f64 },
    Integrated(OdeSolution<5>),
}

/// Dense-output solution of the packet-parameter system.
pub struct TrajectorySolution {
    pub params: PhysicalParams,
    pub terms: Vec<QuadraticTerm>,
    kind: SolutionKind,
}

impl TrajectorySolution {
    /// Closed-form free solution on [t0, t_end].
    pub fn free(params: PhysicalParams, t_end: f64) -> Result<Self, DynamicsError> {
        params.validate()?;
        if !(t_end > params.t0) {
            return Err(DynamicsError::BadSpan);
        }
        Ok(Self { params, terms: Vec::new(), kind: SolutionKind::Free { t_end } })
    }

    pub fn span(&self) -> (f64, f64) {
        match &self.kind {
            SolutionKind::Free { t_end } => (self.params.t0, *t_end),
            SolutionKind::Integrated(sol) => (sol.t_start(), sol.t_end()),
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.span();
        t >= lo && t <= hi
    }

    pub fn state_at(&self, t: f64) -> DynamicalState {
        match &self.kind {
            SolutionKind::Free { .. } => evolve_free(&self.params, t),
            SolutionKind::Integrated(sol) => {
                let y = sol.eval(t);
                DynamicalState { t, q: y[0], p: y[1], alpha: y[2], alpha_prime: y[3], phi: y[4] }
            }
        }
    }

    /// States at the accepted integration steps (a uniform grid for the
    /// free closed form).
    pub fn samples(&self) -> Vec<DynamicalState> {
        match &self.kind {
            SolutionKind::Free { t_end } => {
                let n = 256;
                (0..=n)
                    .map(|i| {
                        let t = self.params.t0
                            + (t_end - self.params.t0) * i as f64 / n as f64;
                        evolve_free(&self.params, t)
                    })
                    .collect()
            }
            SolutionKind::Integrated(sol) => sol
                .sample_points()
                .into_iter()
                .map(|(t, y)| DynamicalState {
                    t,
                    q: y[0],
                    p: y[1],
                    alpha: y[2],
                    alpha_prime: y[3],
                    phi: y[4],
                })
                .collect(),
        }
    }

    /// The single centered barrier, when that is what was integrated.
    pub fn barrier(&self) -> Option<BarrierParams> {
        match self.terms.as_slice() {
            [t] if t.x_center == 0.0 => {
                Some(BarrierParams { k: t.k, g: t.g, t_b: t.t_peak })
            }
            _ => None,
        }
    }
}

fn rhs(params: &PhysicalParams, terms: &[QuadraticTerm], t: f64, y: &[f64; 5]) -> [f64; 5] {
    let [q, p, alpha, beta, _phi] = *y;
    let mut big_k = 0.0;
    let mut drive = 0.0;
    for term in terms {
        let w = term.omega_sq(t);
        big_k += w;
        drive += w * term.x_center;
    }
    let h2 = params.hbar * params.hbar;
    [
        p / params.m,
        params.m * (big_k * q - drive),
        beta,
        big_k * alpha + 4.0 * h2 / (alpha * alpha * alpha),
        params.hbar / (alpha * alpha),
    ]
}

/// Split [t0, t_end] so that every active Gaussian time window is stepped
/// through: inside [t_peak - 8/sqrt(g), t_peak + 8/sqrt(g)] the step size is
/// capped at a quarter window width (an adaptive integrator could otherwise
/// leap over a narrow window entirely). Returns (segment end, step cap).
pub(crate) fn window_segments(
    terms: &[QuadraticTerm],
    t0: f64,
    t_end: f64,
) -> Vec<(f64, Option<f64>)> {
    let mut bounds: Vec<f64> = Vec::new();
    for term in terms {
        if term.k > 0.0 {
            let w = 1.0 / term.g.sqrt();
            bounds.push(term.t_peak - 8.0 * w);
            bounds.push(term.t_peak + 8.0 * w);
        }
    }
    bounds.retain(|&b| b > t0 && b < t_end);
    bounds.sort_by(f64::total_cmp);
    bounds.dedup();
    bounds.push(t_end);

    let mut segments = Vec::with_capacity(bounds.len());
    let mut t = t0;
    for &b in &bounds {
        // cap = min over windows covering the segment midpoint
        let mid = 0.5 * (t + b);
        let mut cap: Option<f64> = None;
        for term in terms {
            if term.k > 0.0 {
                let w = 1.0 / term.g.sqrt();
                if (mid - term.t_peak).abs() < 8.0 * w {
                    cap = Some(cap.map_or(w / 4.0, |c: f64| c.min(w / 4.0)));
                }
            }
        }
        segments.push((b, cap));
        t = b;
    }
    segments
}

/// Integrate the packet-parameter system under a set of transient quadratic
/// terms. The integrator is forced to resolve each window: inside
/// [t_peak - 8/sqrt(g), t_peak + 8/sqrt(g)] the step size is capped at a
/// quarter window width.
pub fn evolve_terms(
    params: &PhysicalParams,
    terms: &[QuadraticTerm],
    t_end: f64,
    tol: f64,
) -> Result<TrajectorySolution, DynamicsError> {
    params.validate()?;
    for term in terms {
        if !(term.k >= 0.0) || !(term.g > 0.0) || !term.t_peak.is_finite()
            || !term.x_center.is_finite()
        {
            return Err(DynamicsError::InvalidParams);
        }
    }
    if !(t_end > params.t0) || !(tol > 0.0) {
        return Err(DynamicsError::BadSpan);
    }

    let tols = Tolerances::new(tol, tol * 1e-2);
    let y0 = [params.q0, params.p0, params.alpha0_sq.sqrt(), 0.0, 0.0];
    let segment_ends = window_segments(terms, params.t0, t_end);

    let mut solution: Option<OdeSolution<5>> = None;
    let mut y = y0;
    let mut t_cur = params.t0;
    for (seg_end, cap) in segment_ends {
        if seg_end <= t_cur {
            continue;
        }
        let opts = IntegrateOptions { tol: tols, max_step: cap };
        let seg = ode::integrate(
            |t, y: &[f64; 5]| rhs(params, terms, t, y),
            t_cur,
            y,
            seg_end,
            &opts,
        )?;
        y = seg.eval(seg_end);
        t_cur = seg_end;
        match &mut solution {
            None => solution = Some(seg),
            Some(s) => s.extend(seg),
        }
    }
    let sol = solution.expect("at least one segment");

    let result = TrajectorySolution {
        params: *params,
        terms: terms.to_vec(),
        kind: SolutionKind::Integrated(sol),
    };
    // positivity floor on the width parameter
    let floor = 1e-6 * params.alpha0_sq.sqrt();
    for s in result.samples() {
        if !(s.alpha > floor) {
            return Err(DynamicsError::AlphaFloor { t: s.t });
        }
    }
    Ok(result)
}

/// Integrate the single-barrier Ermakov pair on [t0, t_end].
pub fn evolve_barrier(
    params: &PhysicalParams,
    barrier: &BarrierParams,
    t_end: f64,
    tol: f64,
) -> Result<TrajectorySolution, DynamicsError> {
    barrier.validate()?;
    evolve_terms(params, &[barrier.term()], t_end, tol)
}
