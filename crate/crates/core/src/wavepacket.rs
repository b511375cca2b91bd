//! The Gaussian wave function built from the packet parameters, its
//! probability density, and the transmission probability past a detector.

use crate::dynamics::{DynamicalState, PhysicalParams, TrajectorySolution};
use crate::superarrival::{CurveError, CurveSource, TransmissionCurve};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Detector position x_T; transmission counts everything in [x_T, infinity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorParams {
    pub x_t: f64,
}

const FRAC_2_SQRT_PI: f64 = 1.1283791670955126; // 2/sqrt(pi)

/// Complementary error function, absolute error below 1e-13 over the reals.
///
/// For |z| < 1.75 the positive-term series
///   erf(z) = (2 z / sqrt(pi)) e^{-z^2} sum_n (2 z^2)^n / (2n+1)!!
/// is summed; for larger arguments the continued fraction
///   erfc(z) = e^{-z^2}/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
/// is evaluated by the modified Lentz method. Negative arguments go through
/// erfc(-z) = 2 - erfc(z).
pub fn erfc(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z < 0.0 {
        return 2.0 - erfc(-z);
    }
    if z < 1.75 {
        1.0 - erf_series(z)
    } else {
        erfc_cf(z)
    }
}

/// Error function, via the same kernels.
pub fn erf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z < 0.0 {
        return -erf(-z);
    }
    if z < 1.75 {
        erf_series(z)
    } else {
        1.0 - erfc_cf(z)
    }
}

fn erf_series(z: f64) -> f64 {
    // all terms positive: no cancellation
    let z2 = 2.0 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0u32;
    loop {
        n += 1;
        term *= z2 / (2 * n + 1) as f64;
        sum += term;
        if term < 1e-17 * sum || n > 200 {
            break;
        }
    }
    FRAC_2_SQRT_PI * z * (-z * z).exp() * sum
}

fn erfc_cf(z: f64) -> f64 {
    let prefactor = (-z * z).exp() / PI.sqrt();
    if prefactor == 0.0 {
        return 0.0;
    }
    // modified Lentz for 1/(z + a1/(z + a2/(...))), a_n = n/2
    const TINY: f64 = 1e-300;
    let mut f = z.max(TINY);
    let mut c = f;
    let mut d = 0.0;
    for n in 1..300 {
        let a = 0.5 * n as f64;
        d = z + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = z + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    prefactor / f
}

/// Position standard deviation alpha / (2 sqrt(m)).
pub fn sigma_x(state: &DynamicalState, params: &PhysicalParams) -> f64 {
    state.alpha / (2.0 * params.m.sqrt())
}

/// Probability density sqrt(2m / (pi alpha^2)) exp(-2m (x - q)^2 / alpha^2).
pub fn density(x: f64, state: &DynamicalState, params: &PhysicalParams) -> f64 {
    let a2 = state.alpha * state.alpha;
    let d = x - state.q;
    (2.0 * params.m / (PI * a2)).sqrt() * (-2.0 * params.m * d * d / a2).exp()
}

/// The wave function
///   psi(x,t) = (2m/(pi alpha^2))^{1/4}
///              exp[-(x-q)^2 (m/alpha^2 - i m alpha'/(2 hbar alpha))]
///              exp[i p (x-q)/hbar] exp[(i/(2 hbar))(p q - p0 q0)] exp[-i phi].
pub fn psi(x: f64, state: &DynamicalState, params: &PhysicalParams) -> Complex64 {
    let m = params.m;
    let hbar = params.hbar;
    let a = state.alpha;
    let d = x - state.q;
    let norm = (2.0 * m / (PI * a * a)).powf(0.25);
    let width = Complex64::new(m / (a * a), -m * state.alpha_prime / (2.0 * hbar * a));
    let phase = state.p * d / hbar
        + (state.p * state.q - params.p0 * params.q0) / (2.0 * hbar)
        - state.phi;
    norm * (-width * d * d + Complex64::new(0.0, phase)).exp()
}

/// Transmission probability past x_T:
///   T(x_T, t) = 1/2 erfc(sqrt(2m) (x_T - q) / alpha).
pub fn transmission(x_detector: f64, state: &DynamicalState, params: &PhysicalParams) -> f64 {
    0.5 * erfc((2.0 * params.m).sqrt() * (x_detector - state.q) / state.alpha)
}

/// Time-resolved transmission curve of a solution, sampled on `t_grid` and
/// carrying the exact continuous evaluator.
pub fn transmission_curve(
    sol: Arc<TrajectorySolution>,
    det: DetectorParams,
    t_grid: &[f64],
) -> Result<TransmissionCurve, CurveError> {
    let (lo, hi) = sol.span();
    if t_grid.len() < 2 || !t_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(CurveError::BadGrid);
    }
    if t_grid[0] < lo || *t_grid.last().unwrap() > hi {
        return Err(CurveError::OutOfSpan);
    }
    let source = if sol.terms.is_empty() {
        CurveSource::Free
    } else if let Some(b) = sol.barrier() {
        CurveSource::Barrier { k: b.k }
    } else {
        CurveSource::Barrier { k: sol.terms.iter().map(|t| t.k).sum() }
    };
    let params = sol.params;
    let times = t_grid.to_vec();
    let values: Vec<f64> = times
        .iter()
        .map(|&t| transmission(det.x_t, &sol.state_at(t), &params))
        .collect();
    let eval = {
        let sol = Arc::clone(&sol);
        move |t: f64| transmission(det.x_t, &sol.state_at(t), &params)
    };
    TransmissionCurve::new(det, source, times, values, Arc::new(eval))
}
