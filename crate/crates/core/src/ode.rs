//! Adaptive Dormand-Prince 5(4) integrator with continuous (dense) output.
//!
//! The dense interpolant is the standard quartic continuous extension of
//! DOPRI5; at accepted step endpoints it reproduces the stored states
//! bit-exactly, which the root-finding layers rely on.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("non-finite state or derivative at t = {t}")]
    NonFinite { t: f64 },
    #[error("step size underflow at t = {t} (local error not reducible)")]
    StepSizeUnderflow { t: f64 },
    #[error("exceeded {max_steps} steps before reaching t_end")]
    TooManySteps { max_steps: usize },
    #[error("integration span is empty or not finite")]
    BadSpan,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12 }
    }
}

/// One accepted step together with its interpolation coefficients.
#[derive(Debug, Clone)]
pub struct DenseStep<const D: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; D],
    pub y1: [f64; D],
    cont: [[f64; D]; 5],
}

impl<const D: usize> DenseStep<D> {
    /// Evaluate the interpolant at `t` inside [t0, t0+h].
    fn eval(&self, t: f64) -> [f64; D] {
        if t == self.t0 {
            return self.y0;
        }
        if t == self.t0 + self.h {
            return self.y1;
        }
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let mut y = [0.0; D];
        for i in 0..D {
            y[i] = self.cont[0][i]
                + theta
                    * (self.cont[1][i]
                        + theta1
                            * (self.cont[2][i]
                                + theta * (self.cont[3][i] + theta1 * self.cont[4][i])));
        }
        y
    }
}

/// Piecewise interpolant over the whole integrated span.
#[derive(Debug, Clone)]
pub struct OdeSolution<const D: usize> {
    steps: Vec<DenseStep<D>>,
    t_start: f64,
    t_end: f64,
}

impl<const D: usize> OdeSolution<D> {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> &[DenseStep<D>] {
        &self.steps
    }

    /// State at the accepted-step grid (endpoints included once).
    pub fn sample_points(&self) -> Vec<(f64, [f64; D])> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        if let Some(first) = self.steps.first() {
            out.push((first.t0, first.y0));
        }
        for s in &self.steps {
            out.push((s.t0 + s.h, s.y1));
        }
        out
    }

    /// Evaluate at any `t` within the span. Panics outside the span.
    pub fn eval(&self, t: f64) -> [f64; D] {
        let forward = self.t_end >= self.t_start;
        let (lo, hi) = if forward {
            (self.t_start, self.t_end)
        } else {
            (self.t_end, self.t_start)
        };
        assert!(
            t >= lo - 1e-9 * (hi - lo).abs().max(1.0) && t <= hi + 1e-9 * (hi - lo).abs().max(1.0),
            "t = {t} outside integrated span [{lo}, {hi}]"
        );
        // binary search for the step containing t
        let idx = self
            .steps
            .partition_point(|s| {
                if forward {
                    s.t0 + s.h < t
                } else {
                    s.t0 + s.h > t
                }
            })
            .min(self.steps.len() - 1);
        self.steps[idx].eval(t)
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t_end >= self.t_start {
            (self.t_start, self.t_end)
        } else {
            (self.t_end, self.t_start)
        };
        t >= lo && t <= hi
    }

    /// Append a continuation that starts where `self` ends.
    pub fn extend(&mut self, next: OdeSolution<D>) {
        assert_eq!(self.t_end, next.t_start, "solutions are not contiguous");
        self.steps.extend(next.steps);
        self.t_end = next.t_end;
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b_hat (embedded 4th-order error weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense-output weights
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 10_000_000;

pub struct IntegrateOptions {
    pub tol: Tolerances,
    /// Hard cap on |h|; `None` leaves the controller free.
    pub max_step: Option<f64>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), max_step: None }
    }
}

/// Integrate y' = f(t, y) from `t0` to `t_end` (either direction).
pub fn integrate<const D: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; D],
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<OdeSolution<D>, OdeError>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    if !t0.is_finite() || !t_end.is_finite() || t0 == t_end {
        return Err(OdeError::BadSpan);
    }
    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let tol = opts.tol;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    check_finite(t, &y, &k1)?;

    let mut h = initial_step(&f, t, &y, &k1, span, dir, tol);
    if let Some(cap) = opts.max_step {
        h = h.clamp(-cap, cap);
    }

    let mut steps: Vec<DenseStep<D>> = Vec::new();
    let mut n_steps = 0usize;

    while (t_end - t) * dir > 0.0 {
        n_steps += 1;
        if n_steps > MAX_STEPS {
            return Err(OdeError::TooManySteps { max_steps: MAX_STEPS });
        }
        let mut last = false;
        if (t + h - t_end) * dir >= 0.0 {
            h = t_end - t;
            last = true;
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) && !last {
            return Err(OdeError::StepSizeUnderflow { t });
        }

        // stages
        let mut yt = [0.0; D];
        for i in 0..D {
            yt[i] = y[i] + h * A21 * k1[i];
        }
        let k2 = f(t + C[1] * h, &yt);
        for i in 0..D {
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = f(t + C[2] * h, &yt);
        for i in 0..D {
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = f(t + C[3] * h, &yt);
        for i in 0..D {
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = f(t + C[4] * h, &yt);
        for i in 0..D {
            yt[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = f(t + C[5] * h, &yt);
        let mut y1 = [0.0; D];
        for i in 0..D {
            y1[i] =
                y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let k7 = f(t + h, &y1);

        // embedded error estimate
        let mut err_sq = 0.0;
        for i in 0..D {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                    + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y1[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / D as f64).sqrt();

        if !err.is_finite() {
            // derivative blew up inside the step; retry smaller
            h *= 0.1;
            continue;
        }

        if err <= 1.0 {
            // accept; build the dense interpolant
            let mut cont = [[0.0; D]; 5];
            for i in 0..D {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k7[i] - bspl;
                cont[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            steps.push(DenseStep { t0: t, h, y0: y, y1, cont });
            // snap to the endpoint on the stretched final step so roundoff
            // cannot leave a sub-ulp remainder
            t = if last { t_end } else { t + h };
            y = y1;
            k1 = k7; // FSAL
            check_finite(t, &y, &k1)?;

            let mut fac = 0.9 * err.powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            h *= fac;
        } else {
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
        }
        if let Some(cap) = opts.max_step {
            if h.abs() > cap {
                h = cap * dir;
            }
        }
    }

    Ok(OdeSolution { steps, t_start: t0, t_end })
}

fn check_finite<const D: usize>(t: f64, y: &[f64; D], dy: &[f64; D]) -> Result<(), OdeError> {
    for i in 0..D {
        if !y[i].is_finite() || !dy[i].is_finite() {
            return Err(OdeError::NonFinite { t });
        }
    }
    Ok(())
}

fn initial_step<const D: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; D],
    k1: &[f64; D],
    span: f64,
    dir: f64,
    tol: Tolerances,
) -> f64
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..D {
        let sc = tol.atol + tol.rtol * y[i].abs();
        d0 += (y[i] / sc) * (y[i] / sc);
        d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    let d0 = (d0 / D as f64).sqrt();
    let d1 = (d1 / D as f64).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    // one explicit Euler probe to bound the second derivative
    let mut y1 = [0.0; D];
    for i in 0..D {
        y1[i] = y[i] + dir * h0 * k1[i];
    }
    let k2 = f(t + dir * h0, &y1);
    let mut d2 = 0.0;
    for i in 0..D {
        let sc = tol.atol + tol.rtol * y[i].abs();
        d2 += ((k2[i] - k1[i]) / sc) * ((k2[i] - k1[i]) / sc);
    }
    let d2 = (d2 / D as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6 * span)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    dir * h0.min(h1).min(span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let sol = integrate(
            |_t, y: &[f64; 1]| [-y[0]],
            0.0,
            [1.0],
            5.0,
            &IntegrateOptions::default(),
        )
        .unwrap();
        for t in [0.0f64, 0.5, 1.0, 2.5, 5.0] {
            let exact = (-t).exp();
            assert!((sol.eval(t)[0] - exact).abs() < 1e-9 * exact.max(1e-3));
        }
    }

    #[test]
    fn dense_output_exact_at_step_endpoints() {
        let sol = integrate(
            |t, y: &[f64; 2]| [y[1], -y[0] * (1.0 + 0.1 * t.sin())],
            0.0,
            [1.0, 0.0],
            20.0,
            &IntegrateOptions::default(),
        )
        .unwrap();
        for (t, y) in sol.sample_points() {
            let e = sol.eval(t);
            assert_eq!(e, y, "dense output must reproduce the stored sample at t={t}");
        }
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let sol = integrate(
            |_t, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            100.0,
            &IntegrateOptions::default(),
        )
        .unwrap();
        let y = sol.eval(100.0);
        let energy = 0.5 * (y[0] * y[0] + y[1] * y[1]);
        assert!((energy - 0.5).abs() < 1e-7);
        assert!((y[0] - 100.0f64.cos()).abs() < 1e-6);
    }

    #[test]
    fn backward_integration_recovers_initial_state() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let fwd = integrate(f, 0.0, [1.0, 0.5], 10.0, &IntegrateOptions::default()).unwrap();
        let yend = fwd.eval(10.0);
        let bwd = integrate(f, 10.0, yend, 0.0, &IntegrateOptions::default()).unwrap();
        let y0 = bwd.eval(0.0);
        assert!((y0[0] - 1.0).abs() < 1e-8);
        assert!((y0[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn max_step_is_respected() {
        let opts = IntegrateOptions { tol: Tolerances::default(), max_step: Some(0.25) };
        let sol = integrate(|_t, y: &[f64; 1]| [0.1 * y[0]], 0.0, [1.0], 10.0, &opts).unwrap();
        for s in sol.steps() {
            assert!(s.h.abs() <= 0.25 + 1e-12);
        }
    }

    #[test]
    fn empty_span_rejected() {
        let r = integrate(|_t, y: &[f64; 1]| [y[0]], 1.0, [1.0], 1.0, &IntegrateOptions::default());
        assert!(matches!(r, Err(OdeError::BadSpan)));
    }
}
