//! Detection of the superarrival window and the quantities derived from it:
//! the onset time t_d, the crossing time t_c, the magnitude eta and the
//! information velocity v_I, plus the k-sweep that assembles the key table.

use crate::dynamics::{self, BarrierParams, DynamicsError, PhysicalParams, TrajectorySolution};
use crate::quad;
use crate::wavepacket::{self, DetectorParams};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CurveSource {
    Free,
    Barrier { k: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("time grid must be strictly increasing with at least two points")]
    BadGrid,
    #[error("time grid extends beyond the solution span")]
    OutOfSpan,
    #[error("transmission values must lie in [0, 1]")]
    BadValues,
}

/// Time-resolved transmission probability with a continuous evaluator.
#[derive(Clone)]
pub struct TransmissionCurve {
    pub det: DetectorParams,
    pub source: CurveSource,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl TransmissionCurve {
    pub fn new(
        det: DetectorParams,
        source: CurveSource,
        times: Vec<f64>,
        values: Vec<f64>,
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Result<Self, CurveError> {
        if times.len() < 2 || times.len() != values.len() || !times.windows(2).all(|w| w[0] < w[1])
        {
            return Err(CurveError::BadGrid);
        }
        if !values.iter().all(|v| (0.0..=1.0).contains(v)) {
            return Err(CurveError::BadValues);
        }
        Ok(Self { det, source, times, values, eval })
    }

    /// Curve from sampled data alone; the evaluator linearly interpolates
    /// (and clamps outside the grid). This is what detector counts give.
    pub fn empirical(
        det: DetectorParams,
        source: CurveSource,
        times: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self, CurveError> {
        if times.len() < 2 || times.len() != values.len() || !times.windows(2).all(|w| w[0] < w[1])
        {
            return Err(CurveError::BadGrid);
        }
        let t = times.clone();
        let v = values.clone();
        let eval = move |x: f64| {
            if x <= t[0] {
                return v[0];
            }
            if x >= *t.last().unwrap() {
                return *v.last().unwrap();
            }
            let i = t.partition_point(|&u| u <= x);
            let (t0, t1) = (t[i - 1], t[i]);
            let (v0, v1) = (v[i - 1], v[i]);
            v0 + (v1 - v0) * (x - t0) / (t1 - t0)
        };
        Self::new(det, source, times, values, Arc::new(eval))
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }
}

impl std::fmt::Debug for TransmissionCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransmissionCurve")
            .field("det", &self.det)
            .field("source", &self.source)
            .field("samples", &self.times.len())
            .finish()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SuperarrivalError {
    #[error("perturbed curve never deviates from the free one beyond the threshold")]
    NoDeviation,
    #[error("perturbed and free curves do not cross again within the integrated span")]
    NoCrossing,
    #[error("superarrival window is below the time resolution")]
    DegenerateWindow,
    #[error("curves do not share a usable time span or detector")]
    IncompatibleCurves,
    #[error("invalid threshold")]
    BadThreshold,
    #[error("dynamics failed: {0}")]
    Dynamics(String),
}

impl From<DynamicsError> for SuperarrivalError {
    fn from(e: DynamicsError) -> Self {
        SuperarrivalError::Dynamics(e.to_string())
    }
}

/// Earliest time the window factor exceeds eps_w:
/// t_k = t_b - sqrt(ln(1/eps_w)/g).
pub fn perturbation_start(barrier: &BarrierParams, eps_w: f64) -> Result<f64, SuperarrivalError> {
    if !(eps_w > 0.0 && eps_w < 1.0) {
        return Err(SuperarrivalError::BadThreshold);
    }
    Ok(barrier.t_b - ((1.0 / eps_w).ln() / barrier.g).sqrt())
}

fn common_span(a: &TransmissionCurve, b: &TransmissionCurve) -> Result<(f64, f64), SuperarrivalError> {
    if a.det != b.det {
        return Err(SuperarrivalError::IncompatibleCurves);
    }
    let (a0, a1) = a.span();
    let (b0, b1) = b.span();
    let lo = a0.max(b0);
    let hi = a1.min(b1);
    if !(hi > lo) {
        return Err(SuperarrivalError::IncompatibleCurves);
    }
    Ok((lo, hi))
}

const SCAN_POINTS: usize = 4000;

/// Deviation onset: smallest t with |T_k(t) - T_f(t)| > eps_dev, refined by
/// bisection to time resolution 1e-6 of the common span.
pub fn detect_deviation(
    curve_k: &TransmissionCurve,
    curve_f: &TransmissionCurve,
    eps_dev: f64,
) -> Result<f64, SuperarrivalError> {
    if !(eps_dev > 0.0) {
        return Err(SuperarrivalError::BadThreshold);
    }
    let (lo, hi) = common_span(curve_k, curve_f)?;
    let span = hi - lo;
    let d = |t: f64| (curve_k.eval(t) - curve_f.eval(t)).abs() - eps_dev;

    let h = span / SCAN_POINTS as f64;
    let mut bracket = None;
    for i in 0..=SCAN_POINTS {
        let t = lo + i as f64 * h;
        if d(t) > 0.0 {
            if i == 0 {
                return Ok(lo);
            }
            bracket = Some((lo + (i - 1) as f64 * h, t));
            break;
        }
    }
    let (mut a, mut b) = bracket.ok_or(SuperarrivalError::NoDeviation)?;
    let resolution = 1e-6 * span;
    while b - a > resolution {
        let m = 0.5 * (a + b);
        if d(m) > 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Crossing time: smallest t > t_d with T_k(t) - T_f(t) = 0, by bracketing
/// on a scan grid (every scanned point before the flip has T_k > T_f) and
/// bisection.
pub fn detect_crossing(
    curve_k: &TransmissionCurve,
    curve_f: &TransmissionCurve,
    t_d: f64,
) -> Result<f64, SuperarrivalError> {
    let (_, hi) = common_span(curve_k, curve_f)?;
    if !(t_d < hi) {
        return Err(SuperarrivalError::IncompatibleCurves);
    }
    let d = |t: f64| curve_k.eval(t) - curve_f.eval(t);
    if !(d(t_d) > 0.0 || d(t_d + 1e-9 * (hi - t_d)) > 0.0) {
        return Err(SuperarrivalError::IncompatibleCurves);
    }
    let h = (hi - t_d) / SCAN_POINTS as f64;
    let mut bracket = None;
    for i in 1..=SCAN_POINTS {
        let t = t_d + i as f64 * h;
        if d(t) <= 0.0 {
            bracket = Some((t_d + (i - 1) as f64 * h, t));
            break;
        }
    }
    let (mut a, mut b) = bracket.ok_or(SuperarrivalError::NoCrossing)?;
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if d(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a <= f64::EPSILON * b.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// Time integrals of both curves over [t_d, t_c] and the magnitude
/// eta = (I_k - I_f)/I_f, by composite Simpson with at least 2000 panels.
pub fn eta(
    curve_k: &TransmissionCurve,
    curve_f: &TransmissionCurve,
    t_d: f64,
    t_c: f64,
) -> Result<EtaResult, SuperarrivalError> {
    eta_with_panels(curve_k, curve_f, t_d, t_c, 2000)
}

pub fn eta_with_panels(
    curve_k: &TransmissionCurve,
    curve_f: &TransmissionCurve,
    t_d: f64,
    t_c: f64,
    panels: usize,
) -> Result<EtaResult, SuperarrivalError> {
    let (lo, hi) = common_span(curve_k, curve_f)?;
    if !(t_c - t_d > 1e-6 * (hi - lo)) {
        return Err(SuperarrivalError::DegenerateWindow);
    }
    let panels = panels.max(2000);
    let i_k = quad::simpson(|t| curve_k.eval(t), t_d, t_c, panels);
    let i_f = quad::simpson(|t| curve_f.eval(t), t_d, t_c, panels);
    Ok(EtaResult { i_k, i_f, eta: (i_k - i_f) / i_f })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaResult {
    pub i_k: f64,
    pub i_f: f64,
    pub eta: f64,
}

/// v_I = D/(t_d - t_k) and its ratio to the group velocity v_g.
pub fn information_velocity(t_d: f64, t_k: f64, d: f64, v_g: f64) -> (f64, f64) {
    let v_i = d / (t_d - t_k);
    (v_i, v_i / v_g)
}

/// All quantities derived from one (scenario, k) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperarrivalReport {
    pub k: f64,
    pub t_k: f64,
    pub t_d: f64,
    pub t_c: f64,
    pub delta_t: f64,
    pub i_k: f64,
    pub i_f: f64,
    pub eta: f64,
    pub d: f64,
    pub v_i: f64,
    pub v_ratio: f64,
}

/// The fixed part of a sweep: packet, barrier window template (k is swept),
/// detector, thresholds, integration settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepScenario {
    pub params: PhysicalParams,
    /// Window template; its k is replaced per entry.
    pub barrier: BarrierParams,
    pub det: DetectorParams,
    pub eps_dev: f64,
    pub eps_w: f64,
    pub t_end: f64,
    pub ode_tol: f64,
}

impl SweepScenario {
    fn t_grid(&self) -> Vec<f64> {
        let n = SCAN_POINTS;
        (0..=n)
            .map(|i| self.params.t0 + (self.t_end - self.params.t0) * i as f64 / n as f64)
            .collect()
    }

    /// Free-propagation transmission curve of this scenario.
    pub fn free_curve(&self) -> Result<TransmissionCurve, SuperarrivalError> {
        let sol = TrajectorySolution::free(self.params, self.t_end)?;
        wavepacket::transmission_curve(Arc::new(sol), self.det, &self.t_grid())
            .map_err(|e| SuperarrivalError::Dynamics(e.to_string()))
    }

    /// Barrier-perturbed transmission curve for strength k.
    pub fn barrier_curve(&self, k: f64) -> Result<TransmissionCurve, SuperarrivalError> {
        let barrier = BarrierParams { k, ..self.barrier };
        let sol = dynamics::evolve_barrier(&self.params, &barrier, self.t_end, self.ode_tol)?;
        wavepacket::transmission_curve(Arc::new(sol), self.det, &self.t_grid())
            .map_err(|e| SuperarrivalError::Dynamics(e.to_string()))
    }

    /// Detection + magnitude + velocity for one k, given the shared free curve.
    pub fn report(
        &self,
        k: f64,
        curve_f: &TransmissionCurve,
    ) -> Result<SuperarrivalReport, SuperarrivalError> {
        let barrier = BarrierParams { k, ..self.barrier };
        let curve_k = self.barrier_curve(k)?;
        let t_k = perturbation_start(&barrier, self.eps_w)?;
        let t_d = detect_deviation(&curve_k, curve_f, self.eps_dev)?;
        let t_c = detect_crossing(&curve_k, curve_f, t_d)?;
        let e = eta(&curve_k, curve_f, t_d, t_c)?;
        let d = self.det.x_t; // barrier centered at x = 0
        let (v_i, v_ratio) = information_velocity(t_d, t_k, d, self.params.group_velocity());
        Ok(SuperarrivalReport {
            k,
            t_k,
            t_d,
            t_c,
            delta_t: t_c - t_d,
            i_k: e.i_k,
            i_f: e.i_f,
            eta: e.eta,
            d,
            v_i,
            v_ratio,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyEntry {
    pub k: f64,
    pub result: Result<SuperarrivalReport, SuperarrivalError>,
}

impl KeyEntry {
    pub fn status(&self) -> &'static str {
        match &self.result {
            Ok(_) => "ok",
            Err(SuperarrivalError::NoDeviation) => "no_deviation",
            Err(SuperarrivalError::NoCrossing) => "no_crossing",
            Err(SuperarrivalError::DegenerateWindow) => "degenerate_window",
            Err(_) => "error",
        }
    }
}

/// The shared Alice/Bob table: k sorted ascending, one entry per strength,
/// failures flagged rather than dropped.
#[derive(Debug, Clone)]
pub struct KeyTable {
    pub scenario: SweepScenario,
    pub entries: Vec<KeyEntry>,
}

impl KeyTable {
    pub fn ok_entries(&self) -> impl Iterator<Item = &SuperarrivalReport> {
        self.entries.iter().filter_map(|e| e.result.as_ref().ok())
    }

    /// CSV with full double precision (17 significant digits).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,eta,v_I,v_ratio,t_k,t_d,t_c,status\n");
        for e in &self.entries {
            match &e.result {
                Ok(r) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},ok",
                        g17(e.k),
                        g17(r.eta),
                        g17(r.v_i),
                        g17(r.v_ratio),
                        g17(r.t_k),
                        g17(r.t_d),
                        g17(r.t_c),
                    );
                }
                Err(_) => {
                    let _ = writeln!(out, "{},nan,nan,nan,nan,nan,nan,{}", g17(e.k), e.status());
                }
            }
        }
        out
    }
}

/// Format with 17 significant digits (round-trips f64 exactly).
pub fn g17(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Run the full pipeline for every k and assemble the sorted key table.
pub fn sweep_k(scenario: &SweepScenario, k_list: &[f64]) -> Result<KeyTable, SuperarrivalError> {
    if k_list.is_empty() || !k_list.iter().all(|&k| k >= 0.0 && k.is_finite()) {
        return Err(SuperarrivalError::BadThreshold);
    }
    let mut ks = k_list.to_vec();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    if ks.len() != k_list.len() {
        return Err(SuperarrivalError::BadThreshold);
    }
    let curve_f = scenario.free_curve()?;
    let entries = ks
        .into_iter()
        .map(|k| KeyEntry { k, result: scenario.report(k, &curve_f) })
        .collect();
    Ok(KeyTable { scenario: *scenario, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det() -> DetectorParams {
        DetectorParams { x_t: 500.0 }
    }

    fn fig2_scenario() -> SweepScenario {
        SweepScenario {
            params: PhysicalParams {
                m: 1.0,
                hbar: 1.0,
                q0: -1000.0,
                p0: 2.0,
                alpha0_sq: 5.0,
                t0: 0.0,
            },
            barrier: BarrierParams { k: 0.0, g: 1.0 / 500.0, t_b: 500.0 },
            det: det(),
            eps_dev: 1e-4,
            eps_w: 1e-3,
            t_end: 2000.0,
            ode_tol: 1e-10,
        }
    }

    fn synthetic(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> TransmissionCurve {
        let times: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        TransmissionCurve::new(det(), CurveSource::Free, times, values, Arc::new(f)).unwrap()
    }

    #[test]
    fn perturbation_start_values() {
        let b = BarrierParams { k: 1.0, g: 1.0 / 500.0, t_b: 500.0 };
        // eps_w = 1/e: t_k = t_b - 1/sqrt(g)
        let tk = perturbation_start(&b, (-1.0f64).exp()).unwrap();
        assert!((tk - (500.0 - 500f64.sqrt())).abs() < 1e-9);
        // eps_w -> 1: t_k -> t_b
        let tk1 = perturbation_start(&b, 1.0 - 1e-12).unwrap();
        assert!((tk1 - 500.0).abs() < 1e-3);
        // eps_w = 1e-3
        let tk3 = perturbation_start(&b, 1e-3).unwrap();
        let want = 500.0 - (500.0 * 1000f64.ln()).sqrt();
        assert!((tk3 - want).abs() < 1e-10);
        assert!((tk3 - (500.0 - 58.77)).abs() < 0.01);
        assert!(perturbation_start(&b, 0.0).is_err());
        assert!(perturbation_start(&b, 1.5).is_err());
    }

    #[test]
    fn detect_deviation_identical_curves() {
        let a = synthetic(|t| 0.3 + 1e-3 * t);
        let b = synthetic(|t| 0.3 + 1e-3 * t);
        assert_eq!(detect_deviation(&a, &b, 1e-4), Err(SuperarrivalError::NoDeviation));
    }

    #[test]
    fn detect_deviation_known_ramp() {
        // difference ramps at 1e-3 per unit time starting at t = 50
        let f = synthetic(|_| 0.2);
        let k = synthetic(|t| 0.2 + 1e-3 * (t - 50.0).max(0.0));
        let td = detect_deviation(&k, &f, 1e-4).unwrap();
        assert!((td - 50.1).abs() < 2e-4, "td = {td}");
        // doubling the threshold never decreases t_d
        let td2 = detect_deviation(&k, &f, 2e-4).unwrap();
        assert!(td2 >= td);
        assert!((td2 - 50.2).abs() < 2e-4);
    }

    #[test]
    fn detect_crossing_known_zero() {
        let f = synthetic(|_| 0.5);
        // positive hump that crosses zero at t = 80
        let k = synthetic(|t| 0.5 + 1e-2 * ((t - 40.0) / 20.0).max(0.0).min(1.0) * (80.0 - t) / 40.0);
        let td = detect_deviation(&k, &f, 1e-4).unwrap();
        let tc = detect_crossing(&k, &f, td).unwrap();
        assert!((tc - 80.0).abs() < 1e-9, "tc = {tc}");
    }

    #[test]
    fn detect_crossing_requires_flip() {
        let f = synthetic(|_| 0.4);
        let k = synthetic(|_| 0.45);
        assert_eq!(detect_crossing(&k, &f, 10.0), Err(SuperarrivalError::NoCrossing));
    }

    #[test]
    fn eta_trivial_cases() {
        let f = synthetic(|t| 0.1 + 1e-3 * t);
        let same = synthetic(|t| 0.1 + 1e-3 * t);
        let e = eta(&same, &f, 10.0, 90.0).unwrap();
        assert!(e.eta.abs() < 1e-14);
        let double = synthetic(|t| 2.0 * (0.1 + 1e-3 * t));
        let e2 = eta(&double, &f, 10.0, 90.0).unwrap();
        assert!((e2.eta - 1.0).abs() < 1e-12, "{}", e2.eta);
        assert!(eta(&f, &same, 10.0, 10.0 + 1e-9).is_err());
    }

    #[test]
    fn information_velocity_arithmetic() {
        let v_g = 2.0;
        let (v, r) = information_velocity(100.0, 50.0, v_g * 50.0, v_g);
        assert_eq!(v, v_g);
        assert_eq!(r, 1.0);
        let (v2, _) = information_velocity(100.0, 50.0, v_g * 25.0, v_g);
        assert_eq!(v2, 0.5 * v);
    }

    #[test]
    fn sweep_flags_zero_k() {
        let sc = fig2_scenario();
        let table = sweep_k(&sc, &[0.0, 1.0 / 500.0]).unwrap();
        assert_eq!(table.entries.len(), 2);
        assert_eq!(table.entries[0].status(), "no_deviation");
        assert_eq!(table.entries[1].status(), "ok");
    }

    #[test]
    fn sweep_sorted_and_deterministic() {
        let sc = fig2_scenario();
        let a = sweep_k(&sc, &[1.0 / 500.0, 1.0 / 1000.0]).unwrap();
        let b = sweep_k(&sc, &[1.0 / 1000.0, 1.0 / 500.0]).unwrap();
        assert!(a.entries[0].k < a.entries[1].k);
        assert_eq!(a.entries, b.entries); // bit-identical
    }

    #[test]
    fn fig2_single_k_matches_reference_run() {
        // frozen reference: independent adaptive integration at tight
        // tolerance (rtol 1e-11) gave t_d = 464.001, t_c = 738.34,
        // eta = 1.06079, v_I/v_g = 10.979 for k = 1/500
        let sc = fig2_scenario();
        let curve_f = sc.free_curve().unwrap();
        let r = sc.report(1.0 / 500.0, &curve_f).unwrap();
        assert!((r.t_k - 441.23029998808).abs() < 1e-9);
        assert!((r.t_d - 464.001).abs() < 0.01, "t_d = {}", r.t_d);
        assert!((r.t_c - 738.34).abs() < 0.2, "t_c = {}", r.t_c);
        assert!((r.eta - 1.06079).abs() < 1e-3, "eta = {}", r.eta);
        assert!((r.v_ratio - 10.979).abs() < 0.01, "v_ratio = {}", r.v_ratio);
        assert!(r.t_k < r.t_d && r.t_d < r.t_c);
        assert!(r.delta_t > 0.0 && r.i_k > r.i_f && r.i_f > 0.0 && r.eta > 0.0);
    }

    #[test]
    fn eta_stable_under_panel_doubling() {
        let sc = fig2_scenario();
        let curve_f = sc.free_curve().unwrap();
        let curve_k = sc.barrier_curve(1.0 / 500.0).unwrap();
        let t_d = detect_deviation(&curve_k, &curve_f, sc.eps_dev).unwrap();
        let t_c = detect_crossing(&curve_k, &curve_f, t_d).unwrap();
        let e1 = eta_with_panels(&curve_k, &curve_f, t_d, t_c, 2000).unwrap();
        let e2 = eta_with_panels(&curve_k, &curve_f, t_d, t_c, 4000).unwrap();
        assert!(((e1.eta - e2.eta) / e2.eta).abs() <= 1e-6, "{} vs {}", e1.eta, e2.eta);
    }

    #[test]
    fn csv_round_trips_and_has_header() {
        let sc = fig2_scenario();
        let table = sweep_k(&sc, &[0.0, 1.0 / 500.0]).unwrap();
        let csv = table.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "k,eta,v_I,v_ratio,t_k,t_d,t_c,status");
        let ok_line = lines.nth(1).unwrap();
        let fields: Vec<&str> = ok_line.split(',').collect();
        assert_eq!(fields.len(), 8);
        assert_eq!(fields[7], "ok");
        // 17 significant digits round-trip exactly
        let eta_parsed: f64 = fields[1].parse().unwrap();
        let r = table.entries[1].result.as_ref().unwrap();
        assert_eq!(eta_parsed, r.eta);
    }

    #[test]
    fn empirical_curve_interpolates() {
        let c = TransmissionCurve::empirical(
            det(),
            CurveSource::Free,
            vec![0.0, 1.0, 2.0],
            vec![0.0, 0.5, 0.5],
        )
        .unwrap();
        assert_eq!(c.eval(0.5), 0.25);
        assert_eq!(c.eval(1.5), 0.5);
        assert_eq!(c.eval(-3.0), 0.0);
        assert_eq!(c.eval(9.0), 0.5);
    }

    #[test]
    fn curve_rejects_bad_input() {
        assert_eq!(
            TransmissionCurve::empirical(det(), CurveSource::Free, vec![0.0, 0.0], vec![0.1, 0.2])
                .unwrap_err(),
            CurveError::BadGrid
        );
        assert_eq!(
            TransmissionCurve::empirical(det(), CurveSource::Free, vec![0.0, 1.0], vec![0.1, 1.2])
                .unwrap_err(),
            CurveError::BadValues
        );
    }
}
