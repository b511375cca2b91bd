//! Scenario definition: the packet, barrier window template, strength list,
//! detector and thresholds for one reproducible run, plus the two built-in
//! presets.

use serde::{Deserialize, Serialize};
use superarrival::dynamics::{BarrierParams, PhysicalParams};
use superarrival::superarrival::SweepScenario;
use superarrival::wavepacket::DetectorParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Label only; resolved before a config file is written.
    pub preset: Option<String>,
    pub params: PhysicalParams,
    /// Window template; k comes from k_list.
    pub g: f64,
    pub t_b: f64,
    pub k_list: Vec<f64>,
    pub x_detector: f64,
    pub eps_dev: f64,
    pub eps_w: f64,
    pub t_end: f64,
    /// Number of output-grid intervals for time-resolved CSV.
    pub grid_points: usize,
    pub ode_tol: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("unknown preset {0:?} (available: fig1, fig2)")]
    UnknownPreset(String),
    #[error("scenario invalid: {0}")]
    Invalid(String),
}

impl Scenario {
    /// Slow heavy packet against a week-scale window: q0 = -1e3, p0 = 10,
    /// m = 5e4, alpha0^2 = 1e7, t_b = 5e6, g = 1e-10, k = {1,3,6,9,15}e-11,
    /// detector at 5e5. The free packet reaches x = 0 exactly at t_b.
    pub fn fig1() -> Self {
        Self {
            preset: Some("fig1".into()),
            params: PhysicalParams {
                m: 5.0e4,
                hbar: 1.0,
                q0: -1.0e3,
                p0: 10.0,
                alpha0_sq: 1.0e7,
                t0: 0.0,
            },
            g: 1.0e-10,
            t_b: 5.0e6,
            k_list: vec![1.0e-11, 3.0e-11, 6.0e-11, 9.0e-11, 15.0e-11],
            x_detector: 5.0e5,
            eps_dev: 1e-4,
            eps_w: 1e-3,
            t_end: 6.0e9,
            grid_points: 4000,
            ode_tol: 1e-10,
        }
    }

    /// Light fast packet: q0 = -1e3, p0 = 2, m = 1, alpha0^2 = 5, t_b = 500,
    /// g = 1/500, k = {1/10000 .. 1/100}, detector at 500.
    pub fn fig2() -> Self {
        Self {
            preset: Some("fig2".into()),
            params: PhysicalParams {
                m: 1.0,
                hbar: 1.0,
                q0: -1.0e3,
                p0: 2.0,
                alpha0_sq: 5.0,
                t0: 0.0,
            },
            g: 1.0 / 500.0,
            t_b: 500.0,
            k_list: vec![
                1.0 / 10000.0,
                1.0 / 5000.0,
                1.0 / 2500.0,
                1.0 / 1000.0,
                1.0 / 500.0,
                1.0 / 200.0,
                1.0 / 100.0,
            ],
            x_detector: 500.0,
            eps_dev: 1e-4,
            eps_w: 1e-3,
            t_end: 2000.0,
            grid_points: 4000,
            ode_tol: 1e-10,
        }
    }

    pub fn preset(name: &str) -> Result<Self, ScenarioError> {
        match name {
            "fig1" => Ok(Self::fig1()),
            "fig2" => Ok(Self::fig2()),
            other => Err(ScenarioError::UnknownPreset(other.to_string())),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.params
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        if !(self.g > 0.0 && self.t_end > self.params.t0 && self.x_detector.is_finite()) {
            return Err(ScenarioError::Invalid(
                "need g > 0, t_end > t0 and a finite detector position".into(),
            ));
        }
        if self.grid_points < 2 {
            return Err(ScenarioError::Invalid("grid_points must be at least 2".into()));
        }
        if !self.k_list.iter().all(|k| k.is_finite() && *k >= 0.0) {
            return Err(ScenarioError::Invalid("k_list entries must be finite and >= 0".into()));
        }
        Ok(())
    }

    pub fn barrier(&self, k: f64) -> BarrierParams {
        BarrierParams { k, g: self.g, t_b: self.t_b }
    }

    pub fn sweep_scenario(&self) -> SweepScenario {
        SweepScenario {
            params: self.params,
            barrier: self.barrier(0.0),
            det: DetectorParams { x_t: self.x_detector },
            eps_dev: self.eps_dev,
            eps_w: self.eps_w,
            t_end: self.t_end,
            ode_tol: self.ode_tol,
        }
    }

    /// Output time grid with grid_points intervals over [t0, t_end].
    pub fn t_grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        (0..=n)
            .map(|i| self.params.t0 + (self.t_end - self.params.t0) * i as f64 / n as f64)
            .collect()
    }
}
