//! Network and solver configuration.
//!
//! Powers are written in dBW in configuration files and held in watts in
//! [`NetworkConfig`].

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Converts decibel-watts to watts.
pub fn dbw_to_watts(x_dbw: f64) -> f64 {
    10f64.powf(x_dbw / 10.0)
}

/// An annulus centred on the primary transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    pub inner: f64,
    pub outer: f64,
}

impl Ring {
    pub fn new(inner: f64, outer: f64) -> Self {
        Self { inner, outer }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Geometry {
    /// Ring holding the primary receiver.
    pub prx: Ring,
    /// Ring holding the access point, the secondary users and the eavesdroppers.
    pub nodes: Ring,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            prx: Ring::new(5.0, 10.0),
            nodes: Ring::new(10.0, 20.0),
        }
    }
}

/// Log-distance path loss `intercept + exponent_coeff * log10(d)` in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathLoss {
    pub intercept_db: f64,
    pub exponent_coeff_db: f64,
}

impl Default for PathLoss {
    fn default() -> Self {
        Self {
            intercept_db: 30.0,
            exponent_coeff_db: 25.0,
        }
    }
}

/// Tolerances, iteration caps and multiplier schedule for the solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    /// Absolute improvement below which a block coordinate pass stops.
    pub bcd_tol: f64,
    pub bcd_max_iters: usize,
    /// Lower clamp on the information-phase duration.
    pub tau1_min: f64,
    /// Information-phase duration used to start every per-state solve.
    pub tau1_init: f64,
    /// Additional starting durations; the best local solution over all starts is kept.
    pub tau1_starts: Vec<f64>,
    /// Select the PU power and SU power with the per-eavesdropper min-max rule
    /// instead of the exact candidate-set argmax.
    pub paper_faithful: bool,
    /// Initial multiplier. This and the two settings below are in units of
    /// the ergodic SU rate obtained without any outage penalty.
    pub eta_init: f64,
    /// Step-size numerator `theta0` of `theta(t) = theta0 / sqrt(t + 1)`, relative.
    pub step_size: f64,
    /// Stop when successive multipliers differ by at most this (relative).
    pub dual_tol: f64,
    pub max_dual_iters: usize,
    /// Bisection steps on the multiplier between the last violating and the
    /// smallest satisfying iterate, once the subgradient phase stops.
    pub refine_iters: usize,
    /// Penalty weight of the greedy outage-minimising solver.
    pub eta_greedy: f64,
    /// Bracket width at which golden-section searches stop.
    pub golden_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            bcd_tol: 1e-6,
            bcd_max_iters: 50,
            tau1_min: 1e-6,
            tau1_init: 0.5,
            tau1_starts: vec![0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98],
            paper_faithful: false,
            eta_init: 1.0,
            step_size: 1.0,
            dual_tol: 1e-2,
            max_dual_iters: 200,
            refine_iters: 12,
            eta_greedy: 1e6,
            golden_tol: 1e-6,
        }
    }
}

/// All scalar parameters of one simulated network. Powers are in watts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkConfig {
    /// Number of actual secondary users `K`.
    pub num_sus: usize,
    /// Number of eavesdroppers `N`.
    pub num_eavs: usize,
    /// Energy-harvesting efficiency.
    pub harvest_efficiency: f64,
    /// Constant PU secrecy rate `R`, bits/s/Hz.
    pub secrecy_rate: f64,
    /// Access point power during power transfer.
    pub chap_power: f64,
    /// PU average power budget.
    pub pu_power_budget: f64,
    pub noise_power: f64,
    /// Required reduction of the PU secrecy outage probability.
    pub outage_reduction: f64,
    pub collusive: bool,
    /// Keep one topology for the whole ensemble instead of redrawing per state.
    pub fixed_topology: bool,
    pub geometry: Geometry,
    pub pathloss: PathLoss,
    pub solver: SolverSettings,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        ConfigFile::default()
            .into_config()
            .expect("default configuration is valid")
    }
}

/// On-disk form of [`NetworkConfig`], with powers in dBW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub num_sus: usize,
    pub num_eavs: usize,
    pub harvest_efficiency: f64,
    pub secrecy_rate: f64,
    pub chap_power_dbw: f64,
    pub pu_power_dbw: f64,
    pub noise_power_dbw: f64,
    pub outage_reduction: f64,
    pub collusive: bool,
    pub fixed_topology: bool,
    pub seed: u64,
    pub geometry: Geometry,
    pub pathloss: PathLoss,
    pub solver: SolverSettings,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            num_sus: 20,
            num_eavs: 4,
            harvest_efficiency: 0.5,
            secrecy_rate: 0.5,
            chap_power_dbw: 10.0,
            pu_power_dbw: 10.0,
            noise_power_dbw: -90.0,
            outage_reduction: 0.05,
            collusive: false,
            fixed_topology: false,
            seed: 1,
            geometry: Geometry::default(),
            pathloss: PathLoss::default(),
            solver: SolverSettings::default(),
        }
    }
}

impl ConfigFile {
    pub fn into_config(self) -> Result<NetworkConfig> {
        let cfg = NetworkConfig {
            num_sus: self.num_sus,
            num_eavs: self.num_eavs,
            harvest_efficiency: self.harvest_efficiency,
            secrecy_rate: self.secrecy_rate,
            chap_power: dbw_to_watts(self.chap_power_dbw),
            pu_power_budget: dbw_to_watts(self.pu_power_dbw),
            noise_power: dbw_to_watts(self.noise_power_dbw),
            outage_reduction: self.outage_reduction,
            collusive: self.collusive,
            fixed_topology: self.fixed_topology,
            geometry: self.geometry,
            pathloss: self.pathloss,
            solver: self.solver,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl NetworkConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text)?;
        file.into_config()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_sus < 1 {
            return bad("num_sus must be at least 1".into());
        }
        if self.num_eavs < 1 {
            return bad("num_eavs must be at least 1".into());
        }
        if !(self.harvest_efficiency > 0.0 && self.harvest_efficiency < 1.0) {
            return bad(format!(
                "harvest_efficiency must lie in (0, 1), got {}",
                self.harvest_efficiency
            ));
        }
        for (name, v) in [
            ("secrecy_rate", self.secrecy_rate),
            ("chap_power", self.chap_power),
            ("pu_power_budget", self.pu_power_budget),
            ("noise_power", self.noise_power),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.outage_reduction) {
            return bad(format!(
                "outage_reduction must lie in [0, 1], got {}",
                self.outage_reduction
            ));
        }
        for (name, ring) in [("prx", self.geometry.prx), ("nodes", self.geometry.nodes)] {
            if !(ring.inner > 0.0 && ring.inner <= ring.outer && ring.outer.is_finite()) {
                return bad(format!(
                    "ring {name} needs 0 < inner <= outer, got [{}, {}]",
                    ring.inner, ring.outer
                ));
            }
        }
        let s = &self.solver;
        if !(s.tau1_min > 0.0 && s.tau1_min < 1.0) {
            return bad(format!("tau1_min must lie in (0, 1), got {}", s.tau1_min));
        }
        for &t in std::iter::once(&s.tau1_init).chain(&s.tau1_starts) {
            if !(t >= s.tau1_min && t < 1.0) {
                return bad(format!("starting tau1 must lie in [tau1_min, 1), got {t}"));
            }
        }
        if s.bcd_max_iters == 0 || s.max_dual_iters == 0 {
            return bad("iteration caps must be positive".into());
        }
        if !(s.eta_greedy > 0.0) {
            return bad(format!("eta_greedy must be positive, got {}", s.eta_greedy));
        }
        if !(s.eta_init >= 0.0 && s.step_size > 0.0 && s.dual_tol > 0.0) {
            return bad("dual schedule needs eta_init >= 0, step_size > 0, dual_tol > 0".into());
        }
        Ok(())
    }

    /// Energy-harvesting efficiency `lambda`.
    pub fn lambda(&self) -> f64 {
        self.harvest_efficiency
    }

    /// Short stable digest of the full configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }

    /// Copy of this configuration with the given SU and EAV counts.
    pub fn with_counts(&self, num_sus: usize, num_eavs: usize) -> Self {
        Self {
            num_sus,
            num_eavs,
            ..self.clone()
        }
    }
}
