use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{ProcessNoise, TruthPose};
use crate::numerics::{RealMat, DEFAULT_CONDITION_CAP};
use crate::propagation::{LinkBudget, SPEED_OF_LIGHT};
use crate::tracker::{SensingParams, StateLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Radar-echo tracking at the RSU.
    Dfrc,
    /// Communication-only pilot feedback baseline.
    Feedback,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Dfrc, Scheme::Feedback];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Dfrc => "dfrc",
            Scheme::Feedback => "feedback",
        }
    }

    pub fn layout(self) -> StateLayout {
        match self {
            Scheme::Dfrc => StateLayout::WithReflection,
            Scheme::Feedback => StateLayout::Kinematic,
        }
    }

    /// Index of the RNG stream the scheme draws from within a trial.
    pub(crate) fn stream(self) -> u64 {
        match self {
            Scheme::Dfrc => 0,
            Scheme::Feedback => 1,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dfrc" => Ok(Scheme::Dfrc),
            "feedback" => Ok(Scheme::Feedback),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// How ground truth advances between epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthModel {
    /// Exact straight-line Cartesian motion.
    Cartesian,
    /// The filter's own first-order polar model, noise-free.
    Polar,
}

/// Scenario parameters. Every key has a default, so `{}` is a valid
/// configuration describing the reference scenario: 30 GHz carrier,
/// 64-element arrays, 10 dB transmit SNR and a vehicle starting at 9.2°,
/// 25 m, 18 m/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub fc: f64,
    pub c: f64,
    pub dt: f64,
    pub epochs: usize,
    pub n_tx: usize,
    pub n_rx: usize,
    pub m_vehicle: usize,
    pub tx_snr_db: f64,
    pub sigma_sq: f64,
    pub sigma_c_sq: f64,
    pub g_mf: f64,
    pub g_mf_feedback: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub sigma_theta_deg: f64,
    pub sigma_d: f64,
    pub sigma_v: f64,
    pub sigma_beta: f64,
    pub theta0_deg: f64,
    pub d0: f64,
    pub v0: f64,
    pub beta0_re: f64,
    pub beta0_im: f64,
    pub alpha_ref: f64,
    /// Initial MSE diagonal in the radar layout `[θ, d, v, Re β, Im β]`
    /// (θ in rad²). Defaults to ten times the process-noise variances.
    pub m0_diag: Option<Vec<f64>>,
    pub trials: usize,
    pub master_seed: u64,
    pub schemes: Vec<Scheme>,
    pub truth_model: TruthModel,
    /// Add noise to synthesized measurements.
    pub measurement_noise: bool,
    pub condition_cap: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            fc: 30e9,
            c: SPEED_OF_LIGHT,
            dt: 0.02,
            epochs: 200,
            n_tx: 64,
            n_rx: 64,
            m_vehicle: 64,
            tx_snr_db: 10.0,
            sigma_sq: 1.0,
            sigma_c_sq: 1.0,
            g_mf: 10.0,
            g_mf_feedback: 1.0,
            a1: 1.0,
            a2: 6.7e-7,
            a3: 2e4,
            sigma_theta_deg: 0.02,
            sigma_d: 0.2,
            sigma_v: 0.5,
            sigma_beta: 0.1,
            theta0_deg: 9.2,
            d0: 25.0,
            v0: 18.0,
            beta0_re: h,
            beta0_im: h,
            alpha_ref: 25.0,
            m0_diag: None,
            trials: 100,
            master_seed: 0x5EED_2020,
            schemes: Scheme::ALL.to_vec(),
            truth_model: TruthModel::Cartesian,
            measurement_noise: true,
            condition_cap: DEFAULT_CONDITION_CAP,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// Returns a copy with `key` replaced by `value` (a JSON literal).
    pub fn with_override(&self, key: &str, value: serde_json::Value) -> Result<Self> {
        let mut doc = serde_json::to_value(self).map_err(|e| Error::Config(e.to_string()))?;
        let obj = doc
            .as_object_mut()
            .ok_or_else(|| Error::Config("configuration is not an object".into()))?;
        if !obj.contains_key(key) {
            return Err(Error::Config(format!("unknown configuration key '{key}'")));
        }
        obj.insert(key.to_string(), value);
        let cfg: Self = serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("fc", self.fc),
            ("c", self.c),
            ("dt", self.dt),
            ("sigma_sq", self.sigma_sq),
            ("sigma_c_sq", self.sigma_c_sq),
            ("g_mf", self.g_mf),
            ("g_mf_feedback", self.g_mf_feedback),
            ("d0", self.d0),
            ("alpha_ref", self.alpha_ref),
            ("condition_cap", self.condition_cap),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        let non_negative = [
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
            ("sigma_theta_deg", self.sigma_theta_deg),
            ("sigma_d", self.sigma_d),
            ("sigma_v", self.sigma_v),
            ("sigma_beta", self.sigma_beta),
            ("v0", self.v0),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be non-negative, got {value}"
                )));
            }
        }
        if !self.tx_snr_db.is_finite() {
            return Err(Error::Config("tx_snr_db must be finite".into()));
        }
        if !(self.theta0_deg > 0.0 && self.theta0_deg < 180.0) {
            return Err(Error::Config(format!(
                "theta0_deg must lie in (0, 180), got {}",
                self.theta0_deg
            )));
        }
        for (name, value) in [
            ("epochs", self.epochs),
            ("trials", self.trials),
            ("n_tx", self.n_tx),
            ("n_rx", self.n_rx),
            ("m_vehicle", self.m_vehicle),
        ] {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.beta0().norm() == 0.0 {
            return Err(Error::Config("beta0 must be non-zero".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("at least one scheme is required".into()));
        }
        if let Some(diag) = &self.m0_diag {
            if diag.len() != 5 || diag.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::Config(
                    "m0_diag needs five non-negative entries [theta, d, v, re_beta, im_beta]"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    /// Transmit power from the transmit SNR `p/σ²`.
    pub fn power(&self) -> f64 {
        self.sigma_sq * 10f64.powf(self.tx_snr_db / 10.0)
    }

    pub fn budget(&self) -> LinkBudget {
        LinkBudget {
            p: self.power(),
            sigma_sq: self.sigma_sq,
            sigma_c_sq: self.sigma_c_sq,
            g_mf: self.g_mf,
            a1: self.a1,
            a2: self.a2,
            a3: self.a3,
            fc: self.fc,
            c: self.c,
        }
    }

    /// Sensing parameters for `scheme`; the feedback baseline sees the
    /// pilot budget.
    pub fn sensing(&self, scheme: Scheme) -> SensingParams {
        let budget = match scheme {
            Scheme::Dfrc => self.budget(),
            Scheme::Feedback => self.budget().pilot_budget(self.g_mf_feedback),
        };
        SensingParams {
            n_tx: self.n_tx,
            n_rx: self.n_rx,
            m_vehicle: self.m_vehicle,
            budget,
        }
    }

    pub fn process_noise(&self) -> ProcessNoise {
        ProcessNoise {
            sigma_theta: self.sigma_theta_deg.to_radians(),
            sigma_d: self.sigma_d,
            sigma_v: self.sigma_v,
            sigma_beta: self.sigma_beta,
        }
    }

    pub fn beta0(&self) -> Complex64 {
        Complex64::new(self.beta0_re, self.beta0_im)
    }

    /// Radar cross-section consistent with `β₀` at `d₀`.
    pub fn epsilon(&self) -> Complex64 {
        self.beta0() * (2.0 * self.d0)
    }

    pub fn theta0(&self) -> f64 {
        self.theta0_deg.to_radians()
    }

    pub fn initial_pose(&self) -> Result<TruthPose> {
        TruthPose::from_polar(self.theta0(), self.d0, self.v0)
    }

    /// Initial MSE matrix for `scheme`.
    pub fn initial_mse(&self, scheme: Scheme) -> RealMat {
        let full = match &self.m0_diag {
            Some(d) => [d[0], d[1], d[2], d[3], d[4]],
            None => self.process_noise().variances_full().map(|v| 10.0 * v),
        };
        RealMat::from_diag(&full[..scheme.layout().dim()])
    }
}
