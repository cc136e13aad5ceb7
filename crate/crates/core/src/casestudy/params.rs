use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("dt must be positive, got {0}")]
    TimeStep(f64),
    #[error("tau = {tau} exceeds the time step dt = {dt}; the delay may be at most one step")]
    DelayTooLong { tau: f64, dt: f64 },
    #[error("the follower controller needs a positive headway h")]
    ZeroHeadway,
    #[error("unknown parameter {0:?}")]
    UnknownKey(String),
    #[error("override {0:?} is not of the form key=value with a numeric value")]
    BadOverride(String),
}

/// Physical and contract parameters of the two-vehicle example. Lengths in m,
/// times in s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseStudyParams {
    /// Required time headway.
    pub h: f64,
    pub dt: f64,
    /// Hardest leader braking, as a positive number.
    pub a_min: f64,
    pub a_max: f64,
    /// Largest measurement delay, at most `dt`.
    pub tau: f64,
    pub delta_p: f64,
    pub delta_v: f64,
    pub xi_up: f64,
    pub xi_down: f64,
    pub eta_up: f64,
    pub eta_down: f64,
    /// Controller margin, normally `xi_down + delta_p`.
    pub lambda: f64,
}

impl Default for CaseStudyParams {
    fn default() -> Self {
        let (xi_down, delta_p) = (1.45, 0.5);
        Self {
            h: 2.0,
            dt: 0.3,
            a_min: 9.8,
            a_max: 9.8,
            tau: 0.1,
            delta_p,
            delta_v: 0.1,
            xi_up: 1.75,
            xi_down,
            eta_up: 5.1,
            eta_down: 5.1,
            lambda: xi_down + delta_p,
        }
    }
}

pub const PARAM_KEYS: [&str; 12] = [
    "h", "dt", "a_min", "a_max", "tau", "delta_p", "delta_v", "xi_up", "xi_down", "eta_up",
    "eta_down", "lambda",
];

impl CaseStudyParams {
    pub fn mu_max(&self) -> f64 {
        self.tau * self.a_max + self.delta_v
    }

    pub fn mu_min(&self) -> f64 {
        self.tau * self.a_min + self.delta_v
    }

    /// The margin the controller is designed for.
    pub fn nominal_lambda(&self) -> f64 {
        self.xi_down + self.delta_p
    }

    fn fields(&self) -> [(&'static str, f64); 12] {
        [
            ("h", self.h),
            ("dt", self.dt),
            ("a_min", self.a_min),
            ("a_max", self.a_max),
            ("tau", self.tau),
            ("delta_p", self.delta_p),
            ("delta_v", self.delta_v),
            ("xi_up", self.xi_up),
            ("xi_down", self.xi_down),
            ("eta_up", self.eta_up),
            ("eta_down", self.eta_down),
            ("lambda", self.lambda),
        ]
    }

    /// Checks hard constraints; returns soft warnings (currently only a
    /// controller margin different from `xi_down + delta_p`).
    pub fn validate(&self) -> Result<Vec<String>, ParamError> {
        for (name, value) in self.fields() {
            if !value.is_finite() {
                return Err(ParamError::NonFinite { name, value });
            }
        }
        if self.dt <= 0.0 {
            return Err(ParamError::TimeStep(self.dt));
        }
        for (name, value) in self.fields() {
            if name != "lambda" && value < 0.0 {
                return Err(ParamError::Negative { name, value });
            }
        }
        if self.tau > self.dt {
            return Err(ParamError::DelayTooLong { tau: self.tau, dt: self.dt });
        }
        let mut warnings = Vec::new();
        if (self.lambda - self.nominal_lambda()).abs() > 1e-12 {
            warnings.push(format!(
                "lambda = {} differs from xi_down + delta_p = {}",
                self.lambda,
                self.nominal_lambda()
            ));
        }
        Ok(warnings)
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.fields().into_iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<(), ParamError> {
        let slot = match key {
            "h" => &mut self.h,
            "dt" => &mut self.dt,
            "a_min" => &mut self.a_min,
            "a_max" => &mut self.a_max,
            "tau" => &mut self.tau,
            "delta_p" => &mut self.delta_p,
            "delta_v" => &mut self.delta_v,
            "xi_up" => &mut self.xi_up,
            "xi_down" => &mut self.xi_down,
            "eta_up" => &mut self.eta_up,
            "eta_down" => &mut self.eta_down,
            "lambda" => &mut self.lambda,
            _ => return Err(ParamError::UnknownKey(key.to_string())),
        };
        *slot = value;
        Ok(())
    }

    /// Applies `key=value` overrides in order. While `lambda` is not itself
    /// overridden and currently sits at its nominal value, it tracks changes
    /// to `xi_down` and `delta_p`.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), ParamError> {
        let parsed = overrides
            .iter()
            .map(|s| parse_override(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        let coupled = (self.lambda - self.nominal_lambda()).abs() <= 1e-12
            && !parsed.iter().any(|(k, _)| k == "lambda");
        for (k, v) in &parsed {
            self.set(k, *v)?;
        }
        if coupled {
            self.lambda = self.nominal_lambda();
        }
        Ok(())
    }
}

pub fn parse_override(s: &str) -> Result<(String, f64), ParamError> {
    let (k, v) = s.split_once('=').ok_or_else(|| ParamError::BadOverride(s.to_string()))?;
    let v: f64 = v.trim().parse().map_err(|_| ParamError::BadOverride(s.to_string()))?;
    Ok((k.trim().to_string(), v))
}
