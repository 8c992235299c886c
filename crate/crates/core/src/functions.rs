//! Closed-form real functions of time with analytic derivatives, used for
//! Hamiltonian parameters and diagonal generator presets.

use serde::{Deserialize, Serialize};

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarFn {
    Constant {
        value: f64,
    },
    /// `intercept + slope·t`
    Linear {
        #[serde(default)]
        intercept: f64,
        slope: f64,
    },
    /// `amplitude·cos(omega·t + phase) + offset`
    Cos {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        omega: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `amplitude·sin(omega·t + phase) + offset`
    Sin {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        omega: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `Σ c_k t^k`, lowest order first.
    Polynomial {
        coefficients: Vec<f64>,
    },
}

impl ScalarFn {
    pub fn constant(value: f64) -> Self {
        ScalarFn::Constant { value }
    }

    pub fn linear(intercept: f64, slope: f64) -> Self {
        ScalarFn::Linear { intercept, slope }
    }

    pub fn cos(amplitude: f64, omega: f64) -> Self {
        ScalarFn::Cos {
            amplitude,
            omega,
            phase: 0.0,
            offset: 0.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarFn::Constant { value } => *value,
            ScalarFn::Linear { intercept, slope } => intercept + slope * t,
            ScalarFn::Cos {
                amplitude,
                omega,
                phase,
                offset,
            } => amplitude * (omega * t + phase).cos() + offset,
            ScalarFn::Sin {
                amplitude,
                omega,
                phase,
                offset,
            } => amplitude * (omega * t + phase).sin() + offset,
            ScalarFn::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            ScalarFn::Constant { .. } => 0.0,
            ScalarFn::Linear { slope, .. } => *slope,
            ScalarFn::Cos {
                amplitude,
                omega,
                phase,
                ..
            } => -amplitude * omega * (omega * t + phase).sin(),
            ScalarFn::Sin {
                amplitude,
                omega,
                phase,
                ..
            } => amplitude * omega * (omega * t + phase).cos(),
            ScalarFn::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &c)| acc * t + k as f64 * c),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            ScalarFn::Constant { value } => value.is_finite(),
            ScalarFn::Linear { intercept, slope } => intercept.is_finite() && slope.is_finite(),
            ScalarFn::Cos {
                amplitude,
                omega,
                phase,
                offset,
            }
            | ScalarFn::Sin {
                amplitude,
                omega,
                phase,
                offset,
            } => [amplitude, omega, phase, offset]
                .iter()
                .all(|x| x.is_finite()),
            ScalarFn::Polynomial { coefficients } => coefficients.iter().all(|x| x.is_finite()),
        }
    }
}
