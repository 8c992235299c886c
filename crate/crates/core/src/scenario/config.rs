use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::diagnostics::{DerivativeMode, DEFAULT_NEAR_SINGULAR_THRESHOLD};
use crate::dynamics::FeedbackKind;
use crate::functions::ScalarFn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    ClassicalDet,
    QuantumDetU,
    ContinuitySweep,
    CrossingReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackName {
    #[default]
    None,
    InverseScaled,
    IdentityScaled,
    StateScaled,
    Regularized,
}

/// Which matrix the continuity sweep diagnoses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnoseTarget {
    /// The integrated state `M(t)`.
    #[default]
    Trajectory,
    /// The generator `A(t)` itself, e.g. a Hamiltonian near a level crossing.
    Generator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeModeName {
    #[default]
    AnalyticJacobi,
    FiniteDifference,
}

impl From<DerivativeModeName> for DerivativeMode {
    fn from(m: DerivativeModeName) -> Self {
        match m {
            DerivativeModeName::AnalyticJacobi => DerivativeMode::AnalyticJacobi,
            DerivativeModeName::FiniteDifference => DerivativeMode::FiniteDifference,
        }
    }
}

/// A number or a function table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarFnSpec {
    Constant(f64),
    Function(ScalarFn),
}

impl ScalarFnSpec {
    pub fn to_fn(&self) -> ScalarFn {
        match self {
            ScalarFnSpec::Constant(v) => ScalarFn::constant(*v),
            ScalarFnSpec::Function(f) => f.clone(),
        }
    }
}

/// Matrix presets for generators and initial conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSpec {
    Zero {
        dim: usize,
    },
    IdentityScaled {
        dim: usize,
        scale: f64,
    },
    /// Row-major constant matrix.
    ConstantInline {
        rows: Vec<Vec<f64>>,
    },
    /// `diag(f_1(t), …, f_n(t))`.
    DiagonalFn {
        entries: Vec<ScalarFnSpec>,
    },
    TwoLevel {
        e1: ScalarFnSpec,
        e2: ScalarFnSpec,
        delta: f64,
    },
    DrivenTwoLevel {
        epsilon: ScalarFnSpec,
        delta: ScalarFnSpec,
    },
    /// Entries uniform in `[−scale, scale]` plus `shift·I`, from the run seed.
    Random {
        dim: usize,
        #[serde(default = "default_one")]
        scale: f64,
        #[serde(default)]
        shift: f64,
    },
}

impl MatrixSpec {
    pub fn dim(&self) -> usize {
        match self {
            MatrixSpec::Zero { dim }
            | MatrixSpec::IdentityScaled { dim, .. }
            | MatrixSpec::Random { dim, .. } => *dim,
            MatrixSpec::ConstantInline { rows } => rows.len(),
            MatrixSpec::DiagonalFn { entries } => entries.len(),
            MatrixSpec::TwoLevel { .. } | MatrixSpec::DrivenTwoLevel { .. } => 2,
        }
    }

    pub fn is_two_level(&self) -> bool {
        matches!(
            self,
            MatrixSpec::TwoLevel { .. } | MatrixSpec::DrivenTwoLevel { .. }
        )
    }
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Alpha,
    Gamma,
    Epsilon,
    Hbar,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Alpha => "alpha",
            SweepParameter::Gamma => "gamma",
            SweepParameter::Epsilon => "epsilon",
            SweepParameter::Hbar => "hbar",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Validated scenario configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub generator: MatrixSpec,
    pub generator_b: Option<MatrixSpec>,
    pub initial: Option<MatrixSpec>,
    pub feedback: FeedbackName,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub hbar: f64,
    pub t0: f64,
    pub tf: f64,
    pub n_steps: usize,
    pub output_path: PathBuf,
    pub seed: u64,
    pub near_singular_threshold: f64,
    pub derivative_mode: DerivativeModeName,
    pub diagnose: DiagnoseTarget,
    pub plot_script: bool,
    pub sweep: Option<Sweep>,
}

/// Document shape before validation; required keys are optional here so the
/// validator can name the missing one.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<ScenarioKind>,
    generator: Option<MatrixSpec>,
    generator_b: Option<MatrixSpec>,
    initial: Option<MatrixSpec>,
    #[serde(default)]
    feedback: FeedbackName,
    alpha: Option<f64>,
    gamma: Option<f64>,
    epsilon: Option<f64>,
    hbar: Option<f64>,
    t0: Option<f64>,
    tf: Option<f64>,
    n_steps: Option<usize>,
    output_path: Option<PathBuf>,
    seed: Option<u64>,
    near_singular_threshold: Option<f64>,
    #[serde(default)]
    derivative_mode: DerivativeModeName,
    #[serde(default)]
    diagnose: DiagnoseTarget,
    #[serde(default)]
    plot_script: bool,
    sweep: Option<Sweep>,
}

pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Parses and validates a TOML scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|span| line_col(text, span.start))
            .unwrap_or((0, 0));
        ScenarioError::Parse {
            message: e.message().to_string(),
            line,
            column,
        }
    })?;
    let required = |name: &'static str| ScenarioError::validation(name, "missing required key");
    let config = ScenarioConfig {
        scenario: raw.scenario.ok_or_else(|| required("scenario"))?,
        generator: raw.generator.ok_or_else(|| required("generator"))?,
        generator_b: raw.generator_b,
        initial: raw.initial,
        feedback: raw.feedback,
        alpha: raw.alpha.unwrap_or(1.0),
        gamma: raw.gamma.unwrap_or(0.0),
        epsilon: raw.epsilon.unwrap_or(DEFAULT_EPSILON),
        hbar: raw.hbar.unwrap_or(1.0),
        t0: raw.t0.unwrap_or(0.0),
        tf: raw.tf.ok_or_else(|| required("tf"))?,
        n_steps: raw.n_steps.ok_or_else(|| required("n_steps"))?,
        output_path: raw.output_path.ok_or_else(|| required("output_path"))?,
        seed: raw.seed.unwrap_or(0),
        near_singular_threshold: raw
            .near_singular_threshold
            .unwrap_or(DEFAULT_NEAR_SINGULAR_THRESHOLD),
        derivative_mode: raw.derivative_mode,
        diagnose: raw.diagnose,
        plot_script: raw.plot_script,
        sweep: raw.sweep,
    };
    config.validate()?;
    Ok(config)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rfind('\n')
        .map_or(before.len(), |nl| before.len() - nl - 1)
        + 1;
    (line, column)
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        use ScenarioError as E;
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(E::validation(name, "must be finite"))
            }
        };
        finite("t0", self.t0)?;
        finite("tf", self.tf)?;
        if !(self.tf > self.t0) {
            return Err(E::validation("tf", "must be greater than t0"));
        }
        if self.n_steps < 2 {
            return Err(E::validation("n_steps", "must be at least 2"));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(E::validation("alpha", "must be finite and nonnegative"));
        }
        finite("gamma", self.gamma)?;
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(E::validation("epsilon", "must be positive"));
        }
        if !(self.hbar > 0.0) || !self.hbar.is_finite() {
            return Err(E::validation("hbar", "must be positive"));
        }
        if !(self.near_singular_threshold > 0.0) {
            return Err(E::validation("near_singular_threshold", "must be positive"));
        }
        validate_matrix("generator", &self.generator)?;
        let n = self.generator.dim();
        for (name, spec) in [
            ("generator_b", &self.generator_b),
            ("initial", &self.initial),
        ] {
            if let Some(spec) = spec {
                validate_matrix(name, spec)?;
                if spec.dim() != n {
                    return Err(E::validation(
                        name,
                        format!(
                            "dimension {} does not match generator dimension {n}",
                            spec.dim()
                        ),
                    ));
                }
            }
        }
        if self.scenario == ScenarioKind::CrossingReport && !self.generator.is_two_level() {
            return Err(E::validation(
                "generator",
                "crossing_report needs a two_level or driven_two_level preset",
            ));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(E::validation("sweep.values", "must not be empty"));
            }
            if !sweep.values.iter().all(|v| v.is_finite()) {
                return Err(E::validation("sweep.values", "must be finite"));
            }
            for &v in &sweep.values {
                self.with_parameter(sweep.parameter, v).validate_scalars()?;
            }
        }
        Ok(())
    }

    fn validate_scalars(&self) -> Result<(), ScenarioError> {
        let mut copy = self.clone();
        copy.sweep = None;
        copy.validate()
    }

    /// The same configuration with one swept parameter replaced.
    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> Self {
        let mut c = self.clone();
        match parameter {
            SweepParameter::Alpha => c.alpha = value,
            SweepParameter::Gamma => c.gamma = value,
            SweepParameter::Epsilon => c.epsilon = value,
            SweepParameter::Hbar => c.hbar = value,
        }
        c
    }

    pub fn feedback_kind(&self) -> FeedbackKind {
        let gamma = self.gamma;
        match self.feedback {
            FeedbackName::None => FeedbackKind::None,
            FeedbackName::InverseScaled => FeedbackKind::InverseScaled { gamma },
            FeedbackName::IdentityScaled => FeedbackKind::IdentityScaled { gamma },
            FeedbackName::StateScaled => FeedbackKind::StateScaled { gamma },
            FeedbackName::Regularized => FeedbackKind::Regularized {
                gamma,
                epsilon: self.epsilon,
            },
        }
    }
}

fn validate_matrix(name: &'static str, spec: &MatrixSpec) -> Result<(), ScenarioError> {
    let bad = |msg: &str| Err(ScenarioError::validation(name, msg.to_string()));
    match spec {
        MatrixSpec::Zero { dim }
        | MatrixSpec::IdentityScaled { dim, .. }
        | MatrixSpec::Random { dim, .. }
            if *dim == 0 =>
        {
            bad("dim must be positive")
        }
        MatrixSpec::IdentityScaled { scale, .. } if !scale.is_finite() => {
            bad("scale must be finite")
        }
        MatrixSpec::Random { scale, shift, .. } if !(scale.is_finite() && shift.is_finite()) => {
            bad("scale and shift must be finite")
        }
        MatrixSpec::ConstantInline { rows } => {
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                bad("rows must form a nonempty square matrix")
            } else if !rows.iter().flatten().all(|x| x.is_finite()) {
                bad("entries must be finite")
            } else {
                Ok(())
            }
        }
        MatrixSpec::DiagonalFn { entries } => {
            if entries.is_empty() {
                bad("entries must not be empty")
            } else if !entries.iter().all(|e| e.to_fn().is_finite()) {
                bad("entries must be finite")
            } else {
                Ok(())
            }
        }
        MatrixSpec::TwoLevel { e1, e2, delta } => {
            if e1.to_fn().is_finite() && e2.to_fn().is_finite() && delta.is_finite() {
                Ok(())
            } else {
                bad("parameters must be finite")
            }
        }
        MatrixSpec::DrivenTwoLevel { epsilon, delta } => {
            if epsilon.to_fn().is_finite() && delta.to_fn().is_finite() {
                Ok(())
            } else {
                bad("parameters must be finite")
            }
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
scenario = "classical_det"
tf = 1.0
n_steps = 1000
output_path = "out.csv"

[generator]
preset = "identity_scaled"
dim = 2
scale = 0.5
"#;

    #[test]
    fn minimal_classical_config() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.scenario, ScenarioKind::ClassicalDet);
        assert_eq!(
            c.generator,
            MatrixSpec::IdentityScaled { dim: 2, scale: 0.5 }
        );
        assert_eq!((c.t0, c.tf, c.n_steps), (0.0, 1.0, 1000));
        assert_eq!(c.feedback_kind(), FeedbackKind::None);
        assert_eq!((c.alpha, c.hbar), (1.0, 1.0));
    }

    #[test]
    fn missing_tf_is_named() {
        let text = MINIMAL.replace("tf = 1.0\n", "");
        match parse_config(&text) {
            Err(ScenarioError::Validation { field, .. }) => assert_eq!(field, "tf"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn sweep_points() {
        let text = format!("{MINIMAL}\n[sweep]\nparameter = \"alpha\"\nvalues = [0.1, 1, 10]\n");
        let c = parse_config(&text).unwrap();
        let sweep = c.sweep.unwrap();
        assert_eq!(sweep.parameter, SweepParameter::Alpha);
        assert_eq!(sweep.values, vec![0.1, 1.0, 10.0]);
    }

    #[test]
    fn unknown_keys_are_named_with_position() {
        let text = MINIMAL.replace("n_steps = 1000", "n_steps = 1000\nbogus_key = 3");
        match parse_config(&text) {
            Err(ScenarioError::Parse { message, line, .. }) => {
                assert!(message.contains("bogus_key"), "{message}");
                assert_eq!(line, 5);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let nested = MINIMAL.replace("scale = 0.5", "scale = 0.5\nwidth = 2");
        match parse_config(&nested) {
            Err(ScenarioError::Parse { message, .. }) => {
                assert!(message.contains("width"), "{message}")
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        match parse_config("scenario = \"classical_det\"\ntf = = 2\n") {
            Err(ScenarioError::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn field_validation() {
        let cases = [
            ("n_steps = 1000", "n_steps = 1", "n_steps"),
            ("tf = 1.0", "tf = -1.0", "tf"),
            (
                "scale = 0.5",
                "scale = 0.5\n[initial]\npreset = \"zero\"\ndim = 3",
                "initial",
            ),
        ];
        for (from, to, field_name) in cases {
            match parse_config(&MINIMAL.replace(from, to)) {
                Err(ScenarioError::Validation { field, .. }) => assert_eq!(field, field_name),
                other => panic!("expected validation error on {field_name}, got {other:?}"),
            }
        }
        let bad_sweep = format!("{MINIMAL}\n[sweep]\nparameter = \"hbar\"\nvalues = [1.0, -1.0]\n");
        assert!(matches!(
            parse_config(&bad_sweep),
            Err(ScenarioError::Validation { field: "hbar", .. })
        ));
        let empty = format!("{MINIMAL}\n[sweep]\nparameter = \"gamma\"\nvalues = []\n");
        assert!(matches!(
            parse_config(&empty),
            Err(ScenarioError::Validation {
                field: "sweep.values",
                ..
            })
        ));
    }

    #[test]
    fn crossing_report_needs_two_level() {
        let text = MINIMAL.replace("classical_det", "crossing_report");
        assert!(matches!(
            parse_config(&text),
            Err(ScenarioError::Validation {
                field: "generator",
                ..
            })
        ));
    }

    #[test]
    fn function_specs_accept_numbers_and_tables() {
        let text = r#"
scenario = "crossing_report"
t0 = 0.0
tf = 3.0
n_steps = 300
output_path = "x.csv"
[generator]
preset = "two_level"
e1 = { kind = "linear", slope = 1.0 }
e2 = { kind = "linear", slope = 1.0 }
delta = 2.0
"#;
        let c = parse_config(text).unwrap();
        assert!(c.generator.is_two_level());
        let diag = r#"
scenario = "classical_det"
tf = 1.0
n_steps = 10
output_path = "x.csv"
[generator]
preset = "diagonal_fn"
entries = [0.5, { kind = "cos", omega = 2.0 }]
"#;
        let c = parse_config(diag).unwrap();
        assert_eq!(c.generator.dim(), 2);
    }
}
