//! TOML experiment configuration.
//!
//! ```toml
//! suite = "gradcheck"
//! dim = 4
//! seed = 1
//!
//! [operators]
//! q = [2.0, 1.0, 0.5, 0.25]
//! r = [1.0, 0.5, 0.25, 0.0]
//! r_rotation_seed = 5
//!
//! [functions]
//! standard = ["cos_cylinder", "bump"]
//! extra = [{ kind = "holder_cusp", direction = 0, alpha = 0.5 }]
//!
//! [ibp]
//! samples = 1000000
//! ```
//!
//! Every section is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::functions::{standard_battery_specs, CylinderFunction, FunctionSpec};
use crate::hilbert::SelfAdjointOp;
use crate::interpolation::default_r_grid;
use crate::report::OutputFormat;
use crate::{Error, Result};

/// Suites in execution order of `all`.
pub const SUITES: [(&str, &str); 6] = [
    ("gradcheck", "pseudo-inverse identities, gradient relations, kernel annihilation"),
    ("malliavin", "Gross vs CDP derivative and Sobolev-norm agreement"),
    ("ibp", "Monte-Carlo integration by parts and Gaussian moments"),
    ("chaos", "Wiener chaos projection and the domain identity"),
    ("lasry-lions", "quadratic closed form and the three envelope bounds"),
    ("interp", "K-functional upper bounds and the Hölder embedding"),
];

/// Dimension limits of [`ExperimentConfig::dim`].
pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub suite: String,
    pub dim: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub operators: OperatorConfig,
    pub functions: FunctionConfig,
    pub gradcheck: GradcheckConfig,
    pub malliavin: MalliavinConfig,
    pub ibp: IbpConfig,
    pub chaos: ChaosConfig,
    pub lasry_lions: LasryLionsConfig,
    pub interp: InterpSuiteConfig,
}

/// Eigenvalues plus an optional Haar rotation seed (diagonal frame when
/// absent). Empty lists take a default spectrum sized to `dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OperatorConfig {
    pub q: Vec<f64>,
    pub q_rotation_seed: Option<u64>,
    pub r: Vec<f64>,
    pub r_rotation_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FunctionConfig {
    /// Names from the standard battery.
    pub standard: Vec<String>,
    pub extra: Vec<FunctionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradcheckConfig {
    pub points: usize,
    pub probes: usize,
    /// Random operators for the pseudo-inverse identities.
    pub operators: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MalliavinConfig {
    pub points: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IbpConfig {
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChaosConfig {
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LasryLionsConfig {
    pub alpha: f64,
    pub t_grid: Vec<f64>,
    pub points: usize,
    pub oracle_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterpSuiteConfig {
    pub alpha: f64,
    pub r_grid: Vec<f64>,
    pub phi_samples: usize,
    pub s_samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suite: "all".into(),
            dim: 4,
            seed: 1,
            out: None,
            format: OutputFormat::Json,
            operators: OperatorConfig::default(),
            functions: FunctionConfig::default(),
            gradcheck: GradcheckConfig::default(),
            malliavin: MalliavinConfig::default(),
            ibp: IbpConfig::default(),
            chaos: ChaosConfig::default(),
            lasry_lions: LasryLionsConfig::default(),
            interp: InterpSuiteConfig::default(),
        }
    }
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self {
            q: Vec::new(),
            q_rotation_seed: Some(3),
            r: Vec::new(),
            r_rotation_seed: Some(5),
        }
    }
}

impl Default for FunctionConfig {
    fn default() -> Self {
        Self {
            standard: STANDARD_NAMES.iter().map(|s| s.to_string()).collect(),
            extra: Vec::new(),
        }
    }
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            points: 100,
            probes: 8,
            operators: 50,
        }
    }
}

impl Default for MalliavinConfig {
    fn default() -> Self {
        Self {
            points: 100,
            samples: 200_000,
        }
    }
}

impl Default for IbpConfig {
    fn default() -> Self {
        Self { samples: 1_000_000 }
    }
}

impl Default for ChaosConfig {
    fn default() -> Self {
        Self { level: 12 }
    }
}

impl Default for LasryLionsConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            t_grid: vec![1e-1, 1e-2, 1e-3, 1e-4],
            points: 12,
            oracle_points: 20,
        }
    }
}

impl Default for InterpSuiteConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            r_grid: default_r_grid(),
            phi_samples: 10_000,
            s_samples: 256,
        }
    }
}

/// Names of [`standard_battery_specs`] in order.
pub const STANDARD_NAMES: [&str; 7] = [
    "linear",
    "quadratic_form",
    "cos_cylinder",
    "sin_cylinder",
    "cos_sin_product",
    "bump",
    "saturation",
];

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// Checks every field and collects all diagnostics into one error.
    pub fn validate(&self) -> Result<()> {
        let mut errs: Vec<String> = Vec::new();
        if !self.suite_names().iter().all(|s| SUITES.iter().any(|(n, _)| n == s)) {
            errs.push(format!(
                "suite: unknown suite `{}` (expected one of {}, all)",
                self.suite,
                SUITES.map(|s| s.0).join(", ")
            ));
        }
        if !(1..=MAX_DIM).contains(&self.dim) {
            errs.push(format!("dim: {} is outside [1, {MAX_DIM}]", self.dim));
        }
        for (name, vals) in [("operators.q", &self.operators.q), ("operators.r", &self.operators.r)] {
            if !vals.is_empty() && vals.len() != self.dim {
                errs.push(format!("{name}: {} eigenvalues for dimension {}", vals.len(), self.dim));
            }
            if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                errs.push(format!("{name}: eigenvalues must be finite and nonnegative"));
            }
        }
        for n in &self.functions.standard {
            if !STANDARD_NAMES.contains(&n.as_str()) {
                errs.push(format!(
                    "functions.standard: unknown function `{n}` (expected one of {})",
                    STANDARD_NAMES.join(", ")
                ));
            }
        }
        if self.dim >= 1 {
            for (i, s) in self.functions.extra.iter().enumerate() {
                if let Err(e) = s.build(self.dim) {
                    errs.push(format!("functions.extra[{i}]: {e}"));
                }
            }
        }
        if self.functions.standard.iter().any(|_| self.dim < 2) {
            errs.push("functions.standard: the standard battery needs dim ≥ 2".into());
        }
        let positive = [
            ("gradcheck.points", self.gradcheck.points),
            ("gradcheck.probes", self.gradcheck.probes),
            ("gradcheck.operators", self.gradcheck.operators),
            ("malliavin.points", self.malliavin.points),
            ("malliavin.samples", self.malliavin.samples),
            ("ibp.samples", self.ibp.samples),
            ("chaos.level", self.chaos.level),
            ("lasry_lions.points", self.lasry_lions.points),
            ("lasry_lions.oracle_points", self.lasry_lions.oracle_points),
            ("interp.phi_samples", self.interp.phi_samples),
            ("interp.s_samples", self.interp.s_samples),
        ];
        for (name, v) in positive {
            if v == 0 {
                errs.push(format!("{name}: must be positive"));
            }
        }
        if self.chaos.level > crate::malliavin::MAX_DEGREE {
            errs.push(format!(
                "chaos.level: {} exceeds {}",
                self.chaos.level,
                crate::malliavin::MAX_DEGREE
            ));
        }
        for (name, a) in [("lasry_lions.alpha", self.lasry_lions.alpha), ("interp.alpha", self.interp.alpha)] {
            if !(a > 0.0 && a < 1.0) {
                errs.push(format!("{name}: {a} is outside (0, 1)"));
            }
        }
        for (name, grid) in [("lasry_lions.t_grid", &self.lasry_lions.t_grid), ("interp.r_grid", &self.interp.r_grid)] {
            if grid.is_empty() {
                errs.push(format!("{name}: grid is empty"));
            }
            if grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                errs.push(format!("{name}: values must be positive and finite"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs.join("; ")))
        }
    }

    /// Suites selected by `suite`, in execution order.
    pub fn suite_names(&self) -> Vec<&'static str> {
        if self.suite == "all" {
            SUITES.iter().map(|s| s.0).collect()
        } else {
            match SUITES.iter().find(|s| s.0 == self.suite) {
                Some(s) => vec![s.0],
                None => vec!["<unknown>"],
            }
        }
    }

    /// `Q`: the configured spectrum or `2/(1+i)`.
    pub fn q_operator(&self) -> Result<SelfAdjointOp> {
        let vals = if self.operators.q.is_empty() {
            (0..self.dim).map(|i| 2.0 / (1.0 + i as f64)).collect()
        } else {
            self.operators.q.clone()
        };
        operator(&vals, self.operators.q_rotation_seed)
    }

    /// `R`: the configured spectrum, or `1/(1+i)` with the last eigenvalue
    /// zeroed when `dim ≥ 2` (so the default exercises a kernel).
    pub fn r_operator(&self) -> Result<SelfAdjointOp> {
        let vals = if self.operators.r.is_empty() {
            let mut v: Vec<f64> = (0..self.dim).map(|i| 1.0 / (1.0 + i as f64)).collect();
            if self.dim >= 2 {
                v[self.dim - 1] = 0.0;
            }
            v
        } else {
            self.operators.r.clone()
        };
        operator(&vals, self.operators.r_rotation_seed)
    }

    /// The selected standard functions followed by the extras.
    pub fn battery(&self) -> Result<Vec<CylinderFunction>> {
        let mut out = Vec::new();
        if !self.functions.standard.is_empty() {
            let specs = standard_battery_specs(self.dim);
            for (name, spec) in STANDARD_NAMES.iter().zip(&specs) {
                if self.functions.standard.iter().any(|n| n == name) {
                    out.push(spec.build(self.dim)?);
                }
            }
        }
        for s in &self.functions.extra {
            out.push(s.build(self.dim)?);
        }
        Ok(out)
    }
}

fn operator(vals: &[f64], seed: Option<u64>) -> Result<SelfAdjointOp> {
    match seed {
        Some(s) => SelfAdjointOp::rotated(vals, s),
        None => SelfAdjointOp::diagonal(vals),
    }
}
