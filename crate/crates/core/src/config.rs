//! JSON scenario configuration.
//!
//! Every block is optional and falls back to the defaults below; unknown keys
//! are rejected so typos surface as parse errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::correlators::FaultHooks;
use crate::error::{Error, Result};
use crate::quadrature::QuadConfig;
use crate::scenario::{default_sweep_values, MapKind, SweepVariable};
use crate::states::TrajectoryPlan;
use crate::verify::VerifyGrid;
use crate::wightman::DetectorParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorBlock {
    pub omega: f64,
    pub epsilon: f64,
    pub coupling_abs: f64,
    pub coupling_phase: f64,
}

impl Default for DetectorBlock {
    fn default() -> Self {
        let d = DetectorParams::default();
        Self {
            omega: d.omega,
            epsilon: d.epsilon,
            coupling_abs: d.coupling_abs,
            coupling_phase: d.coupling_phase,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoryBlock {
    pub inertial_duration: f64,
    pub acceleration: f64,
    pub accel_duration: f64,
}

impl Default for TrajectoryBlock {
    fn default() -> Self {
        Self {
            inertial_duration: 1.0,
            acceleration: 3.0,
            accel_duration: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureBlock {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub max_panels: usize,
}

impl Default for QuadratureBlock {
    fn default() -> Self {
        let q = QuadConfig::default();
        Self {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_depth: q.max_depth,
            max_panels: q.max_panels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    pub variable: SweepVariable,
    /// Strictly increasing; empty means 80 uniform points on `(0, 2]`.
    pub values: Vec<f64>,
    pub map: MapKind,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            variable: SweepVariable::AccelDuration,
            values: Vec::new(),
            map: MapKind::InertialToCombined,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlochBlock {
    pub n_samples: usize,
    pub map: MapKind,
}

impl Default for BlochBlock {
    fn default() -> Self {
        Self {
            n_samples: 2000,
            map: MapKind::InertialToCombined,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleBlock {
    /// Midpoint cells per axis.
    pub n: usize,
}

impl Default for OracleBlock {
    fn default() -> Self {
        Self { n: 600 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub directory: PathBuf,
    pub formats: Vec<String>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec!["csv".into(), "json".into()],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub detector: DetectorBlock,
    pub trajectory: TrajectoryBlock,
    pub quadrature: QuadratureBlock,
    pub sweep: SweepBlock,
    pub bloch: BlochBlock,
    pub verify: VerifyGrid,
    pub oracle: OracleBlock,
    pub output: OutputBlock,
    pub fault_injection: FaultHooks,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn params(&self) -> DetectorParams {
        DetectorParams {
            omega: self.detector.omega,
            epsilon: self.detector.epsilon,
            coupling_abs: self.detector.coupling_abs,
            coupling_phase: self.detector.coupling_phase,
        }
    }

    pub fn plan(&self) -> TrajectoryPlan {
        TrajectoryPlan {
            inertial_duration: self.trajectory.inertial_duration,
            acceleration: self.trajectory.acceleration,
            accel_duration: self.trajectory.accel_duration,
        }
    }

    pub fn quad(&self) -> QuadConfig {
        QuadConfig {
            rel_tol: self.quadrature.rel_tol,
            abs_tol: self.quadrature.abs_tol,
            max_depth: self.quadrature.max_depth,
            band_scale: None,
            max_panels: self.quadrature.max_panels,
        }
    }

    pub fn sweep_values(&self) -> Vec<f64> {
        if self.sweep.values.is_empty() {
            default_sweep_values(80, 2.0)
        } else {
            self.sweep.values.clone()
        }
    }

    /// Checks every physical field; all failures map to [`Error::Config`].
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        self.params().validate().map_err(wrap)?;
        self.plan().validate().map_err(wrap)?;
        self.quad().validate().map_err(wrap)?;
        let v = &self.sweep.values;
        if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sweep values must be finite and strictly increasing".into()));
        }
        for &x in v {
            self.sweep.variable.apply(&self.plan(), x).map_err(wrap)?;
        }
        if self.bloch.n_samples < 6 {
            return Err(Error::Config("bloch.n_samples must be at least 6".into()));
        }
        if self.oracle.n < 2 {
            return Err(Error::Config("oracle.n must be at least 2".into()));
        }
        if let Some(f) = self.output.formats.iter().find(|f| !matches!(f.as_str(), "csv" | "json")) {
            return Err(Error::Config(format!("unknown output format {f:?}")));
        }
        self.verify.plans().map_err(wrap)?;
        Ok(())
    }

    pub fn wants(&self, format: &str) -> bool {
        self.output.formats.iter().any(|f| f == format)
    }
}
