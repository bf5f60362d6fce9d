//! Whole-trajectory pipelines: correlators, coefficient families, maps and
//! parameter sweeps.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlators::{correlator_set, correlator_set_with, CorrelatorSet, FaultHooks};
use crate::error::{Error, Result};
use crate::maps::{
    bloch_image, classification_tolerance, cp_report, solve_a_map, AMatrix, BlochImage, CPReport,
    Classification,
};
use crate::quadrature::QuadConfig;
use crate::states::{coefficients, CoefficientSet, ScenarioTag, TrajectoryPlan};
use crate::wightman::DetectorParams;

/// Which pair of coefficient families a map connects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    IniToInertial,
    IniToAccelerated,
    IniToCombined,
    /// From the state reached at the end of the inertial stretch to the state
    /// after the accelerated one.
    InertialToCombined,
}

impl MapKind {
    pub const ALL: [MapKind; 4] = [
        MapKind::IniToInertial,
        MapKind::IniToAccelerated,
        MapKind::IniToCombined,
        MapKind::InertialToCombined,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MapKind::IniToInertial => "ini_to_inertial",
            MapKind::IniToAccelerated => "ini_to_accelerated",
            MapKind::IniToCombined => "ini_to_combined",
            MapKind::InertialToCombined => "inertial_to_combined",
        }
    }

    /// `(input family, output family)`.
    pub fn endpoints(self) -> (ScenarioTag, ScenarioTag) {
        match self {
            MapKind::IniToInertial => (ScenarioTag::Ini, ScenarioTag::Inertial),
            MapKind::IniToAccelerated => (ScenarioTag::Ini, ScenarioTag::Accelerated),
            MapKind::IniToCombined => (ScenarioTag::Ini, ScenarioTag::Combined),
            MapKind::InertialToCombined => (ScenarioTag::Inertial, ScenarioTag::Combined),
        }
    }
}

/// All coefficient families of one trajectory plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub plan: TrajectoryPlan,
    pub params: DetectorParams,
    pub corr: CorrelatorSet,
    pub ini: CoefficientSet,
    pub inertial: CoefficientSet,
    pub accelerated: CoefficientSet,
    pub combined: CoefficientSet,
}

impl Scenario {
    pub fn evaluate(plan: &TrajectoryPlan, params: &DetectorParams, quad: &QuadConfig) -> Result<Self> {
        Self::evaluate_with(plan, params, quad, &FaultHooks::default())
    }

    pub fn evaluate_with(
        plan: &TrajectoryPlan,
        params: &DetectorParams,
        quad: &QuadConfig,
        hooks: &FaultHooks,
    ) -> Result<Self> {
        let corr = correlator_set_with(plan, params, quad, hooks)?;
        Ok(Self {
            plan: *plan,
            params: *params,
            ini: CoefficientSet::ini(),
            inertial: coefficients(ScenarioTag::Inertial, &corr, params)?,
            accelerated: coefficients(ScenarioTag::Accelerated, &corr, params)?,
            combined: coefficients(ScenarioTag::Combined, &corr, params)?,
            corr,
        })
    }

    pub fn coeffs(&self, tag: ScenarioTag) -> &CoefficientSet {
        match tag {
            ScenarioTag::Ini => &self.ini,
            ScenarioTag::Inertial => &self.inertial,
            ScenarioTag::Accelerated => &self.accelerated,
            ScenarioTag::Combined => &self.combined,
        }
    }

    pub fn map(&self, kind: MapKind) -> Result<AMatrix> {
        let (from, to) = kind.endpoints();
        solve_a_map(self.coeffs(to), self.coeffs(from))
    }

    pub fn tol_cls(&self) -> f64 {
        classification_tolerance(self.corr.err)
    }

    pub fn cp_report(&self, kind: MapKind) -> Result<CPReport> {
        cp_report(&self.map(kind)?, self.tol_cls())
    }

    pub fn bloch_image(&self, kind: MapKind, n_samples: usize) -> Result<BlochImage> {
        bloch_image(&self.map(kind)?, n_samples)
    }

    /// Distinct warnings of all coefficient families.
    pub fn warnings(&self) -> Vec<String> {
        let mut w: Vec<String> = [&self.inertial, &self.accelerated, &self.combined]
            .iter()
            .flat_map(|c| c.warnings.iter().cloned())
            .collect();
        w.sort();
        w.dedup();
        w
    }
}

/// The map obtained if the detector stayed inertial throughout `[−t, T]`,
/// from the state at `0` to the state at `T`.
pub fn split_inertial_map(
    plan: &TrajectoryPlan,
    params: &DetectorParams,
    quad: &QuadConfig,
) -> Result<AMatrix> {
    let head = TrajectoryPlan::new(plan.inertial_duration, plan.acceleration, 0.0)?;
    let whole = TrajectoryPlan::new(
        plan.inertial_duration + plan.accel_duration,
        plan.acceleration,
        0.0,
    )?;
    let (c_head, c_whole) = rayon::join(
        || correlator_set(&head, params, quad),
        || correlator_set(&whole, params, quad),
    );
    let before = coefficients(ScenarioTag::Inertial, &c_head?, params)?;
    let mut after = coefficients(ScenarioTag::Inertial, &c_whole?, params)?;
    // The inertial block covers [−(t+T), 0]; moving it to [−t, T] only
    // changes the phase of Y^{−−}, by e^{−2iωT}.
    after.lambda *= Complex64::from_polar(1.0, -2.0 * params.omega * plan.accel_duration);
    solve_a_map(&after, &before)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepVariable {
    /// Accelerated duration.
    #[serde(rename = "T")]
    AccelDuration,
    /// Inertial duration.
    #[serde(rename = "t")]
    InertialDuration,
    #[serde(rename = "a")]
    Acceleration,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::AccelDuration => "T",
            SweepVariable::InertialDuration => "t",
            SweepVariable::Acceleration => "a",
        }
    }

    /// `base` with this variable replaced by `value`.
    pub fn apply(self, base: &TrajectoryPlan, value: f64) -> Result<TrajectoryPlan> {
        let mut p = *base;
        match self {
            SweepVariable::AccelDuration => p.accel_duration = value,
            SweepVariable::InertialDuration => p.inertial_duration = value,
            SweepVariable::Acceleration => p.acceleration = value,
        }
        p.validate()?;
        Ok(p)
    }
}

/// Uniform grid of `n` points on `(0, hi]`.
pub fn default_sweep_values(n: usize, hi: f64) -> Vec<f64> {
    (1..=n).map(|k| hi * k as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub plan: TrajectoryPlan,
    pub report: Option<CPReport>,
    /// `ok`, `nonconverged: <ids>` or `error: <message>`.
    pub status: String,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// Second-smallest eigenvalue below the classification tolerance.
    pub fn second_negative(&self) -> Option<bool> {
        self.report.map(|r| r.second_smallest < -r.tol_cls)
    }

    /// Second-smallest eigenvalue within the classification tolerance of zero.
    pub fn second_unresolved(&self) -> Option<bool> {
        self.report.map(|r| r.second_smallest.abs() <= r.tol_cls)
    }
}

pub struct SweepSpec<'a> {
    pub base: TrajectoryPlan,
    pub variable: SweepVariable,
    pub kind: MapKind,
    pub params: &'a DetectorParams,
    pub quad: &'a QuadConfig,
    pub hooks: FaultHooks,
}

impl SweepSpec<'_> {
    pub fn row(&self, value: f64) -> SweepRow {
        let plan = match self.variable.apply(&self.base, value) {
            Ok(p) => p,
            Err(e) => {
                return SweepRow {
                    value,
                    plan: self.base,
                    report: None,
                    status: format!("error: {e}"),
                }
            }
        };
        let outcome = Scenario::evaluate_with(&plan, self.params, self.quad, &self.hooks)
            .and_then(|sc| Ok((sc.cp_report(self.kind)?, sc.corr.failures)));
        match outcome {
            Ok((report, failures)) => SweepRow {
                value,
                plan,
                report: Some(report),
                status: if failures.is_empty() {
                    "ok".to_string()
                } else {
                    format!("nonconverged: {}", failures.join(" "))
                },
            },
            Err(e) => SweepRow {
                value,
                plan,
                report: None,
                status: format!("error: {e}"),
            },
        }
    }

    /// One row per value, computed in parallel, in input order.
    pub fn run(&self, values: &[f64]) -> Vec<SweepRow> {
        values.par_iter().map(|&v| self.row(v)).collect()
    }

    /// Window of sweep values where the second-smallest eigenvalue is
    /// negative (see [`NcpWindow`]), with its end refined by `refine_steps` bisections.
    pub fn ncp_window(&self, values: &[f64], refine_steps: usize) -> Result<NcpWindow> {
        let rows = self.run(values);
        let mut w = NcpWindow::from_rows(&rows)?;
        if let (Some(lo), Some(hi)) = (w.last_inside, w.first_outside) {
            let (mut lo, mut hi) = (lo, hi);
            for _ in 0..refine_steps {
                let mid = 0.5 * (lo + hi);
                let row = self.row(mid);
                match row.second_negative() {
                    Some(true) => lo = mid,
                    Some(false) => hi = mid,
                    None => return Err(Error::Domain(format!("refinement at {mid}: {}", row.status))),
                }
            }
            w.end = Some(0.5 * (lo + hi));
        }
        Ok(w)
    }
}

/// The first run of a sweep with a negative second eigenvalue.
///
/// Near the start of a duration sweep the second eigenvalue shrinks towards
/// zero and may sit inside the classification tolerance; such leading rows are
/// skipped and counted in `unresolved_prefix`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcpWindow {
    pub unresolved_prefix: usize,
    /// Smallest grid value inside the window.
    pub first_inside: Option<f64>,
    /// Largest grid value inside the window.
    pub last_inside: Option<f64>,
    /// Smallest grid value past the window.
    pub first_outside: Option<f64>,
    /// Refined window end; the last inside value when not refined.
    pub end: Option<f64>,
    /// No negative second eigenvalue occurs after the window.
    pub contiguous: bool,
}

impl NcpWindow {
    pub fn from_rows(rows: &[SweepRow]) -> Result<Self> {
        let status = |r: &SweepRow| {
            r.second_negative()
                .zip(r.second_unresolved())
                .ok_or_else(|| Error::Domain(format!("sweep row {}: {}", r.value, r.status)))
        };
        let flags = rows.iter().map(status).collect::<Result<Vec<(bool, bool)>>>()?;
        let n_pre = flags.iter().take_while(|f| f.1).count();
        let n_in = flags[n_pre..].iter().take_while(|f| f.0).count();
        let past = n_pre + n_in;
        let contiguous = !flags[past..].iter().any(|f| f.0);
        let last_inside = (n_in > 0).then(|| rows[past - 1].value);
        Ok(Self {
            unresolved_prefix: n_pre,
            first_inside: (n_in > 0).then(|| rows[n_pre].value),
            last_inside,
            first_outside: rows.get(past).filter(|_| n_in > 0).map(|r| r.value),
            end: last_inside,
            contiguous,
        })
    }

    /// Window end measured from zero, or zero when the window is empty.
    pub fn length(&self) -> f64 {
        self.end.unwrap_or(0.0)
    }
}

/// Classification counts of a sweep, for summaries.
pub fn classification_counts(rows: &[SweepRow]) -> [(Classification, usize); 3] {
    let count = |c| rows.iter().filter(|r| r.report.map(|x| x.classification) == Some(c)).count();
    [
        (Classification::Cp, count(Classification::Cp)),
        (
            Classification::NcpTruncationArtifact,
            count(Classification::NcpTruncationArtifact),
        ),
        (Classification::Ncp, count(Classification::Ncp)),
    ]
}
