//! Invariant checks across all layers, collected into a report.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlators::FaultHooks;
use crate::error::Result;
use crate::maps::{apply_map, hermitian_eigs, reshuffle};
use crate::quadrature::QuadConfig;
use crate::scenario::{MapKind, Scenario};
use crate::states::{assemble_state, density_checks, BlochAngles, TrajectoryPlan};
use crate::wightman::{wightman, DetectorParams, PairKind};

/// One named inequality `value ≤ tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tol,
            pass: value <= tol,
        }
    }

    /// `value ≥ −tol`, recorded as `−value ≤ tol`.
    pub fn not_below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self::below(name, -value, tol)
    }
}

/// Grid of scenarios on which the invariant suite runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyGrid {
    pub inertial_durations: Vec<f64>,
    pub accel_durations: Vec<f64>,
    pub accelerations: Vec<f64>,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        Self {
            inertial_durations: vec![0.25, 0.5, 1.0, 2.0],
            accel_durations: vec![0.25, 0.5, 1.0, 2.0],
            accelerations: vec![1.0, 2.0, 3.0, 4.0],
        }
    }
}

impl VerifyGrid {
    pub fn plans(&self) -> Result<Vec<TrajectoryPlan>> {
        let mut out = Vec::new();
        for &a in &self.accelerations {
            for &t in &self.inertial_durations {
                for &big_t in &self.accel_durations {
                    out.push(TrajectoryPlan::new(t, a, big_t)?);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub plan: TrajectoryPlan,
    pub quad_err: f64,
    pub tol_real: f64,
    pub trace_dev: f64,
    pub classification: String,
    pub eigs: [f64; 4],
    pub nonconverged: Vec<String>,
    pub warnings: Vec<String>,
    pub wall_seconds: f64,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub pass: bool,
    pub converged: bool,
    pub global_checks: Vec<Check>,
    pub scenarios: Vec<ScenarioReport>,
}

impl RunReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.global_checks
            .iter()
            .chain(self.scenarios.iter().flat_map(|s| s.checks.iter()))
            .filter(|c| !c.pass)
            .collect()
    }
}

/// Kernel identities that need no integration.
pub fn kernel_checks(params: &DetectorParams, accelerations: &[f64]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let w0 = params.coincidence_value();
    for a in accelerations.iter().copied() {
        let mut coinc: f64 = 0.0;
        for pair in PairKind::ALL {
            let w = wightman(pair, 0.0, 0.0, a, params)?;
            coinc = coinc.max((w - w0).norm() / w0);
        }
        out.push(Check::below(format!("kernel coincidence a={a}"), coinc, 1e-12));

        let mut conj: f64 = 0.0;
        let mut herm: f64 = 0.0;
        let mut bound: f64 = 0.0;
        let n = 20;
        for i in 0..n {
            for j in 0..n {
                let t1 = -2.0 + 4.0 * i as f64 / (n - 1) as f64;
                let t2 = -2.0 + 4.0 * j as f64 / (n - 1) as f64;
                let ai = wightman(PairKind::AI, t1, t2, a, params)?;
                let ia = wightman(PairKind::IA, t2, t1, a, params)?;
                conj = conj.max((ai - ia.conj()).norm() / ai.norm().max(1.0));
                for pair in [PairKind::II, PairKind::AA] {
                    let w12 = wightman(pair, t1, t2, a, params)?;
                    let w21 = wightman(pair, t2, t1, a, params)?;
                    herm = herm.max((w12 - w21.conj()).norm() / w12.norm().max(1.0));
                }
                for pair in PairKind::ALL {
                    let w = wightman(pair, t1, t2, a, params)?;
                    bound = bound.max(w.norm() / w0 - 1.0);
                }
            }
        }
        out.push(Check::below(format!("W_AI = conj W_IA swapped a={a}"), conj, 1e-12));
        out.push(Check::below(format!("kernel hermiticity a={a}"), herm, 1e-12));
        out.push(Check::below(format!("kernel bounded by coincidence a={a}"), bound, 1e-9));
    }
    Ok(out)
}

/// Every identity that must hold for a single scenario.
pub fn scenario_checks(sc: &Scenario) -> Result<Vec<Check>> {
    let mut out = sc.corr.invariant_checks();
    let tol = sc.corr.tol_real();
    for c in [&sc.inertial, &sc.accelerated, &sc.combined] {
        out.push(Check::below(
            format!("trace identities {:?}", c.tag),
            c.trace_defect(),
            tol,
        ));
        out.push(Check::not_below(format!("beta >= 0 {:?}", c.tag), c.beta, tol));
        out.push(Check::not_below(format!("eta >= 0 {:?}", c.tag), c.eta, tol));
    }

    let tol_cls = sc.tol_cls();
    let angles: Vec<BlochAngles> = [(0.0, 0.0), (1.1, 0.4), (std::f64::consts::PI, 2.0), (2.3, 5.9)]
        .iter()
        .map(|&(t, p)| BlochAngles::new(t, p))
        .collect::<Result<_>>()?;
    for kind in MapKind::ALL {
        let a = sc.map(kind)?;
        let b = reshuffle(&a);
        let name = kind.as_str();
        out.push(Check::below(format!("A structure {name}"), a.structure_defect(), 1e-12));
        out.push(Check::below(format!("B hermiticity {name}"), b.hermiticity_defect(), 1e-10));
        let eigs = hermitian_eigs(&b)?;
        out.push(Check::below(
            format!("spectrum sum = trace B {name}"),
            (eigs.iter().sum::<f64>() - b.trace()).abs(),
            1e-10,
        ));
        let (from, to) = kind.endpoints();
        let mut map_dev: f64 = 0.0;
        let mut trace_dev: f64 = 0.0;
        let mut herm_dev: f64 = 0.0;
        for ang in &angles {
            let got = apply_map(&a, &assemble_state(sc.coeffs(from), ang));
            let want = assemble_state(sc.coeffs(to), ang);
            for r in 0..2 {
                for s in 0..2 {
                    map_dev = map_dev.max((got.rho[r][s] - want.rho[r][s]).norm());
                }
            }
            let rep = density_checks(&got);
            trace_dev = trace_dev.max(rep.trace_dev);
            herm_dev = herm_dev.max(rep.herm_dev);
        }
        out.push(Check::below(format!("map reproduces output family {name}"), map_dev, 1e-10));
        out.push(Check::below(format!("trace of mapped state {name}"), trace_dev, tol));
        out.push(Check::below(format!("mapped state hermiticity {name}"), herm_dev, 1e-12));
        if matches!(kind, MapKind::IniToInertial | MapKind::IniToAccelerated) {
            out.push(Check::not_below(
                format!("uncorrelated start second eigenvalue {name}"),
                eigs[1],
                tol_cls,
            ));
        }
    }

    let direct = sc.map(MapKind::IniToCombined)?;
    let composed = sc.map(MapKind::InertialToCombined)?.mul(&sc.map(MapKind::IniToInertial)?);
    out.push(Check::below(
        "composition ini->combined",
        direct.max_abs_diff(&composed),
        1e-8,
    ));
    Ok(out)
}

/// Runs the full suite on every plan of `grid`.
pub fn run_suite(
    params: &DetectorParams,
    quad: &QuadConfig,
    grid: &VerifyGrid,
    hooks: &FaultHooks,
) -> Result<RunReport> {
    let global_checks = kernel_checks(params, &grid.accelerations)?;
    let scenarios = grid
        .plans()?
        .par_iter()
        .map(|plan| {
            let start = Instant::now();
            let sc = Scenario::evaluate_with(plan, params, quad, hooks)?;
            let checks = scenario_checks(&sc)?;
            let cp = sc.cp_report(MapKind::InertialToCombined)?;
            Ok(ScenarioReport {
                plan: *plan,
                quad_err: sc.corr.err,
                tol_real: sc.corr.tol_real(),
                trace_dev: sc.combined.trace_defect(),
                classification: cp.classification.to_string(),
                eigs: cp.eigs,
                nonconverged: sc.corr.failures.clone(),
                warnings: sc.warnings(),
                wall_seconds: start.elapsed().as_secs_f64(),
                checks,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let converged = scenarios.iter().all(|s| s.nonconverged.is_empty());
    let pass = global_checks.iter().all(|c| c.pass)
        && scenarios.iter().all(|s| s.checks.iter().all(|c| c.pass));
    Ok(RunReport {
        pass,
        converged,
        global_checks,
        scenarios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_comparisons() {
        assert!(Check::below("x", 1e-9, 1e-8).pass);
        assert!(!Check::below("x", 1e-7, 1e-8).pass);
        assert!(!Check::below("x", f64::NAN, 1.0).pass);
        assert!(Check::not_below("x", -1e-9, 1e-8).pass);
        assert!(!Check::not_below("x", -1e-7, 1e-8).pass);
    }

    #[test]
    fn default_grid_size() {
        assert_eq!(VerifyGrid::default().plans().unwrap().len(), 64);
    }

    #[test]
    fn kernel_checks_pass_for_defaults() {
        let checks = kernel_checks(&DetectorParams::default(), &[1.0, 3.0]).unwrap();
        for c in &checks {
            assert!(c.pass, "{c:?}");
        }
    }
}
