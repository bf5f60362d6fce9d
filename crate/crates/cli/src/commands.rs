use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::Instant;

use accelmap_core::config::ScenarioConfig;
use accelmap_core::correlators::{oracle_value, CorrelatorId};
use accelmap_core::maps::reshuffle;
use accelmap_core::scenario::{classification_counts, NcpWindow, SweepSpec};
use accelmap_core::states::{assemble_state, density_checks};
use accelmap_core::verify::{kernel_checks, run_suite, scenario_checks, Check};
use accelmap_core::{BlochAngles, MapKind, Scenario, ScenarioTag};
use rayon::prelude::*;
use serde_json::json;

use crate::output::{matrix_json, num, write_json, Csv};
use crate::Failure;

const TAGS: [ScenarioTag; 4] = [
    ScenarioTag::Ini,
    ScenarioTag::Inertial,
    ScenarioTag::Accelerated,
    ScenarioTag::Combined,
];

fn tag_name(tag: ScenarioTag) -> &'static str {
    match tag {
        ScenarioTag::Ini => "ini",
        ScenarioTag::Inertial => "inertial",
        ScenarioTag::Accelerated => "accelerated",
        ScenarioTag::Combined => "combined",
    }
}

fn out_dir(cfg: &ScenarioConfig) -> Result<&Path, Failure> {
    let dir = cfg.output.directory.as_path();
    fs::create_dir_all(dir)?;
    Ok(dir)
}

/// Non-convergence wins over failed checks: the checks are unreliable then.
fn outcome(nonconverged: &[String], failed: &[&Check]) -> Result<(), Failure> {
    if !nonconverged.is_empty() {
        return Err(Failure::NonConvergence(nonconverged.join(", ")));
    }
    if !failed.is_empty() {
        let names: Vec<&str> = failed.iter().map(|c| c.name.as_str()).collect();
        return Err(Failure::Invariant(names.join("; ")));
    }
    Ok(())
}

pub fn run(cfg: &ScenarioConfig) -> Result<(), Failure> {
    let start = Instant::now();
    let params = cfg.params();
    let plan = cfg.plan();
    let sc = Scenario::evaluate_with(&plan, &params, &cfg.quad(), &cfg.fault_injection)?;
    let mut checks = kernel_checks(&params, &[plan.acceleration])?;
    checks.extend(scenario_checks(&sc)?);

    let mut maps = Vec::new();
    for kind in MapKind::ALL {
        let a = sc.map(kind)?;
        let b = reshuffle(&a);
        let cp = sc.cp_report(kind)?;
        maps.push(json!({
            "map": kind.as_str(),
            "a": matrix_json(&a.m),
            "b": matrix_json(&b.m),
            "eigs": cp.eigs,
            "second_smallest": cp.second_smallest,
            "classification": cp.classification.as_str(),
            "tol_cls": cp.tol_cls,
        }));
    }

    let dir = out_dir(cfg)?;
    if cfg.wants("json") {
        write_json(&dir.join("map.json"), &json!({ "plan": plan, "maps": maps }))?;
    }
    if cfg.wants("csv") {
        let mut csv = Csv::new(&[
            "tag", "theta", "phi", "rho00_re", "rho00_im", "rho01_re", "rho01_im", "rho10_re",
            "rho10_im", "rho11_re", "rho11_im", "min_eig",
        ]);
        for tag in TAGS {
            for i in 0..=8 {
                for j in 0..8 {
                    let (theta, phi) = (PI * i as f64 / 8.0, 2.0 * PI * j as f64 / 8.0);
                    let rho = assemble_state(sc.coeffs(tag), &BlochAngles::new(theta, phi)?);
                    let mut row = vec![tag_name(tag).to_string(), num(theta), num(phi)];
                    for z in rho.rho.iter().flatten() {
                        row.push(num(z.re));
                        row.push(num(z.im));
                    }
                    row.push(num(density_checks(&rho).min_eig));
                    csv.row(&row);
                }
            }
        }
        csv.write(&dir.join("state.csv"))?;
    }

    let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
    let classifications: Vec<_> = MapKind::ALL
        .iter()
        .map(|&k| Ok((k.as_str(), sc.cp_report(k)?.classification.as_str())))
        .collect::<Result<_, Failure>>()?;
    if cfg.wants("json") {
        let correlators: Vec<_> = sc
            .corr
            .entries
            .iter()
            .map(|e| {
                json!({
                    "id": e.id.name(),
                    "re": e.result.value.re,
                    "im": e.result.value.im,
                    "err_estimate": e.result.err_estimate,
                    "converged": e.result.converged,
                })
            })
            .collect();
        let coefficients: Vec<_> = TAGS.iter().map(|&t| sc.coeffs(t)).collect();
        let report = json!({
            "pass": failed.is_empty() && sc.corr.converged(),
            "plan": plan,
            "params": params,
            "quadrature": cfg.quad(),
            "quad_err": sc.corr.err,
            "tol_real": sc.corr.tol_real(),
            "tol_cls": sc.tol_cls(),
            "trace_dev": sc.combined.trace_defect(),
            "classification": classifications.iter().map(|(k, c)| json!({"map": k, "classification": c})).collect::<Vec<_>>(),
            "nonconverged": sc.corr.failures,
            "warnings": sc.warnings(),
            "coefficients": coefficients,
            "correlators": correlators,
            "checks": checks,
            "wall_seconds": start.elapsed().as_secs_f64(),
        });
        write_json(&dir.join("report.json"), &report)?;
    }
    for (k, c) in &classifications {
        println!("{k}: {c}");
    }
    outcome(&sc.corr.failures, &failed)
}

pub fn sweep_eigs(cfg: &ScenarioConfig) -> Result<(), Failure> {
    let params = cfg.params();
    let quad = cfg.quad();
    let spec = SweepSpec {
        base: cfg.plan(),
        variable: cfg.sweep.variable,
        kind: cfg.sweep.map,
        params: &params,
        quad: &quad,
        hooks: cfg.fault_injection,
    };
    let values = cfg.sweep_values();
    let rows = spec.run(&values);

    let dir = out_dir(cfg)?;
    if cfg.wants("csv") {
        let mut csv = Csv::new(&[
            "sweep_value", "eig1", "eig2", "eig3", "eig4", "classification", "tol_cls", "status",
        ]);
        for r in &rows {
            let mut row = vec![num(r.value)];
            match r.report {
                Some(rep) => {
                    row.extend(rep.eigs.iter().map(|&e| num(e)));
                    row.push(rep.classification.as_str().to_string());
                    row.push(num(rep.tol_cls));
                }
                None => row.extend(std::iter::repeat_n(String::new(), 6)),
            }
            row.push(r.status.clone());
            csv.row(&row);
        }
        csv.write(&dir.join("eigs.csv"))?;
    }

    let window = NcpWindow::from_rows(&rows).ok();
    let counts = classification_counts(&rows);
    if cfg.wants("json") {
        write_json(
            &dir.join("sweep.json"),
            &json!({
                "variable": cfg.sweep.variable.as_str(),
                "map": cfg.sweep.map.as_str(),
                "base": cfg.plan(),
                "window": window,
                "counts": counts.iter().map(|(c, n)| json!({"classification": c.as_str(), "rows": n})).collect::<Vec<_>>(),
                "rows": rows,
            }),
        )?;
    }
    let counts_line: Vec<String> = counts.iter().map(|(c, n)| format!("{c}={n}")).collect();
    match &window {
        Some(w) => println!(
            "sweep {}: {} rows, {}, ncp window end {}, contiguous {}",
            cfg.sweep.variable.as_str(),
            rows.len(),
            counts_line.join(" "),
            w.end.map_or("none".to_string(), |e| e.to_string()),
            w.contiguous
        ),
        None => println!("sweep {}: {} rows, {}", cfg.sweep.variable.as_str(), rows.len(), counts_line.join(" ")),
    }

    let nonconverged: Vec<String> = rows
        .iter()
        .filter(|r| r.status.starts_with("nonconverged"))
        .map(|r| format!("{}={}", cfg.sweep.variable.as_str(), r.value))
        .collect();
    if !nonconverged.is_empty() {
        return Err(Failure::NonConvergence(nonconverged.join(", ")));
    }
    if let Some(r) = rows.iter().find(|r| r.report.is_none()) {
        return Err(Failure::Invariant(format!("row {}: {}", r.value, r.status)));
    }
    Ok(())
}

pub fn bloch_scan(cfg: &ScenarioConfig) -> Result<(), Failure> {
    let sc = Scenario::evaluate_with(&cfg.plan(), &cfg.params(), &cfg.quad(), &cfg.fault_injection)?;
    let image = sc.bloch_image(cfg.bloch.map, cfg.bloch.n_samples)?;
    let dir = out_dir(cfg)?;
    if cfg.wants("csv") {
        let mut csv = Csv::new(&["in_x", "in_y", "in_z", "out_x", "out_y", "out_z", "min_eig", "outside"]);
        for s in &image.samples {
            let mut row: Vec<String> = s.input.iter().chain(s.output.iter()).map(|&x| num(x)).collect();
            row.push(num(s.min_eig));
            row.push(s.outside.to_string());
            csv.row(&row);
        }
        csv.write(&dir.join("points.csv"))?;
    }
    let cp = sc.cp_report(cfg.bloch.map)?;
    if cfg.wants("json") {
        write_json(
            &dir.join("bloch.json"),
            &json!({
                "plan": sc.plan,
                "map": cfg.bloch.map.as_str(),
                "n_samples": image.samples.len(),
                "outside_fraction": image.outside_fraction,
                "max_excess": image.max_excess,
                "classification": cp.classification.as_str(),
                "eigs": cp.eigs,
                "nonconverged": sc.corr.failures,
            }),
        )?;
    }
    println!(
        "outside_fraction {} max_excess {} samples {}",
        num(image.outside_fraction),
        num(image.max_excess),
        image.samples.len()
    );
    outcome(&sc.corr.failures, &[])
}

pub fn verify(cfg: &ScenarioConfig) -> Result<(), Failure> {
    let report = run_suite(&cfg.params(), &cfg.quad(), &cfg.verify, &cfg.fault_injection)?;
    let dir = out_dir(cfg)?;
    if cfg.wants("json") {
        write_json(&dir.join("report.json"), &report)?;
    }
    let failed = report.failures();
    let total = report.global_checks.len() + report.scenarios.iter().map(|s| s.checks.len()).sum::<usize>();
    println!(
        "verify: {} scenarios, {} checks, {} failed",
        report.scenarios.len(),
        total,
        failed.len()
    );
    for c in &failed {
        eprintln!("FAIL {}: {:e} > {:e}", c.name, c.value, c.tol);
    }
    let nonconverged: Vec<String> = report
        .scenarios
        .iter()
        .filter(|s| !s.nonconverged.is_empty())
        .map(|s| {
            format!(
                "t={} a={} T={}: {}",
                s.plan.inertial_duration,
                s.plan.acceleration,
                s.plan.accel_duration,
                s.nonconverged.join(" ")
            )
        })
        .collect();
    outcome(&nonconverged, &failed)
}

/// Absolute tolerance of an adaptive value against the oracle.
pub fn oracle_bound(value: f64) -> f64 {
    1e-3 * (value + 1.0)
}

pub fn oracle_compare(cfg: &ScenarioConfig) -> Result<(), Failure> {
    let params = cfg.params();
    let plan = cfg.plan();
    let sc = Scenario::evaluate_with(&plan, &params, &cfg.quad(), &cfg.fault_injection)?;
    let n = cfg.oracle.n;
    let oracle: Vec<_> = CorrelatorId::all()
        .into_par_iter()
        .map(|id| oracle_value(id, &plan, &params, n).map(|v| (id, v)))
        .collect::<Result<_, _>>()?;

    let mut csv = Csv::new(&[
        "id", "adaptive_re", "adaptive_im", "oracle_re", "oracle_im", "abs_diff", "bound", "pass",
    ]);
    let mut failed = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for (id, o) in &oracle {
        let entry = sc.corr.entries.iter().find(|e| e.id == *id);
        let v = entry.map(|e| e.result.value).unwrap_or_default();
        let diff = (v - o).norm();
        let bound = oracle_bound(v.norm());
        let pass = diff <= bound;
        max_ratio = max_ratio.max(diff / bound);
        if !pass {
            failed.push(Check::below(format!("oracle {}", id.name()), diff, bound));
        }
        csv.row(&[
            id.name(),
            num(v.re),
            num(v.im),
            num(o.re),
            num(o.im),
            num(diff),
            num(bound),
            pass.to_string(),
        ]);
    }
    let dir = out_dir(cfg)?;
    if cfg.wants("csv") {
        csv.write(&dir.join("oracle.csv"))?;
    }
    println!("oracle n={n}: {} integrals, max diff/bound {}", oracle.len(), num(max_ratio));
    let failed: Vec<&Check> = failed.iter().collect();
    outcome(&sc.corr.failures, &failed)
}
