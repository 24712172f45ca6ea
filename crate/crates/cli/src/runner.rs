//! Task dispatch. Tasks run in declared order against a working structure;
//! `lift` swaps it for the lifted one.

use std::collections::BTreeMap;
use std::time::Instant;

use acml_core::acms::{validate_structure, AlmostContactStructure, STRUCTURE_TOL};
use acml_core::classify::{
    check_q4, check_theorem5_torsion, check_theorem7, check_theorem8, check_theorem_n1, classify, CheckRecord,
    ClassificationReport, Verdict,
};
use acml_core::connections::{
    curvature_flux, interior_metric_connection, parallel_transport, schouten_curvature, ExtendedConnection,
};
use acml_core::lift::{check_lift_theorems, lift, lifted_brackets_check, lifted_nijenhuis_check, LiftedSpace};
use acml_core::sampling::{Residual, SampleSpec};
use acml_core::Result;

use crate::fdcheck::{fd_check, FdReport};
use crate::scenario::{CurveSpec, Scenario, Task, TransportSpec};

/// Cells per side for the curvature Riemann sum compared with square-loop holonomy.
pub const FLUX_CELLS: usize = 8;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub fd_check: bool,
    /// Record wall time in the report (makes the JSON run-dependent).
    pub timing: bool,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub scenario: Scenario,
    pub tasks: Vec<CheckRecord>,
    pub classification: Option<ClassificationReport>,
    pub fd_check: Option<Result<FdReport, String>>,
    pub elapsed_ms: Option<u128>,
}

impl Report {
    pub fn failed(&self) -> bool {
        self.tasks.iter().any(|t| t.verdict == Verdict::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed())
    }
}

/// The scenario with command-line overrides applied.
pub fn resolve(sc: &Scenario, opts: &RunOptions) -> std::result::Result<Scenario, String> {
    let mut sc = sc.clone();
    let mut spec = sc.sample.clone();
    if let Some(n) = opts.points {
        spec = spec.with_count(n);
    }
    if let Some(s) = opts.seed {
        spec.seed = s;
    }
    if let Some(t) = opts.tol {
        spec = spec.with_tolerance(t);
    }
    spec.check().map_err(|e| e.to_string())?;
    sc.sample = spec;
    sc.fd_check |= opts.fd_check;
    Ok(sc)
}

fn failed_record(task: &str, tol: f64, e: impl std::fmt::Display) -> CheckRecord {
    CheckRecord {
        name: task.to_string(),
        verdict: Verdict::Fail,
        max_residual: f64::INFINITY,
        tolerance: tol,
        witness: None,
        notes: vec![format!("error: {e}")],
        residuals: BTreeMap::new(),
    }
}

fn validate_record(name: &str, s: &AlmostContactStructure, spec: &SampleSpec) -> Result<CheckRecord> {
    let r = validate_structure(s, spec)?;
    let max = r.max_residual();
    let mut notes: Vec<String> = r.diagnostics.iter().take(5).map(|d| d.to_string()).collect();
    if r.diagnostics.len() > 5 {
        notes.push(format!("{} further violations", r.diagnostics.len() - 5));
    }
    notes.push(format!("min Cholesky pivot of g: {:.3e}", r.min_pivot));
    let residuals = [
        ("compatibility", &r.compatibility),
        ("phi_squared", &r.phi_squared),
        ("standing_assumption", &r.standing_assumption),
        ("symmetry", &r.symmetry),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.clone()))
    .collect();
    Ok(CheckRecord {
        name: name.to_string(),
        verdict: if r.is_valid() { Verdict::Pass } else { Verdict::Fail },
        max_residual: max.max,
        tolerance: STRUCTURE_TOL,
        witness: max.witness,
        notes,
        residuals,
    })
}

fn transport_record(s: &AlmostContactStructure, t: &TransportSpec, tol: f64) -> Result<CheckRecord> {
    let conn = interior_metric_connection(s);
    let curve = t.build_curve()?;
    let ec = ExtendedConnection::new(conn.clone());
    let v = parallel_transport(&ec, &curve, &t.v0, t.steps)?;
    let defect: Vec<f64> = v.iter().zip(&t.v0).map(|(a, b)| a - b).collect();
    let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let deviation = norm(&defect);
    let mut notes = vec![format!("final vector {v:?}"), format!("{} RK4 steps per segment", t.steps)];
    let mut residuals = BTreeMap::new();
    let start = match &t.curve {
        CurveSpec::Square { corner, .. } => Some(corner.clone()),
        CurveSpec::Polyline(p) => p.first().cloned(),
        CurveSpec::Parametric { .. } => None,
    };
    residuals
        .insert("deviation".to_string(), Residual { max: deviation, witness: start.clone(), sum: deviation, count: 1 });
    if let CurveSpec::Square { corner, plane, side } = &t.curve {
        let flux =
            curvature_flux(&schouten_curvature(&conn), corner, (plane.0 - 1, plane.1 - 1), *side, FLUX_CELLS, &t.v0)?;
        let diff: Vec<f64> = defect.iter().zip(&flux).map(|(a, b)| a - b).collect();
        let mismatch = norm(&diff);
        let scale = norm(&flux);
        notes.push(format!("curvature flux prediction {flux:?}"));
        if scale > 0.0 {
            notes.push(format!("relative holonomy/flux mismatch {:.3e}", mismatch / scale));
        }
        residuals.insert(
            "flux_mismatch".to_string(),
            Residual { max: mismatch, witness: Some(corner.clone()), sum: mismatch, count: 1 },
        );
    }
    Ok(CheckRecord {
        name: "transport".into(),
        verdict: Verdict::Info,
        max_residual: deviation,
        tolerance: tol,
        witness: start,
        notes,
        residuals,
    })
}

struct Working {
    structure: AlmostContactStructure,
    spec: SampleSpec,
    /// Most recent lift with the sample it was built from.
    lifted: Option<(LiftedSpace, SampleSpec)>,
}

fn lift_records(w: &mut Working) -> Vec<CheckRecord> {
    let tol = w.spec.tolerance;
    let l = match lift(&w.structure) {
        Ok(l) => l,
        Err(e) => return vec![failed_record("lift", tol, e)],
    };
    let spec = match l.sample_spec(&w.spec) {
        Ok(s) => s,
        Err(e) => return vec![failed_record("lift", tol, e)],
    };
    let mut out = Vec::new();
    let mut rec = validate_record("lift", &l.lifted, &spec).unwrap_or_else(|e| failed_record("lift", tol, e));
    rec.notes.extend(l.warnings.iter().cloned());
    rec.notes.push(format!("working structure is now the lift (dim {})", l.lifted.n()));
    out.push(rec);
    out.push(lifted_brackets_check(&l, &spec).unwrap_or_else(|e| failed_record("lift-brackets", tol, e)));
    out.push(lifted_nijenhuis_check(&l, &spec).unwrap_or_else(|e| failed_record("lift-nijenhuis", tol, e)));
    let base_spec = std::mem::replace(&mut w.spec, spec);
    w.structure = l.lifted.clone();
    w.lifted = Some((l, base_spec));
    out
}

/// Execute every task of an already resolved scenario.
pub fn run_scenario(sc: &Scenario, timing: bool) -> Report {
    let started = Instant::now();
    let mut tasks = Vec::new();
    let mut classification = None;
    let base = match sc.structure() {
        Ok(s) => s,
        Err(e) => {
            let tol = sc.sample.tolerance;
            let tasks = sc.tasks.iter().map(|t| failed_record(t.name(), tol, &e)).collect();
            return Report {
                scenario: sc.clone(),
                tasks,
                classification,
                fd_check: None,
                elapsed_ms: timing.then(|| started.elapsed().as_millis()),
            };
        }
    };
    let mut w = Working { structure: base.clone(), spec: sc.sample.clone(), lifted: None };
    for &task in &sc.tasks {
        let tol = w.spec.tolerance;
        let s = &w.structure;
        let rec = match task {
            Task::Validate => validate_record("validate", s, &w.spec),
            Task::Classify => classify(s, &w.spec).map(|c| {
                let rec = classification_record(&c);
                classification = Some(c);
                rec
            }),
            Task::Q4 => check_q4(s, &w.spec),
            Task::Theorem5 => check_theorem5_torsion(s, &w.spec),
            Task::Theorem7 => check_theorem7(s, &w.spec),
            Task::Theorem8 => check_theorem8(s, &w.spec),
            Task::TheoremN1 => check_theorem_n1(s, &w.spec),
            Task::Transport => match &sc.transport {
                Some(t) => transport_record(s, t, tol),
                None => Err(acml_core::Error::Transport("no [transport] section".into())),
            },
            Task::Lift => {
                tasks.extend(lift_records(&mut w));
                continue;
            }
            Task::LiftTheorems => {
                if w.lifted.is_none() {
                    tasks.extend(lift_records(&mut w));
                    if let Some(r) = tasks.iter_mut().rev().find(|r| r.name == "lift") {
                        r.notes.push("implicit lift requested by lift-theorems".into());
                    }
                }
                match &w.lifted {
                    Some((l, base_spec)) => check_lift_theorems(l, base_spec),
                    None => Err(acml_core::Error::Structure("lift failed".into())),
                }
            }
        };
        tasks.push(rec.unwrap_or_else(|e| failed_record(task.name(), tol, e)));
    }
    let fd = sc.fd_check.then(|| fd_check(&base, &sc.sample).map_err(|e| e.to_string()));
    Report {
        scenario: sc.clone(),
        tasks,
        classification,
        fd_check: fd,
        elapsed_ms: timing.then(|| started.elapsed().as_millis()),
    }
}

fn classification_record(c: &ClassificationReport) -> CheckRecord {
    let worst = c.residuals.values().fold(Residual::new(), |mut acc, r| {
        acc.merge(r);
        acc
    });
    let holding: Vec<&str> = c.predicates().iter().filter(|(_, p)| p.holds).map(|(k, _)| *k).collect();
    let notes = vec![if holding.is_empty() {
        "no class predicate holds".to_string()
    } else {
        format!("holds: {}", holding.join(", "))
    }];
    CheckRecord {
        name: "classify".into(),
        verdict: Verdict::Info,
        max_residual: worst.max,
        tolerance: c.tolerance,
        witness: worst.witness,
        notes,
        residuals: c.residuals.clone(),
    }
}
