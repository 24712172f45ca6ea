//! JSON and plain-text renderings of a [`Report`].
//!
//! serde_json's default map is ordered, so keys come out sorted; floats use
//! its shortest round-trip formatting. Non-finite numbers become `null`.

use std::fmt::Write as _;

use acml_core::classify::CheckRecord;
use acml_core::sampling::Residual;
use serde_json::{json, Map, Value};

use crate::fdcheck::FdReport;
use crate::runner::Report;
use crate::scenario::{CurveSpec, Scenario};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn point(p: &Option<Vec<f64>>) -> Value {
    match p {
        Some(p) => Value::Array(p.iter().map(|&x| num(x)).collect()),
        None => Value::Null,
    }
}

fn residual(r: &Residual) -> Value {
    json!({ "max": num(r.max), "mean": num(r.mean()), "count": r.count, "witness": point(&r.witness) })
}

fn scenario(sc: &Scenario) -> Value {
    let s = &sc.sample;
    let transport = sc.transport.as_ref().map_or(Value::Null, |t| {
        let curve = match &t.curve {
            CurveSpec::Square { corner, plane, side } => {
                json!({ "kind": "square", "corner": point(&Some(corner.clone())), "plane": [plane.0, plane.1], "side": num(*side) })
            }
            CurveSpec::Polyline(pts) => json!({
                "kind": "polyline",
                "path": pts.iter().map(|p| point(&Some(p.clone()))).collect::<Vec<_>>(),
            }),
            CurveSpec::Parametric { comps, t0, t1 } => {
                json!({ "kind": "parametric", "components": comps, "t0": num(*t0), "t1": num(*t1) })
            }
        };
        json!({ "curve": curve, "v0": point(&Some(t.v0.clone())), "steps": t.steps })
    });
    json!({
        "name": sc.name,
        "dim": sc.dim,
        "gamma": sc.gamma,
        "g": sc.g,
        "phi": sc.phi,
        "sample": {
            "box": s.bounds.iter().map(|&(lo, hi)| vec![num(lo), num(hi)]).collect::<Vec<_>>(),
            "points": s.count,
            "seed": s.seed,
            "tol": num(s.tolerance),
        },
        "tasks": sc.tasks.iter().map(|t| t.name()).collect::<Vec<_>>(),
        "transport": transport,
        "fd_check": sc.fd_check,
    })
}

fn task(t: &CheckRecord) -> Value {
    let residuals: Map<String, Value> = t.residuals.iter().map(|(k, r)| (k.clone(), residual(r))).collect();
    json!({
        "name": t.name,
        "verdict": t.verdict.as_str(),
        "max_residual": num(t.max_residual),
        "tolerance": num(t.tolerance),
        "witness": point(&t.witness),
        "notes": t.notes,
        "residuals": residuals,
    })
}

fn fd_block(fd: &Result<FdReport, String>) -> Value {
    match fd {
        Ok(r) => {
            let q: Map<String, Value> = r.quantities.iter().map(|(k, v)| (k.clone(), residual(v))).collect();
            json!({
                "points": r.points,
                "step": num(r.step),
                "tolerance": num(r.tolerance),
                "passed": r.passed(),
                "quantities": q,
            })
        }
        Err(e) => json!({ "passed": false, "error": e }),
    }
}

pub fn to_value(r: &Report) -> Value {
    let classification = r.classification.as_ref().map_or(Value::Null, |c| {
        Value::Object(c.predicates().iter().map(|(k, p)| (k.to_string(), Value::Bool(p.holds))).collect())
    });
    json!({
        "scenario": scenario(&r.scenario),
        "version": VERSION,
        "tasks": r.tasks.iter().map(task).collect::<Vec<_>>(),
        "classification": classification,
        "fd_check": r.fd_check.as_ref().map_or(Value::Null, fd_block),
        "elapsed_ms": r.elapsed_ms.map_or(Value::Null, |ms| json!(ms as u64)),
    })
}

pub fn to_json(r: &Report) -> String {
    let mut s = serde_json::to_string_pretty(&to_value(r)).expect("report serializes");
    s.push('\n');
    s
}

/// Residuals in `{:.3e}`.
pub fn summary(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "scenario {} (dim {}, {} points, seed {})",
        r.scenario.name, r.scenario.dim, r.scenario.sample.count, r.scenario.sample.seed
    );
    for t in &r.tasks {
        let _ = writeln!(
            out,
            "  {:<16} {:<5} max residual {:.3e} (tol {:.3e})",
            t.name,
            t.verdict.as_str(),
            t.max_residual,
            t.tolerance
        );
        for n in &t.notes {
            let _ = writeln!(out, "      {n}");
        }
    }
    if let Some(c) = &r.classification {
        let flags: Vec<String> = c.predicates().iter().map(|(k, p)| format!("{k}={}", p.holds)).collect();
        let _ = writeln!(out, "  classification: {}", flags.join(" "));
    }
    match &r.fd_check {
        Some(Ok(fd)) => {
            let _ = writeln!(out, "  fd-check ({} points): {}", fd.points, if fd.passed() { "pass" } else { "fail" });
            for (k, v) in &fd.quantities {
                let _ = writeln!(out, "      {k:<20} {:.3e}", v.max);
            }
        }
        Some(Err(e)) => {
            let _ = writeln!(out, "  fd-check error: {e}");
        }
        None => {}
    }
    let fails = r.tasks.iter().filter(|t| t.verdict.as_str() == "fail").count();
    let _ = writeln!(out, "{} task(s), {fails} failed", r.tasks.len());
    out
}
