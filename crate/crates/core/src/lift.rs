//! The almost contact metric structure on the total space of the distribution.
//!
//! Lifted coordinates are `(x¹..x^m, y¹..y^m, xⁿ)`: the fiber coordinates
//! `y^a` sit before `xⁿ`, so the lift is again an adapted chart. Its frame
//! `ê_a = ∂_a − Γⁿ_a∂_n`, `f_a = ∂_{y^a}` relates to the horizontal lifts by
//! `ε_a = ê_a − G^b_a f_b` with `G^b_a = Γ^b_{ac} y^c`.
//!
//! `J ε_a = f_a`, `J f_a = −ε_a`, `J∂_n = 0`; the metric makes `ε`, `f`
//! copies of `g` and mutually orthogonal, with `g̃(∂_n, ∂_n) = 1`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::acms::{validate_default, AlmostContactStructure};
use crate::classify::{classify, CheckRecord, Verdict};
use crate::connections::{curvature_jets, interior_metric_connection, InteriorConnection};
use crate::error::{Error, Result};
use crate::exprcore::{Jet, JetLayout};
use crate::field::{AdmissibleTensorField, Point, ScalarField, Symmetry, VecJet};
use crate::frames::{embed_field, AdaptedChart};
use crate::sampling::{sweep, Residual, SampleSpec};

#[derive(Clone, Debug)]
pub struct LiftedSpace {
    pub base: AlmostContactStructure,
    pub connection: InteriorConnection,
    pub lifted: AlmostContactStructure,
    pub warnings: Vec<String>,
}

/// Base coordinate `v` is lifted coordinate `base_map(m)[v]`.
pub fn base_map(m: usize) -> Vec<usize> {
    (0..m).chain(std::iter::once(2 * m)).collect()
}

/// `G^b_a` at `b·m + a` as jets in the lifted variables.
fn g_matrix(conn: &InteriorConnection, q: &[f64], order: usize) -> Result<(Vec<Jet>, Arc<JetLayout>)> {
    let m = conn.m();
    let map = base_map(m);
    let p: Vec<f64> = map.iter().map(|&i| q[i]).collect();
    let target = JetLayout::get(2 * m + 1, order);
    let gam: Vec<Jet> = conn.coeffs.eval(&p, order)?.iter().map(|j| j.embed(&target, &map)).collect();
    let y: Vec<Jet> = (0..m).map(|c| Jet::variable(&target, m + c, q[m + c])).collect();
    let mut g = Vec::with_capacity(m * m);
    for b in 0..m {
        for a in 0..m {
            let mut acc = Jet::zero(&target);
            for c in 0..m {
                acc = acc + gam[b * m * m + a * m + c].mul(&y[c]);
            }
            g.push(acc);
        }
    }
    Ok((g, target))
}

fn base_jets(f: &AdmissibleTensorField, q: &[f64], order: usize, target: &Arc<JetLayout>) -> Result<Vec<Jet>> {
    let m = f.frame_dim();
    let map = base_map(m);
    let p: Vec<f64> = map.iter().map(|&i| q[i]).collect();
    Ok(f.eval(&p, order)?.iter().map(|j| j.embed(target, &map)).collect())
}

/// Lift `s` with the interior connection `c`.
pub fn lift_structure(s: &AlmostContactStructure, c: &InteriorConnection) -> Result<LiftedSpace> {
    let report = validate_default(s)?;
    if !report.is_valid() {
        return Err(Error::Structure(format!(
            "base structure is invalid: {}",
            report.diagnostics.first().map(|d| d.to_string()).unwrap_or_default()
        )));
    }
    let m = s.m();
    let big = 2 * m;
    let outer = big + 1;
    let map = base_map(m);
    let mut gamma: Vec<ScalarField> = s.chart.gamma().iter().map(|f| embed_field(f, &map, outer)).collect();
    gamma.extend((0..m).map(|_| ScalarField::Constant(0.0)));
    let chart = AdaptedChart::new(outer, gamma)?;

    let (conn, g) = (c.clone(), s.g.clone());
    let metric = move |q: &[f64], k: usize| -> Result<Vec<Jet>> {
        let (gm, target) = g_matrix(&conn, q, k)?;
        let gb = base_jets(&g, q, k, &target)?;
        let gg = |b: usize, a: usize| &gm[b * m + a];
        let mut out = vec![Jet::zero(&target); big * big];
        for a in 0..m {
            for b in 0..m {
                let mut hh = gb[a * m + b].clone();
                let mut hv = Jet::zero(&target);
                for c in 0..m {
                    hv = hv + gg(c, a).mul(&gb[c * m + b]);
                    for d in 0..m {
                        hh = hh + gg(c, a).mul(gg(d, b)).mul(&gb[c * m + d]);
                    }
                }
                out[a * big + b] = hh;
                out[a * big + m + b] = hv.clone();
                out[(m + b) * big + a] = hv;
                out[(m + a) * big + m + b] = gb[a * m + b].clone();
            }
        }
        Ok(out)
    };
    let conn = c.clone();
    let phi = move |q: &[f64], k: usize| -> Result<Vec<Jet>> {
        let (gm, target) = g_matrix(&conn, q, k)?;
        let gg = |b: usize, a: usize| &gm[b * m + a];
        let mut out = vec![Jet::zero(&target); big * big];
        // column A holds J ê_A; row is the upper index
        for a in 0..m {
            for b in 0..m {
                out[b * big + a] = -gg(b, a);
                let mut acc = Jet::constant(&target, if a == b { 1.0 } else { 0.0 });
                for c in 0..m {
                    acc = acc + gg(c, a).mul(gg(b, c));
                }
                out[(m + b) * big + a] = acc;
                out[b * big + m + a] = Jet::constant(&target, if a == b { -1.0 } else { 0.0 });
                out[(m + b) * big + m + a] = gg(b, a).clone();
            }
        }
        Ok(out)
    };
    let g = AdmissibleTensorField::from_source(outer, (0, 2), Arc::new(metric)).with_symmetry(Symmetry::Symmetric);
    let phi = AdmissibleTensorField::from_source(outer, (1, 1), Arc::new(phi));
    let lifted = AlmostContactStructure::new(chart, g, phi)?;
    let mut warnings = Vec::new();
    if s.n() == 3 {
        warnings.push("base dimension n = 3 is below the n > 3 assumption; checks remain well-defined".to_string());
    }
    Ok(LiftedSpace { base: s.clone(), connection: c.clone(), lifted, warnings })
}

/// Lift with the torsion-free metric interior connection.
pub fn lift(s: &AlmostContactStructure) -> Result<LiftedSpace> {
    lift_structure(s, &interior_metric_connection(s))
}

impl LiftedSpace {
    pub fn m(&self) -> usize {
        self.base.m()
    }

    pub fn base_point(&self, q: &[f64]) -> Point {
        base_map(self.m()).iter().map(|&i| q[i]).collect()
    }

    /// Base box with `[−1, 1]` inserted for each fiber coordinate.
    pub fn sample_spec(&self, base: &SampleSpec) -> Result<SampleSpec> {
        let m = self.m();
        if base.dim() != m + 1 {
            return Err(Error::Sample(format!("base sample box must have {} intervals", m + 1)));
        }
        let mut bounds = base.bounds[..m].to_vec();
        bounds.extend(std::iter::repeat((-1.0, 1.0)).take(m));
        bounds.push(base.bounds[m]);
        Ok(SampleSpec::new(bounds, base.count, base.seed)?.with_tolerance(base.tolerance))
    }
}

/// Frame data of the lift at one point, all in the `(ê, f, ∂_n)` frame.
struct LiftedPoint {
    m: usize,
    y: Vec<f64>,
    eps: Vec<VecJet>,
    fib: Vec<VecJet>,
    xi: VecJet,
    /// base `Γ^a_{bc}`, `ω_ab`, `R_{abc}{}^d`, `P^a_{bc}` values
    gam: Vec<f64>,
    omega: Vec<f64>,
    curv: Vec<f64>,
    p: Vec<f64>,
    frame: crate::frames::FrameJets,
}

fn lifted_point(l: &LiftedSpace, q: &[f64], order: usize) -> Result<LiftedPoint> {
    let m = l.m();
    let (gm, target) = g_matrix(&l.connection, q, order)?;
    let big = 2 * m;
    let basis = |i: usize| VecJet::basis(&target, big, i);
    let eps = (0..m)
        .map(|a| {
            let mut v = basis(a);
            for b in 0..m {
                v.h[m + b] = -&gm[b * m + a];
            }
            v
        })
        .collect();
    let fib = (0..m).map(|a| basis(m + a)).collect();
    let p = l.base_point(q);
    let bf = l.base.chart.jets(&p, 1)?;
    let conn = l.connection.coeffs.eval(&p, 1)?;
    Ok(LiftedPoint {
        m,
        y: q[m..2 * m].to_vec(),
        eps,
        fib,
        xi: basis(big),
        gam: conn.iter().map(Jet::value).collect(),
        omega: bf.omega().iter().map(Jet::value).collect(),
        curv: curvature_jets(&bf, &conn).iter().map(Jet::value).collect(),
        p: conn.iter().map(|x| bf.e(m, x).value()).collect(),
        frame: l.lifted.chart.jets(q, order)?,
    })
}

impl LiftedPoint {
    fn zero(&self) -> Vec<f64> {
        vec![0.0; 2 * self.m + 1]
    }

    /// `Σ c^e f_e` in lifted frame components.
    fn along_f(&self, c: &[f64]) -> Vec<f64> {
        let mut v = self.zero();
        v[self.m..2 * self.m].copy_from_slice(c);
        v
    }

    /// `Σ c^e ε_e` in lifted frame components (values only).
    fn along_eps(&self, c: &[f64]) -> Vec<f64> {
        let mut v = self.zero();
        for (e, &ce) in c.iter().enumerate() {
            for (i, x) in self.eps[e].values().iter().enumerate() {
                v[i] += ce * x;
            }
        }
        v
    }

    fn r_y(&self, a: usize, b: usize) -> Vec<f64> {
        let m = self.m;
        (0..m).map(|e| (0..m).map(|c| self.curv[((a * m + b) * m + c) * m + e] * self.y[c]).sum()).collect()
    }

    fn p_y(&self, a: usize) -> Vec<f64> {
        let m = self.m;
        (0..m).map(|b| (0..m).map(|c| self.p[b * m * m + a * m + c] * self.y[c]).sum()).collect()
    }

    fn torsion(&self, a: usize, b: usize) -> Vec<f64> {
        let m = self.m;
        (0..m).map(|c| self.gam[c * m * m + a * m + b] - self.gam[c * m * m + b * m + a]).collect()
    }
}

fn diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |s, (x, y)| s.max((x - y).abs()))
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn neg(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| -x).collect()
}

/// Bracket relations of the lifted frame, checked against base curvature,
/// `P` and `Γ`. `R` here is `R(e_a, e_b)e_c = R_{abc}{}^d e_d`, so
/// `[ε_a, ε_b] = 2ω_{ba}∂_n − R_{abc}{}^e y^c f_e`.
pub fn lifted_brackets_check(l: &LiftedSpace, spec: &SampleSpec) -> Result<CheckRecord> {
    let tol = spec.tolerance;
    let names = ["eps_eps", "eps_xi", "eps_f", "f_f", "p_oracle"];
    let rs = sweep(&spec.points()?, names.len(), |q| {
        let lp = lifted_point(l, q, 2)?;
        let m = lp.m;
        let fr = &lp.frame;
        let mut out = [0.0f64; 5];
        for a in 0..m {
            for b in 0..m {
                let got = fr.bracket(&lp.eps[a], &lp.eps[b]).values();
                let mut want = lp.along_f(&neg(&lp.r_y(a, b)));
                want[2 * m] = 2.0 * lp.omega[b * m + a];
                out[0] = out[0].max(diff(&got, &want));
                let got = fr.bracket(&lp.eps[a], &lp.fib[b]).values();
                let want = lp.along_f(&(0..m).map(|c| lp.gam[c * m * m + a * m + b]).collect::<Vec<_>>());
                out[2] = out[2].max(diff(&got, &want));
                out[3] = out[3].max(diff(&fr.bracket(&lp.fib[a], &lp.fib[b]).values(), &lp.zero()));
            }
            let br = fr.bracket(&lp.eps[a], &lp.xi);
            out[1] = out[1].max(diff(&br.values(), &lp.along_f(&lp.p_y(a))));
            // P^b_{ac} = ∂_{y^c} of the f_b component of [ε_a, ∂_n]
            for b in 0..m {
                for c in 0..m {
                    let extracted = br.h[m + b].partial(&[m + c]);
                    out[4] = out[4].max((extracted - lp.p[b * m * m + a * m + c]).abs());
                }
            }
        }
        Ok(out.to_vec())
    })?;
    let mut main = Residual::new();
    for r in &rs {
        main.merge(r);
    }
    let verdict = if main.within(tol) { Verdict::Pass } else { Verdict::Fail };
    let mut rec = CheckRecord {
        name: "lift-brackets".into(),
        verdict,
        max_residual: main.max,
        tolerance: tol,
        witness: main.witness.clone(),
        notes: vec!["R sign: [eps_a, eps_b] has fiber part -R_abc^e y^c f_e with R(e_a,e_b)e_c = R_abc^d e_d".into()],
        residuals: BTreeMap::new(),
    };
    for (k, r) in names.iter().zip(rs) {
        rec.residuals.insert(k.to_string(), r);
    }
    Ok(rec)
}

/// `N_J` on frame pairs from brackets, against the displayed component
/// formulas (`display_*`) and against the forms that follow from the
/// bracket relations (`derived_*`), plus the lifted `N¹` non-normality witness.
pub fn lifted_nijenhuis_check(l: &LiftedSpace, spec: &SampleSpec) -> Result<CheckRecord> {
    let tol = spec.tolerance;
    let names = [
        "display_eps_eps",
        "display_f_f",
        "display_eps_f",
        "display_eps_xi",
        "display_f_xi",
        "derived_eps_eps",
        "derived_f_f",
        "derived_eps_f",
        "derived_eps_xi",
        "derived_f_xi",
        "n1_witness",
        "omega_bound",
    ];
    let rs = sweep(&spec.points()?, names.len(), |q| {
        let lp = lifted_point(l, q, 1)?;
        let loc = l.lifted.local(q, 1)?;
        let m = lp.m;
        let n = |x: &VecJet, y: &VecJet| loc.nijenhuis_direct(x, y).values();
        let mut out = vec![0.0f64; names.len()];
        let mut upd = |i: usize, v: f64| out[i] = out[i].max(v);
        for a in 0..m {
            for b in 0..m {
                let ry = lp.r_y(a, b);
                let s = lp.torsion(a, b);
                let got = n(&lp.eps[a], &lp.eps[b]);
                upd(0, diff(&got, &lp.along_f(&ry)));
                upd(5, diff(&got, &add(&lp.along_f(&ry), &lp.along_eps(&s))));
                let got = n(&lp.fib[a], &lp.fib[b]);
                let mut disp = lp.along_f(&neg(&ry));
                disp[2 * m] = 2.0 * lp.omega[b * m + a];
                upd(1, diff(&got, &disp));
                upd(6, diff(&got, &add(&disp, &neg(&lp.along_eps(&s)))));
                let got = n(&lp.eps[a], &lp.fib[b]);
                upd(2, diff(&got, &lp.zero()));
                upd(7, diff(&got, &add(&lp.along_eps(&ry), &neg(&lp.along_f(&s)))));
            }
            let py = lp.p_y(a);
            let got = n(&lp.eps[a], &lp.xi);
            upd(3, diff(&got, &lp.along_f(&neg(&py))));
            upd(8, diff(&got, &lp.along_f(&neg(&py))));
            let got = n(&lp.fib[a], &lp.xi);
            upd(4, diff(&got, &lp.along_f(&neg(&py))));
            upd(9, diff(&got, &lp.along_eps(&neg(&py))));
        }
        // N¹(f_a, f_b) has ∂_n component 2ω_ba
        let big = 2 * m + 1;
        let n1 = loc.normality().n1;
        let mut wit = 0.0f64;
        let mut om = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                wit = wit.max(n1[2 * m * big * big + (m + a) * big + m + b].value().abs());
                om = om.max(lp.omega[a * m + b].abs());
            }
        }
        out[10] = wit;
        out[11] = 2.0 * om;
        Ok(out)
    })?;
    let residuals: BTreeMap<String, Residual> = names.iter().map(|s| s.to_string()).zip(rs.iter().cloned()).collect();
    let mut display = Residual::new();
    for r in &rs[..5] {
        display.merge(r);
    }
    let mut derived = Residual::new();
    for r in &rs[5..10] {
        derived.merge(r);
    }
    let (wit, bound) = (&rs[10], &rs[11]);
    let non_normal = bound.max <= tol || wit.max >= bound.max - tol;
    let mut notes = Vec::new();
    for (k, r) in names[..5].iter().zip(&rs[..5]) {
        if !r.within(tol) {
            notes.push(format!("{k}: displayed formula differs from direct computation by {:e}", r.max));
        }
    }
    if !derived.within(tol) {
        notes.push(format!("bracket-derived forms differ from direct computation by {:e}", derived.max));
    }
    notes.push(format!("lifted N1 witness {:e} against 2 max|omega| = {:e}", wit.max, bound.max));
    let verdict = if derived.within(tol) && non_normal {
        if display.within(tol) {
            Verdict::Pass
        } else {
            Verdict::Info
        }
    } else {
        Verdict::Fail
    };
    Ok(CheckRecord {
        name: "lift-nijenhuis".into(),
        verdict,
        max_residual: display.max,
        tolerance: tol,
        witness: display.witness.clone(),
        notes,
        residuals,
    })
}

/// Base curvature and `P` against the lifted `P(N_J)` and `dΩ̃`.
pub fn check_lift_theorems(l: &LiftedSpace, base_spec: &SampleSpec) -> Result<CheckRecord> {
    let tol = base_spec.tolerance;
    let lifted_spec = l.sample_spec(base_spec)?;
    let base_rs = sweep(&base_spec.points()?, 2, |p| {
        let bf = l.base.chart.jets(p, 2)?;
        let conn = l.connection.coeffs.eval(p, 2)?;
        let r = curvature_jets(&bf, &conn).iter().fold(0.0f64, |a, x| a.max(x.value().abs()));
        let pt = conn.iter().fold(0.0f64, |a, x| a.max(bf.e(l.m(), x).value().abs()));
        Ok(vec![r, pt])
    })?;
    let base = classify(&l.base, base_spec)?;
    let lifted = classify(&l.lifted, &lifted_spec)?;
    let (r, p) = (&base_rs[0], &base_rs[1]);
    let flat = r.within(tol);
    let hyp10 = base.sasakian.holds && flat;
    let ack = lifted.ack_full.holds;
    let hyp9 = flat && p.within(tol);
    let hermitian = lifted.almost_hermitian.holds;
    let mut notes = vec![
        format!("base sasakian: {}, base R = 0: {flat}, base P = 0: {}", base.sasakian.holds, p.within(tol)),
        format!("lifted almost hermitian: {hermitian}, lifted ack (full): {ack}"),
        format!("P(N_J) = 0 iff R = 0 and P = 0: {}", hermitian == hyp9),
    ];
    let verdict = if hyp10 && !ack {
        notes.push("sasakian flat base but the lift is not almost contact Kaehlerian".into());
        Verdict::Fail
    } else if hyp10 == ack {
        Verdict::Pass
    } else {
        notes.push(
            "converse fails: the lift is almost contact Kaehlerian over a base that is not sasakian and flat".into(),
        );
        Verdict::Info
    };
    let mut residuals = BTreeMap::new();
    residuals.insert("base_curvature".to_string(), r.clone());
    residuals.insert("base_p".to_string(), p.clone());
    residuals.insert("base_sasakian".to_string(), base.sasakian.residual.clone());
    residuals.insert("lifted_p_nijenhuis".to_string(), lifted.almost_hermitian.residual.clone());
    residuals.insert("lifted_d_omega".to_string(), lifted.residuals["d_omega_full"].clone());
    residuals.insert("lifted_d_omega_horizontal".to_string(), lifted.residuals["d_omega_horizontal"].clone());
    let main = lifted.residuals["d_omega_full"].clone();
    Ok(CheckRecord {
        name: "lift-theorems".into(),
        verdict,
        max_residual: main.max,
        tolerance: tol,
        witness: main.witness,
        notes,
        residuals,
    })
}
