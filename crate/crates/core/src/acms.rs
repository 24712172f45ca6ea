//! Almost contact metric structures and their derived tensors.
//!
//! `φ` and `g` are stored on the distribution only (`φ^a_b`, `g_ab`);
//! `ξ = ∂_n`, `η = θⁿ`, `φξ = 0`, `g(ξ, ξ) = 1` and `g(ξ, e_a) = 0` are
//! implicit. Full-frame arrays use `N = m + 1` indices with `m` for `ξ`.
//! Pointwise work goes through [`Local`], the jets of all inputs at a point.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exprcore::Jet;
use crate::field::{AdmissibleTensorField, FrameVectorField, Point, ScalarField, Symmetry, VecJet};
use crate::frames::{default_sample, make_chart, AdaptedChart, FrameJets};
use crate::linalg::{invert_jets, min_cholesky_pivot};
use crate::sampling::{sample_points, sweep, Residual, SampleSpec};

/// Tolerance used by [`validate_structure`].
pub const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct AlmostContactStructure {
    pub chart: AdaptedChart,
    pub g: AdmissibleTensorField,
    pub phi: AdmissibleTensorField,
}

impl AlmostContactStructure {
    pub fn new(chart: AdaptedChart, g: AdmissibleTensorField, phi: AdmissibleTensorField) -> Result<Self> {
        let n = chart.n();
        if g.dim() != n || phi.dim() != n {
            return Err(Error::Shape(format!("metric/endomorphism dimension differs from chart dimension {n}")));
        }
        if g.valence() != (0, 2) || phi.valence() != (1, 1) {
            return Err(Error::Shape("g must have valence (0,2) and phi valence (1,1)".into()));
        }
        Ok(AlmostContactStructure { chart, g, phi })
    }

    /// Parse a structure; `g` and `phi` are row-major `(n−1)×(n−1)` matrices
    /// (row = upper index for `phi`).
    pub fn from_exprs(n: usize, gamma: &[&str], g: &[&str], phi: &[&str]) -> Result<Self> {
        let chart = make_chart(n, gamma)?;
        let parse = |v: &[&str]| v.iter().map(|s| ScalarField::parse(s, n)).collect::<Result<Vec<_>>>();
        let g = AdmissibleTensorField::from_fields(n, (0, 2), parse(g)?)?.with_symmetry(Symmetry::Symmetric);
        let phi = AdmissibleTensorField::from_fields(n, (1, 1), parse(phi)?)?;
        AlmostContactStructure::new(chart, g, phi)
    }

    pub fn n(&self) -> usize {
        self.chart.n()
    }

    pub fn m(&self) -> usize {
        self.chart.m()
    }

    pub fn local(&self, p: &[f64], order: usize) -> Result<Local> {
        Ok(Local {
            point: p.to_vec(),
            frame: self.chart.jets(p, order)?,
            g: self.g.eval(p, order)?,
            phi: self.phi.eval(p, order)?,
        })
    }

    /// Wrap a pointwise computation on [`Local`] as an admissible field. The
    /// closure receives jets one order higher than requested.
    pub fn derived_field<F>(&self, valence: (usize, usize), f: F) -> AdmissibleTensorField
    where
        F: Fn(&Local) -> Result<Vec<Jet>> + Send + Sync + 'static,
    {
        let s = self.clone();
        let src = move |p: &[f64], k: usize| f(&s.local(p, k + 1)?);
        AdmissibleTensorField::from_source(self.n(), valence, Arc::new(src))
    }
}

/// Jets of the chart, `g` and `φ` at one point.
#[derive(Clone, Debug)]
pub struct Local {
    pub point: Point,
    pub frame: FrameJets,
    pub g: Vec<Jet>,
    pub phi: Vec<Jet>,
}

/// Adapted-frame Nijenhuis components.
#[derive(Clone, Debug)]
pub struct Nijenhuis {
    pub m: usize,
    /// `N^e_{ab}` at `e·m² + a·m + b`.
    pub horizontal: Vec<Jet>,
    /// `Nⁿ_{ab}` at `a·m + b`.
    pub vertical: Vec<Jet>,
    /// `N^e_{na}` at `e·m + a`, where `N^e_{na} e_e = N(∂_n, e_a)`.
    pub mixed: Vec<Jet>,
}

impl Nijenhuis {
    /// `N^k_{ij}` over the full frame at `k·N² + i·N + j`.
    pub fn full(&self) -> Vec<Jet> {
        let m = self.m;
        let big = m + 1;
        let zero = Jet::zero(self.vertical[0].layout());
        let mut out = vec![zero; big * big * big];
        for k in 0..m {
            for a in 0..m {
                for b in 0..m {
                    out[k * big * big + a * big + b] = self.horizontal[k * m * m + a * m + b].clone();
                }
                out[k * big * big + m * big + a] = self.mixed[k * m + a].clone();
                out[k * big * big + a * big + m] = -&self.mixed[k * m + a];
            }
        }
        for a in 0..m {
            for b in 0..m {
                out[m * big * big + a * big + b] = self.vertical[a * m + b].clone();
            }
        }
        out
    }
}

/// `N¹`, `N²`, `P(N_φ)` and the right side of `P(N_φ) = N_φ + 2(dη∘φ)⊗ξ`.
#[derive(Clone, Debug)]
pub struct NormalityJets {
    pub n: Vec<Jet>,
    pub n1: Vec<Jet>,
    pub n2: Vec<Jet>,
    pub pn: Vec<Jet>,
    pub pn_identity: Vec<Jet>,
}

/// `h^a_b`, `C_ab`, `C^a_b` and `ψ^a_b = g^{da}ω_db`, all at `a·m + b`.
#[derive(Clone, Debug)]
pub struct DerivedJets {
    pub h: Vec<Jet>,
    pub c: Vec<Jet>,
    pub c_sharp: Vec<Jet>,
    pub psi: Vec<Jet>,
}

impl Local {
    pub fn m(&self) -> usize {
        self.frame.m()
    }

    pub fn order(&self) -> usize {
        self.frame.order()
    }

    pub fn zero(&self) -> Jet {
        self.frame.zero()
    }

    pub fn ginv(&self) -> Result<Vec<Jet>> {
        let m = self.m();
        let vals: Vec<f64> = self.g.iter().map(Jet::value).collect();
        if min_cholesky_pivot(&vals, m) <= 0.0 {
            return Err(Error::NotPositiveDefinite { point: self.point.clone() });
        }
        invert_jets(&self.g, m).ok_or_else(|| Error::NotPositiveDefinite { point: self.point.clone() })
    }

    /// `Φ^i_j` over the full frame (`φξ = 0`, `η∘φ = 0`).
    pub fn full_phi(&self) -> Vec<Jet> {
        self.pad(&self.phi, 0.0)
    }

    /// Full metric in the frame: `g_ab ⊕ 1`.
    pub fn full_metric(&self) -> Vec<Jet> {
        self.pad(&self.g, 1.0)
    }

    fn pad(&self, block: &[Jet], corner: f64) -> Vec<Jet> {
        let m = self.m();
        let big = m + 1;
        let mut out = vec![self.zero(); big * big];
        for a in 0..m {
            for b in 0..m {
                out[a * big + b] = block[a * m + b].clone();
            }
        }
        out[big * big - 1] = self.frame.constant(corner);
        out
    }

    /// `Ω_ab = g_ac φ^c_b` (admissible block).
    pub fn fundamental_form(&self) -> Vec<Jet> {
        let m = self.m();
        let mut out = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                let mut acc = self.zero();
                for c in 0..m {
                    acc = acc + self.g[a * m + c].mul(&self.phi[c * m + b]);
                }
                out.push(acc);
            }
        }
        out
    }

    /// `Ω` over the full frame.
    pub fn full_fundamental_form(&self) -> Vec<Jet> {
        self.pad(&self.fundamental_form(), 0.0)
    }

    pub fn eta(&self) -> Vec<Jet> {
        let big = self.m() + 1;
        (0..big).map(|i| self.frame.constant(if i == big - 1 { 1.0 } else { 0.0 })).collect()
    }

    pub fn d_eta(&self) -> Vec<Jet> {
        self.frame.exterior_derivative(&self.eta(), 1).expect("1-form")
    }

    pub fn d_omega(&self) -> Vec<Jet> {
        self.frame.exterior_derivative(&self.full_fundamental_form(), 2).expect("2-form")
    }

    pub fn omega(&self) -> Vec<Jet> {
        self.frame.omega()
    }

    /// `φX` with `φξ = 0`.
    pub fn apply_phi(&self, v: &VecJet) -> VecJet {
        let m = self.m();
        let h = (0..m)
            .map(|a| {
                let mut acc = self.zero();
                for b in 0..m {
                    acc = acc + self.phi[a * m + b].mul(&v.h[b]);
                }
                acc
            })
            .collect();
        VecJet { h, v: self.zero().truncate(v.v.order()) }
    }

    pub fn basis(&self, i: usize) -> VecJet {
        VecJet::basis(self.frame.layout(), self.m(), i)
    }

    /// Adapted-frame formulas for the Nijenhuis torsion.
    pub fn nijenhuis_adapted(&self) -> Nijenhuis {
        let m = self.m();
        let f = &self.frame;
        // dphi[c][e·m + b] = e_c φ^e_b
        let dphi: Vec<Vec<Jet>> = (0..=m).map(|c| self.phi.iter().map(|x| f.e(c, x)).collect()).collect();
        let ph = |a: usize, b: usize| &self.phi[a * m + b];
        let low = dphi[0][0].layout().clone();
        let mut horizontal = Vec::with_capacity(m * m * m);
        for e in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut acc = Jet::zero(&low);
                    for c in 0..m {
                        acc = acc + ph(c, a).mul(&dphi[c][e * m + b])
                            - ph(c, b).mul(&dphi[c][e * m + a])
                            - ph(e, c).mul(&(&dphi[a][c * m + b] - &dphi[b][c * m + a]));
                    }
                    horizontal.push(acc);
                }
            }
        }
        let om = self.omega();
        let mut vertical = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                let mut acc = Jet::zero(&low);
                for c in 0..m {
                    for d in 0..m {
                        acc = acc + ph(c, a).mul(ph(d, b)).mul(&om[d * m + c]);
                    }
                }
                vertical.push(acc.scale(2.0));
            }
        }
        let mut mixed = Vec::with_capacity(m * m);
        for e in 0..m {
            for a in 0..m {
                let mut acc = Jet::zero(&low);
                for c in 0..m {
                    acc = acc - ph(e, c).mul(&dphi[m][c * m + a]);
                }
                mixed.push(acc);
            }
        }
        Nijenhuis { m, horizontal, vertical, mixed }
    }

    /// `N_φ(X, Y) = [φX, φY] + φ²[X, Y] − φ[φX, Y] − φ[X, φY]` from brackets.
    pub fn nijenhuis_direct(&self, x: &VecJet, y: &VecJet) -> VecJet {
        let f = &self.frame;
        let px = self.apply_phi(x);
        let py = self.apply_phi(y);
        let t1 = f.bracket(&px, &py);
        let t2 = self.apply_phi(&self.apply_phi(&f.bracket(x, y)));
        let t3 = self.apply_phi(&f.bracket(&px, y));
        let t4 = self.apply_phi(&f.bracket(x, &py));
        t1.add(&t2).sub(&t3).sub(&t4)
    }

    /// `N²(E_i, E_j) = (L_{φE_i} η)E_j − (L_{φE_j} η)E_i`, with
    /// `(L_X η)Y = X(η(Y)) − η([X, Y])` and `η(E_j)` constant.
    pub fn n2(&self) -> Vec<Jet> {
        let big = self.m() + 1;
        let f = &self.frame;
        let basis: Vec<VecJet> = (0..big).map(|i| self.basis(i)).collect();
        let pb: Vec<VecJet> = basis.iter().map(|b| self.apply_phi(b)).collect();
        let mut out = Vec::with_capacity(big * big);
        for i in 0..big {
            for j in 0..big {
                out.push(f.bracket(&pb[j], &basis[i]).v - f.bracket(&pb[i], &basis[j]).v);
            }
        }
        out
    }

    pub fn normality(&self) -> NormalityJets {
        let m = self.m();
        let big = m + 1;
        let n = self.nijenhuis_adapted().full();
        let deta = self.d_eta();
        let phi = self.full_phi();
        let vert = m * big * big;
        let mut n1 = n.clone();
        let mut pn = n.clone();
        let mut pn_identity = n.clone();
        for i in 0..big {
            for j in 0..big {
                let s = i * big + j;
                n1[vert + s] = &n[vert + s] + &deta[s].scale(2.0);
                pn[vert + s] = n[vert + s].scale(0.0);
                let mut acc = n[vert + s].clone();
                for p in 0..big {
                    for q in 0..big {
                        acc = acc + deta[p * big + q].mul(&phi[p * big + i]).mul(&phi[q * big + j]).scale(2.0);
                    }
                }
                pn_identity[vert + s] = acc;
            }
        }
        NormalityJets { n, n1, n2: self.n2(), pn, pn_identity }
    }

    pub fn derived(&self) -> Result<DerivedJets> {
        let m = self.m();
        let f = &self.frame;
        let h: Vec<Jet> = self.phi.iter().map(|x| f.e(m, x).scale(0.5)).collect();
        let c: Vec<Jet> = self.g.iter().map(|x| f.e(m, x).scale(0.5)).collect();
        let gi = self.ginv()?;
        let om = self.omega();
        let mut c_sharp = Vec::with_capacity(m * m);
        let mut psi = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                let mut cs = Jet::zero(c[0].layout());
                let mut ps = Jet::zero(c[0].layout());
                for d in 0..m {
                    cs = cs + gi[d * m + a].mul(&c[d * m + b]);
                    // row a is the upper index of ψ: ψ^a_b = g^{da} ω_db
                    ps = ps + gi[d * m + a].mul(&om[d * m + b]);
                }
                c_sharp.push(cs);
                psi.push(ps);
            }
        }
        Ok(DerivedJets { h, c, c_sharp, psi })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Invariant {
    PhiSquared,
    Compatibility,
    MetricSymmetry,
    PositiveDefinite,
    StandingAssumption,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::PhiSquared => "phi^2 = -1 on D",
            Invariant::Compatibility => "g(phi u, phi v) = g(u, v)",
            Invariant::MetricSymmetry => "g symmetric",
            Invariant::PositiveDefinite => "g positive definite",
            Invariant::StandingAssumption => "d_n Gamma^n_a = 0",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub invariant: Invariant,
    pub point: Point,
    /// 0-based component `(row, column)` of the worst violation.
    pub index: (usize, usize),
    pub residual: f64,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated at {:?}, component ({}, {}), residual {:.3e}",
            self.invariant,
            self.point,
            self.index.0 + 1,
            self.index.1 + 1,
            self.residual
        )
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
    pub phi_squared: Residual,
    pub compatibility: Residual,
    pub symmetry: Residual,
    pub standing_assumption: Residual,
    /// Smallest Cholesky pivot of `g` over the sample.
    pub min_pivot: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn max_residual(&self) -> Residual {
        let mut r = self.phi_squared.clone();
        r.merge(&self.compatibility);
        r.merge(&self.symmetry);
        r.merge(&self.standing_assumption);
        r
    }
}

fn worst(vals: impl Iterator<Item = (usize, usize, f64)>) -> (usize, usize, f64) {
    vals.fold((0, 0, 0.0), |w, (i, j, v)| if v.abs() > w.2 { (i, j, v.abs()) } else { w })
}

/// Check every structure axiom at the sample points within [`STRUCTURE_TOL`].
pub fn validate_structure(s: &AlmostContactStructure, spec: &SampleSpec) -> Result<ValidationReport> {
    let points = sample_points(spec)?;
    let m = s.m();
    let per_point = |p: &[f64]| -> Result<[(usize, usize, f64); 5]> {
        let l = s.local(p, 1)?;
        let g: Vec<f64> = l.g.iter().map(Jet::value).collect();
        let phi: Vec<f64> = l.phi.iter().map(Jet::value).collect();
        let idx = || (0..m).flat_map(|a| (0..m).map(move |b| (a, b)));
        let sq = worst(idx().map(|(a, b)| {
            let v: f64 = (0..m).map(|c| phi[a * m + c] * phi[c * m + b]).sum();
            (a, b, v + if a == b { 1.0 } else { 0.0 })
        }));
        let compat = worst(idx().map(|(a, b)| {
            let mut v = -g[a * m + b];
            for c in 0..m {
                for d in 0..m {
                    v += g[c * m + d] * phi[c * m + a] * phi[d * m + b];
                }
            }
            (a, b, v)
        }));
        let sym = worst(idx().map(|(a, b)| (a, b, g[a * m + b] - g[b * m + a])));
        let pivot = min_cholesky_pivot(&g, m);
        let std = worst(l.frame.gam.iter().enumerate().map(|(a, j)| (a, 0, j.partial(&[m]))));
        Ok([sq, compat, sym, (0, 0, pivot), std])
    };
    let metrics = sweep(&points, 5, |p| Ok(per_point(p)?.iter().map(|t| t.2).collect()))?;
    let mut diagnostics = Vec::new();
    let kinds = [Invariant::PhiSquared, Invariant::Compatibility, Invariant::MetricSymmetry];
    let mut min_pivot = f64::INFINITY;
    for p in &points {
        let r = per_point(p).map_err(|e| e.at(p))?;
        for (kind, (i, j, v)) in kinds.iter().zip(&r[..3]) {
            if *v > STRUCTURE_TOL {
                diagnostics.push(Diagnostic { invariant: *kind, point: p.clone(), index: (*i, *j), residual: *v });
            }
        }
        min_pivot = min_pivot.min(r[3].2);
        if !(r[3].2 > 0.0) {
            diagnostics.push(Diagnostic {
                invariant: Invariant::PositiveDefinite,
                point: p.clone(),
                index: (0, 0),
                residual: r[3].2,
            });
        }
        if r[4].2 > STRUCTURE_TOL {
            diagnostics.push(Diagnostic {
                invariant: Invariant::StandingAssumption,
                point: p.clone(),
                index: (r[4].0, 0),
                residual: r[4].2,
            });
        }
    }
    let mut it = metrics.into_iter();
    let phi_squared = it.next().unwrap();
    let compatibility = it.next().unwrap();
    let symmetry = it.next().unwrap();
    let _pivots = it.next();
    let standing_assumption = it.next().unwrap();
    Ok(ValidationReport { diagnostics, phi_squared, compatibility, symmetry, standing_assumption, min_pivot })
}

/// Validate on [`default_sample`].
pub fn validate_default(s: &AlmostContactStructure) -> Result<ValidationReport> {
    validate_structure(s, &default_sample(s.n()))
}

/// `Ω_ab = g(e_a, φe_b)`; `Ω(ξ, ·) = 0` is implicit.
pub fn fundamental_form(s: &AlmostContactStructure) -> AdmissibleTensorField {
    s.derived_field((0, 2), |l| Ok(l.fundamental_form().iter().map(|j| j.truncate(l.order() - 1)).collect()))
        .with_symmetry(Symmetry::Antisymmetric)
}

/// Values of the adapted Nijenhuis components at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct NijenhuisValues {
    pub horizontal: Vec<f64>,
    pub vertical: Vec<f64>,
    pub mixed: Vec<f64>,
}

fn values(v: &[Jet]) -> Vec<f64> {
    v.iter().map(Jet::value).collect()
}

pub fn nijenhuis_adapted(s: &AlmostContactStructure, p: &[f64]) -> Result<NijenhuisValues> {
    let n = s.local(p, 1)?.nijenhuis_adapted();
    Ok(NijenhuisValues { horizontal: values(&n.horizontal), vertical: values(&n.vertical), mixed: values(&n.mixed) })
}

/// Frame components of `N_φ(X, Y)` at `p`, straight from the bracket formula.
pub fn nijenhuis_direct(
    s: &AlmostContactStructure,
    x: &FrameVectorField,
    y: &FrameVectorField,
    p: &[f64],
) -> Result<Vec<f64>> {
    let l = s.local(p, 1)?;
    Ok(l.nijenhuis_direct(&x.jets(p, 1)?, &y.jets(p, 1)?).values())
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalityValues {
    /// `N¹^k_{ij}`, full frame, `k·N² + i·N + j`.
    pub n1: Vec<f64>,
    /// `N²_{ij}`.
    pub n2: Vec<f64>,
    /// `P(N_φ)^k_{ij}`.
    pub pn: Vec<f64>,
    /// `max |P(N_φ) − (N_φ + 2(dη∘φ)⊗ξ)|`.
    pub identity_residual: f64,
}

pub fn normality_tensors(s: &AlmostContactStructure, p: &[f64]) -> Result<NormalityValues> {
    let nt = s.local(p, 1)?.normality();
    let pn = values(&nt.pn);
    let identity_residual = pn.iter().zip(values(&nt.pn_identity)).fold(0.0f64, |w, (a, b)| w.max((a - b).abs()));
    Ok(NormalityValues { n1: values(&nt.n1), n2: values(&nt.n2), pn, identity_residual })
}

#[derive(Clone, Debug)]
pub struct DerivedFields {
    pub h: AdmissibleTensorField,
    pub c: AdmissibleTensorField,
    pub c_sharp: AdmissibleTensorField,
    pub psi: AdmissibleTensorField,
}

pub fn derived_fields(s: &AlmostContactStructure) -> DerivedFields {
    DerivedFields {
        h: s.derived_field((1, 1), |l| Ok(l.derived()?.h)),
        c: s.derived_field((0, 2), |l| Ok(l.derived()?.c)).with_symmetry(Symmetry::Symmetric),
        c_sharp: s.derived_field((1, 1), |l| Ok(l.derived()?.c_sharp)),
        psi: s.derived_field((1, 1), |l| Ok(l.derived()?.psi)),
    }
}
