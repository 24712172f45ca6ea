//! Adapted charts and the non-holonomic frame `(e_a, ∂_n)`.
//!
//! Indices are 0-based. In a chart of dimension `n` there are `m = n − 1`
//! frame directions `e_a = ∂_a − Γⁿ_a ∂_n`; the full frame index `m`
//! stands for `ξ = ∂_n`, which is also coordinate `m`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exprcore::{Expr, Jet, JetLayout};
use crate::field::{AdmissibleTensorField, FrameVectorField, ScalarField, Symmetry, TensorSource, VecJet};
use crate::linalg::{invert_jets, is_positive_definite};
use crate::sampling::{sample_points, SampleSpec};

/// Tolerance for the standing assumption `∂_n Γⁿ_a = 0`.
pub const CHART_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct AdaptedChart {
    n: usize,
    gamma: Vec<ScalarField>,
}

impl AdaptedChart {
    /// Build without sampling the standing assumption; see [`make_chart`].
    pub fn new(n: usize, gamma: Vec<ScalarField>) -> Result<AdaptedChart> {
        if n < 3 || n % 2 == 0 {
            return Err(Error::BadDimension(n));
        }
        if gamma.len() != n - 1 {
            return Err(Error::Shape(format!(
                "chart of dimension {n} needs {} coefficients Γⁿ_a, got {}",
                n - 1,
                gamma.len()
            )));
        }
        Ok(AdaptedChart { n, gamma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.n - 1
    }

    pub fn gamma(&self) -> &[ScalarField] {
        &self.gamma
    }

    pub fn jets(&self, p: &[f64], order: usize) -> Result<FrameJets> {
        if p.len() != self.n {
            return Err(Error::Shape(format!("point has {} coordinates, chart has {}", p.len(), self.n)));
        }
        let gam = self.gamma.iter().map(|f| f.jet(p, order)).collect::<Result<Vec<_>>>()?;
        Ok(FrameJets { n: self.n, gam })
    }

    /// Check `∂_n Γⁿ_a = 0` at every sample point.
    pub fn check_standing_assumption(&self, spec: &SampleSpec) -> Result<()> {
        for p in sample_points(spec)? {
            let fj = self.jets(&p, 1).map_err(|e| e.at(&p))?;
            for (a, g) in fj.gam.iter().enumerate() {
                let r = g.partial(&[self.m()]);
                if r.abs() > CHART_TOL {
                    return Err(Error::ChartAssumption { index: a + 1, point: p, residual: r });
                }
            }
        }
        Ok(())
    }
}

/// Sample used when a chart or structure is validated without an explicit spec.
pub fn default_sample(n: usize) -> SampleSpec {
    SampleSpec::cube(n, -1.0, 1.0, 64, 0).expect("static sample spec")
}

/// Parse the coefficients and validate the chart on [`default_sample`].
pub fn make_chart(n: usize, gamma_exprs: &[&str]) -> Result<AdaptedChart> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::BadDimension(n));
    }
    let gamma = gamma_exprs.iter().map(|s| ScalarField::parse(s, n)).collect::<Result<Vec<_>>>()?;
    let chart = AdaptedChart::new(n, gamma)?;
    chart.check_standing_assumption(&default_sample(n))?;
    Ok(chart)
}

/// Jets of `Γⁿ_a` at one point, with the frame calculus built on them.
#[derive(Clone, Debug)]
pub struct FrameJets {
    pub n: usize,
    pub gam: Vec<Jet>,
}

impl FrameJets {
    pub fn m(&self) -> usize {
        self.n - 1
    }

    pub fn order(&self) -> usize {
        self.gam[0].order()
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        self.gam[0].layout()
    }

    pub fn zero(&self) -> Jet {
        Jet::zero(self.layout())
    }

    pub fn constant(&self, v: f64) -> Jet {
        Jet::constant(self.layout(), v)
    }

    /// `E_i f`: `e_a f = ∂_a f − Γⁿ_a ∂_n f` for `i < m`, `∂_n f` for `i = m`.
    /// The result has one order less than `f`.
    pub fn e(&self, i: usize, f: &Jet) -> Jet {
        let m = self.m();
        let dn = f.derivative(m);
        if i == m {
            dn
        } else {
            f.derivative(i) - self.gam[i].mul(&dn)
        }
    }

    /// `c^k_{ij}` with `[E_i, E_j] = c^k_{ij} E_k`, stored at `k·N² + i·N + j`.
    /// Only the vertical `k = m` slice is nonzero.
    pub fn structure_constants(&self) -> Vec<Jet> {
        let m = self.m();
        let big = m + 1;
        let low = self.gam[0].derivative(0).layout().clone();
        let mut c = vec![Jet::zero(&low); big * big * big];
        let base = m * big * big;
        for a in 0..m {
            for b in 0..m {
                c[base + a * big + b] = self.e(b, &self.gam[a]) - self.e(a, &self.gam[b]);
            }
            let dn = self.gam[a].derivative(m);
            c[base + a * big + m] = dn.clone();
            c[base + m * big + a] = -dn;
        }
        c
    }

    /// `ω_{ab} = ½(e_a Γⁿ_b − e_b Γⁿ_a)`, so that `[e_a, e_b] = 2ω_{ba} ∂_n`.
    pub fn omega(&self) -> Vec<Jet> {
        let m = self.m();
        let mut out = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                out.push((self.e(a, &self.gam[b]) - self.e(b, &self.gam[a])).scale(0.5));
            }
        }
        out
    }

    /// Coordinate components of a frame vector.
    pub fn to_coordinates(&self, v: &VecJet) -> Vec<Jet> {
        let mut c = v.h.clone();
        let mut vert = v.v.clone();
        for (h, g) in v.h.iter().zip(&self.gam) {
            vert = vert - h.mul(g);
        }
        c.push(vert);
        c
    }

    pub fn from_coordinates(&self, c: &[Jet]) -> VecJet {
        let m = self.m();
        let mut vert = c[m].clone();
        for (h, g) in c[..m].iter().zip(&self.gam) {
            vert = vert + h.mul(g);
        }
        VecJet { h: c[..m].to_vec(), v: vert }
    }

    /// `X f` for a vector given by frame components.
    pub fn apply(&self, x: &VecJet, f: &Jet) -> Jet {
        let coords = self.to_coordinates(x);
        let mut acc = self.zero().truncate(f.order().saturating_sub(1));
        for (i, c) in coords.iter().enumerate() {
            acc = acc + c.mul(&f.derivative(i));
        }
        acc
    }

    /// `[X, Y]` computed from coordinate components, returned in the frame.
    pub fn bracket(&self, x: &VecJet, y: &VecJet) -> VecJet {
        let cx = self.to_coordinates(x);
        let cy = self.to_coordinates(y);
        let mut out = Vec::with_capacity(self.n);
        for k in 0..self.n {
            let mut acc = Jet::zero(cx[0].derivative(0).layout());
            for i in 0..self.n {
                acc = acc + cx[i].mul(&cy[k].derivative(i)) - cy[i].mul(&cx[k].derivative(i));
            }
            out.push(acc);
        }
        self.from_coordinates(&out)
    }

    /// Exterior derivative of a `k`-form (`k = 1, 2`) given by full frame
    /// components, normalized with `1/(k+1)` so that `dη(e_a, e_b) = ω_{ab}`.
    pub fn exterior_derivative(&self, form: &[Jet], k: usize) -> Result<Vec<Jet>> {
        let big = self.n;
        let c = self.structure_constants();
        let cc = |r: usize, i: usize, j: usize| &c[r * big * big + i * big + j];
        match k {
            1 => {
                if form.len() != big {
                    return Err(Error::Shape(format!("1-form needs {big} components")));
                }
                let mut out = Vec::with_capacity(big * big);
                for i in 0..big {
                    for j in 0..big {
                        let mut acc = self.e(i, &form[j]) - self.e(j, &form[i]);
                        for r in 0..big {
                            acc = acc - cc(r, i, j).mul(&form[r]);
                        }
                        out.push(acc.scale(0.5));
                    }
                }
                Ok(out)
            }
            2 => {
                if form.len() != big * big {
                    return Err(Error::Shape(format!("2-form needs {} components", big * big)));
                }
                let a = |i: usize, j: usize| &form[i * big + j];
                let mut out = Vec::with_capacity(big * big * big);
                for i in 0..big {
                    for j in 0..big {
                        for l in 0..big {
                            let mut acc = self.e(i, a(j, l)) - self.e(j, a(i, l)) + self.e(l, a(i, j));
                            for r in 0..big {
                                acc = acc - cc(r, i, j).mul(a(r, l)) + cc(r, i, l).mul(a(r, j))
                                    - cc(r, j, l).mul(a(r, i));
                            }
                            out.push(acc.scale(1.0 / 3.0));
                        }
                    }
                }
                Ok(out)
            }
            _ => Err(Error::Shape(format!("exterior derivative implemented for k = 1, 2; got k = {k}"))),
        }
    }
}

/// `E_a f` at `p` (`a < m`: `e_a`; `a = m`: `∂_n`).
pub fn frame_apply(chart: &AdaptedChart, a: usize, f: &ScalarField, p: &[f64]) -> Result<f64> {
    if a > chart.m() {
        return Err(Error::Shape(format!("frame index {a} out of range for dimension {}", chart.n())));
    }
    let fj = chart.jets(p, 1)?;
    Ok(fj.e(a, &f.jet(p, 1)?).value())
}

/// Frame components (horizontal then vertical) of `[X, Y]` at `p`.
pub fn lie_bracket(chart: &AdaptedChart, x: &FrameVectorField, y: &FrameVectorField, p: &[f64]) -> Result<Vec<f64>> {
    let fj = chart.jets(p, 1)?;
    Ok(fj.bracket(&x.jets(p, 1)?, &y.jets(p, 1)?).values())
}

/// `ω`, stored at `a·m + b`.
pub fn omega_from_chart(chart: &AdaptedChart) -> AdmissibleTensorField {
    let c = chart.clone();
    let src = move |p: &[f64], k: usize| Ok(c.jets(p, k + 1)?.omega());
    AdmissibleTensorField::from_source(chart.n(), (0, 2), Arc::new(src)).with_symmetry(Symmetry::Antisymmetric)
}

/// `Mⁿ_{ab}`, the vertical component of `[e_a, e_b]`.
pub fn nonholonomicity(chart: &AdaptedChart) -> AdmissibleTensorField {
    let c = chart.clone();
    let src = move |p: &[f64], k: usize| {
        let fj = c.jets(p, k + 1)?;
        let m = fj.m();
        let sc = fj.structure_constants();
        let big = m + 1;
        Ok((0..m * m).map(|i| sc[m * big * big + (i / m) * big + i % m].clone()).collect())
    };
    AdmissibleTensorField::from_source(chart.n(), (0, 2), Arc::new(src)).with_symmetry(Symmetry::Antisymmetric)
}

/// `g^{ab}` at `p`, after a positive-definiteness check.
pub fn invert_admissible_metric(g: &AdmissibleTensorField, p: &[f64]) -> Result<Vec<f64>> {
    let m = g.frame_dim();
    let jets = g.eval(p, 0)?;
    let vals: Vec<f64> = jets.iter().map(Jet::value).collect();
    if !is_positive_definite(&vals, m) {
        return Err(Error::NotPositiveDefinite { point: p.to_vec() });
    }
    let inv = invert_jets(&jets, m).ok_or_else(|| Error::NotPositiveDefinite { point: p.to_vec() })?;
    Ok(inv.iter().map(Jet::value).collect())
}

/// `dα` at `p` for a `k`-form given by full frame components.
pub fn exterior_derivative(chart: &AdaptedChart, form: &[ScalarField], k: usize, p: &[f64]) -> Result<Vec<f64>> {
    let fj = chart.jets(p, 1)?;
    let jets = form.iter().map(|f| f.jet(p, 1)).collect::<Result<Vec<_>>>()?;
    Ok(fj.exterior_derivative(&jets, k)?.iter().map(Jet::value).collect())
}

/// `η = θⁿ` as full frame components.
pub fn eta_components(chart: &AdaptedChart) -> Vec<ScalarField> {
    let mut v = vec![ScalarField::Constant(0.0); chart.n()];
    v[chart.m()] = ScalarField::Constant(1.0);
    v
}

/// Re-evaluates a source on a lower-dimensional chart: coordinate `v` of
/// the inner chart is coordinate `map[v]` of the outer one.
pub struct EmbeddedSource {
    pub inner: Arc<dyn TensorSource>,
    pub map: Vec<usize>,
    pub outer_dim: usize,
}

impl TensorSource for EmbeddedSource {
    fn eval(&self, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        let q: Vec<f64> = self.map.iter().map(|&i| p[i]).collect();
        let target = JetLayout::get(self.outer_dim, order);
        Ok(self.inner.eval(&q, order)?.iter().map(|j| j.embed(&target, &self.map)).collect())
    }
}

/// Expression-backed fields are remapped symbolically; other fields are wrapped.
pub fn embed_field(f: &ScalarField, map: &[usize], outer_dim: usize) -> ScalarField {
    match f {
        ScalarField::Expr(e) => Expr::remap(e, |v| map[v], outer_dim).into(),
        ScalarField::Constant(c) => ScalarField::Constant(*c),
        other => {
            let inner = other.clone();
            let src = EmbeddedSource {
                inner: Arc::new(move |p: &[f64], k: usize| Ok(vec![inner.jet(p, k)?])),
                map: map.to_vec(),
                outer_dim,
            };
            ScalarField::Component(Arc::new(src), 0)
        }
    }
}
