//! Scalar and tensor fields over a chart.
//!
//! A field is anything that can produce a [`Jet`] at a point. Parsed
//! expressions are the leaves; derived quantities (connection coefficients,
//! lifted metric components, ...) are [`TensorSource`]s that compute all of
//! their components at once from higher-order jets of their inputs.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exprcore::{central_difference, Expr, Jet, JetLayout};

/// A point in chart coordinates.
pub type Point = Vec<f64>;

/// Produces every component of a tensor at a point as jets of the requested order.
pub trait TensorSource: Send + Sync {
    fn eval(&self, p: &[f64], order: usize) -> Result<Vec<Jet>>;
}

impl<F> TensorSource for F
where
    F: Fn(&[f64], usize) -> Result<Vec<Jet>> + Send + Sync,
{
    fn eval(&self, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        self(p, order)
    }
}

#[derive(Clone)]
pub enum ScalarField {
    Expr(Arc<Expr>),
    Constant(f64),
    /// One component of a derived tensor.
    Component(Arc<dyn TensorSource>, usize),
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Expr(e) => write!(f, "Expr({e})"),
            ScalarField::Constant(c) => write!(f, "Constant({c})"),
            ScalarField::Component(_, i) => write!(f, "Component(#{i})"),
        }
    }
}

impl From<Expr> for ScalarField {
    fn from(e: Expr) -> Self {
        ScalarField::Expr(Arc::new(e))
    }
}

impl ScalarField {
    pub fn parse(src: &str, dim: usize) -> Result<ScalarField> {
        Ok(Expr::parse(src, dim)?.into())
    }

    pub fn jet(&self, p: &[f64], order: usize) -> Result<Jet> {
        match self {
            ScalarField::Expr(e) => Ok(e.eval_jet(p, order)?),
            ScalarField::Constant(c) => Ok(Jet::constant(&JetLayout::get(p.len(), order), *c)),
            ScalarField::Component(src, i) => {
                let mut all = src.eval(p, order)?;
                Ok(all.swap_remove(*i))
            }
        }
    }

    pub fn value(&self, p: &[f64]) -> Result<f64> {
        self.jet(p, 0).map(|j| j.value())
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match self {
            ScalarField::Expr(e) => Some(e),
            _ => None,
        }
    }

    /// Central-difference partial derivative (oracle only).
    pub fn fd_partial(&self, p: &[f64], index: usize, h: f64) -> Result<f64> {
        central_difference(|q| self.value(q), p, index, h)
    }
}

/// Evaluates a list of scalar fields one by one.
pub struct FieldList(pub Vec<ScalarField>);

impl TensorSource for FieldList {
    fn eval(&self, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        self.0.iter().map(|f| f.jet(p, order)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
}

/// Admissible tensor field of valence `(p, q)`: components carry only
/// frame indices `a ∈ 0..n−1`, stored row-major with upper indices first.
#[derive(Clone)]
pub struct AdmissibleTensorField {
    dim: usize,
    valence: (usize, usize),
    source: Arc<dyn TensorSource>,
    /// Declared symmetry of the last two indices, if any.
    pub symmetry: Option<Symmetry>,
}

impl fmt::Debug for AdmissibleTensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdmissibleTensorField")
            .field("dim", &self.dim)
            .field("valence", &self.valence)
            .field("symmetry", &self.symmetry)
            .finish()
    }
}

impl AdmissibleTensorField {
    /// `dim` is the chart dimension `n`; there are `(n−1)^(p+q)` components.
    pub fn from_source(dim: usize, valence: (usize, usize), source: Arc<dyn TensorSource>) -> Self {
        AdmissibleTensorField { dim, valence, source, symmetry: None }
    }

    pub fn from_fields(dim: usize, valence: (usize, usize), fields: Vec<ScalarField>) -> Result<Self> {
        let expected = (dim - 1).pow((valence.0 + valence.1) as u32);
        if fields.len() != expected {
            return Err(Error::Shape(format!("valence {valence:?} needs {expected} components, got {}", fields.len())));
        }
        Ok(Self::from_source(dim, valence, Arc::new(FieldList(fields))))
    }

    pub fn with_symmetry(mut self, s: Symmetry) -> Self {
        self.symmetry = Some(s);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frame_dim(&self) -> usize {
        self.dim - 1
    }

    pub fn valence(&self) -> (usize, usize) {
        self.valence
    }

    pub fn len(&self) -> usize {
        self.frame_dim().pow((self.valence.0 + self.valence.1) as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn source(&self) -> &Arc<dyn TensorSource> {
        &self.source
    }

    pub fn eval(&self, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        self.source.eval(p, order)
    }

    pub fn values(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval(p, 0)?.iter().map(Jet::value).collect())
    }

    pub fn component(&self, index: usize) -> ScalarField {
        ScalarField::Component(self.source.clone(), index)
    }

    /// Largest violation of the declared symmetry at `p` (0 if none declared).
    pub fn symmetry_residual(&self, p: &[f64]) -> Result<f64> {
        let Some(sym) = self.symmetry else { return Ok(0.0) };
        let v = self.values(p)?;
        let m = self.frame_dim();
        let sign = if sym == Symmetry::Symmetric { -1.0 } else { 1.0 };
        let mut worst: f64 = 0.0;
        for block in v.chunks(m * m) {
            for a in 0..m {
                for b in 0..m {
                    worst = worst.max((block[a * m + b] + sign * block[b * m + a]).abs());
                }
            }
        }
        Ok(worst)
    }
}

/// Vector field in the frame `(e_a, ∂_n)`.
#[derive(Clone, Debug)]
pub struct FrameVectorField {
    pub horizontal: Vec<ScalarField>,
    pub vertical: ScalarField,
}

impl FrameVectorField {
    pub fn frame(m: usize, a: usize) -> Self {
        let horizontal = (0..m).map(|b| ScalarField::Constant(if a == b { 1.0 } else { 0.0 })).collect();
        FrameVectorField { horizontal, vertical: ScalarField::Constant(0.0) }
    }

    pub fn reeb(m: usize) -> Self {
        FrameVectorField { horizontal: vec![ScalarField::Constant(0.0); m], vertical: ScalarField::Constant(1.0) }
    }

    /// Horizontal projection `P`: drop the vertical component.
    pub fn project(&self) -> Self {
        FrameVectorField { horizontal: self.horizontal.clone(), vertical: ScalarField::Constant(0.0) }
    }

    pub fn jets(&self, p: &[f64], order: usize) -> Result<VecJet> {
        Ok(VecJet {
            h: self.horizontal.iter().map(|f| f.jet(p, order)).collect::<Result<_>>()?,
            v: self.vertical.jet(p, order)?,
        })
    }
}

/// Frame components of a vector field as jets at one point.
#[derive(Clone, Debug)]
pub struct VecJet {
    pub h: Vec<Jet>,
    pub v: Jet,
}

impl VecJet {
    /// Constant-coefficient vector `Σ c_i E_i` with `E_m = ∂_n`.
    pub fn constant(layout: &Arc<JetLayout>, comps: &[f64]) -> VecJet {
        let m = comps.len() - 1;
        VecJet { h: comps[..m].iter().map(|&c| Jet::constant(layout, c)).collect(), v: Jet::constant(layout, comps[m]) }
    }

    pub fn basis(layout: &Arc<JetLayout>, m: usize, i: usize) -> VecJet {
        let mut c = vec![0.0; m + 1];
        c[i] = 1.0;
        VecJet::constant(layout, &c)
    }

    pub fn values(&self) -> Vec<f64> {
        self.h.iter().chain(std::iter::once(&self.v)).map(Jet::value).collect()
    }

    pub fn comp(&self, i: usize) -> &Jet {
        if i < self.h.len() {
            &self.h[i]
        } else {
            &self.v
        }
    }

    pub fn sub(&self, other: &VecJet) -> VecJet {
        VecJet { h: self.h.iter().zip(&other.h).map(|(a, b)| a - b).collect(), v: &self.v - &other.v }
    }

    pub fn add(&self, other: &VecJet) -> VecJet {
        VecJet { h: self.h.iter().zip(&other.h).map(|(a, b)| a + b).collect(), v: &self.v + &other.v }
    }

    pub fn truncate(&self, order: usize) -> VecJet {
        VecJet { h: self.h.iter().map(|j| j.truncate(order)).collect(), v: self.v.truncate(order) }
    }
}
