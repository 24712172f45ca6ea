//! Parallel transport of admissible vectors with fixed-step RK4.

use crate::error::{Error, Result};
use crate::exprcore::{Expr, Jet};
use crate::field::Point;

use super::ExtendedConnection;

pub const DEFAULT_STEPS: usize = 1000;

#[derive(Clone, Debug)]
pub enum Curve {
    /// Straight segments; each segment is integrated with the full step count.
    Polyline(Vec<Point>),
    /// `x^i(t)` as one-variable expressions in `x1`, for `t ∈ [t0, t1]`.
    Parametric { comps: Vec<Expr>, t0: f64, t1: f64 },
}

impl Curve {
    fn segments(&self) -> usize {
        match self {
            Curve::Polyline(p) => p.len().saturating_sub(1),
            Curve::Parametric { .. } => 1,
        }
    }

    /// Position and coordinate velocity on segment `seg` at local parameter `s ∈ [0, 1]`.
    fn state(&self, seg: usize, s: f64) -> Result<(Point, Point)> {
        match self {
            Curve::Polyline(pts) => {
                let (a, b) = (&pts[seg], &pts[seg + 1]);
                let x = a.iter().zip(b).map(|(u, v)| u + s * (v - u)).collect();
                let dx = a.iter().zip(b).map(|(u, v)| v - u).collect();
                Ok((x, dx))
            }
            Curve::Parametric { comps, t0, t1 } => {
                let t = t0 + s * (t1 - t0);
                let mut x = Vec::with_capacity(comps.len());
                let mut dx = Vec::with_capacity(comps.len());
                for c in comps {
                    let j: Jet = c.eval_jet(&[t], 1)?;
                    x.push(j.value());
                    dx.push(j.partial(&[0]) * (t1 - t0));
                }
                Ok((x, dx))
            }
        }
    }
}

fn rhs(ec: &ExtendedConnection, x: &[f64], dx: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let m = ec.interior.m();
    let g = ec.interior.coeffs.values(x)?;
    // the ξ-direction contributes nothing because G^a_n = 0
    Ok((0..m)
        .map(|a| {
            let mut acc = 0.0;
            for b in 0..m {
                for c in 0..m {
                    acc -= g[a * m * m + b * m + c] * dx[b] * v[c];
                }
            }
            acc
        })
        .collect())
}

/// Transport `v0` along `curve`; `steps` RK4 steps per segment.
pub fn parallel_transport(ec: &ExtendedConnection, curve: &Curve, v0: &[f64], steps: usize) -> Result<Vec<f64>> {
    let m = ec.interior.m();
    let n = ec.interior.chart.n();
    if steps < 2 {
        return Err(Error::Transport(format!("need at least 2 steps, got {steps}")));
    }
    if v0.len() != m {
        return Err(Error::Transport(format!("initial vector must have {m} components, got {}", v0.len())));
    }
    if curve.segments() == 0 {
        return Err(Error::Transport("curve has no segments".into()));
    }
    if let Curve::Polyline(pts) = curve {
        if pts.iter().any(|p| p.len() != n) {
            return Err(Error::Transport(format!("polyline points must have {n} coordinates")));
        }
    }
    if let Curve::Parametric { comps, .. } = curve {
        if comps.len() != n || comps.iter().any(|c| c.dim() != 1) {
            return Err(Error::Transport(format!("parametric curve needs {n} one-variable components")));
        }
    }
    let h = 1.0 / steps as f64;
    let mut v = v0.to_vec();
    let axpy = |v: &[f64], s: f64, k: &[f64]| v.iter().zip(k).map(|(a, b)| a + s * b).collect::<Vec<_>>();
    for seg in 0..curve.segments() {
        for i in 0..steps {
            let s = i as f64 * h;
            let (x0, d0) = curve.state(seg, s)?;
            let (xm, dm) = curve.state(seg, s + 0.5 * h)?;
            let (x1, d1) = curve.state(seg, s + h)?;
            let k1 = rhs(ec, &x0, &d0, &v)?;
            let k2 = rhs(ec, &xm, &dm, &axpy(&v, 0.5 * h, &k1))?;
            let k3 = rhs(ec, &xm, &dm, &axpy(&v, 0.5 * h, &k2))?;
            let k4 = rhs(ec, &x1, &d1, &axpy(&v, h, &k3))?;
            for a in 0..m {
                v[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
            }
        }
    }
    Ok(v)
}

/// Counter-clockwise square in the `(x^{i+1}, x^{j+1})` plane starting at `corner`.
pub fn square_loop(corner: &[f64], plane: (usize, usize), side: f64) -> Curve {
    let (i, j) = plane;
    let mut pts = vec![corner.to_vec(); 5];
    pts[1][i] += side;
    pts[2][i] += side;
    pts[2][j] += side;
    pts[3][j] += side;
    Curve::Polyline(pts)
}

/// Midpoint-rule prediction `−Σ R_{ijc}{}^d v^c ΔA` of the holonomy defect
/// around [`square_loop`], from the curvature field (layout of
/// [`super::curvature_jets`]).
pub fn curvature_flux(
    curvature: &crate::field::AdmissibleTensorField,
    corner: &[f64],
    plane: (usize, usize),
    side: f64,
    cells: usize,
    v0: &[f64],
) -> Result<Vec<f64>> {
    let m = curvature.frame_dim();
    let (i, j) = plane;
    let da = (side / cells as f64).powi(2);
    let mut out = vec![0.0; m];
    for u in 0..cells {
        for w in 0..cells {
            let mut p = corner.to_vec();
            p[i] += (u as f64 + 0.5) * side / cells as f64;
            p[j] += (w as f64 + 0.5) * side / cells as f64;
            let r = curvature.values(&p)?;
            for d in 0..m {
                for c in 0..m {
                    out[d] -= r[((i * m + j) * m + c) * m + d] * v0[c] * da;
                }
            }
        }
    }
    Ok(out)
}
