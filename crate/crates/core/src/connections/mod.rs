//! Interior connections, the extended connection `∇¹`, the Levi-Civita
//! connection in the adapted frame, Schouten curvature and transport.
//!
//! Coefficients follow `∇_{e_b} e_c = Γ^a_{bc} e_a`, stored at `a·m² + b·m + c`.
//! Frame connections use the same pattern over the full frame.

mod transport;

pub use transport::{curvature_flux, parallel_transport, square_loop, Curve, DEFAULT_STEPS};

use std::sync::Arc;

use crate::acms::{AlmostContactStructure, Local};
use crate::error::{Error, Result};
use crate::exprcore::Jet;
use crate::field::{AdmissibleTensorField, ScalarField, Symmetry, TensorSource};
use crate::frames::{AdaptedChart, FrameJets};
use crate::linalg::invert_jets;

#[derive(Clone, Debug)]
pub struct InteriorConnection {
    pub chart: AdaptedChart,
    pub coeffs: AdmissibleTensorField,
}

impl InteriorConnection {
    pub fn new(chart: AdaptedChart, coeffs: AdmissibleTensorField) -> Result<Self> {
        if coeffs.valence() != (1, 2) || coeffs.dim() != chart.n() {
            return Err(Error::Shape("connection coefficients must be a (1,2) field on the chart".into()));
        }
        Ok(InteriorConnection { chart, coeffs })
    }

    /// Hand-built coefficients, `exprs[a·m² + b·m + c] = Γ^a_{bc}`.
    pub fn from_exprs(chart: AdaptedChart, exprs: &[&str]) -> Result<Self> {
        let n = chart.n();
        let fields = exprs.iter().map(|s| ScalarField::parse(s, n)).collect::<Result<Vec<_>>>()?;
        let coeffs = AdmissibleTensorField::from_fields(n, (1, 2), fields)?;
        InteriorConnection::new(chart, coeffs)
    }

    pub fn m(&self) -> usize {
        self.chart.m()
    }

    /// Frame jets at `frame_order` and coefficient jets at `order`.
    pub fn jets(&self, p: &[f64], frame_order: usize, order: usize) -> Result<(FrameJets, Vec<Jet>)> {
        Ok((self.chart.jets(p, frame_order)?, self.coeffs.eval(p, order)?))
    }
}

/// `Γ^a_{bc} = ½ g^{ad}(e_b g_cd + e_c g_bd − e_d g_bc)`.
pub fn interior_coeffs(l: &Local) -> Result<Vec<Jet>> {
    koszul(l, [1.0, 1.0, -1.0])
}

/// The sign pattern `(e_b g_cd − e_c g_bd − e_d g_bc)`. Not torsion-free in
/// general; kept only to report how far it is from [`interior_coeffs`].
pub fn printed_sign_coeffs(l: &Local) -> Result<Vec<Jet>> {
    koszul(l, [1.0, -1.0, -1.0])
}

fn koszul(l: &Local, signs: [f64; 3]) -> Result<Vec<Jet>> {
    let m = l.m();
    let gi = l.ginv()?;
    // dg[b][c·m + d] = e_b g_cd
    let dg: Vec<Vec<Jet>> = (0..m).map(|b| l.g.iter().map(|x| l.frame.e(b, x)).collect()).collect();
    let low = dg[0][0].layout().clone();
    let mut lowered = Vec::with_capacity(m * m * m);
    for d in 0..m {
        for b in 0..m {
            for c in 0..m {
                lowered.push(
                    dg[b][c * m + d]
                        .scale(signs[0])
                        .axpy(signs[1], &dg[c][b * m + d])
                        .axpy(signs[2], &dg[d][b * m + c]),
                );
            }
        }
    }
    let mut out = Vec::with_capacity(m * m * m);
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let mut acc = Jet::zero(&low);
                for d in 0..m {
                    acc = acc + gi[a * m + d].mul(&lowered[d * m * m + b * m + c]);
                }
                out.push(acc.scale(0.5));
            }
        }
    }
    Ok(out)
}

/// The torsion-free metric interior connection.
pub fn interior_metric_connection(s: &AlmostContactStructure) -> InteriorConnection {
    InteriorConnection { chart: s.chart.clone(), coeffs: s.derived_field((1, 2), interior_coeffs) }
}

/// `S^c_{ab} = Γ^c_{ab} − Γ^c_{ba}`.
pub fn torsion_jets(conn: &[Jet], m: usize) -> Vec<Jet> {
    let mut out = Vec::with_capacity(m * m * m);
    for c in 0..m {
        for a in 0..m {
            for b in 0..m {
                out.push(&conn[c * m * m + a * m + b] - &conn[c * m * m + b * m + a]);
            }
        }
    }
    out
}

pub fn torsion(c: &InteriorConnection) -> AdmissibleTensorField {
    let coeffs = c.coeffs.clone();
    let m = c.m();
    let src = move |p: &[f64], k: usize| Ok(torsion_jets(&coeffs.eval(p, k)?, m));
    AdmissibleTensorField::from_source(c.chart.n(), (1, 2), Arc::new(src)).with_symmetry(Symmetry::Antisymmetric)
}

/// `∇_a t` for an admissible `(p, q)` tensor with components `t` (upper
/// indices first). Output index is `a · len(t) + index(t)`.
pub fn covariant_derivative_jets(frame: &FrameJets, conn: &[Jet], t: &[Jet], valence: (usize, usize)) -> Vec<Jet> {
    let m = frame.m();
    let rank = valence.0 + valence.1;
    let len = t.len();
    debug_assert_eq!(len, m.pow(rank as u32));
    let stride: Vec<usize> = (0..rank).map(|s| m.pow((rank - 1 - s) as u32)).collect();
    let gam = |a: usize, b: usize, c: usize| &conn[a * m * m + b * m + c];
    let mut out = Vec::with_capacity(m * len);
    for a in 0..m {
        for idx in 0..len {
            let mut acc = frame.e(a, &t[idx]);
            for (s, &st) in stride.iter().enumerate() {
                let digit = (idx / st) % m;
                let base = idx - digit * st;
                for d in 0..m {
                    let other = &t[base + d * st];
                    if s < valence.0 {
                        acc = acc + gam(digit, a, d).mul(other);
                    } else {
                        acc = acc - gam(d, a, digit).mul(other);
                    }
                }
            }
            out.push(acc);
        }
    }
    out
}

/// `∇_a t` at `p`, laid out as in [`covariant_derivative_jets`].
pub fn covariant_derivative(c: &InteriorConnection, t: &AdmissibleTensorField, p: &[f64]) -> Result<Vec<f64>> {
    let (frame, conn) = c.jets(p, 1, 0)?;
    let tj = t.eval(p, 1)?;
    Ok(covariant_derivative_jets(&frame, &conn, &tj, t.valence()).iter().map(Jet::value).collect())
}

/// `∇¹`: the interior connection plus `G^a_n = 0`.
#[derive(Clone, Debug)]
pub struct ExtendedConnection {
    pub interior: InteriorConnection,
}

impl ExtendedConnection {
    pub fn new(interior: InteriorConnection) -> Self {
        ExtendedConnection { interior }
    }
}

/// `∇¹_i t` for `i ≤ m`: rows `i < m` are `∇_i t`, row `m` is `∂_n t`.
pub fn extended_derivative_jets(frame: &FrameJets, conn: &[Jet], t: &[Jet], valence: (usize, usize)) -> Vec<Jet> {
    let m = frame.m();
    let mut out = covariant_derivative_jets(frame, conn, t, valence);
    out.extend(t.iter().map(|x| frame.e(m, x)));
    out
}

pub fn extended_derivative(ec: &ExtendedConnection, t: &AdmissibleTensorField, p: &[f64]) -> Result<Vec<f64>> {
    let (frame, conn) = ec.interior.jets(p, 1, 0)?;
    let tj = t.eval(p, 1)?;
    Ok(extended_derivative_jets(&frame, &conn, &tj, t.valence()).iter().map(Jet::value).collect())
}

/// `R_{abc}{}^d = e_aΓ^d_{bc} − e_bΓ^d_{ac} + Γ^e_{bc}Γ^d_{ae} − Γ^e_{ac}Γ^d_{be}`
/// at `((a·m + b)·m + c)·m + d`, i.e. `R(e_a, e_b)e_c = R_{abc}{}^d e_d`.
pub fn curvature_jets(frame: &FrameJets, conn: &[Jet]) -> Vec<Jet> {
    let m = frame.m();
    let gam = |a: usize, b: usize, c: usize| &conn[a * m * m + b * m + c];
    let mut out = Vec::with_capacity(m * m * m * m);
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let mut acc = frame.e(a, gam(d, b, c)) - frame.e(b, gam(d, a, c));
                    for e in 0..m {
                        acc = acc + gam(e, b, c).mul(gam(d, a, e)) - gam(e, a, c).mul(gam(d, b, e));
                    }
                    out.push(acc);
                }
            }
        }
    }
    out
}

pub fn schouten_curvature(c: &InteriorConnection) -> AdmissibleTensorField {
    let conn = c.clone();
    let src = move |p: &[f64], k: usize| {
        let (frame, coeffs) = conn.jets(p, k + 1, k + 1)?;
        Ok(curvature_jets(&frame, &coeffs))
    };
    AdmissibleTensorField::from_source(c.chart.n(), (1, 3), Arc::new(src))
}

/// `P^a_{bc} = ∂_n Γ^a_{bc}`, same layout as the coefficients.
pub fn p_tensor(c: &InteriorConnection) -> AdmissibleTensorField {
    let conn = c.clone();
    let src = move |p: &[f64], k: usize| {
        let (frame, coeffs) = conn.jets(p, k + 1, k + 1)?;
        let m = frame.m();
        Ok(coeffs.iter().map(|x| frame.e(m, x)).collect())
    };
    AdmissibleTensorField::from_source(c.chart.n(), (1, 2), Arc::new(src))
}

/// Levi-Civita coefficients `Γ̃^k_{ij}` in the frame `(e_a, ∂_n)`, with
/// `∇̃_{E_i} E_j = Γ̃^k_{ij} E_k`, stored at `k·N² + i·N + j`.
#[derive(Clone)]
pub struct FrameConnection {
    pub n: usize,
    pub source: Arc<dyn TensorSource>,
}

impl std::fmt::Debug for FrameConnection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FrameConnection(n = {})", self.n)
    }
}

impl FrameConnection {
    pub fn values(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.source.eval(p, 0)?.iter().map(Jet::value).collect())
    }
}

/// Closed-form assembly from `Γ`, `ω`, `C` and `ψ`.
pub fn levi_civita_adapted_local(l: &Local) -> Result<Vec<Jet>> {
    let m = l.m();
    let big = m + 1;
    let gam = interior_coeffs(l)?;
    let om = l.omega();
    let d = l.derived()?;
    let zero = Jet::zero(gam[0].layout());
    let mut out = vec![zero; big * big * big];
    let at = |k: usize, i: usize, j: usize| k * big * big + i * big + j;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                out[at(c, a, b)] = gam[c * m * m + a * m + b].clone();
            }
            out[at(m, a, b)] = &om[b * m + a] - &d.c[a * m + b];
            let mixed = &d.c_sharp[b * m + a] - &d.psi[b * m + a];
            out[at(b, a, m)] = mixed.clone();
            out[at(b, m, a)] = mixed;
        }
    }
    Ok(out)
}

/// Independent route: Christoffel symbols of the full coordinate metric
/// `g_ab dx^a dx^b + η⊗η`, pushed into the adapted frame.
pub fn levi_civita_oracle_local(l: &Local) -> Result<Vec<Jet>> {
    let m = l.m();
    let n = m + 1;
    let gam = &l.frame.gam;
    let layout = gam[0].layout().clone();
    let mut big_g = vec![Jet::zero(&layout); n * n];
    for a in 0..m {
        for b in 0..m {
            big_g[a * n + b] = &l.g[a * m + b] + &gam[a].mul(&gam[b]);
        }
        big_g[a * n + m] = gam[a].clone();
        big_g[m * n + a] = gam[a].clone();
    }
    big_g[n * n - 1] = Jet::constant(&layout, 1.0);
    let gi = invert_jets(&big_g, n).ok_or_else(|| Error::NotPositiveDefinite { point: l.point.clone() })?;
    let dg: Vec<Vec<Jet>> = (0..n).map(|i| big_g.iter().map(|x| x.derivative(i)).collect()).collect();
    let low = dg[0][0].layout().clone();
    // coordinate Christoffels chr[γ·n² + α·n + β]
    let mut chr = Vec::with_capacity(n * n * n);
    for g in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut acc = Jet::zero(&low);
                for d in 0..n {
                    let k = &dg[a][b * n + d] + &dg[b][a * n + d] - &dg[d][a * n + b];
                    acc = acc + gi[g * n + d].mul(&k);
                }
                chr.push(acc.scale(0.5));
            }
        }
    }
    // frame vectors in coordinates: A[i][α]
    let frame_vec = |i: usize| -> Vec<Jet> {
        (0..n)
            .map(|al| {
                if i == m {
                    Jet::constant(&layout, if al == m { 1.0 } else { 0.0 })
                } else if al == m {
                    -&gam[i]
                } else {
                    Jet::constant(&layout, if al == i { 1.0 } else { 0.0 })
                }
            })
            .collect()
    };
    let frames: Vec<Vec<Jet>> = (0..n).map(frame_vec).collect();
    let mut out = vec![Jet::zero(&low); n * n * n];
    for i in 0..n {
        for j in 0..n {
            let mut v = Vec::with_capacity(n);
            for g in 0..n {
                let mut acc = Jet::zero(&low);
                for al in 0..n {
                    acc = acc + frames[i][al].mul(&frames[j][g].derivative(al));
                    for be in 0..n {
                        acc = acc + frames[i][al].mul(&frames[j][be]).mul(&chr[g * n * n + al * n + be]);
                    }
                }
                v.push(acc);
            }
            let mut vert = v[m].clone();
            for a in 0..m {
                vert = vert + gam[a].mul(&v[a]);
            }
            for a in 0..m {
                out[a * n * n + i * n + j] = v[a].clone();
            }
            out[m * n * n + i * n + j] = vert;
        }
    }
    Ok(out)
}

pub fn levi_civita_adapted(s: &AlmostContactStructure) -> FrameConnection {
    let st = s.clone();
    let src = move |p: &[f64], k: usize| levi_civita_adapted_local(&st.local(p, k + 1)?);
    FrameConnection { n: s.n(), source: Arc::new(src) }
}

pub fn levi_civita_oracle(s: &AlmostContactStructure) -> FrameConnection {
    let st = s.clone();
    let src = move |p: &[f64], k: usize| levi_civita_oracle_local(&st.local(p, k + 1)?);
    FrameConnection { n: s.n(), source: Arc::new(src) }
}

/// `(∇̃_i Φ)^k_j = E_iΦ^k_j + Γ̃^k_{il}Φ^l_j − Γ̃^l_{ij}Φ^k_l` at `i·N² + k·N + j`.
pub fn full_covariant_phi(l: &Local, lc: &[Jet]) -> Vec<Jet> {
    let big = l.m() + 1;
    let phi = l.full_phi();
    let mut out = Vec::with_capacity(big * big * big);
    for i in 0..big {
        for k in 0..big {
            for j in 0..big {
                let mut acc = l.frame.e(i, &phi[k * big + j]);
                for r in 0..big {
                    acc = acc + lc[k * big * big + i * big + r].mul(&phi[r * big + j])
                        - lc[r * big * big + i * big + j].mul(&phi[k * big + r]);
                }
                out.push(acc);
            }
        }
    }
    out
}

/// Metric connection with prescribed admissible torsion `T^e_{bc}`:
/// `Γ' = Γ + K`, `K_{dbc} = ½(T_{dbc} − T_{bcd} − T_{cbd})`.
pub fn contorsion_coeffs(l: &Local, t: &[Jet]) -> Result<Vec<Jet>> {
    let m = l.m();
    let base = interior_coeffs(l)?;
    let gi = l.ginv()?;
    let low = base[0].layout().clone();
    let mut tl = vec![Jet::zero(&low); m * m * m];
    for d in 0..m {
        for b in 0..m {
            for c in 0..m {
                let mut acc = Jet::zero(&low);
                for e in 0..m {
                    acc = acc + l.g[d * m + e].mul(&t[e * m * m + b * m + c]);
                }
                tl[d * m * m + b * m + c] = acc;
            }
        }
    }
    let at = |x: usize, y: usize, z: usize| x * m * m + y * m + z;
    let mut out = base;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let mut acc = Jet::zero(&low);
                for d in 0..m {
                    let k = (&tl[at(d, b, c)] - &tl[at(b, c, d)] - &tl[at(c, b, d)]).scale(0.5);
                    acc = acc + gi[a * m + d].mul(&k);
                }
                out[at(a, b, c)] = &out[at(a, b, c)] + &acc;
            }
        }
    }
    Ok(out)
}

/// Metric interior connection whose torsion is the given admissible field.
pub fn prescribed_torsion_connection(s: &AlmostContactStructure, t: &AdmissibleTensorField) -> InteriorConnection {
    let t = t.clone();
    let coeffs = s.derived_field((1, 2), move |l| contorsion_coeffs(l, &t.eval(&l.point, l.order() - 1)?));
    InteriorConnection { chart: s.chart.clone(), coeffs }
}

/// `T = ¼ P(N_φ)` restricted to the distribution.
pub fn quarter_pn_jets(l: &Local) -> Vec<Jet> {
    l.nijenhuis_adapted().horizontal.iter().map(|j| j.scale(0.25)).collect()
}

/// The metric connection with torsion `¼ P(N_φ)`.
pub fn quarter_nijenhuis_connection(s: &AlmostContactStructure) -> InteriorConnection {
    let coeffs = s.derived_field((1, 2), |l| contorsion_coeffs(l, &quarter_pn_jets(l)));
    InteriorConnection { chart: s.chart.clone(), coeffs }
}
