//! `--fd-check`: jet-based quantities against central differences.

use std::collections::BTreeMap;

use acml_core::acms::AlmostContactStructure;
use acml_core::connections::{interior_metric_connection, schouten_curvature};
use acml_core::frames::{invert_admissible_metric, omega_from_chart};
use acml_core::sampling::{sample_points, sweep, Residual, SampleSpec};
use acml_core::{Point, Result};

pub const FD_POINTS: usize = 25;
pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-6;

const QUANTITIES: [&str; 5] = ["curvature", "e_a_phi", "field_partials", "interior_connection", "omega"];

#[derive(Clone, Debug)]
pub struct FdReport {
    pub points: usize,
    pub step: f64,
    pub tolerance: f64,
    pub quantities: BTreeMap<String, Residual>,
}

impl FdReport {
    pub fn passed(&self) -> bool {
        self.quantities.values().all(|r| r.within(self.tolerance))
    }
}

fn central<F>(f: &F, p: &[f64], i: usize, h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut q = p.to_vec();
    q[i] = p[i] + h;
    let up = f(&q)?;
    q[i] = p[i] - h;
    let down = f(&q)?;
    Ok(up.iter().zip(&down).map(|(u, d)| (u - d) / (2.0 * h)).collect())
}

fn worst(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| {
        let d = (x - y).abs();
        if d.is_nan() {
            f64::INFINITY
        } else {
            m.max(d)
        }
    })
}

/// Runs on `sample` reseeded to [`FD_POINTS`] points.
pub fn fd_check(s: &AlmostContactStructure, sample: &SampleSpec) -> Result<FdReport> {
    let spec = sample.clone().with_count(FD_POINTS);
    let points: Vec<Point> = sample_points(&spec)?;
    let (n, m) = (s.n(), s.m());
    let h = FD_STEP;
    let omega = omega_from_chart(&s.chart);
    let conn = interior_metric_connection(s);
    let curv = schouten_curvature(&conn);
    let gamma_values = |q: &[f64]| s.chart.gamma().iter().map(|f| f.value(q)).collect::<Result<Vec<f64>>>();

    let per_point = |p: &[f64]| -> Result<Vec<f64>> {
        let l = s.local(p, 1)?;
        let gam = gamma_values(p)?;
        // ∂_i of every component, FD against the jets
        let mut partials = 0.0f64;
        let gamma_jets = s.chart.gamma().iter().map(|f| f.jet(p, 1)).collect::<Result<Vec<_>>>()?;
        for i in 0..n {
            for (jets, fd) in [
                (&l.g, central(&|q: &[f64]| s.g.values(q), p, i, h)?),
                (&l.phi, central(&|q: &[f64]| s.phi.values(q), p, i, h)?),
                (&gamma_jets, central(&gamma_values, p, i, h)?),
            ] {
                let exact: Vec<f64> = jets.iter().map(|j| j.partial(&[i])).collect();
                partials = partials.max(worst(&exact, &fd));
            }
        }
        // e_a f = ∂_a f − Γⁿ_a ∂_n f, from FD partials
        let frame_fd = |f: &dyn Fn(&[f64]) -> Result<Vec<f64>>, a: usize| -> Result<Vec<f64>> {
            let da = central(&f, p, a, h)?;
            let dn = central(&f, p, m, h)?;
            Ok(da.iter().zip(&dn).map(|(x, y)| x - gam[a] * y).collect())
        };
        let e_gamma: Vec<Vec<f64>> = (0..m).map(|a| frame_fd(&gamma_values, a)).collect::<Result<_>>()?;

        // ω_xy = ½(e_x Γ_y − e_y Γ_x)
        let om = omega.values(p)?;
        let om_fd: Vec<f64> = (0..m * m).map(|i| 0.5 * (e_gamma[i / m][i % m] - e_gamma[i % m][i / m])).collect();
        let omega_err = worst(&om, &om_fd);

        // e_a φ
        let mut phi_err = 0.0f64;
        let g_vals = |q: &[f64]| s.g.values(q);
        let phi_vals = |q: &[f64]| s.phi.values(q);
        let mut e_g = Vec::with_capacity(m);
        for a in 0..m {
            let exact: Vec<f64> = l.phi.iter().map(|j| l.frame.e(a, j).value()).collect();
            phi_err = phi_err.max(worst(&exact, &frame_fd(&phi_vals, a)?));
            e_g.push(frame_fd(&g_vals, a)?);
        }

        // Γ^a_bc = g^{ad} ½(e_b g_dc + e_c g_db − e_d g_bc)
        let ginv = invert_admissible_metric(&s.g, p)?;
        let coeffs = conn.coeffs.values(p)?;
        let mut koszul = vec![0.0; m * m * m];
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let mut acc = 0.0;
                    for d in 0..m {
                        acc += ginv[a * m + d] * 0.5 * (e_g[b][d * m + c] + e_g[c][d * m + b] - e_g[d][b * m + c]);
                    }
                    koszul[(a * m + b) * m + c] = acc;
                }
            }
        }
        let conn_err = worst(&coeffs, &koszul);

        // R_abc^d from FD of the exact coefficients
        let coeff_vals = |q: &[f64]| conn.coeffs.values(q);
        let e_coeff: Vec<Vec<f64>> = (0..m).map(|a| frame_fd(&coeff_vals, a)).collect::<Result<_>>()?;
        let at = |a: usize, b: usize, c: usize| (a * m + b) * m + c;
        let mut r_fd = Vec::with_capacity(m * m * m * m);
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        let mut acc = e_coeff[a][at(d, b, c)] - e_coeff[b][at(d, a, c)];
                        for k in 0..m {
                            acc +=
                                coeffs[at(k, b, c)] * coeffs[at(d, a, k)] - coeffs[at(k, a, c)] * coeffs[at(d, b, k)];
                        }
                        r_fd.push(acc);
                    }
                }
            }
        }
        let curv_err = worst(&curv.values(p)?, &r_fd);

        Ok(vec![curv_err, phi_err, partials, conn_err, omega_err])
    };
    let rs = sweep(&points, QUANTITIES.len(), per_point)?;
    Ok(FdReport {
        points: points.len(),
        step: h,
        tolerance: FD_TOL,
        quantities: QUANTITIES.iter().map(|s| s.to_string()).zip(rs).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use acml_core::fixtures;

    #[test]
    fn fixtures_pass_the_cross_check() {
        for s in [fixtures::fixture_d(), fixtures::fixture_f(), fixtures::curved()] {
            let r = fd_check(&s, &SampleSpec::cube(s.n(), -1.0, 1.0, 10, 3).unwrap()).unwrap();
            assert_eq!(r.points, FD_POINTS);
            assert!(r.passed(), "{:?}", r.quantities);
            assert!(r.quantities.values().all(|q| q.count == FD_POINTS));
        }
    }
}
