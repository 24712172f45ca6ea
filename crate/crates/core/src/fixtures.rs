//! Reference structures used by tests, benches and the CLI.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::acms::AlmostContactStructure;
use crate::exprcore::{Expr, Jet};
use crate::field::{AdmissibleTensorField, ScalarField, Symmetry};
use crate::frames::make_chart;

fn build(n: usize, gamma: &[&str], g: &[&str], phi: &[&str]) -> AlmostContactStructure {
    AlmostContactStructure::from_exprs(n, gamma, g, phi).expect("static fixture")
}

/// Flat and integrable: `Γ³ = 0`, `g = I`, `φ = [[0, −1], [1, 0]]`.
pub fn fixture_a() -> AlmostContactStructure {
    build(3, &["0", "0"], &["1", "0", "0", "1"], &["0", "-1", "1", "0"])
}

/// Sasakian and flat: `Γ³ = (−2x², 0)`, `g = I`, `φ = [[0, 1], [−1, 0]]`.
pub fn fixture_b() -> AlmostContactStructure {
    build(3, &["-2*x2", "0"], &["1", "0", "0", "1"], &["0", "1", "-1", "0"])
}

/// Almost contact Kählerian but not Sasakian: `Γ³ = (−x², 0)`, rest as B.
pub fn fixture_c() -> AlmostContactStructure {
    build(3, &["-x2", "0"], &["1", "0", "0", "1"], &["0", "1", "-1", "0"])
}

/// Conformal probe: `g = (1 + 0.1 sin x³) I`.
pub fn fixture_d() -> AlmostContactStructure {
    let lam = "1+0.1*sin(x3)";
    build(3, &["-x2", "0"], &[lam, "0", "0", lam], &["0", "-1", "1", "0"])
}

/// Five-dimensional: `Γ⁵ = (−x², 0, −x⁴, 0)`, `g = diag(u, u, 1, 1)` with
/// `u = 1 + 0.1x³`, `φ = J ⊕ J`.
pub fn fixture_f() -> AlmostContactStructure {
    let u = "1+0.1*x3";
    build(
        5,
        &["-x2", "0", "-x4", "0"],
        &[u, "0", "0", "0", "0", u, "0", "0", "0", "0", "1", "0", "0", "0", "0", "1"],
        &["0", "-1", "0", "0", "1", "0", "0", "0", "0", "0", "0", "-1", "0", "0", "1", "0"],
    )
}

/// Curved distribution: `g = diag(1 + (x²)², 1)`, `Γ³ = 0`, with a compatible `φ`.
pub fn curved() -> AlmostContactStructure {
    build(3, &["0", "0"], &["1+x2^2", "0", "0", "1"], &["0", "-1/sqrt(1+x2^2)", "sqrt(1+x2^2)", "0"])
}

pub fn named() -> Vec<(&'static str, AlmostContactStructure)> {
    vec![("A", fixture_a()), ("B", fixture_b()), ("C", fixture_c()), ("D", fixture_d()), ("F", fixture_f())]
}

fn coef(rng: &mut ChaCha8Rng) -> f64 {
    (rng.gen_range(-0.5f64..0.5) * 1000.0).round() / 1000.0
}

/// A random valid structure of dimension `n`: `g = λ PᵀP`, `φ = P⁻¹JP`
/// with `P = I + U`, `U` strictly upper triangular with polynomial entries,
/// `λ = exp(0.1 sin(·))`, and trigonometric `Γⁿ_a` in the horizontal variables.
pub fn random_structure(n: usize, seed: u64) -> AlmostContactStructure {
    assert!(n >= 3 && n % 2 == 1);
    let m = n - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let var = |rng: &mut ChaCha8Rng, hi: usize| rng.gen_range(1..=hi);
    let gamma: Vec<String> = (0..m)
        .map(|_| {
            let (i, j, k) = (var(&mut rng, m), var(&mut rng, m), var(&mut rng, m));
            format!("{}*sin(x{i}) + {}*x{j}*cos(x{k})", coef(&mut rng), coef(&mut rng))
        })
        .collect();
    let gamma_refs: Vec<&str> = gamma.iter().map(String::as_str).collect();
    let chart = make_chart(n, &gamma_refs).expect("random chart");
    let mut upper = Vec::new();
    for a in 0..m {
        for b in 0..m {
            if b > a {
                let (i, j) = (var(&mut rng, n), var(&mut rng, n));
                upper.push((
                    a,
                    b,
                    Expr::parse(
                        &format!("{} + {}*x{i} + {}*x{j}*x{n}", coef(&mut rng), coef(&mut rng), coef(&mut rng)),
                        n,
                    )
                    .unwrap(),
                ));
            }
        }
    }
    let lam =
        Expr::parse(&format!("exp(0.1*sin({}*x1 + {}*x{n} + {}))", coef(&mut rng), coef(&mut rng), coef(&mut rng)), n)
            .unwrap();
    let upper = Arc::new(upper);
    let make = |want_metric: bool| {
        let upper = upper.clone();
        let lam = lam.clone();
        move |p: &[f64], k: usize| -> crate::error::Result<Vec<Jet>> {
            let l = lam.eval_jet(p, k)?;
            let layout = l.layout().clone();
            let mut pm: Vec<Jet> =
                (0..m * m).map(|i| Jet::constant(&layout, if i / m == i % m { 1.0 } else { 0.0 })).collect();
            for (a, b, e) in upper.iter() {
                pm[a * m + b] = e.eval_jet(p, k)?;
            }
            let mul = |x: &[Jet], y: &[Jet]| -> Vec<Jet> {
                let mut out = Vec::with_capacity(m * m);
                for i in 0..m {
                    for j in 0..m {
                        let mut acc = Jet::zero(&layout);
                        for r in 0..m {
                            acc = acc + x[i * m + r].mul(&y[r * m + j]);
                        }
                        out.push(acc);
                    }
                }
                out
            };
            if want_metric {
                let pt: Vec<Jet> = (0..m * m).map(|i| pm[(i % m) * m + i / m].clone()).collect();
                Ok(mul(&pt, &pm).iter().map(|x| x.mul(&l)).collect())
            } else {
                let inv = crate::linalg::invert_jets(&pm, m).expect("unipotent");
                let mut j = vec![Jet::zero(&layout); m * m];
                for b in (0..m).step_by(2) {
                    j[b * m + b + 1] = Jet::constant(&layout, -1.0);
                    j[(b + 1) * m + b] = Jet::constant(&layout, 1.0);
                }
                Ok(mul(&inv, &mul(&j, &pm)))
            }
        }
    };
    let g = AdmissibleTensorField::from_source(n, (0, 2), Arc::new(make(true))).with_symmetry(Symmetry::Symmetric);
    let phi = AdmissibleTensorField::from_source(n, (1, 1), Arc::new(make(false)));
    AlmostContactStructure::new(chart, g, phi).expect("random structure")
}

/// Expression of `Γⁿ_a` when the chart is expression-backed.
pub fn gamma_source(s: &AlmostContactStructure, a: usize) -> Option<String> {
    match &s.chart.gamma()[a] {
        ScalarField::Expr(e) => Some(e.to_string()),
        _ => None,
    }
}
