//! Small dense matrix helpers over jets and floats.

use crate::exprcore::Jet;

/// Inverse of an `n × n` row-major jet matrix by Gauss-Jordan elimination
/// with partial pivoting on values. `None` if a pivot vanishes.
pub fn invert_jets(a: &[Jet], n: usize) -> Option<Vec<Jet>> {
    assert_eq!(a.len(), n * n);
    let layout = a[0].layout().clone();
    let mut m: Vec<Jet> = a.to_vec();
    let mut inv: Vec<Jet> =
        (0..n * n).map(|i| Jet::constant(&layout, if i / n == i % n { 1.0 } else { 0.0 })).collect();
    let scale = a.iter().fold(0.0f64, |s, j| s.max(j.value().abs())).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| m[r * n + col].value().abs().total_cmp(&m[s * n + col].value().abs()))?;
        if m[piv * n + col].value().abs() <= 1e-14 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
                inv.swap(piv * n + k, col * n + k);
            }
        }
        let r = m[col * n + col].recip();
        for k in 0..n {
            m[col * n + k] = m[col * n + k].mul(&r);
            inv[col * n + k] = inv[col * n + k].mul(&r);
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row * n + col].clone();
            if f.max_abs_coefficient() == 0.0 {
                continue;
            }
            for k in 0..n {
                let t = f.mul(&m[col * n + k]);
                m[row * n + k] = &m[row * n + k] - &t;
                let t = f.mul(&inv[col * n + k]);
                inv[row * n + k] = &inv[row * n + k] - &t;
            }
        }
    }
    Some(inv)
}

/// Cholesky test for positive definiteness of a symmetric matrix.
pub fn is_positive_definite(a: &[f64], n: usize) -> bool {
    min_cholesky_pivot(a, n) > 0.0
}

/// Smallest squared pivot of a Cholesky factorization, or the first
/// non-positive one where the factorization breaks down.
pub fn min_cholesky_pivot(a: &[f64], n: usize) -> f64 {
    let mut l = vec![0.0; n * n];
    let mut least = f64::INFINITY;
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return if s.is_nan() { f64::NEG_INFINITY } else { s };
                }
                least = least.min(s);
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    least
}
