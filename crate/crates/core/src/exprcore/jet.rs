//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A jet of order `k` in `d` variables stores the Taylor coefficients
//! `c_α` of every monomial `h^α` with `|α| ≤ k` around a base point. The
//! partial derivative `∂^α f` is `α! · c_α`. Arithmetic on jets is exact up
//! to floating point rounding, so composing jets gives exact derivatives of
//! composite expressions.
//!
//! Monomials are ordered by total degree, then lexicographically. The
//! monomials of an order `k − 1` layout are therefore a prefix of the order
//! `k` layout, which makes truncation free.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// Monomial bookkeeping shared by every jet with the same `(dim, order)`.
pub struct JetLayout {
    dim: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)`: coefficient `i` times coefficient `j` lands on `k`.
    mul: Vec<(u32, u32, u32)>,
    /// `deriv[v][t] = (source, factor)` for the derivative in variable `v`,
    /// producing the coefficient `t` of the order `k − 1` jet.
    deriv: Vec<Vec<(u32, f64)>>,
    factorial: Vec<f64>,
    lower: Option<Arc<JetLayout>>,
}

impl fmt::Debug for JetLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetLayout")
            .field("dim", &self.dim)
            .field("order", &self.order)
            .field("len", &self.exps.len())
            .finish()
    }
}

fn monomials(dim: usize, order: usize) -> Vec<Vec<u8>> {
    fn fill(dim: usize, var: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if var == dim {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        // descending exponent on the leading variable gives lex order
        for e in (0..=left).rev() {
            cur[var] = e as u8;
            fill(dim, var + 1, left - e, cur, out);
        }
        cur[var] = 0;
    }
    let mut out = Vec::new();
    for deg in 0..=order {
        let mut cur = vec![0u8; dim];
        fill(dim, 0, deg, &mut cur, &mut out);
    }
    out
}

impl JetLayout {
    fn build(dim: usize, order: usize, lower: Option<Arc<JetLayout>>) -> JetLayout {
        let exps = monomials(dim, order);
        let index: HashMap<Vec<u8>, usize> = exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let degree = |e: &[u8]| e.iter().map(|&x| x as usize).sum::<usize>();
        let mut mul = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            let da = degree(a);
            for (j, b) in exps.iter().enumerate() {
                if da + degree(b) > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                mul.push((i as u32, j as u32, index[&sum] as u32));
            }
        }
        let mut deriv = Vec::with_capacity(dim);
        if let Some(low) = &lower {
            for v in 0..dim {
                let mut table = Vec::with_capacity(low.exps.len());
                for e in &low.exps {
                    let mut src = e.clone();
                    src[v] += 1;
                    table.push((index[&src] as u32, src[v] as f64));
                }
                deriv.push(table);
            }
        }
        let factorial =
            exps.iter().map(|e| e.iter().map(|&x| (1..=x as u64).product::<u64>() as f64).product()).collect();
        JetLayout { dim, order, exps, index, mul, deriv, factorial, lower }
    }

    /// Shared layout for `dim` variables up to `order`.
    pub fn get(dim: usize, order: usize) -> Arc<JetLayout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(l) = cache.lock().unwrap().get(&(dim, order)) {
            return l.clone();
        }
        let lower = if order == 0 { None } else { Some(JetLayout::get(dim, order - 1)) };
        let built = Arc::new(JetLayout::build(dim, order, lower));
        cache.lock().unwrap().entry((dim, order)).or_insert(built).clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    fn truncated(self: &Arc<Self>, order: usize) -> Arc<JetLayout> {
        let mut l = self.clone();
        while l.order > order {
            l = l.lower.clone().expect("layout chain");
        }
        l
    }
}

/// Value and all partial derivatives up to a fixed order at one point.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<JetLayout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.layout.dim)
            .field("order", &self.layout.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn constant(layout: &Arc<JetLayout>, value: f64) -> Jet {
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        Jet { layout: layout.clone(), coeffs }
    }

    pub fn zero(layout: &Arc<JetLayout>) -> Jet {
        Jet::constant(layout, 0.0)
    }

    /// The coordinate function `x_var` at base value `value`.
    pub fn variable(layout: &Arc<JetLayout>, var: usize, value: f64) -> Jet {
        let mut j = Jet::constant(layout, value);
        if layout.order > 0 {
            let mut e = vec![0u8; layout.dim];
            e[var] = 1;
            j.coeffs[layout.index[&e]] = 1.0;
        }
        j
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw Taylor coefficients in layout order.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Mixed partial derivative over the multiset of variable indices
    /// `vars` (0-based). Order of `vars` is irrelevant. Panics if
    /// `vars.len()` exceeds the jet order.
    pub fn partial(&self, vars: &[usize]) -> f64 {
        assert!(vars.len() <= self.order(), "partial of order {} from a jet of order {}", vars.len(), self.order());
        let mut e = vec![0u8; self.dim()];
        for &v in vars {
            e[v] += 1;
        }
        let i = self.layout.index[&e];
        self.coeffs[i] * self.layout.factorial[i]
    }

    /// Exact partial derivative in one variable; the result has order `k − 1`.
    pub fn derivative(&self, var: usize) -> Jet {
        let low = self.layout.lower.clone().expect("cannot differentiate an order-0 jet");
        let table = &self.layout.deriv[var];
        let coeffs = table.iter().map(|&(src, f)| self.coeffs[src as usize] * f).collect();
        Jet { layout: low, coeffs }
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let layout = self.layout.truncated(order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Jet { layout, coeffs }
    }

    /// Re-express a jet in a larger variable space: variable `v` of `self`
    /// becomes variable `map[v]` of `target`. Monomials above the target
    /// order are dropped.
    pub fn embed(&self, target: &Arc<JetLayout>, map: &[usize]) -> Jet {
        let mut out = Jet::zero(target);
        let src_layout = self.layout.truncated(target.order);
        for (i, e) in src_layout.exps.iter().enumerate() {
            let c = self.coeffs[i];
            if c == 0.0 {
                continue;
            }
            let mut t = vec![0u8; target.dim];
            for (v, &x) in e.iter().enumerate() {
                t[map[v]] += x;
            }
            out.coeffs[target.index[&t]] += c;
        }
        out
    }

    fn common(&self, other: &Jet) -> Arc<JetLayout> {
        assert_eq!(self.dim(), other.dim(), "jet dimension mismatch");
        if self.order() <= other.order() {
            self.layout.clone()
        } else {
            other.layout.clone()
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { layout: self.layout.clone(), coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_const(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.coeffs[0] += s;
        j
    }

    /// `self + s * other`, the workhorse of tensor contractions.
    pub fn axpy(&self, s: f64, other: &Jet) -> Jet {
        let layout = self.common(other);
        let coeffs = (0..layout.len()).map(|i| self.coeffs[i] + s * other.coeffs[i]).collect();
        Jet { layout, coeffs }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let layout = self.common(other);
        let mut coeffs = vec![0.0; layout.len()];
        for &(i, j, k) in &layout.mul {
            coeffs[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Jet { layout, coeffs }
    }

    /// `f(self)` from the derivatives `f^(j)(value)` for `j = 0..=order`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let k = self.order();
        debug_assert!(derivs.len() > k);
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut fact = 1.0;
        let mut taylor = Vec::with_capacity(k + 1);
        for (j, d) in derivs.iter().take(k + 1).enumerate() {
            if j > 0 {
                fact *= j as f64;
            }
            taylor.push(d / fact);
        }
        let mut r = Jet::constant(&self.layout, taylor[k]);
        for c in taylor[..k].iter().rev() {
            r = r.mul(&h).add_const(*c);
        }
        r
    }

    /// Multiplicative inverse; caller guarantees a nonzero value.
    pub fn recip(&self) -> Jet {
        let v = self.value();
        let derivs: Vec<f64> = (0..=self.order())
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let fact: f64 = (1..=j).map(|x| x as f64).product();
                sign * fact * v.powi(-(j as i32) - 1)
            })
            .collect();
        self.compose(&derivs)
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self.mul(&other.recip())
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut result = Jet::constant(&self.layout, 1.0);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        self.compose(&(0..=self.order()).map(|j| cycle[j % 4]).collect::<Vec<_>>())
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        self.compose(&(0..=self.order()).map(|j| cycle[j % 4]).collect::<Vec<_>>())
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() + 1])
    }

    /// Square root; caller guarantees a positive value (or zero at order 0).
    pub fn sqrt(&self) -> Jet {
        let v = self.value();
        let mut derivs = Vec::with_capacity(self.order() + 1);
        let mut coef = 1.0;
        for j in 0..=self.order() {
            derivs.push(coef * v.powf(0.5 - j as f64));
            coef *= 0.5 - j as f64;
        }
        self.compose(&derivs)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

macro_rules! jet_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl std::ops::$tr<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(self, rhs)
            }
        }
        impl std::ops::$tr<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(&self, rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a: &Jet, b: &Jet| a.axpy(1.0, b));
jet_binop!(Sub, sub, |a: &Jet, b: &Jet| a.axpy(-1.0, b));
jet_binop!(Mul, mul, |a: &Jet, b: &Jet| Jet::mul(a, b));

impl std::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl std::ops::Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Sum of jets; `None` for an empty iterator.
pub fn sum<'a, I: IntoIterator<Item = &'a Jet>>(items: I) -> Option<Jet> {
    let mut it = items.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, j| acc.axpy(1.0, j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn vars(dim: usize, order: usize, p: &[f64]) -> Vec<Jet> {
        let l = JetLayout::get(dim, order);
        (0..dim).map(|i| Jet::variable(&l, i, p[i])).collect()
    }

    #[test]
    fn layout_sizes_are_binomial() {
        assert_eq!(JetLayout::get(3, 2).len(), 10);
        assert_eq!(JetLayout::get(9, 3).len(), 220);
        assert_eq!(JetLayout::get(1, 3).len(), 4);
    }

    #[test]
    fn lower_layout_is_prefix() {
        let hi = JetLayout::get(4, 3);
        let lo = JetLayout::get(4, 2);
        assert_eq!(&hi.exps[..lo.len()], &lo.exps[..]);
    }

    #[test]
    fn product_rule_and_mixed_partials() {
        let x = vars(2, 3, &[1.5, -0.5]);
        // f = x^2 y
        let f = x[0].mul(&x[0]).mul(&x[1]);
        assert_relative_eq!(f.value(), 1.5 * 1.5 * -0.5);
        assert_relative_eq!(f.partial(&[0]), 2.0 * 1.5 * -0.5);
        assert_relative_eq!(f.partial(&[1]), 2.25);
        assert_relative_eq!(f.partial(&[0, 1]), 3.0);
        assert_relative_eq!(f.partial(&[1, 0]), 3.0);
        assert_relative_eq!(f.partial(&[0, 0, 1]), 2.0);
        assert_relative_eq!(f.partial(&[1, 1]), 0.0);
    }

    #[test]
    fn derivative_lowers_order() {
        let x = vars(2, 3, &[0.3, 0.7]);
        let f = x[0].sin().mul(&x[1].exp());
        let d = f.derivative(0);
        assert_eq!(d.order(), 2);
        assert_relative_eq!(d.value(), f.partial(&[0]), epsilon = 1e-15);
        assert_relative_eq!(d.partial(&[1, 0]), f.partial(&[0, 0, 1]), epsilon = 1e-14);
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let x = vars(1, 3, &[0.4]);
        let s = x[0].sin();
        assert_relative_eq!(s.partial(&[0, 0, 0]), -(0.4f64).cos(), epsilon = 1e-14);
        let r = x[0].sqrt();
        assert_relative_eq!(r.partial(&[0, 0]), -0.25 * 0.4f64.powf(-1.5), epsilon = 1e-12);
        let inv = x[0].recip();
        assert_relative_eq!(inv.partial(&[0, 0, 0]), -6.0 * 0.4f64.powi(-4), epsilon = 1e-9);
        let p = x[0].powi(5);
        assert_relative_eq!(p.partial(&[0, 0]), 20.0 * 0.4f64.powi(3), epsilon = 1e-13);
    }

    #[test]
    fn embed_moves_variables() {
        let x = vars(2, 2, &[0.5, 2.0]);
        let f = x[0].mul(&x[1]);
        let target = JetLayout::get(4, 2);
        let g = f.embed(&target, &[1, 3]);
        assert_relative_eq!(g.value(), 1.0);
        assert_relative_eq!(g.partial(&[1]), 2.0);
        assert_relative_eq!(g.partial(&[3]), 0.5);
        assert_relative_eq!(g.partial(&[1, 3]), 1.0);
        assert_relative_eq!(g.partial(&[0]), 0.0);
    }
}
