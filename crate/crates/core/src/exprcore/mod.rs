//! Expression language and exact differentiation.
//!
//! Every scalar field in the system is ultimately an [`Expr`] over chart
//! coordinates `x1..xN`, evaluated as a [`Jet`] so that partial derivatives
//! up to [`MAX_ORDER`] are exact. Finite differences ([`fd_partial`]) exist
//! only as an independent check.

mod ast;
mod jet;
mod parse;

use std::fmt;

pub use ast::{Func, Node};
pub use jet::{sum as jet_sum, Jet, JetLayout};

use crate::error::{EvalError, ParseError};

/// Highest derivative order an expression evaluation will produce.
pub const MAX_ORDER: usize = 3;

/// A parsed expression bound to a chart dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    root: Node,
    dim: usize,
}

impl Expr {
    pub fn parse(source: &str, dim: usize) -> Result<Expr, ParseError> {
        Ok(Expr { root: parse::parse_node(source, dim)?, dim })
    }

    /// Wrap a hand-built tree. Panics if it references a coordinate outside `dim`.
    pub fn from_node(root: Node, dim: usize) -> Expr {
        if let Some(v) = root.max_var() {
            assert!(v < dim, "x{} referenced in a {dim}-dimensional chart", v + 1);
        }
        Expr { root, dim }
    }

    pub fn constant(value: f64, dim: usize) -> Expr {
        Expr { root: Node::Num(value), dim }
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Re-index coordinates into a chart of dimension `dim`.
    pub fn remap(&self, map: impl Fn(usize) -> usize, dim: usize) -> Expr {
        Expr::from_node(self.root.map_vars(&map), dim)
    }

    /// Value and all partial derivatives up to `order` at `p`.
    pub fn eval_jet(&self, p: &[f64], order: usize) -> Result<Jet, EvalError> {
        if p.len() != self.dim {
            return Err(EvalError::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        if order > MAX_ORDER {
            return Err(EvalError::OrderTooHigh { order, max: MAX_ORDER });
        }
        let layout = JetLayout::get(self.dim, order);
        eval_node(&self.root, p, &layout)
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64, EvalError> {
        self.eval_jet(p, 0).map(|j| j.value())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

fn eval_node(n: &Node, p: &[f64], layout: &std::sync::Arc<JetLayout>) -> Result<Jet, EvalError> {
    Ok(match n {
        Node::Num(v) => Jet::constant(layout, *v),
        Node::Var(i) => Jet::variable(layout, *i, p[*i]),
        Node::Neg(a) => -eval_node(a, p, layout)?,
        Node::Add(a, b) => eval_node(a, p, layout)? + eval_node(b, p, layout)?,
        Node::Sub(a, b) => eval_node(a, p, layout)? - eval_node(b, p, layout)?,
        Node::Mul(a, b) => eval_node(a, p, layout)? * eval_node(b, p, layout)?,
        Node::Div(a, b) => {
            let num = eval_node(a, p, layout)?;
            let den = eval_node(b, p, layout)?;
            if den.value() == 0.0 {
                return Err(EvalError::DivisionByZero { expr: n.to_string() });
            }
            num.div(&den)
        }
        Node::Pow(a, e) => {
            let base = eval_node(a, p, layout)?;
            if *e >= 0 {
                base.powi(*e as u32)
            } else {
                if base.value() == 0.0 {
                    return Err(EvalError::DivisionByZero { expr: n.to_string() });
                }
                base.powi(e.unsigned_abs()).recip()
            }
        }
        Node::Call(func, a) => {
            let arg = eval_node(a, p, layout)?;
            match func {
                Func::Sin => arg.sin(),
                Func::Cos => arg.cos(),
                Func::Exp => arg.exp(),
                Func::Sqrt => {
                    let v = arg.value();
                    if v < 0.0 || (v == 0.0 && layout.order() > 0) {
                        return Err(EvalError::SqrtDomain { expr: n.to_string(), value: v });
                    }
                    arg.sqrt()
                }
            }
        }
    })
}

/// Central difference `(f(p + h e_i) − f(p − h e_i)) / 2h` of any
/// pointwise function. Only used as an oracle.
pub fn central_difference<E>(f: impl Fn(&[f64]) -> Result<f64, E>, p: &[f64], index: usize, h: f64) -> Result<f64, E> {
    assert!(h > 0.0, "finite-difference step must be positive");
    let mut plus = p.to_vec();
    let mut minus = p.to_vec();
    plus[index] += h;
    minus[index] -= h;
    Ok((f(&plus)? - f(&minus)?) / (2.0 * h))
}

/// Finite-difference partial of an expression in coordinate `index` (0-based).
pub fn fd_partial(e: &Expr, p: &[f64], index: usize, h: f64) -> Result<f64, EvalError> {
    central_difference(|q| e.eval(q), p, index, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn parses_negative_literal_product() {
        let e = Expr::parse("-2*x2", 3).unwrap();
        assert_eq!(e.node(), &Node::Mul(Box::new(Node::Num(-2.0)), Box::new(Node::Var(1))));
    }

    #[test]
    fn incomplete_input_reports_offset() {
        let err = Expr::parse("x1 +", 3).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 4, .. }), "{err:?}");
    }

    #[test]
    fn coordinate_out_of_range() {
        let err = Expr::parse("x4", 3).unwrap_err();
        assert!(matches!(err, ParseError::CoordinateOutOfRange { index: 4, dim: 3, .. }));
        assert!(matches!(Expr::parse("x0", 3), Err(ParseError::CoordinateOutOfRange { .. })));
    }

    #[test]
    fn unknown_symbol_and_bad_tokens() {
        assert!(matches!(Expr::parse("y1", 3), Err(ParseError::UnknownSymbol { .. })));
        assert!(matches!(Expr::parse("tan(x1)", 3), Err(ParseError::UnknownSymbol { .. })));
        assert!(matches!(Expr::parse("x1 x2", 3), Err(ParseError::Syntax { offset: 3, .. })));
        assert!(matches!(Expr::parse("(x1", 3), Err(ParseError::Syntax { offset: 3, .. })));
        assert!(matches!(Expr::parse("   ", 3), Err(ParseError::Empty)));
        assert!(matches!(Expr::parse("x1^1.5", 3), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn documented_jet_examples() {
        let e = Expr::parse("x1^2", 3).unwrap();
        let j = e.eval_jet(&[3.0, 0.0, 0.0], 1).unwrap();
        assert_eq!(j.value(), 9.0);
        assert_eq!(j.partial(&[0]), 6.0);

        let e = Expr::parse("sin(x3)", 3).unwrap();
        let j = e.eval_jet(&[0.0, 0.0, 0.0], 2).unwrap();
        assert_eq!(j.value(), 0.0);
        assert_eq!(j.partial(&[2]), 1.0);
        assert_eq!(j.partial(&[2, 2]), 0.0);

        let e = Expr::parse("x1*x2", 3).unwrap();
        let j = e.eval_jet(&[3.0, 0.5, 0.0], 2).unwrap();
        assert_eq!(j.partial(&[0, 1]), 1.0);
    }

    #[test]
    fn fd_examples() {
        let e = Expr::parse("x1^2", 3).unwrap();
        assert_abs_diff_eq!(fd_partial(&e, &[3.0, 0.2, 0.1], 0, 1e-4).unwrap(), 6.0, epsilon = 1e-7);
        let e = Expr::parse("sin(x3)", 3).unwrap();
        assert_abs_diff_eq!(fd_partial(&e, &[0.0, 0.0, 0.0], 2, 1e-4).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn domain_errors_name_subexpression() {
        let e = Expr::parse("1/(x1 - 1)", 2).unwrap();
        match e.eval(&[1.0, 0.0]) {
            Err(EvalError::DivisionByZero { expr }) => assert_eq!(expr, "1/(x1 - 1)"),
            other => panic!("{other:?}"),
        }
        let e = Expr::parse("x2 + sqrt(x1)", 2).unwrap();
        assert!(matches!(e.eval(&[-1.0, 0.0]), Err(EvalError::SqrtDomain { .. })));
        assert!(e.eval_jet(&[0.0, 0.0], 0).is_ok());
        assert!(matches!(e.eval_jet(&[0.0, 0.0], 1), Err(EvalError::SqrtDomain { .. })));
        assert!(matches!(e.eval_jet(&[1.0, 0.0], 4), Err(EvalError::OrderTooHigh { .. })));
        assert!(matches!(e.eval(&[1.0]), Err(EvalError::DimensionMismatch { .. })));
    }

    #[test]
    fn printer_round_trips_tricky_shapes() {
        for src in [
            "-2^2",
            "-(x1^2)",
            "x1 - (x2 - x3)",
            "x1/(x2*x3)",
            "(x1 + x2)^-3",
            "--x1",
            "-sin(-x2)*exp(x3)/sqrt(1 + x1^2)",
            "1e-8*x1 + .5",
        ] {
            let a = Expr::parse(src, 3).unwrap();
            let b = Expr::parse(&a.to_string(), 3).unwrap();
            assert_eq!(a, b, "{src} -> {a}");
        }
    }

    #[test]
    fn order_zero_matches_plain_evaluation() {
        let e = Expr::parse("exp(x1)*cos(x2) - x3^3/(2 + x1^2)", 3).unwrap();
        let p = [0.3, -0.7, 1.1];
        let direct = 0.3f64.exp() * (-0.7f64).cos() - 1.1f64.powi(3) / (2.0 + 0.09);
        assert_abs_diff_eq!(e.eval(&p).unwrap(), direct, epsilon = 1e-14);
        assert_abs_diff_eq!(e.eval_jet(&p, 3).unwrap().value(), direct, epsilon = 1e-14);
    }

    fn arb_node(depth: u32) -> BoxedStrategy<Node> {
        let leaf = prop_oneof![
            (-3.0f64..3.0).prop_map(|v| Node::Num((v * 8.0).round() / 8.0)),
            (0usize..3).prop_map(Node::Var),
        ];
        leaf.prop_recursive(depth, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), -2i32..4).prop_map(|(a, e)| Node::Pow(Box::new(a), e)),
                inner.clone().prop_map(|a| Node::Call(Func::Sin, Box::new(a))),
                inner.prop_map(|a| Node::Call(Func::Exp, Box::new(a))),
            ]
        })
        .boxed()
    }

    proptest! {
        #[test]
        fn print_parse_is_idempotent(node in arb_node(4)) {
            let once = Expr::parse(&Expr::from_node(node, 3).to_string(), 3).unwrap();
            let twice = Expr::parse(&once.to_string(), 3).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn chain_rule_agrees_with_finite_differences(
            node in arb_node(3),
            p in proptest::array::uniform3(-1.0f64..1.0),
        ) {
            let e = Expr::from_node(node, 3);
            let Ok(jet) = e.eval_jet(&p, 1) else { return Ok(()); };
            for i in 0..3 {
                let Ok(fd) = fd_partial(&e, &p, i, 1e-5) else { return Ok(()); };
                let exact = jet.partial(&[i]);
                // skip poles and huge magnitudes where differences are ill-conditioned
                prop_assume!(exact.abs() < 1e3 && jet.value().abs() < 1e3);
                prop_assert!((fd - exact).abs() <= 1e-4 * (1.0 + exact.abs()), "i={} fd={} jet={} e={}", i, fd, exact, e);
            }
        }
    }
}
