use std::fmt;

/// Elementary functions accepted by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Expression tree node. Coordinates are 0-based: `Var(0)` prints as `x1`.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Box<Node>),
}

// Binding strength used by the printer: sums < products < powers < atoms.
fn level(n: &Node) -> u8 {
    match n {
        Node::Add(..) | Node::Sub(..) => 0,
        Node::Mul(..) | Node::Div(..) => 1,
        Node::Pow(..) => 2,
        _ => 3,
    }
}

struct Wrap<'a>(&'a Node, bool);

impl fmt::Display for Wrap<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => write!(f, "{v}"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            // unary minus takes an atom; a negative literal is an atom of its own
            Node::Neg(a) => write!(f, "-{}", Wrap(a, level(a) < 3)),
            Node::Add(a, b) => write!(f, "{} + {}", a, Wrap(b, level(b) < 1)),
            Node::Sub(a, b) => write!(f, "{} - {}", a, Wrap(b, level(b) < 1)),
            Node::Mul(a, b) => write!(f, "{}*{}", Wrap(a, level(a) < 1), Wrap(b, level(b) < 2)),
            Node::Div(a, b) => write!(f, "{}/{}", Wrap(a, level(a) < 1), Wrap(b, level(b) < 2)),
            Node::Pow(a, e) => write!(f, "{}^{}", Wrap(a, level(a) < 3), e),
            Node::Call(func, a) => write!(f, "{}({})", func.name(), a),
        }
    }
}

impl Node {
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Node::Num(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.max_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    pub fn map_vars(&self, f: &impl Fn(usize) -> usize) -> Node {
        let bx = |n: &Node| Box::new(n.map_vars(f));
        match self {
            Node::Num(v) => Node::Num(*v),
            Node::Var(i) => Node::Var(f(*i)),
            Node::Neg(a) => Node::Neg(bx(a)),
            Node::Add(a, b) => Node::Add(bx(a), bx(b)),
            Node::Sub(a, b) => Node::Sub(bx(a), bx(b)),
            Node::Mul(a, b) => Node::Mul(bx(a), bx(b)),
            Node::Div(a, b) => Node::Div(bx(a), bx(b)),
            Node::Pow(a, e) => Node::Pow(bx(a), *e),
            Node::Call(func, a) => Node::Call(*func, bx(a)),
        }
    }
}
