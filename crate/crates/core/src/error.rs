use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at offset {offset}: expected {}", expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<&'static str> },
    #[error("unknown symbol `{symbol}` at offset {offset}")]
    UnknownSymbol { offset: usize, symbol: String },
    #[error("coordinate index out of range at offset {offset}: x{index} with chart dimension {dim}")]
    CoordinateOutOfRange { offset: usize, index: usize, dim: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Empty => 0,
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownSymbol { offset, .. }
            | ParseError::CoordinateOutOfRange { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in `{expr}`")]
    DivisionByZero { expr: String },
    #[error("sqrt domain error in `{expr}` (argument {value})")]
    SqrtDomain { expr: String, value: f64 },
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("derivative order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("chart dimension must be odd and at least 3, got {0}")]
    BadDimension(usize),
    #[error("standing assumption violated: d_n Gamma^n_{index} = {residual:e} at {point:?}")]
    ChartAssumption { index: usize, point: Vec<f64>, residual: f64 },
    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid sample specification: {0}")]
    Sample(String),
    #[error("invalid structure: {0}")]
    Structure(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("at point {point:?}: {source}")]
    AtPoint { point: Vec<f64>, source: Box<Error> },
}

impl Error {
    pub fn at(self, point: &[f64]) -> Error {
        match self {
            e @ Error::AtPoint { .. } => e,
            e => Error::AtPoint { point: point.to_vec(), source: Box::new(e) },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
