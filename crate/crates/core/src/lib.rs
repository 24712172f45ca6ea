//! Interior geometry of almost contact metric structures in adapted coordinates.

pub mod acms;
pub mod classify;
pub mod connections;
pub mod error;
pub mod exprcore;
pub mod field;
pub mod fixtures;
pub mod frames;
pub mod lift;
pub mod linalg;
pub mod sampling;

pub use acms::{validate_structure, AlmostContactStructure, ValidationReport};
pub use classify::{CheckRecord, ClassificationReport, Verdict};
pub use error::{Error, Result};
pub use exprcore::Expr;
pub use field::{AdmissibleTensorField, Point, ScalarField};
pub use frames::AdaptedChart;
pub use lift::LiftedSpace;
pub use sampling::{Residual, SampleSpec};
