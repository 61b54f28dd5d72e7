//! Exact coefficient field and precision-tracked Laurent-series linear algebra.

pub mod cyclotomic;
pub mod linalg;
pub mod matrix;
pub mod newton;
pub mod poly;
pub mod scalar;
pub mod series;
pub mod smith;

pub use linalg::{RankMethod, ScalarMatrix};
pub use matrix::LaurentMatrix;
pub use newton::newton_polygon;
pub use scalar::{Field, FieldRef, Scalar};
pub use series::{TruncatedLaurent, DEFAULT_PRECISION};
pub use smith::{smith_normal_form, SmithForm};

/// Arithmetic operation selector for [`series_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Mul,
    Invert,
}

/// Binary series arithmetic; `b` is ignored for inversion.
pub fn series_arith(
    a: &TruncatedLaurent,
    b: &TruncatedLaurent,
    op: SeriesOp,
) -> crate::error::Result<TruncatedLaurent> {
    match op {
        SeriesOp::Add => Ok(a.add(b)),
        SeriesOp::Mul => Ok(a.mul(b)),
        SeriesOp::Invert => a.inv(),
    }
}
