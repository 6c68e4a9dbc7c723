//! Exact arithmetic over small finite fields and truncated polynomial rings.

mod field;
mod series;

pub use field::{FqElement, FqField, MAX_EXT_DEGREE, MAX_FIELD_SIZE};
pub use series::{TruncatedSeries, UValuation};

pub(crate) use field::ElementDto;
pub(crate) use series::SeriesDto;
