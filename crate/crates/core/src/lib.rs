//! Impact NPV and impact IRR valuation.
//!
//! Money is held in exact cents ([`money::MoneyAmount`]); discounting and
//! root finding work in `f64` dollars and results are re-quantized to cents.

pub mod cashflow;
pub mod cli;
pub mod classification;
pub mod evaluation;
pub mod impact;
pub mod ingest;
pub mod model;
pub mod report;
pub mod money;
pub mod solver;
pub mod valuation;
