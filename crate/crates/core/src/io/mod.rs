//! Model files and run reports.

mod format;
mod report;

pub use format::{parse_model, serialize_model, ParseError, ParseErrorKind};
pub use report::RunReport;
