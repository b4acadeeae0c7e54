//! Text formats: models (`.nptam`), queries (`.npq`) and run traces (`.nprun`).

pub mod doc;
pub mod lexer;
pub mod parse;
pub mod query;
pub mod run;

pub use doc::ModelDocument;
pub use parse::parse_model;
pub use query::{parse_query, Operator, PwctlQuery, StateProperty};
pub use run::{parse_run, serialize_run};
