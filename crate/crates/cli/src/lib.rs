//! Command-line front end for flexible skyline queries: CSV relations,
//! TOML query documents, JSON results, synthetic data and benchmarks.

pub mod bench;
pub mod cli;
pub mod document;
pub mod error;
pub mod query;
pub mod relation_io;

pub use bench::{bench, BenchConfig, BenchReport};
pub use cli::run_command;
pub use document::{oracle_check, result_document, ResultDocument};
pub use error::{CliError, CliResult};
pub use query::{parse_query, parse_query_str, EngineOptions, QuerySpec};
pub use relation_io::{gen_dataset, load_relation, read_relation, write_relation, RateRange};
