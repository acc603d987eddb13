//! Query documents shared by the benchmarks.

pub const FOUR_VAR_DOC: &str = include_str!("../../cli/tests/data/markov_four.ep");
pub const IDENTITY_DOC: &str = include_str!("../../cli/tests/data/identity_three.ep");
pub const DATA_PROCESSING_DOC: &str = include_str!("../../cli/tests/data/data_processing.ep");
