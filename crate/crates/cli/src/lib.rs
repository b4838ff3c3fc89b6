//! Problem files, reports and benchmark generators for the `quantrange`
//! command.

pub mod bench;
pub mod generate;
pub mod problem_file;
pub mod report;
