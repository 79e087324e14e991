//! Library surface of the `idqc` command-line tool: scenario parsing,
//! result documents, and the four workflows.

pub mod report;
pub mod run;
pub mod scenario;
