//! File formats, JSON reports, random corpus generation and the `pets`
//! command-line tool, built on the `pets-core` kernel.

pub mod app;
pub mod commands;
pub mod format;
pub mod fuzz;
pub mod report;
