//! Source-level mutation testing for Java projects.
//!
//! The pipeline is: [`source`] scans and parses production files and locates
//! mutation sites, [`operators`] turns sites into single-change mutants,
//! [`harness`] runs the project's own build against each mutant, and
//! [`analysis`] computes coverage, per-operator breakdowns and dynamic mutant
//! subsumption. [`report`] ties the stages together behind a run directory.

pub mod analysis;
pub mod harness;
pub mod operators;
pub mod report;
pub mod source;
