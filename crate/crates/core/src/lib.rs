//! Generation and evaluation of unit tests for OpenMP/MPI C++ projects.

pub mod corpus;
pub mod coverage;
pub mod cxx;
pub mod diagnostics;
pub mod fixer;
pub mod fixtures;
pub mod generator;
pub mod harness;
pub mod ledger;
pub mod parallelism;
pub mod pipeline;
pub mod process;
pub mod report;
pub mod smells;
