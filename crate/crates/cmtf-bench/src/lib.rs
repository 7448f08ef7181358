//! Benchmark harness for coupled matrix-tensor factorization: experiment
//! drivers, clustering utilities, and the file formats the CLI speaks.

pub mod cluster;
pub mod experiments;
