//! Instance generators shared by the benchmarks and the solver test suites.

pub mod instances;
