//! Shared fixtures for the solver benchmarks live in `benches/`.
