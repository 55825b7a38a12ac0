//! Criterion benchmarks for the `confbound` solvers; see `benches/`.
