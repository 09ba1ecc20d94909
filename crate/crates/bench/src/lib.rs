//! Criterion benchmarks for the hot paths of `qsdyn-core`; see `benches/`.
