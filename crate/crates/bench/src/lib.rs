//! Criterion benchmarks for the exhaustive kernels live in `benches/`.
