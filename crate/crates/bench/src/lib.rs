//! Criterion benchmarks for the mpgmres kernels; see `benches/`.
