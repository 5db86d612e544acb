//! Criterion benchmarks for roughctl; see `benches/kernels.rs`.
