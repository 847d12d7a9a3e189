//! Criterion benchmarks for simcheck live under `benches/`.
