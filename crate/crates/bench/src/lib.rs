//! Criterion benchmarks for tailcone; see `benches/`.
