//! Criterion benchmarks for the multiplier models and the simulator; see `benches/`.
