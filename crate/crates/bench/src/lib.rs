//! Benchmarks for the reversing procedures; see `benches/`.
