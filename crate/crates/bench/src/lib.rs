//! Criterion benchmarks for `hurwitz-core`; see `benches/engine.rs`.
