//! Criterion benchmarks for hrv-core; see `benches/hrv.rs`.
