//! Criterion benchmarks for `cbi-core`; see `benches/numerics.rs`.
