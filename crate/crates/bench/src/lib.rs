//! Criterion benchmarks for `spherekey-core`. See `benches/`.
