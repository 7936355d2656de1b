//! Criterion benchmarks for `coda-core`; see `benches/`.
