//! Criterion benchmarks for `reff-core`; the targets live in `benches/`.
