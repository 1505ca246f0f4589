//! Criterion benchmarks for the qcldpc workspace; see `benches/`.
