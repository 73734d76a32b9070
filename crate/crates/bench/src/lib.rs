//! Criterion benchmarks for the receptive-jitai engine live under `benches/`.
