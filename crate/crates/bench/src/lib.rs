//! Criterion benchmarks for the soccp kernels; run with `cargo bench -p soccp-bench`.
