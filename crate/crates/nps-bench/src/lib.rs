//! Criterion benchmarks for the sampler and sample-size machinery live in
//! `benches/`.
