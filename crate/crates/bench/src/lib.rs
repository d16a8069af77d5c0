//! Criterion benchmarks for assembly, linear solves and meshing; see `benches/`.
