//! Criterion benchmarks for `fmds-core`; see `benches/fmds.rs`.
