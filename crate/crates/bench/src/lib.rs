//! Benchmarks for the `levydraw` routes; see `benches/`.
