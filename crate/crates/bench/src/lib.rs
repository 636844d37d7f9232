//! Benchmark-only crate; see benches/boxes.rs.
