//! End-to-end acceptance checks for the `nonlocality` crate live in
//! `tests/acceptance.rs`; run them with `cargo test -p nonlocality-validation`.
