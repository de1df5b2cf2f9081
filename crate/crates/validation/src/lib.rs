//! Holds the acceptance suite for `hoqmc`; see `tests/acceptance.rs`.
//!
//! Kept in its own package so `cargo test --workspace` runs it after every
//! other test target.
