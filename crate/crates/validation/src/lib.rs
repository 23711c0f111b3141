//! Reproduction checks live in `tests/acceptance.rs`; run them with
//! `cargo test -p pfp-validation --test acceptance`.
