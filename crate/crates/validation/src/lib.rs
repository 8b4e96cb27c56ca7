//! Acceptance suite only; run with `cargo test -p loglap-validation`.
