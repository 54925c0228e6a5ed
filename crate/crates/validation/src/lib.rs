//! Acceptance gate for `augustin-core`.
//!
//! Run with `cargo test -p augustin-validation --test acceptance`; every
//! criterion prints one `PASS` or `FAIL` line.
