//! Acceptance suite for `mrp-profiles`; the criteria live in `tests/acceptance.rs`.
