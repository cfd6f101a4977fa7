//! Text formats and verification suites shared by the `bimetric` binary
//! and its integration tests.

pub mod text;
pub mod verify;
