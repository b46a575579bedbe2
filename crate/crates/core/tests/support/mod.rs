//! Oracles and experiments shared by several test binaries.
#![allow(dead_code)]

pub mod feedback;
pub mod mutation;
pub mod oracle;
