//! Reference implementations and generators shared by the integration tests.
#![allow(dead_code)]

pub mod brute;
pub mod gen;
pub mod sequences;
pub mod soc;
