//! The guide's chapters as doc comments, so `cargo test` runs their code.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/topologies.md")]
pub mod topologies {}
#[doc = include_str!("../../../book/src/distance.md")]
pub mod distance {}
#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
