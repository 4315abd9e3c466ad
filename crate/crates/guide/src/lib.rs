//! The book's chapters, compiled as doc comments so every listing runs under
//! `cargo test`. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/states.md")]
pub mod states {}
#[doc = include_str!("../../../book/src/measurement.md")]
pub mod measurement {}
#[doc = include_str!("../../../book/src/eraser.md")]
pub mod eraser {}
#[doc = include_str!("../../../book/src/chain.md")]
pub mod chain {}
#[doc = include_str!("../../../book/src/decoherence.md")]
pub mod decoherence {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
