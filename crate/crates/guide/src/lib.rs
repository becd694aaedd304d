//! The book's chapters, compiled as modules so that `cargo test` runs every
//! code listing in them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/fock-engine.md")]
pub mod fock_engine {}
#[doc = include_str!("../../../book/src/spectral-overlap.md")]
pub mod spectral_overlap {}
#[doc = include_str!("../../../book/src/coincidence-model.md")]
pub mod coincidence_model {}
#[doc = include_str!("../../../book/src/brightness.md")]
pub mod brightness {}
#[doc = include_str!("../../../book/src/predictions.md")]
pub mod predictions {}
#[doc = include_str!("../../../book/src/validation.md")]
pub mod validation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
