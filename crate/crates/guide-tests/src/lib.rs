//! Compiles and runs every code block in the guide as a doc-test, so the
//! prose in book/ can't drift from the library it describes. One item per
//! chapter; the item itself carries no code.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}

#[doc = include_str!("../../../book/src/embedding.md")]
pub mod embedding {}

#[doc = include_str!("../../../book/src/residuals.md")]
pub mod residuals {}

#[doc = include_str!("../../../book/src/clustering.md")]
pub mod clustering {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/determinism.md")]
pub mod determinism {}
