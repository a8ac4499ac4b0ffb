//! mdbook cannot run listings that depend on workspace crates, so every
//! chapter is pulled in here and checked by `cargo test --doc`. One module
//! per chapter keeps failures traceable to their file.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/symbols.md")]
pub mod symbols {}
#[doc = include_str!("src/hardy.md")]
pub mod hardy {}
#[doc = include_str!("src/flow.md")]
pub mod flow {}
#[doc = include_str!("src/funcalc.md")]
pub mod funcalc {}
#[doc = include_str!("src/determinant.md")]
pub mod determinant {}
#[doc = include_str!("src/audit.md")]
pub mod audit {}
#[doc = include_str!("src/cli.md")]
pub mod cli {}
