//! The guide's chapters, compiled so `cargo test --doc` runs their snippets.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/multisets.md")]
pub mod multisets {}
#[doc = include_str!("../../../book/src/cyclotomic.md")]
pub mod cyclotomic {}
#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}
#[doc = include_str!("../../../book/src/slv.md")]
pub mod slv {}
#[doc = include_str!("../../../book/src/sums.md")]
pub mod sums {}
#[doc = include_str!("../../../book/src/favard.md")]
pub mod favard {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
