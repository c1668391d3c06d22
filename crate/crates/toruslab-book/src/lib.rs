//! The guide under `book/` is the narrative documentation; this crate
//! re-exposes each chapter as a rustdoc page so `cargo test --doc` runs
//! every code block in the book.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/conventions.md")]
pub mod conventions {}
#[doc = include_str!("../../../book/src/spectral.md")]
pub mod spectral {}
#[doc = include_str!("../../../book/src/regions.md")]
pub mod regions {}
#[doc = include_str!("../../../book/src/mass-operator.md")]
pub mod mass_operator {}
#[doc = include_str!("../../../book/src/observability.md")]
pub mod observability {}
#[doc = include_str!("../../../book/src/linear-control.md")]
pub mod linear_control {}
#[doc = include_str!("../../../book/src/kdv-control.md")]
pub mod kdv_control {}
#[doc = include_str!("../../../book/src/damping.md")]
pub mod damping {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
