//! Doc-test anchor for the book.
//!
//! Each module below pulls a chapter of `book/src` in as documentation, so
//! every fenced Rust snippet in the book compiles and runs under
//! `cargo test`. Edit the chapters, not this file.

#[doc = include_str!("../../../README.md")]
mod _readme {}

#[doc = include_str!("../../../book/src/introduction.md")]
mod _introduction {}

#[doc = include_str!("../../../book/src/contacts.md")]
mod _contacts {}

#[doc = include_str!("../../../book/src/equivalence.md")]
mod _equivalence {}

#[doc = include_str!("../../../book/src/synthesis.md")]
mod _synthesis {}

#[doc = include_str!("../../../book/src/nullspaces.md")]
mod _nullspaces {}

#[doc = include_str!("../../../book/src/decomposition.md")]
mod _decomposition {}

#[doc = include_str!("../../../book/src/cli.md")]
mod _cli {}
