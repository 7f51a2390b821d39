//! The user guide, compiled into the crate so its examples are tested.
//!
//! Each module below embeds one chapter of the mdbook guide from
//! `book/src/` verbatim as its documentation. `cargo test --doc`
//! therefore compiles and runs every Rust snippet the guide shows,
//! keeping the book and the library in lockstep; rendered API docs
//! carry the full guide alongside the reference.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/lagrangians.md")]
pub mod lagrangians {}

#[doc = include_str!("../../../book/src/minimal-action.md")]
pub mod minimal_action {}

#[doc = include_str!("../../../book/src/hopf-lax.md")]
pub mod hopf_lax {}

#[doc = include_str!("../../../book/src/traffic.md")]
pub mod traffic {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
