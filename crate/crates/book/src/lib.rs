//! Runs every Rust code block of the guide in `book/` as a doc test, so
//! `cargo test` keeps the book and the implementation in sync. mdbook
//! cannot run snippets against local crates on its own; including each
//! chapter as module documentation hands them to rustdoc instead, and a
//! failing snippet names the chapter module it came from.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/language.md")]
pub mod language {}

#[doc = include_str!("../../../book/src/expressions.md")]
pub mod expressions {}

#[doc = include_str!("../../../book/src/state-spaces.md")]
pub mod state_spaces {}

#[doc = include_str!("../../../book/src/minimisation.md")]
pub mod minimisation {}

#[doc = include_str!("../../../book/src/composition.md")]
pub mod composition {}

#[doc = include_str!("../../../book/src/cleaving.md")]
pub mod cleaving {}

#[doc = include_str!("../../../book/src/invariants.md")]
pub mod invariants {}

#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}
