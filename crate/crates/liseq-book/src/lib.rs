//! The guide in `book/` as doctests: each chapter becomes a module so
//! `cargo test` runs its snippets against the current library, and a failure
//! names the chapter it came from.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/language.md")]
pub mod language {}
#[doc = include_str!("../../../book/src/rounds.md")]
pub mod rounds {}
#[doc = include_str!("../../../book/src/interfaces.md")]
pub mod interfaces {}
#[doc = include_str!("../../../book/src/lazy.md")]
pub mod lazy {}
#[doc = include_str!("../../../book/src/eager.md")]
pub mod eager {}
#[doc = include_str!("../../../book/src/pushdown.md")]
pub mod pushdown {}
#[doc = include_str!("../../../book/src/compare.md")]
pub mod compare {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
