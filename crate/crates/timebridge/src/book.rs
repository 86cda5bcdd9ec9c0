//! The narrative guide's code blocks, compiled as doctests.
//!
//! Each chapter of `book/` is included as the documentation of an empty
//! module, so `cargo test --doc` runs every runnable snippet and the book
//! cannot drift from the library. The modules only exist while rustdoc
//! collects doctests.

#![allow(unused)]

#[doc = include_str!("../../../book/src/introduction.md")]
#[cfg(doctest)]
pub mod introduction {}

#[doc = include_str!("../../../book/src/quickstart.md")]
#[cfg(doctest)]
pub mod quickstart {}

#[doc = include_str!("../../../book/src/schedules.md")]
#[cfg(doctest)]
pub mod schedules {}

#[doc = include_str!("../../../book/src/priors.md")]
#[cfg(doctest)]
pub mod priors {}

#[doc = include_str!("../../../book/src/denoiser.md")]
#[cfg(doctest)]
pub mod denoiser {}

#[doc = include_str!("../../../book/src/training.md")]
#[cfg(doctest)]
pub mod training {}

#[doc = include_str!("../../../book/src/sampling.md")]
#[cfg(doctest)]
pub mod sampling {}

#[doc = include_str!("../../../book/src/evaluation.md")]
#[cfg(doctest)]
pub mod evaluation {}

#[doc = include_str!("../../../book/src/file-formats.md")]
#[cfg(doctest)]
pub mod file_formats {}
