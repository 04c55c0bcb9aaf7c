//! Every chapter of the guide becomes a module here so `cargo test --doc`
//! runs its code listings against the library.

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/binarization.md")]
pub mod binarization {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/rules.md")]
pub mod rules {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cells.md")]
pub mod cells {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/correction.md")]
pub mod correction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}
