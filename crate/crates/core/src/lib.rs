//! Exact construction, composition and nonlocality analysis of generalized
//! probabilistic theories.

pub mod bell;
pub mod compose;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod models;
pub mod scalar;
pub mod tablecore;
pub mod theory;

pub use scalar::Scalar;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tables.md")]
    mod tables {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/systems.md")]
    mod systems {}
    #[doc = include_str!("../../../book/src/composition.md")]
    mod composition {}
    #[doc = include_str!("../../../book/src/nonlocality.md")]
    mod nonlocality {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
