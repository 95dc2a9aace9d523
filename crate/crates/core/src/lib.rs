//! Exact computations with arcs and normal rational curves over finite fields.

pub mod cli;
pub mod equations;
pub mod exactla;
pub mod gf;
pub mod projgeom;
pub mod search;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    pub struct Intro;
    #[doc = include_str!("../../../book/src/fields.md")]
    pub struct Fields;
    #[doc = include_str!("../../../book/src/linear-algebra.md")]
    pub struct LinearAlgebra;
    #[doc = include_str!("../../../book/src/arcs.md")]
    pub struct Arcs;
    #[doc = include_str!("../../../book/src/equations.md")]
    pub struct Equations;
    #[doc = include_str!("../../../book/src/search.md")]
    pub struct Search;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
