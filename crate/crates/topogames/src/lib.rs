//! Nonlocal games won with topological and fracton stabilizer states.

pub mod codes;
pub mod complex;
pub mod dense;
pub mod error;
pub mod games;
pub mod gf2;
pub mod pauli;
pub mod random;
pub mod strategies;
pub mod tableau;
pub mod weyl;

pub use error::{Error, Result};

#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../book/src/intro.md")]
    pub mod intro {}
    #[doc = include_str!("../../../book/src/operators.md")]
    pub mod operators {}
    #[doc = include_str!("../../../book/src/stabilizer-groups.md")]
    pub mod stabilizer_groups {}
    #[doc = include_str!("../../../book/src/complexes-and-codes.md")]
    pub mod complexes_and_codes {}
    #[doc = include_str!("../../../book/src/strategies.md")]
    pub mod strategies {}
    #[doc = include_str!("../../../book/src/games.md")]
    pub mod games {}
    #[doc = include_str!("../../../book/src/dense-states.md")]
    pub mod dense_states {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
