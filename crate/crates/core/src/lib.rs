pub mod analysis;
pub mod cli;
pub mod error;
pub mod exchange;
pub mod linalg;
pub mod oracle;
pub mod sector;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sector.md")]
    mod sector {}
    #[doc = include_str!("../../../book/src/unitary_eig.md")]
    mod unitary_eig {}
    #[doc = include_str!("../../../book/src/exchange.md")]
    mod exchange {}
    #[doc = include_str!("../../../book/src/swap_probability.md")]
    mod swap_probability {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
