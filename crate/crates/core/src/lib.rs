//! Extensions, 2-cocycles and low-degree cohomology for finite modules over
//! `Z/m` expanded by multilinear operations.

pub mod algebra;
pub mod cli;
pub mod cocycle;
pub mod cohomology;
pub mod derlie;
pub mod error;
pub mod expander;
pub mod hs;
pub mod modcore;
pub mod termlang;

pub use error::{Error, Result};
