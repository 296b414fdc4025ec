//! Tensor-network toolkit for long-range lattice Hamiltonians.
//!
//! The core objects are matrix product operators (MPOs) assembled from
//! finite-state rule tables, matrix product states, and their 2D
//! counterparts (PEPO/PEPS). On top of those sit variational compression,
//! ground-state search, Taylor-series time evolution with time doubling,
//! operator Schmidt-rank checks, and approximate 2D contraction.

pub mod chain;
pub mod cli;
pub mod compress;
pub mod error;
pub mod expfit;
pub mod groundstate;
pub mod hamiltonians;
pub mod io;
pub mod mpo;
pub mod mps;
pub mod optimality;
pub mod peps;
pub mod tensor;
pub mod timeevo;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;
