#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod activation;
pub mod classification;
pub mod dual;
pub mod error;
pub mod geometry;
pub mod matroid;
pub mod rational;
pub mod relu;
pub mod simplex;
pub mod tropical;

pub use error::{Error, Result};
pub use rational::{Rational, RationalVector, Sign};
pub use tropical::{Evaluation, Signomial, Term, TropicalRational};
