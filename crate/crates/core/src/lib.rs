//! Embedding association tests for social and intersectional bias.
//!
//! The crate is `no_std` and only needs `alloc`. It holds the numerical
//! core (cosine similarity, association statistics, exact and sampled
//! permutation p-values, effect sizes), the construction of test
//! specifications from word lists and sentence templates, in-memory
//! embedding stores, and the pronoun/occupation co-occurrence counter.
//! File formats, parallel drivers and the command line live in the
//! `assocbias` crate.

#![no_std]
#![warn(clippy::std_instead_of_alloc)]
#![warn(clippy::std_instead_of_core)]

extern crate alloc;

pub mod assoc;
pub mod corpus;
pub mod embed;
mod error;
pub mod report;
pub mod testspec;
mod types;
mod vector;

pub use self::{error::*, types::*, vector::*};
