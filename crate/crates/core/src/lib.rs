//! Exact harmonic analysis on finite groups with a covering family.
//!
//! A [`GroupModel`] is a finite cyclic group with positive point masses and
//! a nested family of symmetric neighbourhoods of 0 (p-adic balls in
//! `Z/p^L Z` or symmetric intervals in an integer window). On top of it the
//! crate computes maximal functions, Muckenhoupt and A∞ constants,
//! Calderón–Zygmund and Vitali selections, and certifies the quantitative
//! weighted inequalities built from them. Everything is enumerated
//! exhaustively; [`oracle`] holds independent brute-force references.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod constants;
pub mod decomp;
pub mod error;
pub mod experiment;
pub mod group;
pub mod maximal;
pub mod oracle;
pub mod verify;
pub mod weight;

pub use error::{Error, Result};
pub use group::{BaseSet, GroupModel, Index, MeasureSpec};
pub use weight::{GroupFunction, Weight};
