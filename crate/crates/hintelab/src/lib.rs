//! A miniature dependently-typed checker and elaborator whose unifier can be
//! extended with user-declared unification hints, plus a coercion mechanism
//! (including nonuniform, instance-directed coercions) built on top of them.

pub mod coerce;
pub mod elab;
pub mod error;
pub mod front;
pub mod hintdb;
pub mod kernel;
pub mod unify;

pub use error::{Error, Result};
