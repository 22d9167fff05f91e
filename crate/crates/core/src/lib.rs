//! Signature-driven abstract syntax with variable binding.
//!
//! A [`SignatureDoc`] declares operations with binding arities, equations and
//! reduction rules. From it the crate builds well-scoped terms with parallel
//! substitution, normal forms modulo the equations, reduction derivations
//! (small-step, big-step, heterogeneous), folds into models and translations
//! between signatures.
//!
//! Variables are de Bruijn levels: at scope `n` the variables are `0..n`, and
//! an argument binding `k` variables sees the fresh ones as `n..n+k`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod equation;
pub mod error;
pub mod metaterm;
pub mod model;
pub mod monad;
pub mod operational;
pub mod reduction;
pub mod signature;
mod syntax;
pub mod term;
pub mod translations;

pub use equation::{equal_mod, normalize, NormalizationTrace};
pub use error::{Error, Result};
pub use metaterm::{Assignment, MetaTerm, MetaVarDecl};
pub use monad::SubstMap;
pub use reduction::{Derivation, Engine};
pub use signature::{builtin, parse_signature, SignatureDoc};
pub use term::{Layer, OpRef, Term};
