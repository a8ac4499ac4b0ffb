//! Trace and determinant invariants of Toeplitz operators with
//! trigonometric-polynomial symbols on circles and Kronecker tori.
//!
//! - [`symbol`]: symbols, frequency modules, the pairing and C¹ bounds.
//! - [`hardy`]: Hardy-window matrices, semicommutator blocks and the
//!   Hilbert-commutator kernel identity.
//! - [`flow`]: continued-fraction approximants of a Kronecker flow and the
//!   rational-flow error.
//! - [`funcalc`]: matrix exponential, LU, SVD, the adjoint series and
//!   Gauss–Legendre rules.
//! - [`determinant`]: finite-section determinants of multiplicative
//!   commutators and the Steinberg pairing.
//! - [`audit`]: interval-certified checks of the norm inequalities.
//!
//! ```
//! use flowdet::hardy::{commutator_block, HardyWindow};
//! use flowdet::symbol::{FrequencyModule, Symbol};
//!
//! let e1 = Symbol::character(FrequencyModule::circle(), 1)?;
//! let em1 = Symbol::character(FrequencyModule::circle(), -1)?;
//! let k = commutator_block(&e1, &em1, &HardyWindow::circle(2))?;
//! assert_eq!(k.weighted_trace().re, -1.0);
//! # Ok::<(), flowdet::Error>(())
//! ```

pub mod audit;
pub mod determinant;
pub mod error;
pub mod flow;
pub mod funcalc;
pub mod hardy;
pub mod symbol;

pub use error::{Error, Result};
