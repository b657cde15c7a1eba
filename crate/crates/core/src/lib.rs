//! Truncated spectral-metric geometry of the standard Podleś sphere.
//!
//! * [`qsymb`]: exact normal-form arithmetic in the coordinate algebra of
//!   quantum SU(2), with the twisted derivations.
//! * [`model`]: the sphere as a unitalization of matrices over the matrix
//!   units `f_{n,k}`, truncated to indices `<= N`.
//! * [`dirac`]: the derivation `d_1` in closed form and the seminorm `L`.
//! * [`integral`]: the vertical, horizontal and total quantum integrals.
//! * [`metric`]: Monge-Kantorovich distances and Lipschitz-ball diagnostics.

pub mod dirac;
pub mod error;
pub mod integral;
pub mod laurent;
pub mod metric;
pub mod model;
pub mod qsymb;

pub use dirac::DerivativeElement;
pub use error::{Error, Result};
pub use laurent::LaurentScalar;
pub use metric::{MKResult, SolverConfig};
pub use model::{ModelConstants, PodlesElement, QState};
pub use qsymb::{QMonomial, QPolynomial};
