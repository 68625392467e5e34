//! Solver for the perturbed Bessel equation
//!
//! ```text
//! -u'' + ( l(l+1)/x^2 + q(x) ) u = omega^2 u,   x in (0, b],
//! ```
//!
//! based on a Neumann series of Bessel functions (NSBF) representation of the
//! regular solution,
//!
//! ```text
//! u(omega, x) = omega x j_l(omega x) + sum_n beta_n(x) j_{l+2n+1}(omega x),
//! ```
//!
//! whose coefficients `beta_n` (and `gamma_n` for the derivative) do not
//! depend on the spectral parameter `omega`. The truncation error is uniform
//! in `omega`, which makes the representation well suited for computing large
//! sets of eigenvalues with non-deteriorating accuracy.
//!
//! The crate provides:
//!
//! * [`grid`] — uniform meshes on `[0, b]` and an indefinite integration
//!   primitive (composite 6-point Newton-Cotes rule);
//! * [`special`] — real-order spherical Bessel function ladders and Jacobi
//!   polynomial evaluation;
//! * [`potential`] — builtin and file-based potential descriptors;
//! * [`particular`] — the non-vanishing particular solution `u0` of `Lu = 0`,
//!   with an automatic spectral shift when the regular solution has zeros;
//! * [`coeffs`] — the recurrent construction of `beta_n`, `gamma_n` and the
//!   truncation-order selection from the Goursat verification identities;
//! * [`evaluate`] — evaluation of the truncated representations `u_N`, `u'_N`;
//! * [`kernel`] — reconstruction of the transmutation kernels `K_N`,
//!   `K_{1,N}` and the Mehler-side kernel from the coefficients;
//! * [`spectral`] — eigenvalue computation by scanning and bisecting a
//!   characteristic function built from `u_N`, `u'_N`;
//! * [`oracle`] — an independent adaptive ODE solver used for validation;
//! * [`decay`] — log-log slope fitting for coefficient decay studies;
//! * [`config`] — JSON run configurations for the `nsbf` command line tool.

pub mod config;
pub mod coeffs;
pub mod decay;
pub mod error;
pub mod evaluate;
pub mod grid;
pub mod kernel;
pub mod oracle;
pub mod particular;
pub mod potential;
pub mod special;
pub mod spectral;

pub use coeffs::CoefficientSet;
pub use error::NsbfError;
pub use grid::{Grid, GridFunction};
pub use particular::{ParticularSolution, Problem};
pub use potential::Potential;
pub use spectral::{BoundaryCondition, Spectrum};
