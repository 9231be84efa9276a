//! Numerical laboratory for smooth solitary waves of the Degasperis–Procesi
//! equation
//!
//! ```text
//! m_t + 2k u_x + 3 m u_x + u m_x = 0,        m = u - u_xx,
//! ```
//!
//! in its Hamiltonian form `u_t = J δH/δu` with the skew operator
//! `J = ∂_x (4-∂_x²)(1-∂_x²)⁻¹`.
//!
//! The crate constructs the even, single-humped solitary wave `φ(ξ; c)` for
//! speeds `c > 2k > 0` from the closed-form inverse `ξ(φ)` of the profile
//! ODE, evaluates the conserved functionals `M`, `H`, `S` together with the
//! closed forms for `S(φ)` and `dS/dc`, computes the spectrum of the
//! linearized Hamiltonian operator
//! `L_c = c - φ - (3c+2k)(4-∂²)⁻¹`
//! by Prüfer-angle shooting (cross-validated against a dense Fourier
//! collocation matrix), assembles the spectral-stability index verdict
//! (`n⁻(L_c) = 1` together with `⟨L_c ∂_cφ, ∂_cφ⟩ = -dS/dc < 0`), and runs
//! pseudo-spectral time evolution of the full and linearized flows on a
//! periodic domain.
//!
//! Modules are layered bottom-up:
//!
//! * [`wave`] — validated parameters `(c, k)` and every derived scalar,
//! * [`grid`] — symmetric line grids and sampled fields,
//! * [`ode`] — adaptive embedded Runge–Kutta integration,
//! * [`profile`] — solitary-wave construction and the `∂_cφ` difference,
//! * [`operators`] — inverse Helmholtz calculus on line and circle,
//! * [`functionals`] — conserved quantities and their closed forms,
//! * [`spectrum`] — Prüfer shooting, eigenfunctions, matrix cross-check,
//! * [`index`] — the stability-index verdict,
//! * [`evolution`] — periodic pseudo-spectral time integration,
//! * [`config`], [`report`] — run configuration and file emission.

pub mod config;
pub mod error;
pub mod evolution;
pub mod functionals;
pub mod grid;
pub mod index;
pub mod ode;
pub mod operators;
pub mod profile;
pub mod report;
pub mod spectrum;
pub mod wave;

pub use error::{DpError, Result};
pub use grid::{LineField, PeriodicField, SymmetricGrid};
pub use profile::SolitonProfile;
pub use wave::WaveParams;
