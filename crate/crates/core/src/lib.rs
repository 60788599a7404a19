//! Quantum dynamics of symmetry breaking in a finite harmonic crystal.
//!
//! A pinning potential ramped linearly in time, `B(t) = δ·t`, drives the
//! crystal's centre-of-mass sector — a harmonic oscillator with mass `N` and
//! spring `N·B(t)` — out of equilibrium. This crate provides:
//!
//! * [`microcrystal`] — the underlying harmonic chain: Bogoliubov phonon
//!   dispersion and the static collective (k = 0) ground state.
//! * [`kibble_zurek`] — relaxation time, freeze-out time `t̂ = δ^(-1/3)`,
//!   adiabatic/impulse regime classification and the adiabaticity bound.
//! * [`ai_dynamics`] — closed-form observables in the adiabatic-impulse
//!   approximation: dynamical phases, the order parameter `[ΔQ²]⁻¹`, momentum
//!   fluctuations, overlap coefficients and the punctured collapse/revival
//!   times.
//! * [`exact_dynamics`] — the exact solution of the time-dependent
//!   Schrödinger equation through the classical envelope `f̈ + δt·f = 0`
//!   (Airy functions or adaptive ODE integration), Gaussian wavefunctions,
//!   Wigner distributions, phase-space rotation angle, and a split-step
//!   Fourier integrator serving as an independent oracle.
//! * [`tomography`] — rotated-quadrature marginals (Radon projections),
//!   seeded quadrature sampling, and filtered back-projection reconstruction.
//! * [`scenario`] / [`runner`] — TOML-configurable scenario definitions and
//!   deterministic CSV/JSON dataset emission used by the CLI.
//!
//! ħ = 1 throughout. Times in public dataset output are measured in units of
//! the freeze-out time unless stated otherwise.

pub mod ai_dynamics;
pub mod airy;
pub mod error;
pub mod exact_dynamics;
pub mod io;
pub mod kibble_zurek;
pub mod microcrystal;
pub mod ode;
pub mod runner;
pub mod scenario;
pub mod tomography;

pub use error::{Error, Result};
