//! The microscopic harmonic chain and its collective (k = 0) sector.
//!
//! A periodic chain of N atoms with nearest-neighbour springs has the
//! momentum-space Hamiltonian coefficients `A_k = 2 - cos(ka)`,
//! `B_k = -cos(ka)`; a Bogoliubov rotation yields the phonon energies
//! `ε_k = sqrt(κ/2m)·sqrt(A_k² - B_k²) = 2·sqrt(κ/m)·|sin(ka/2)|`. The
//! transformation is singular at k = 0; that sector is described separately
//! by the collective oscillator `H_c = Π²/2N + B·N·Q²/2` whose pinned ground
//! state is a minimal-uncertainty Gaussian.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Microscopic constants of the chain.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_atoms: usize,
    pub kappa: f64,
    pub mass: f64,
    pub lattice_const: f64,
}

impl ChainParams {
    pub fn new(n_atoms: usize, kappa: f64, mass: f64, lattice_const: f64) -> Result<Self> {
        if n_atoms < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_atoms must be at least 2, got {n_atoms}"
            )));
        }
        for (name, v) in [("kappa", kappa), ("mass", mass), ("lattice_const", lattice_const)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { n_atoms, kappa, mass, lattice_const })
    }
}

/// One Bogoliubov-diagonalized phonon mode (ħ = 1).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BogoliubovMode {
    /// Wavevector, one of 2πj/(N·a) with j = -⌊N/2⌋ … ⌈N/2⌉-1.
    pub k: f64,
    pub a_k: f64,
    pub b_k: f64,
    /// ε_k = sqrt(κ/2m)·sqrt(A_k² - B_k²); zero exactly at k = 0.
    pub energy: f64,
}

/// Phonon dispersion over the first Brillouin zone, sorted by k.
pub fn phonon_dispersion(params: &ChainParams) -> Vec<BogoliubovMode> {
    let n = params.n_atoms as i64;
    let a = params.lattice_const;
    let prefactor = (params.kappa / (2.0 * params.mass)).sqrt();
    let j_min = -(n / 2);
    (j_min..j_min + n)
        .map(|j| {
            let k = 2.0 * std::f64::consts::PI * j as f64 / (n as f64 * a);
            let cos = (k * a).cos();
            let a_k = 2.0 - cos;
            let b_k = -cos;
            let energy = if j == 0 {
                0.0
            } else {
                prefactor * (a_k * a_k - b_k * b_k).max(0.0).sqrt()
            };
            BogoliubovMode { k, a_k, b_k, energy }
        })
        .collect()
}

/// Eigenfrequencies of the classical dynamical matrix of the same chain
/// (periodic boundary), ascending. Serves as the independent cross-check of
/// the Bogoliubov energies: the two spectra agree mode by mode.
pub fn dynamical_matrix_frequencies(params: &ChainParams) -> Vec<f64> {
    let n = params.n_atoms;
    let w2 = params.kappa / params.mass;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = 2.0 * w2;
        m[(j, (j + 1) % n)] -= w2;
        m[(j, (j + n - 1) % n)] -= w2;
    }
    let eig = m.symmetric_eigen();
    let mut freqs: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    freqs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    freqs
}

/// Ground-state moments of the collective oscillator at pinning field B.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CollectiveState {
    pub big_n: f64,
    pub field_b: f64,
    /// Level spacing of the dual thin spectrum, sqrt(B).
    pub gap: f64,
    /// ΔQ²; infinite at B = 0 (fully delocalized symmetric state).
    pub dq2: f64,
    /// ΔΠ²; zero at B = 0 (total-momentum eigenstate).
    pub dpi2: f64,
}

impl CollectiveState {
    /// True in the B = 0 limit where the centre of mass is fully delocalized.
    pub fn is_delocalized(&self) -> bool {
        self.dq2.is_infinite()
    }
}

/// Ground state of `H_c = Π²/2N + B·N·Q²/2` (m = 1, ħ = 1).
pub fn collective_ground_state(big_n: f64, field_b: f64) -> Result<CollectiveState> {
    if !(big_n > 0.0) || !big_n.is_finite() {
        return Err(Error::InvalidParameter(format!("N must be positive, got {big_n}")));
    }
    if field_b < 0.0 || !field_b.is_finite() {
        return Err(Error::InvalidParameter(format!("B must be nonnegative, got {field_b}")));
    }
    let gap = field_b.sqrt();
    let (dq2, dpi2) = if field_b == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        (1.0 / (2.0 * big_n * gap), big_n * gap / 2.0)
    };
    Ok(CollectiveState { big_n, field_b, gap, dq2, dpi2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zone_boundary_energy() {
        // k = pi/a with kappa = m = 1: eps = 2|sin(pi/2)| = 2
        let params = ChainParams::new(8, 1.0, 1.0, 1.0).unwrap();
        let modes = phonon_dispersion(&params);
        let edge = modes.iter().find(|m| (m.k + std::f64::consts::PI).abs() < 1e-12).unwrap();
        assert_relative_eq!(edge.energy, 2.0, max_relative = 1e-14);
        assert_relative_eq!(edge.a_k, 3.0, max_relative = 1e-14);
        assert_relative_eq!(edge.b_k, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn zero_mode_is_gapless() {
        let params = ChainParams::new(6, 2.5, 0.7, 1.3).unwrap();
        let modes = phonon_dispersion(&params);
        let zero: Vec<_> = modes.iter().filter(|m| m.energy == 0.0).collect();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].k, 0.0);
    }

    #[test]
    fn analytic_form_of_dispersion() {
        // eps_k simplifies to 2 sqrt(kappa/m) |sin(ka/2)|
        let params = ChainParams::new(16, 3.0, 2.0, 0.5).unwrap();
        for mode in phonon_dispersion(&params) {
            let expected =
                2.0 * (params.kappa / params.mass).sqrt() * (mode.k * params.lattice_const / 2.0).sin().abs();
            assert_relative_eq!(mode.energy, expected, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn dispersion_matches_dense_diagonalization_n8() {
        let params = ChainParams::new(8, 1.0, 1.0, 1.0).unwrap();
        let mut bogo: Vec<f64> = phonon_dispersion(&params).iter().map(|m| m.energy).collect();
        bogo.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let diag = dynamical_matrix_frequencies(&params);
        assert_eq!(bogo.len(), diag.len());
        for (b, d) in bogo.iter().zip(&diag) {
            if *b > 0.0 {
                assert_relative_eq!(b, d, max_relative = 1e-12);
            } else {
                assert!(*d < 1e-7, "zero mode from diagonalization: {d}");
            }
        }
    }

    #[test]
    fn rejects_bad_chain_params() {
        assert!(ChainParams::new(1, 1.0, 1.0, 1.0).is_err());
        assert!(ChainParams::new(4, 0.0, 1.0, 1.0).is_err());
        assert!(ChainParams::new(4, 1.0, -1.0, 1.0).is_err());
        assert!(ChainParams::new(4, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn ground_state_closed_form() {
        let s = collective_ground_state(100.0, 1.0).unwrap();
        assert_relative_eq!(s.dq2, 0.005, max_relative = 1e-14);
        assert_relative_eq!(s.dpi2, 50.0, max_relative = 1e-14);
        assert_relative_eq!(s.gap, 1.0, max_relative = 1e-14);
        assert_relative_eq!(s.dq2 * s.dpi2, 0.25, max_relative = 1e-14);
    }

    #[test]
    fn symmetric_limit_and_scaling() {
        let s = collective_ground_state(42.0, 0.0).unwrap();
        assert!(s.is_delocalized());
        assert_eq!(s.dpi2, 0.0);
        assert_eq!(s.gap, 0.0);

        // ΔQ² ∝ 1/N at fixed B
        let a = collective_ground_state(100.0, 4.0).unwrap();
        let b = collective_ground_state(400.0, 4.0).unwrap();
        assert_relative_eq!(a.dq2 / b.dq2, 4.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_negative_field() {
        assert!(collective_ground_state(10.0, -1.0).is_err());
        assert!(collective_ground_state(0.0, 1.0).is_err());
    }
}
