//! Numerical emulation of Sauter-Schwinger pair production with atoms in a 1D
//! optical lattice.
//!
//! The two lowest lattice bands near the Brillouin-zone edge realise the 1D
//! Dirac Hamiltonian with rest mass `m*c*² = V/4`. A uniform force sweeps the
//! quasimomentum through the avoided crossing and transfers atoms from the
//! lower ("antiparticle") band to the upper ("particle") band at the
//! Landau-Zener rate.
//!
//! All quantities are in recoil units; see [`units`].

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN.

pub mod band;
pub mod bandmap;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod lz;
pub mod propagator;
pub mod sea;
pub mod tridiag;
pub mod units;

pub use error::{Error, Result};
