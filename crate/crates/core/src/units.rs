//! Physical constants and the cubic-potential parameter set.
//!
//! Internal units: energy in meV, length in Å, time in ħ/meV, temperature in K.
//! With these choices ħ = 1, so a frequency ω is numerically equal to ħω in meV.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ħc in meV·Å.
pub const HBAR_C_MEV_ANGSTROM: f64 = 1_973_269.804;
/// Electron rest energy in meV.
pub const ELECTRON_MASS_MEV: f64 = 510_998_950.0;
/// Boltzmann constant in meV/K.
pub const BOLTZMANN_MEV_PER_K: f64 = 0.086_173_33;

/// Converts a mass in electron masses to internal units (ħ²/(meV·Å²)).
pub fn mass_to_internal(mass_me: f64) -> f64 {
    mass_me * ELECTRON_MASS_MEV / (HBAR_C_MEV_ANGSTROM * HBAR_C_MEV_ANGSTROM)
}

/// Parameters of U(x) = ½Mω²x² − ⅓γx³.
///
/// `gamma`, `barrier_height` and `action_scale` are derived in [`PotentialParams::new`]
/// and kept alongside the primary inputs for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    /// Particle mass in electron masses.
    pub mass_me: f64,
    /// ħω in meV.
    pub hbar_omega: f64,
    /// Barrier-top position a in Å.
    pub a: f64,
    /// Cubic coupling γ = Mω²/a in meV/Å³.
    pub gamma: f64,
    /// V(a) = Mω²a²/6 in meV.
    pub barrier_height: f64,
    /// (6/5)Mωa²/ħ, the zero-temperature bounce action in units of ħ.
    pub action_scale: f64,
}

impl PotentialParams {
    pub fn new(mass_me: f64, hbar_omega: f64, a: f64) -> Result<Self> {
        for (name, v) in [("mass", mass_me), ("hbar_omega", hbar_omega), ("a", a)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let m = mass_to_internal(mass_me);
        let w = hbar_omega;
        Ok(Self {
            mass_me,
            hbar_omega,
            a,
            gamma: m * w * w / a,
            barrier_height: m * w * w * a * a / 6.0,
            action_scale: 1.2 * m * w * a * a,
        })
    }

    /// The benchmark set: 10³ mₑ, ħω = 20 meV, a = 1 Å.
    pub fn benchmark() -> Self {
        Self::new(1.0e3, 20.0, 1.0).expect("benchmark parameters are valid")
    }

    pub fn with_hbar_omega(&self, hbar_omega: f64) -> Result<Self> {
        Self::new(self.mass_me, hbar_omega, self.a)
    }

    /// M in ħ²/(meV·Å²).
    pub fn mass(&self) -> f64 {
        mass_to_internal(self.mass_me)
    }

    /// ω in meV/ħ (numerically equal to ħω).
    pub fn omega(&self) -> f64 {
        self.hbar_omega
    }

    /// Mωa²/ħ.
    pub fn mw_a2(&self) -> f64 {
        self.mass() * self.hbar_omega * self.a * self.a
    }

    /// T_c = ħω/(2πk_B) in K.
    pub fn t_crit(&self) -> f64 {
        crossover_temperature(self)
    }
}

/// T_c = ħω/(2πk_B).
pub fn crossover_temperature(params: &PotentialParams) -> f64 {
    params.hbar_omega / (2.0 * std::f64::consts::PI * BOLTZMANN_MEV_PER_K)
}

/// Converts a temperature in K to k_B·T in meV.
pub fn kelvin_to_mev(t: f64) -> f64 {
    BOLTZMANN_MEV_PER_K * t
}
