//! Physical constants (CODATA 2018, exact SI definitions where applicable)
//! and the energy/wavelength conversions used across the crate.
//!
//! Energies are in eV, optical wavelengths in nm. SI is used only inside
//! rate prefactors.

use crate::error::{Error, Result};

/// Elementary charge [C] (exact).
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Electron rest mass [kg].
pub const M0: f64 = 9.109_383_701_5e-31;
/// Vacuum permittivity [F/m].
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Speed of light in vacuum [m/s] (exact).
pub const C_LIGHT: f64 = 299_792_458.0;
/// Planck constant [J s] (exact).
pub const H_PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant [J s].
pub const HBAR: f64 = H_PLANCK / (2.0 * std::f64::consts::PI);
/// Boltzmann constant [eV/K] (exact ratio k_B / e).
pub const KB_EV: f64 = 1.380_649e-23 / E_CHARGE;
/// h·c expressed in eV·nm, derived from the exact SI values.
pub const HC_EV_NM: f64 = H_PLANCK * C_LIGHT / E_CHARGE * 1e9;

/// The constant set as a value, for code that wants to pass it around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub e: f64,
    pub m0: f64,
    pub eps0: f64,
    pub c: f64,
    pub hbar: f64,
    pub hc: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    e: E_CHARGE,
    m0: M0,
    eps0: EPS0,
    c: C_LIGHT,
    hbar: HBAR,
    hc: HC_EV_NM,
};

/// Photon energy [eV] for a vacuum wavelength [nm].
pub fn energy_from_wavelength(lambda_nm: f64) -> Result<f64> {
    if !(lambda_nm > 0.0) || !lambda_nm.is_finite() {
        return Err(Error::domain(format!(
            "wavelength must be positive, got {lambda_nm} nm"
        )));
    }
    Ok(HC_EV_NM / lambda_nm)
}

/// Vacuum wavelength [nm] for a photon energy [eV].
pub fn wavelength_from_energy(energy_ev: f64) -> Result<f64> {
    if !(energy_ev > 0.0) || !energy_ev.is_finite() {
        return Err(Error::domain(format!(
            "energy must be positive, got {energy_ev} eV"
        )));
    }
    Ok(HC_EV_NM / energy_ev)
}

/// Angular frequency [rad/s] of a photon of energy `energy_ev`.
#[inline]
pub fn omega(energy_ev: f64) -> f64 {
    energy_ev * E_CHARGE / HBAR
}

/// Thermal energy k_B·T [eV].
#[inline]
pub fn kt_ev(temperature_k: f64) -> f64 {
    KB_EV * temperature_k
}
