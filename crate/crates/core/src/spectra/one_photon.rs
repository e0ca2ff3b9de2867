//! First-order spontaneous emission from the same bands, for comparison.

use std::f64::consts::PI;

use super::tpe::Joint;
use super::{check_grid, CollectionGeometry, Spectrum, SpectrumKind, SpectrumMeta, System};
use crate::carriers::{emission_weight, CarrierState};
use crate::error::Result;
use crate::units::{omega, C_LIGHT, EPS0, E_CHARGE, HBAR, M0};

impl Joint<'_> {
    /// One-photon emission per eV [s⁻¹ eV⁻¹], uncollected: golden-rule rate
    /// per pair with a k-independent p_cv, times the joint density of states
    /// and the same occupation weight as the two-photon process.
    pub(crate) fn one_photon_density(&self, e: f64, is_bulk: bool) -> f64 {
        if self.empty() || e <= self.state.eg_eff {
            return 0.0;
        }
        let n = self.mat.index_clamped(e);
        let rate = E_CHARGE * E_CHARGE * n * omega(e) * self.mat.p_cv_sq()
            / (3.0 * PI * EPS0 * M0 * M0 * C_LIGHT.powi(3) * HBAR);
        let k = self.k_of(e);
        let mr = self.mat.m_r * M0;
        // joint density of states per joule, times the extent
        let dos = if is_bulk {
            let de = (e - self.state.eg_eff) * E_CHARGE;
            self.scale / (2.0 * PI * PI) * (2.0 * mr / (HBAR * HBAR)).powf(1.5) * de.sqrt()
        } else {
            // scale carries π·S·periods·|overlap|²; the 2D joint DOS is m_r/(πħ²)
            self.scale / PI * mr / (PI * HBAR * HBAR)
        };
        dos * E_CHARGE * rate * emission_weight(self.state, self.mat, k)
    }
}

/// One-photon spontaneous spectrum of the system [s⁻¹ eV⁻¹], collected.
pub fn one_photon_spectrum(state: &CarrierState, system: &System, geom: &CollectionGeometry, grid: &[f64]) -> Result<Spectrum> {
    check_grid(grid)?;
    geom.validate()?;
    let joint = Joint::new(state, system, Some(geom.volume_or_area))?;
    let c = geom.collection();
    let values = grid
        .iter()
        .map(|&e| joint.one_photon_density(e, system.is_bulk()) * c)
        .collect();
    Ok(Spectrum {
        grid: grid.to_vec(),
        values,
        kind: SpectrumKind::OnePhoton,
        meta: SpectrumMeta {
            state: state.clone(),
            system: system.clone(),
            geometry: *geom,
            stimulation: None,
            resolution_nm: None,
        },
    })
}
