//! Emission spectra: spontaneous and singly-stimulated two-photon emission,
//! the one-photon comparison spectrum, instrument response and peak finding.

mod instrument;
mod one_photon;
mod stimulated;
mod tpe;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::carriers::CarrierState;
use crate::error::{Error, Result};
use crate::materials::MaterialParams;
use crate::quantumwell::QWStack;
use crate::units::{wavelength_from_energy, E_CHARGE};

pub use instrument::{convolve_instrument, find_peaks, Peak};
pub use one_photon::one_photon_spectrum;
pub use stimulated::{
    complementary_peak, recombination_rates, steady_state_balance, stimulated_components, stimulated_spectrum, RecombinationRates,
    StimulatedSpectrum,
};
pub use tpe::{
    matrix_element_sq, pair_spectrum, photon_dos, spontaneous_bulk_spectrum, spontaneous_qw_spectrum,
    spontaneous_spectrum, tpe_center, TpeCenter,
};

/// Spectra grids: default number of points.
pub const DEFAULT_GRID_POINTS: usize = 600;
/// Default photon-energy window for bulk spectra [eV].
pub const BULK_WINDOW: (f64, f64) = (0.55, 1.15);
/// Default photon-energy window for quantum-well spectra [eV].
pub const QW_WINDOW: (f64, f64) = (0.7, 1.4);

/// Emitting system: bulk material or a multi-quantum-well stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum System {
    Bulk { material: MaterialParams },
    QuantumWell { stack: QWStack },
}

impl System {
    /// Material whose bands carry the transition.
    pub fn material(&self) -> &MaterialParams {
        match self {
            System::Bulk { material } => material,
            System::QuantumWell { stack } => &stack.well,
        }
    }

    pub fn is_bulk(&self) -> bool {
        matches!(self, System::Bulk { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    SpontaneousTpeBulk,
    SpontaneousTpeQw,
    OnePhoton,
    StimulatedTpe,
}

/// Light collection between emitter and detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectionGeometry {
    /// Fraction of 4π collected.
    pub solid_angle_fraction: f64,
    /// Throughput of the collection optics.
    pub optics_efficiency: f64,
    /// Emitting volume [cm³] for bulk, sheet area [cm²] for wells. Quantum-well
    /// rates use the stack's own sheet area, which the config sets from the
    /// same value.
    pub volume_or_area: f64,
}

impl CollectionGeometry {
    pub fn new(solid_angle_fraction: f64, optics_efficiency: f64, volume_or_area: f64) -> Result<Self> {
        let g = CollectionGeometry {
            solid_angle_fraction,
            optics_efficiency,
            volume_or_area,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        if !unit(self.solid_angle_fraction) || !unit(self.optics_efficiency) {
            return Err(Error::Configuration(
                "solid_angle_fraction and optics_efficiency must lie in (0, 1]".into(),
            ));
        }
        if !(self.volume_or_area > 0.0 && self.volume_or_area.is_finite()) {
            return Err(Error::Configuration("volume/area must be positive".into()));
        }
        Ok(())
    }

    /// Fraction of emitted photons reaching the detector.
    pub fn collection(&self) -> f64 {
        self.solid_angle_fraction * self.optics_efficiency
    }
}

/// A launched beam that stimulates one photon of each pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StimulationConfig {
    /// Photon energy [eV].
    pub e_s: f64,
    /// Power in the guided mode [W].
    pub p_s: f64,
    /// [µm²]
    pub mode_area: f64,
    /// Overlap of the optical mode with the emitting region.
    pub confinement: f64,
    /// Refractive index at `e_s`.
    pub n_s: f64,
    /// Recompute the spontaneous background at the density depressed by the
    /// extra recombination channel.
    #[serde(default)]
    pub carrier_budget: bool,
}

impl StimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_s > 0.0) {
            return Err(Error::domain("stimulating photon energy must be positive"));
        }
        if !(self.p_s >= 0.0) || !self.p_s.is_finite() {
            return Err(Error::domain("stimulating power must be non-negative"));
        }
        if !(self.mode_area > 0.0) {
            return Err(Error::domain("mode area must be positive"));
        }
        if !(self.confinement > 0.0 && self.confinement <= 1.0) {
            return Err(Error::domain("confinement must lie in (0, 1]"));
        }
        if !(self.n_s >= 1.0) {
            return Err(Error::domain("refractive index at E_s must be >= 1"));
        }
        Ok(())
    }

    /// Photon density in the mode [m⁻³].
    pub fn photon_density(&self) -> f64 {
        let speed = crate::units::C_LIGHT / self.n_s;
        self.p_s / (self.e_s * E_CHARGE * speed * self.mode_area * 1e-12)
    }
}

/// Everything needed to recompute a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub state: CarrierState,
    pub system: System,
    pub geometry: CollectionGeometry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stimulation: Option<StimulationConfig>,
    /// Instrument resolution applied [nm], if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution_nm: Option<f64>,
}

/// Photon spectral rate on a uniform energy grid [s⁻¹ eV⁻¹].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: SpectrumKind,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    pub fn step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// Trapezoid integral of the values [s⁻¹].
    pub fn area(&self) -> f64 {
        trapezoid_uniform(&self.values, self.step())
    }

    /// Grid point with the largest value.
    pub fn argmax(&self) -> (f64, f64) {
        let (i, v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        (self.grid[i], v)
    }

    /// Pointwise combination with a spectrum on the same grid.
    pub fn zip_with(&self, other: &Spectrum, f: impl Fn(f64, f64) -> f64) -> Result<Spectrum> {
        if self.grid != other.grid {
            return Err(Error::domain("spectra are on different grids"));
        }
        Ok(Spectrum {
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
            ..self.clone()
        })
    }

    /// CSV with `energy_eV,wavelength_nm,rate_per_s_per_eV`, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("energy_eV,wavelength_nm,rate_per_s_per_eV\n");
        for (e, v) in self.grid.iter().zip(&self.values) {
            let lambda = wavelength_from_energy(*e).unwrap_or(f64::NAN);
            out.push_str(&format!("{e:.11e},{lambda:.11e},{v:.11e}\n"));
        }
        out
    }

    /// Writes `<stem>.csv` and the `<stem>.meta.json` sidecar into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        write_file(&dir.join(format!("{stem}.csv")), self.to_csv().as_bytes())?;
        let meta = serde_json::to_string_pretty(&self.meta).expect("meta serializes");
        write_file(&dir.join(format!("{stem}.meta.json")), meta.as_bytes())
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn trapezoid_uniform(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])) * step,
    }
}

/// `points` uniformly spaced energies from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 3 {
        return Err(Error::domain(format!(
            "grid needs 0 < lo < hi and at least 3 points (lo = {lo}, hi = {hi}, points = {points})"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + step * i as f64).collect())
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::domain("grid needs at least 3 points"));
    }
    let step = grid[1] - grid[0];
    if !(grid[0] > 0.0 && step > 0.0) {
        return Err(Error::domain("grid must be positive and strictly increasing"));
    }
    for w in grid.windows(2) {
        if !((w[1] - w[0] - step).abs() <= 1e-9 * step) {
            return Err(Error::domain("grid must be uniform"));
        }
    }
    Ok(())
}

/// Total collected power ∫ rate·E dE [W]. Two-photon spectra already count
/// both photons of each pair, so they are integrated once, like one-photon
/// spectra; `photons_per_event` only guards the call.
pub fn total_power(spec: &Spectrum, photons_per_event: u32) -> Result<f64> {
    if !(photons_per_event == 1 || photons_per_event == 2) {
        return Err(Error::domain("photons_per_event must be 1 or 2"));
    }
    let weighted: Vec<f64> = spec.grid.iter().zip(&spec.values).map(|(e, v)| e * v).collect();
    Ok(trapezoid_uniform(&weighted, spec.step()) * E_CHARGE)
}
