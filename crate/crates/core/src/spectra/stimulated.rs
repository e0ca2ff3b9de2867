//! Singly-stimulated two-photon emission and the carrier budget it draws on.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::tpe::{photon_dos, Joint};
use super::{check_grid, CollectionGeometry, Spectrum, SpectrumKind, StimulationConfig, System};
use crate::carriers::{make_carrier_state, make_qw_carrier_state, renormalized_gap, CarrierState, Confinement};
use crate::error::{Error, Result};
use crate::numerics;
use crate::units::{E_CHARGE, HBAR};

/// Stimulated spectrum split into its parts; `total = background + signal`.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulatedSpectrum {
    pub total: Spectrum,
    /// Spontaneous emission at the (possibly depressed) density.
    pub background: Spectrum,
    /// Stimulated pairs: the line at E_s and the complementary band.
    pub signal: Spectrum,
    /// Carrier density the spectra were computed at [cm⁻³].
    pub density: f64,
    /// Stimulated pair rate [s⁻¹], uncollected.
    pub stimulated_rate: f64,
}

/// Ratio of beam photon density to mode density at E_s: the stimulated rate
/// equals this times the spontaneous rate per unit ω₁ [s⁻¹].
fn stimulation_factor(stim: &StimulationConfig) -> f64 {
    stim.photon_density() * stim.confinement / (8.0 * PI * photon_dos(stim.e_s, stim.n_s))
}

/// Spontaneous background plus pairs with one photon stimulated into the
/// launched mode at E_s. The partner photon is spread over
/// E_c = E21(k) − E_s following the k distribution of the pairs; the
/// stimulated photons themselves form a line at E_s one grid bin wide.
pub fn stimulated_components(
    state: &CarrierState,
    system: &System,
    stim: &StimulationConfig,
    geom: &CollectionGeometry,
    grid: &[f64],
) -> Result<StimulatedSpectrum> {
    stim.validate()?;
    check_grid(grid)?;
    if !(stim.e_s < grid[grid.len() - 1]) {
        return Err(Error::domain("stimulating energy lies above the grid"));
    }
    let state = if stim.carrier_budget && stim.p_s > 0.0 {
        let pump = recombination_rates(state, system, geom, None)?.total();
        steady_state_balance(pump, state, system, geom, Some(stim))?
    } else {
        state.clone()
    };
    let mut background = super::spontaneous_spectrum(&state, system, geom, grid)?;
    background.meta.stimulation = Some(*stim);
    let joint = Joint::new(&state, system, Some(geom.volume_or_area))?;
    let factor = stimulation_factor(stim) * geom.collection();
    let mut values = vec![0.0; grid.len()];
    let mut rate = 0.0;
    if stim.p_s > 0.0 && !joint.empty() {
        for (v, &e_c) in values.iter_mut().zip(grid) {
            let e21 = e_c + stim.e_s;
            if e21 <= state.eg_eff {
                continue;
            }
            let k = joint.k_of(e21);
            if k < joint.k_max {
                *v = factor * joint.density(stim.e_s, k) / joint.slope(k);
            }
        }
        rate = stimulation_factor(stim) * joint.rate_per_omega(stim.e_s);
        let step = grid[1] - grid[0];
        let bin = ((stim.e_s - grid[0]) / step).round();
        if bin >= 0.0 {
            let bin = bin as usize;
            let width = if bin == 0 || bin == grid.len() - 1 { 0.5 * step } else { step };
            values[bin] += rate * geom.collection() / width;
        }
    }
    let signal = Spectrum {
        values,
        kind: SpectrumKind::StimulatedTpe,
        ..background.clone()
    };
    let total = background.zip_with(&signal, |a, b| a + b)?;
    Ok(StimulatedSpectrum {
        total,
        background,
        signal,
        density: state.n,
        stimulated_rate: rate,
    })
}

/// Spontaneous spectrum plus the singly-stimulated contribution.
pub fn stimulated_spectrum(
    state: &CarrierState,
    system: &System,
    stim: &StimulationConfig,
    geom: &CollectionGeometry,
    grid: &[f64],
) -> Result<Spectrum> {
    Ok(stimulated_components(state, system, stim, geom, grid)?.total)
}

/// Radiative recombination channels [s⁻¹], uncollected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecombinationRates {
    pub one_photon: f64,
    pub two_photon: f64,
    pub stimulated: f64,
}

impl RecombinationRates {
    pub fn total(&self) -> f64 {
        self.one_photon + self.two_photon + self.stimulated
    }
}

const PANELS: usize = 48;

/// Fixed-rule totals of the recombination channels. Fixed node sets make
/// the totals smooth in the carrier density, which the balance solver needs.
pub fn recombination_rates(
    state: &CarrierState,
    system: &System,
    geom: &CollectionGeometry,
    stim: Option<&StimulationConfig>,
) -> Result<RecombinationRates> {
    let joint = Joint::new(state, system, Some(geom.volume_or_area))?;
    if joint.empty() {
        return Ok(RecombinationRates {
            one_photon: 0.0,
            two_photon: 0.0,
            stimulated: 0.0,
        });
    }
    let bulk = system.is_bulk();
    let one_photon = numerics::integrate_fixed(
        |e| joint.one_photon_density(e, bulk),
        state.eg_eff,
        joint.e21_max(),
        PANELS,
    );
    // pairs: ∫dk ∫_0^{E21/2} dω₁, inner variable ln E1 to resolve the ħΓ scale
    let hg = HBAR * state.gamma / E_CHARGE;
    let two_photon = numerics::integrate_fixed(
        |k| {
            let half = 0.5 * joint.e21(k);
            let lo = (1e-3 * hg).min(0.5 * half).ln();
            numerics::integrate_fixed(|u| {
                let e1 = u.exp();
                joint.density(e1, k) * e1
            }, lo, half.ln(), 16)
        },
        0.0,
        joint.k_max,
        PANELS,
    ) * E_CHARGE
        / HBAR;
    let stimulated = match stim {
        Some(s) if s.p_s > 0.0 => {
            s.validate()?;
            let k_lo = if s.e_s <= state.eg_eff { 0.0 } else { joint.k_of(s.e_s) };
            if k_lo >= joint.k_max {
                0.0
            } else {
                let pts = joint.breaks(s.e_s, k_lo);
                let per_omega: f64 = pts
                    .windows(2)
                    .map(|w| numerics::integrate_fixed(|k| joint.density(s.e_s, k), w[0], w[1], 16))
                    .sum();
                stimulation_factor(s) * per_omega
            }
        }
        _ => 0.0,
    };
    Ok(RecombinationRates {
        one_photon,
        two_photon,
        stimulated,
    })
}

/// The same carriers at density `n`, keeping any calibration shift of the gap.
pub(crate) fn state_at(state: &CarrierState, system: &System, n: f64) -> Result<CarrierState> {
    match (system, state.confinement) {
        (System::Bulk { material }, Confinement::Bulk) => {
            let shift = state.eg_eff - renormalized_gap(material, state.n, state.t)?;
            make_carrier_state(material, n, state.t, state.gamma)?.shifted(shift)
        }
        (System::QuantumWell { stack }, Confinement::Well { width_a }) => {
            let base = |n: f64| make_qw_carrier_state(&stack.well, width_a, stack.transition_gap, n, state.t, state.gamma);
            let shift = state.eg_eff - base(state.n)?.eg_eff;
            base(n)?.shifted(shift)
        }
        _ => Err(Error::domain("carrier state confinement does not match the system")),
    }
}

/// Density at which a pair generation rate `pump_rate` [s⁻¹] balances
/// one-photon, spontaneous two-photon and (if given) stimulated
/// recombination. The other state parameters are kept.
pub fn steady_state_balance(
    pump_rate: f64,
    state: &CarrierState,
    system: &System,
    geom: &CollectionGeometry,
    stim: Option<&StimulationConfig>,
) -> Result<CarrierState> {
    if !(pump_rate > 0.0 && pump_rate.is_finite()) {
        return Err(Error::domain("pump rate must be positive"));
    }
    if !(state.n > 0.0) {
        return Err(Error::domain("balance needs a positive starting density"));
    }
    let excess = |n: f64| -> Result<f64> {
        let s = state_at(state, system, n)?;
        Ok(pump_rate - recombination_rates(&s, system, geom, stim)?.total())
    };
    let (mut lo, mut hi) = (state.n, state.n);
    for _ in 0..60 {
        if excess(hi)? <= 0.0 {
            break;
        }
        hi *= 1.5;
    }
    for _ in 0..60 {
        if excess(lo)? >= 0.0 {
            break;
        }
        lo /= 1.5;
    }
    if excess(hi)? > 0.0 || excess(lo)? < 0.0 {
        return Err(Error::Configuration(format!(
            "no density in [{lo:e}, {hi:e}] cm^-3 balances a pump of {pump_rate:e} s^-1"
        )));
    }
    let mut failure = None;
    let n = numerics::brent(
        |n| match excess(n) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        lo,
        hi,
        1e-14 * hi,
        200,
    )
    .map_err(|e| Error::Configuration(format!("carrier balance: {e}")))?;
    if let Some(e) = failure {
        return Err(e);
    }
    state_at(state, system, n)
}

/// The complementary band of a stimulated run: the strongest peak of the
/// signal once the line at E_s is removed.
pub fn complementary_peak(parts: &StimulatedSpectrum, e_s: f64) -> Option<super::Peak> {
    let mut band = parts.signal.clone();
    let step = band.step();
    for (e, v) in band.grid.iter().zip(band.values.iter_mut()) {
        if (e - e_s).abs() < 1.5 * step {
            *v = 0.0;
        }
    }
    super::find_peaks(&band)
        .into_iter()
        .max_by(|a, b| a.height.total_cmp(&b.height))
}
