//! Second-order (two-photon) matrix element and spontaneous spectra.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{check_grid, CollectionGeometry, Spectrum, SpectrumKind, SpectrumMeta, System};
use crate::carriers::{emission_weight, kinetic_ev, wavevector, CarrierState, Confinement};
use crate::error::{Error, Result};
use crate::materials::MaterialParams;
use crate::numerics;
use crate::units::{omega, C_LIGHT, EPS0, E_CHARGE, HBAR, M0};

/// Relative cutoff of the occupation weight that ends the k integration.
pub(crate) const WEIGHT_CUTOFF: f64 = 1e-8;
/// Relative tolerance of the adaptive k quadrature.
pub(crate) const REL_TOL: f64 = 1e-7;
/// Two polarizations over 4π for each of the two photons.
pub(crate) const MODE_FACTOR: f64 = 8.0 * PI * 8.0 * PI;

/// Photon states per unit angular frequency, volume and solid angle,
/// ω²n³/((2π)³c³) [s m⁻³ sr⁻¹].
pub fn photon_dos(e: f64, n: f64) -> f64 {
    let w = omega(e);
    w * w * n.powi(3) / ((2.0 * PI).powi(3) * C_LIGHT.powi(3))
}

fn prefactor(material: &MaterialParams) -> f64 {
    let e_over_m = E_CHARGE / M0;
    e_over_m.powi(4) * material.p_cv_sq() / (2.0 * PI.powi(5) * EPS0 * EPS0 * C_LIGHT.powi(6))
        / (material.m_r * material.m_r)
}

/// Resonance and frequency factors |1/(iω₁+Γ) + 1/(iω₂+Γ)|²·ω₁ω₂.
#[inline]
fn resonance(w1: f64, w2: f64, gamma: f64) -> f64 {
    let r = Complex64::new(gamma, w1).inv() + Complex64::new(gamma, w2).inv();
    r.norm_sqr() * w1 * w2
}

/// Squared two-photon matrix element M² [m²] for photon energy `e1` out of a
/// pair of energy `e21` at crystal momentum `k` [m⁻¹].
pub fn matrix_element_sq(e1: f64, e21: f64, k: f64, state: &CarrierState, material: &MaterialParams) -> Result<f64> {
    if !(e1 > 0.0) {
        return Err(Error::domain(format!("photon energy must be positive, got {e1}")));
    }
    if !(e1 < e21) {
        return Err(Error::domain(format!(
            "E1 = {e1} eV >= E21 = {e21} eV: complementary photon energy must be positive"
        )));
    }
    let n1 = material.index_clamped(e1);
    let n2 = material.index_clamped(e21 - e1);
    Ok(prefactor(material)
        * n1
        * n2
        * resonance(omega(e1), omega(e21 - e1), state.gamma)
        * emission_weight(state, material, k))
}

/// The joint conduction/valence band of a system with its k-space measure.
pub(crate) struct Joint<'a> {
    pub state: &'a CarrierState,
    pub mat: &'a MaterialParams,
    /// V [m³] for bulk, π·S·periods·|⟨φc|φv⟩|² [m²] for wells.
    pub scale: f64,
    /// Power of k in the measure: 4 bulk, 3 well.
    pub power: i32,
    pref: f64,
    w0: f64,
    pub k_max: f64,
}

impl<'a> Joint<'a> {
    pub fn new(state: &'a CarrierState, system: &'a System, extent: Option<f64>) -> Result<Self> {
        let (mat, scale, power) = match (system, state.confinement) {
            (System::Bulk { material }, Confinement::Bulk) => (material, extent.unwrap_or(1.0) * 1e-6, 4),
            (System::QuantumWell { stack }, Confinement::Well { .. }) => (
                &stack.well,
                PI * stack.s_qw * 1e-4 * stack.layers.num_periods as f64 * stack.overlap_sq,
                3,
            ),
            _ => return Err(Error::domain("carrier state confinement does not match the system")),
        };
        let w0 = emission_weight(state, mat, 0.0);
        let mut j = Joint {
            state,
            mat,
            scale,
            power,
            pref: prefactor(mat),
            w0,
            k_max: 0.0,
        };
        j.k_max = j.find_k_max();
        Ok(j)
    }

    fn find_k_max(&self) -> f64 {
        if !(self.w0 > 0.0) {
            return 0.0;
        }
        let target = WEIGHT_CUTOFF * self.w0;
        let below = |k: f64| emission_weight(self.state, self.mat, k) <= target;
        let mut hi = wavevector(self.state.kt(), self.mat.m_r);
        while !below(hi) {
            hi *= 2.0;
        }
        numerics::bisect(|k| emission_weight(self.state, self.mat, k) - target, 0.0, hi, hi * 1e-12).unwrap_or(hi)
    }

    pub fn empty(&self) -> bool {
        self.k_max == 0.0 || self.scale == 0.0
    }

    #[inline]
    pub fn e21(&self, k: f64) -> f64 {
        self.state.eg_eff + kinetic_ev(k, self.mat.m_r)
    }

    #[inline]
    pub fn k_of(&self, e21: f64) -> f64 {
        wavevector(e21 - self.state.eg_eff, self.mat.m_r)
    }

    /// dE21/dk [eV m].
    #[inline]
    pub fn slope(&self, k: f64) -> f64 {
        HBAR * HBAR * k / (self.mat.m_r * M0) / E_CHARGE
    }

    /// Pair energy at the cutoff.
    pub fn e21_max(&self) -> f64 {
        self.e21(self.k_max)
    }

    /// M²·(8π)²·scale·k^p: photon-1 rate per unit ω₁ per unit k [m⁻¹·m = dimensionless per k].
    #[inline]
    pub fn density(&self, e1: f64, k: f64) -> f64 {
        let e21 = self.e21(k);
        let e2 = e21 - e1;
        if !(e1 > 0.0 && e2 > 0.0) {
            return 0.0;
        }
        let m2 = self.pref
            * self.mat.index_clamped(e1)
            * self.mat.index_clamped(e2)
            * resonance(omega(e1), omega(e2), self.state.gamma)
            * emission_weight(self.state, self.mat, k);
        MODE_FACTOR * self.scale * k.powi(self.power) * m2
    }

    /// Breakpoints in k where E21 − e_fixed crosses a few multiples of ħΓ,
    /// where the resonance denominators vary fastest.
    pub fn breaks(&self, e_fixed: f64, k_lo: f64) -> Vec<f64> {
        let hg = HBAR * self.state.gamma / E_CHARGE;
        let mut pts = vec![k_lo];
        for m in [1.0, 4.0, 16.0, 64.0] {
            let e = e_fixed + m * hg;
            if e > self.state.eg_eff {
                let k = self.k_of(e);
                if k > *pts.last().unwrap() && k < self.k_max {
                    pts.push(k);
                }
            }
        }
        pts.push(self.k_max);
        pts
    }

    /// k-integrated photon-1 rate per unit ω₁ at `e1` (dimensionless).
    pub fn rate_per_omega(&self, e1: f64) -> f64 {
        if self.empty() {
            return 0.0;
        }
        let k_lo = if e1 <= self.state.eg_eff { 0.0 } else { self.k_of(e1) };
        if k_lo >= self.k_max {
            return 0.0;
        }
        let pts = self.breaks(e1, k_lo);
        pts.windows(2)
            .map(|w| numerics::integrate(|k| self.density(e1, k), w[0], w[1], REL_TOL, 0.0))
            .sum()
    }

    /// Pair-energy density at E21 [pairs s⁻¹ eV⁻¹], uncollected. The integral
    /// over ω₁ counts each photon once, i.e. twice per pair.
    pub fn pair_density(&self, e21: f64) -> f64 {
        if self.empty() || e21 <= self.state.eg_eff {
            return 0.0;
        }
        let k = self.k_of(e21);
        let hg = HBAR * self.state.gamma / E_CHARGE;
        let half = 0.5 * e21;
        let mut pts = vec![0.0];
        for m in [1.0, 4.0, 16.0, 64.0] {
            if m * hg < half {
                pts.push(m * hg);
            }
        }
        pts.push(half);
        // symmetric in E1 ↔ E21 − E1: the half range counts each pair once
        let per_ev_omega: f64 = pts
            .windows(2)
            .map(|w| numerics::integrate(|e1| self.density(e1, k), w[0], w[1], REL_TOL, 0.0))
            .sum();
        // dω₁ = (e/ħ) dE1, and dk = dE21/slope
        per_ev_omega * E_CHARGE / HBAR / self.slope(k)
    }
}

fn tpe_spectrum(state: &CarrierState, system: &System, geom: &CollectionGeometry, grid: &[f64]) -> Result<Spectrum> {
    check_grid(grid)?;
    geom.validate()?;
    let limit = state.eg_eff + 10.0 * state.kt();
    if grid[grid.len() - 1] >= limit {
        return Err(Error::domain(format!(
            "grid must end below Eg_eff + 10 kT = {limit:.4} eV"
        )));
    }
    let joint = Joint::new(state, system, Some(geom.volume_or_area))?;
    let per_ev = E_CHARGE / HBAR * geom.collection();
    let values = grid.iter().map(|&e1| joint.rate_per_omega(e1) * per_ev).collect();
    Ok(Spectrum {
        grid: grid.to_vec(),
        values,
        kind: if system.is_bulk() {
            SpectrumKind::SpontaneousTpeBulk
        } else {
            SpectrumKind::SpontaneousTpeQw
        },
        meta: SpectrumMeta {
            state: state.clone(),
            system: system.clone(),
            geometry: *geom,
            stimulation: None,
            resolution_nm: None,
        },
    })
}

/// Spontaneous two-photon spectrum of bulk material: for every photon
/// energy, the k⁴-weighted momentum integral of M² times the emitting volume.
pub fn spontaneous_bulk_spectrum(
    state: &CarrierState,
    material: &MaterialParams,
    geom: &CollectionGeometry,
    grid: &[f64],
) -> Result<Spectrum> {
    tpe_spectrum(state, &System::Bulk { material: material.clone() }, geom, grid)
}

/// Spontaneous two-photon spectrum of a quantum-well stack (in-plane k³
/// measure, overlap, sheet area and period count).
pub fn spontaneous_qw_spectrum(
    state: &CarrierState,
    stack: &crate::quantumwell::QWStack,
    geom: &CollectionGeometry,
    grid: &[f64],
) -> Result<Spectrum> {
    tpe_spectrum(state, &System::QuantumWell { stack: stack.clone() }, geom, grid)
}

pub fn spontaneous_spectrum(state: &CarrierState, system: &System, geom: &CollectionGeometry, grid: &[f64]) -> Result<Spectrum> {
    tpe_spectrum(state, system, geom, grid)
}

/// Pair-energy distribution [pairs s⁻¹ eV⁻¹] at the given E21 values,
/// before collection.
pub fn pair_spectrum(state: &CarrierState, system: &System, e21: &[f64]) -> Result<Vec<f64>> {
    let joint = Joint::new(state, system, None)?;
    Ok(e21.iter().map(|&e| joint.pair_density(e)).collect())
}

/// Location of the spontaneous two-photon emission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TpeCenter {
    /// Most probable pair energy [eV].
    pub pair_peak: f64,
    /// Half the most probable pair energy: the point about which the
    /// spectrum of each pair energy is symmetric and where complementary
    /// photons of stimulated pairs sum to [eV].
    pub center: f64,
    /// Half the mean pair energy, i.e. the mean photon energy [eV].
    pub centroid: f64,
}

/// Points on which the pair spectrum is scanned.
const CENTER_SCAN: usize = 400;

/// Spectral center of the spontaneous emission from the pair-energy
/// distribution, refined by a parabola through the largest sample.
pub fn tpe_center(state: &CarrierState, system: &System) -> Result<TpeCenter> {
    let joint = Joint::new(state, system, None)?;
    if joint.empty() {
        return Err(Error::domain("no inversion: the spectrum is identically zero"));
    }
    let lo = state.eg_eff;
    let hi = joint.e21_max();
    let step = (hi - lo) / CENTER_SCAN as f64;
    let e: Vec<f64> = (1..=CENTER_SCAN).map(|i| lo + step * i as f64).collect();
    let p: Vec<f64> = e.iter().map(|&x| joint.pair_density(x)).collect();
    let i = (0..p.len()).fold(0, |b, i| if p[i] > p[b] { i } else { b });
    let pair_peak = if i > 0 && i + 1 < p.len() {
        let denom = p[i - 1] - 2.0 * p[i] + p[i + 1];
        e[i] + if denom < 0.0 { 0.5 * step * (p[i - 1] - p[i + 1]) / denom } else { 0.0 }
    } else {
        e[i]
    };
    let norm: f64 = p.iter().sum();
    let mean: f64 = e.iter().zip(&p).map(|(x, y)| x * y).sum::<f64>() / norm;
    Ok(TpeCenter {
        pair_peak,
        center: 0.5 * pair_peak,
        centroid: 0.5 * mean,
    })
}
