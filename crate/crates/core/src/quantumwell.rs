//! Finite square well ground states (BenDaniel-Duke matching) and the
//! conduction/valence envelope overlap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{MaterialParams, MaterialTable, QWLayerSpec};
use crate::numerics;
use crate::units::{E_CHARGE, HBAR, M0};

/// Samples per envelope.
pub const GRID_POINTS: usize = 4096;
/// Envelope span beyond each well edge, in barrier decay lengths.
pub const DECAY_LENGTHS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    Conduction,
    Valence,
}

/// Closed-form even ground state: cos(k x) inside, matched exponential outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Shape {
    half_width: f64,
    /// [Å⁻¹]
    k_in: f64,
    /// [Å⁻¹]
    kappa: f64,
}

impl Shape {
    fn eval(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax <= self.half_width {
            (self.k_in * x).cos()
        } else {
            (self.k_in * self.half_width).cos() * (-self.kappa * (ax - self.half_width)).exp()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeState {
    pub band: Band,
    /// Confinement energy above the band edge [eV].
    pub energy_above_band_edge: f64,
    /// Normalized amplitude on a uniform grid over [−span/2, span/2] [Å^{-1/2}].
    pub samples: Vec<f64>,
    /// [Å]
    pub grid_step: f64,
    shape: Shape,
}

impl EnvelopeState {
    /// Barrier decay length 1/κ [Å].
    pub fn decay_length(&self) -> f64 {
        1.0 / self.shape.kappa
    }

    pub fn half_span(&self) -> f64 {
        0.5 * self.grid_step * (self.samples.len() - 1) as f64
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.half_span();
        (0..self.samples.len()).map(move |i| -h + self.grid_step * i as f64)
    }

    /// The same state sampled on [−half_span, half_span].
    pub fn resampled(&self, half_span: f64) -> Self {
        let (samples, grid_step) = sample(&self.shape, half_span);
        EnvelopeState {
            samples,
            grid_step,
            ..self.clone()
        }
    }

    /// Discrete L2 norm (trapezoid rule).
    pub fn norm(&self) -> f64 {
        trapezoid_product(&self.samples, &self.samples, self.grid_step).sqrt()
    }

    /// Parity-flipped copy, x → −x, multiplied by `sign`; used to build odd
    /// test functions and sign-flipped envelopes.
    pub fn scaled(&self, sign: f64) -> Self {
        EnvelopeState {
            samples: self.samples.iter().map(|v| v * sign).collect(),
            ..self.clone()
        }
    }
}

fn trapezoid_product(a: &[f64], b: &[f64], dx: f64) -> f64 {
    let n = a.len();
    let inner: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (inner - 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1])) * dx
}

fn sample(shape: &Shape, half_span: f64) -> (Vec<f64>, f64) {
    let step = 2.0 * half_span / (GRID_POINTS - 1) as f64;
    let mut samples: Vec<f64> = (0..GRID_POINTS)
        .map(|i| shape.eval(-half_span + step * i as f64))
        .collect();
    let norm = trapezoid_product(&samples, &samples, step).sqrt();
    samples.iter_mut().for_each(|v| *v /= norm);
    (samples, step)
}

/// Wavenumber [Å⁻¹] for kinetic energy `e` [eV] and mass `m` [m0].
fn wavenumber(e: f64, m: f64) -> f64 {
    (2.0 * m * M0 * e.max(0.0) * E_CHARGE).sqrt() / HBAR * 1e-10
}

/// Infinite-barrier ground-state energy ħ²π²/(2mL²) [eV].
pub fn infinite_well_energy(well_width_a: f64, mass: f64) -> f64 {
    let l = well_width_a * 1e-10;
    HBAR * HBAR * std::f64::consts::PI.powi(2) / (2.0 * mass * M0 * l * l) / E_CHARGE
}

/// Even ground state of a symmetric finite well with a mass step at the
/// interfaces. Solves m_b·k·sin(kL/2) = m_w·κ·cos(kL/2) by Brent's method.
pub fn ground_state(well_width_a: f64, barrier_offset: f64, mass_well: f64, mass_barrier: f64) -> Result<EnvelopeState> {
    ground_state_in(Band::Conduction, well_width_a, barrier_offset, mass_well, mass_barrier)
}

pub fn ground_state_in(
    band: Band,
    well_width_a: f64,
    barrier_offset: f64,
    mass_well: f64,
    mass_barrier: f64,
) -> Result<EnvelopeState> {
    if !(well_width_a > 0.0 && mass_well > 0.0 && mass_barrier > 0.0) {
        return Err(Error::domain("well width and masses must be positive"));
    }
    if !(barrier_offset > 0.0) {
        return Err(Error::Solver(format!(
            "no bound {band:?} state: barrier offset {barrier_offset} eV"
        )));
    }
    let half = 0.5 * well_width_a;
    let matching = |e: f64| {
        let k = wavenumber(e, mass_well);
        let kappa = wavenumber(barrier_offset - e, mass_barrier);
        mass_barrier * k * (k * half).sin() - mass_well * kappa * (k * half).cos()
    };
    let top = barrier_offset.min(infinite_well_energy(well_width_a, mass_well));
    let energy = numerics::brent(matching, 0.0, top, 1e-14, 500).map_err(|e| {
        Error::Solver(format!(
            "ground state bracket failed (L = {well_width_a} Å, V = {barrier_offset} eV, m_w = {mass_well}, m_b = {mass_barrier}): {e}"
        ))
    })?;
    let shape = Shape {
        half_width: half,
        k_in: wavenumber(energy, mass_well),
        kappa: wavenumber(barrier_offset - energy, mass_barrier),
    };
    let half_span = half + DECAY_LENGTHS / shape.kappa;
    let (samples, grid_step) = sample(&shape, half_span);
    Ok(EnvelopeState {
        band,
        energy_above_band_edge: energy,
        samples,
        grid_step,
        shape,
    })
}

/// |⟨φ_c|φ_v⟩|² by trapezoid quadrature on the shared grid.
pub fn envelope_overlap(phi_c: &EnvelopeState, phi_v: &EnvelopeState) -> Result<f64> {
    if phi_c.samples.len() != phi_v.samples.len()
        || (phi_c.grid_step - phi_v.grid_step).abs() > 1e-12 * phi_c.grid_step
    {
        return Err(Error::domain(format!(
            "envelope grids differ ({} × {} Å vs {} × {} Å)",
            phi_c.samples.len(),
            phi_c.grid_step,
            phi_v.samples.len(),
            phi_v.grid_step
        )));
    }
    let s = trapezoid_product(&phi_c.samples, &phi_v.samples, phi_c.grid_step);
    Ok(s * s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QWStack {
    pub layers: QWLayerSpec,
    /// Resolved well material; its masses, Kane energy and index enter the rates.
    pub well: MaterialParams,
    /// Sheet area [cm²].
    pub s_qw: f64,
    pub overlap_sq: f64,
    /// [eV]
    pub e0_c: f64,
    /// [eV]
    pub e0_v: f64,
    /// Temperature the transition gap refers to [K].
    pub temperature: f64,
    /// Well gap + strain shift + e0_c + e0_v [eV], before carrier shrinkage.
    pub transition_gap: f64,
}

/// Solves both ground states of the well and assembles the stack.
/// Periods are identical, uncoupled wells.
pub fn build_stack(spec: &QWLayerSpec, table: &MaterialTable, temperature: f64, sheet_area_cm2: f64) -> Result<QWStack> {
    if !(spec.well_width > 0.0 && spec.barrier_width > 0.0) || spec.num_periods < 1 {
        return Err(Error::Configuration("well/barrier widths must be positive and periods >= 1".into()));
    }
    if !(sheet_area_cm2 > 0.0) {
        return Err(Error::Configuration("sheet area must be positive".into()));
    }
    let well = table.lookup(&spec.well_material)?;
    let barrier = table.lookup(&spec.barrier_material)?;
    let cb = ground_state_in(Band::Conduction, spec.well_width, spec.conduction_band_offset, well.m_e, barrier.m_e)?;
    let vb = ground_state_in(Band::Valence, spec.well_width, spec.valence_band_offset, well.m_hh, barrier.m_hh)?;
    let half_span = 0.5 * spec.well_width + DECAY_LENGTHS * cb.decay_length().max(vb.decay_length());
    let (cb, vb) = (cb.resampled(half_span), vb.resampled(half_span));
    let overlap_sq = envelope_overlap(&cb, &vb)?;
    let transition_gap =
        well.bandgap(temperature)? + spec.strain_shift + cb.energy_above_band_edge + vb.energy_above_band_edge;
    Ok(QWStack {
        layers: spec.clone(),
        well: well.clone(),
        s_qw: sheet_area_cm2,
        overlap_sq,
        e0_c: cb.energy_above_band_edge,
        e0_v: vb.energy_above_band_edge,
        temperature,
        transition_gap,
    })
}
