//! Monochromator response and peak detection.

use serde::{Deserialize, Serialize};

use super::Spectrum;
use crate::error::{Error, Result};
use crate::units::{wavelength_from_energy, HC_EV_NM};

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;
/// Kernel truncation in standard deviations.
const KERNEL_SIGMAS: f64 = 8.0;

/// Convolves with a Gaussian of fixed FWHM in wavelength, i.e. an energy
/// width hc·Δλ/λ² that grows with photon energy. Each input bin spreads its
/// area over the kernel of its own width, renormalized on the grid, so the
/// trapezoid area is preserved.
pub fn convolve_instrument(spec: &Spectrum, resolution_nm: f64) -> Result<Spectrum> {
    if !(resolution_nm > 0.0) {
        return Err(Error::domain("resolution must be positive"));
    }
    let n = spec.grid.len();
    let span_nm = wavelength_from_energy(spec.grid[0])? - wavelength_from_energy(spec.grid[n - 1])?;
    if resolution_nm > span_nm {
        return Err(Error::domain(format!(
            "resolution {resolution_nm} nm exceeds the grid span of {span_nm:.1} nm"
        )));
    }
    let step = spec.step();
    let tw = |i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let mut out = vec![0.0; n];
    let mut kernel = Vec::new();
    for (j, (&e, &v)) in spec.grid.iter().zip(&spec.values).enumerate() {
        if v == 0.0 {
            continue;
        }
        let sigma = resolution_nm * e * e / HC_EV_NM / FWHM_PER_SIGMA;
        let reach = ((KERNEL_SIGMAS * sigma / step).ceil() as usize).min(n);
        let (lo, hi) = (j.saturating_sub(reach), (j + reach).min(n - 1));
        kernel.clear();
        let mut norm = 0.0;
        for i in lo..=hi {
            let d = (i as f64 - j as f64) * step / sigma;
            let k = (-0.5 * d * d).exp();
            kernel.push(k);
            norm += tw(i) * k;
        }
        let mass = tw(j) * v / norm;
        for (i, k) in (lo..=hi).zip(&kernel) {
            out[i] += mass * k;
        }
    }
    let mut result = spec.clone();
    result.values = out;
    result.meta.resolution_nm = Some(resolution_nm);
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// [eV]
    pub energy: f64,
    pub height: f64,
    /// Full width at half maximum [eV]; limited by the grid or the
    /// neighboring peak where the profile does not fall to half height.
    pub fwhm: f64,
}

/// Local maxima of a spectrum (grid ends included), tallest first. Two
/// maxima closer than the Sparrow limit of the broader one, 2σ = FWHM/1.177,
/// show no dip between them and are reported as one, at the taller.
pub fn find_peaks(spec: &Spectrum) -> Vec<Peak> {
    let v = &spec.values;
    let g = &spec.grid;
    let n = v.len();
    let step = spec.step();
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < n {
        let rises = i == 0 || v[i] > v[i - 1];
        // walk across a flat top
        let mut j = i;
        while j + 1 < n && v[j + 1] == v[i] {
            j += 1;
        }
        let falls = j + 1 == n || v[j + 1] < v[i];
        if rises && falls && v[i] > 0.0 && n > 1 {
            let mid = (i + j) / 2;
            let (mut e, mut h) = (g[mid], v[mid]);
            if i == j && i > 0 && i + 1 < n {
                let denom = v[i - 1] - 2.0 * v[i] + v[i + 1];
                if denom < 0.0 {
                    let dx = 0.5 * (v[i - 1] - v[i + 1]) / denom;
                    e += dx * step;
                    h -= 0.25 * (v[i - 1] - v[i + 1]) * dx;
                }
            }
            peaks.push(Peak {
                energy: e,
                height: h,
                fwhm: full_width(v, g, mid),
            });
        }
        i = j + 1;
    }
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height));
    let mut kept: Vec<Peak> = Vec::new();
    for p in peaks {
        let resolved = |q: &Peak| (q.energy - p.energy).abs() >= q.fwhm.max(p.fwhm) * SPARROW_PER_FWHM;
        if kept.iter().all(resolved) {
            kept.push(p);
        }
    }
    kept
}

/// 2σ / FWHM of a Gaussian.
const SPARROW_PER_FWHM: f64 = 2.0 / FWHM_PER_SIGMA;

/// Half width on one side of `i`: `Some` where the profile falls to half
/// height, `None` where it first turns up into a neighbor or ends.
fn half_width(v: &[f64], g: &[f64], i: usize, side: &mut dyn Iterator<Item = usize>) -> Option<f64> {
    let half = 0.5 * v[i];
    let mut prev = i;
    for j in side {
        if v[j] <= half {
            let t = (v[prev] - half) / (v[prev] - v[j]);
            return Some((g[prev] + t * (g[j] - g[prev]) - g[i]).abs());
        }
        if v[j] > v[prev] {
            return None;
        }
        prev = j;
    }
    None
}

/// FWHM, taken as twice the clean side when the other side is cut off by a
/// neighboring peak or the grid edge.
fn full_width(v: &[f64], g: &[f64], i: usize) -> f64 {
    let left = half_width(v, g, i, &mut (0..i).rev());
    let right = half_width(v, g, i, &mut (i + 1..v.len()));
    match (left, right) {
        (Some(l), Some(r)) => l + r,
        (Some(x), None) | (None, Some(x)) => 2.0 * x,
        (None, None) => g[g.len() - 1] - g[0],
    }
}
