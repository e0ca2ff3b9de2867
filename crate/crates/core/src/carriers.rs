//! Carrier statistics under injection: quasi-Fermi levels, occupations,
//! band-gap shrinkage and the pump-power calibration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::MaterialParams;
use crate::numerics;
use crate::units::{kt_ev, E_CHARGE, HBAR, M0};

/// Joyce-Dixon coefficients A1..A4.
pub const JOYCE_DIXON: [f64; 4] = [
    0.353_553_390_593_273_8, // 1/sqrt(8)
    -4.950_09e-3,
    1.483_86e-4,
    -4.425_63e-6,
];

/// Upper end of the Joyce-Dixon series' validity in n/N_eff.
pub const JOYCE_DIXON_MAX_RATIO: f64 = 10.0;

/// Default dephasing rate, a 100 fs decoherence time [s⁻¹].
pub const DEFAULT_GAMMA: f64 = 1e13;

/// Pump calibration: 100 mW on a 30 µm spot gives 1.2e18 cm⁻³.
/// Units: cm⁻³ · µm² / W.
pub const PUMP_KAPPA: f64 = 1.2e18 * std::f64::consts::PI * 15.0 * 15.0 / 0.1;
/// Largest pump power the linear calibration is trusted for [W].
pub const PUMP_MAX_W: f64 = 0.25;

/// Which density of states the quasi-Fermi levels refer to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Confinement {
    Bulk,
    /// Single subband per band in a well of the given width [Å].
    Well { width_a: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarrierState {
    /// Electron density [cm⁻³] (volume density inside a well).
    pub n: f64,
    /// Hole density [cm⁻³]; equal to `n`.
    pub p: f64,
    /// Temperature [K].
    pub t: f64,
    /// (E_Fc − E_c)/kT.
    pub eta_c: f64,
    /// (E_v − E_Fv)/kT, measured into the valence band.
    pub eta_v: f64,
    /// Pair energy at k = 0 after shrinkage and calibration shifts [eV].
    pub eg_eff: f64,
    /// Dephasing rate Γ [s⁻¹].
    pub gamma: f64,
    pub confinement: Confinement,
}

impl CarrierState {
    pub fn kt(&self) -> f64 {
        kt_ev(self.t)
    }

    /// Same carriers with the k = 0 pair energy moved by `shift` [eV].
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        let eg_eff = self.eg_eff + shift;
        if !(eg_eff > 0.0) {
            return Err(Error::Configuration(format!(
                "shifted gap {eg_eff} eV is not positive"
            )));
        }
        Ok(CarrierState { eg_eff, ..self.clone() })
    }

    /// Copy with a different dephasing rate.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(CarrierState { gamma, ..self.clone() })
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::domain(format!(
            "dephasing rate must be positive and finite, got {gamma}"
        )));
    }
    Ok(())
}

/// Effective band-edge density of states 2(m kT / 2πħ²)^{3/2} [cm⁻³].
pub fn effective_dos(mass: f64, t: f64) -> f64 {
    let kt_j = kt_ev(t) * E_CHARGE;
    let base = mass * M0 * kt_j / (2.0 * std::f64::consts::PI * HBAR * HBAR);
    2.0 * base.powf(1.5) * 1e-6
}

/// Two-dimensional subband density m kT/(πħ²) [cm⁻²].
pub fn effective_dos_2d(mass: f64, t: f64) -> f64 {
    let kt_j = kt_ev(t) * E_CHARGE;
    mass * M0 * kt_j / (std::f64::consts::PI * HBAR * HBAR) * 1e-4
}

/// Reduced Fermi level from the Joyce-Dixon series.
pub fn joyce_dixon_eta(n: f64, n_eff: f64) -> Result<f64> {
    if !(n > 0.0 && n_eff > 0.0) {
        return Err(Error::domain(format!("need n > 0 and N_eff > 0 (n = {n}, N_eff = {n_eff})")));
    }
    let u = n / n_eff;
    if u > JOYCE_DIXON_MAX_RATIO {
        return Err(Error::Validity { ratio: u });
    }
    let series = JOYCE_DIXON
        .iter()
        .enumerate()
        .map(|(m, a)| a * u.powi(m as i32 + 1))
        .sum::<f64>();
    Ok(u.ln() + series)
}

fn fermi(y: f64) -> f64 {
    // 1/(1+e^y) without overflow
    if y > 0.0 {
        let e = (-y).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + y.exp())
    }
}

/// Normalized Fermi-Dirac integral (2/√π)·F_{1/2}(η), so that
/// n = N_eff · fd_half(η).
pub fn fd_half(eta: f64) -> f64 {
    // x = t²  →  ∫ 2t² / (1 + e^{t² − η}) dt
    let t_max = (eta.max(0.0) + 60.0).sqrt();
    let integrand = |t: f64| 2.0 * t * t * fermi(t * t - eta);
    let split = eta.max(0.0).sqrt();
    let val = if split > 0.0 {
        numerics::integrate(integrand, 0.0, split, 1e-12, 0.0)
            + numerics::integrate(integrand, split, t_max, 1e-12, 0.0)
    } else {
        numerics::integrate(integrand, 0.0, t_max, 1e-12, 0.0)
    };
    val * 2.0 / std::f64::consts::PI.sqrt()
}

/// Reduced Fermi level by numerically inverting the Fermi-Dirac integral.
pub fn exact_eta(n: f64, n_eff: f64) -> Result<f64> {
    if !(n > 0.0 && n_eff > 0.0) {
        return Err(Error::domain(format!("need n > 0 and N_eff > 0 (n = {n}, N_eff = {n_eff})")));
    }
    let target = (n / n_eff).ln();
    let (mut lo, mut hi) = (-40.0, 40.0);
    // extend for extreme inputs; the physical range never needs it
    while fd_half(lo).ln() > target && lo > -700.0 {
        lo *= 2.0;
    }
    while fd_half(hi).ln() < target && hi < 1e6 {
        hi *= 2.0;
    }
    numerics::brent(|eta| fd_half(eta).ln() - target, lo, hi, 1e-11, 200)
}

fn eta_for(n: f64, n_eff: f64) -> Result<f64> {
    if n == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    match joyce_dixon_eta(n, n_eff) {
        Err(Error::Validity { .. }) => exact_eta(n, n_eff),
        other => other,
    }
}

/// Band gap after injection-induced shrinkage, ΔE = C_bgr·(n/1e18)^{1/3}.
pub fn renormalized_gap(material: &MaterialParams, n: f64, t: f64) -> Result<f64> {
    if !(n >= 0.0) {
        return Err(Error::domain(format!("density must be non-negative, got {n}")));
    }
    let eg = material.bandgap(t)? - material.c_bgr * (n / 1e18).cbrt();
    if !(eg > 0.0) {
        return Err(Error::Configuration(format!(
            "renormalized gap {eg} eV is not positive at n = {n:e} cm^-3"
        )));
    }
    Ok(eg)
}

/// Bulk carrier state with n = p.
pub fn make_carrier_state(material: &MaterialParams, n: f64, t: f64, gamma: f64) -> Result<CarrierState> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::domain(format!("density must be non-negative, got {n}")));
    }
    if !(t > 0.0) {
        return Err(Error::domain(format!("temperature must be positive, got {t}")));
    }
    check_gamma(gamma)?;
    let nc = effective_dos(material.m_e, t);
    let nv = effective_dos(material.m_hh, t);
    Ok(CarrierState {
        n,
        p: n,
        t,
        eta_c: eta_for(n, nc)?,
        eta_v: eta_for(n, nv)?,
        eg_eff: renormalized_gap(material, n, t)?,
        gamma,
        confinement: Confinement::Bulk,
    })
}

/// Carrier state in a quantum well. `n` is the volume density in the well
/// [cm⁻³]; the sheet density n·L sets the 2D quasi-Fermi levels, which have
/// the closed form η = ln(exp(n_s/N_2D) − 1). `transition_gap` is the
/// unrenormalized ground-state pair energy [eV].
pub fn make_qw_carrier_state(
    well: &MaterialParams,
    width_a: f64,
    transition_gap: f64,
    n: f64,
    t: f64,
    gamma: f64,
) -> Result<CarrierState> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::domain(format!("density must be non-negative, got {n}")));
    }
    if !(t > 0.0) {
        return Err(Error::domain(format!("temperature must be positive, got {t}")));
    }
    check_gamma(gamma)?;
    let sheet = n * width_a * 1e-8;
    let eta2d = |mass: f64| {
        if sheet == 0.0 {
            f64::NEG_INFINITY
        } else {
            let x = sheet / effective_dos_2d(mass, t);
            // ln(e^x − 1), stable for both small and large x
            if x > 30.0 {
                x + (-(-x).exp()).ln_1p()
            } else {
                x.exp_m1().ln()
            }
        }
    };
    let eg_eff = transition_gap - well.c_bgr * (n / 1e18).cbrt();
    if !(eg_eff > 0.0) {
        return Err(Error::Configuration(format!("renormalized transition gap {eg_eff} eV is not positive")));
    }
    Ok(CarrierState {
        n,
        p: n,
        t,
        eta_c: eta2d(well.m_e),
        eta_v: eta2d(well.m_hh),
        eg_eff,
        gamma,
        confinement: Confinement::Well { width_a },
    })
}

/// Kinetic energy ħ²k²/2m [eV] for k in m⁻¹ and mass in m0.
#[inline]
pub fn kinetic_ev(k: f64, mass: f64) -> f64 {
    HBAR * HBAR * k * k / (2.0 * mass * M0) / E_CHARGE
}

/// Wavevector [m⁻¹] with kinetic energy `e` [eV] for mass `mass` [m0].
#[inline]
pub fn wavevector(e: f64, mass: f64) -> f64 {
    (2.0 * mass * M0 * e.max(0.0) * E_CHARGE).sqrt() / HBAR
}

/// Occupations at crystal momentum `k` [m⁻¹]:
/// `f1` is the conduction-band electron occupation at E_c + ħ²k²/2m_e,
/// `f2` the valence-band electron occupation at E_v − ħ²k²/2m_hh.
pub fn occupation_factors(state: &CarrierState, material: &MaterialParams, k: f64) -> (f64, f64) {
    let kt = state.kt();
    let f1 = fermi(kinetic_ev(k, material.m_e) / kt - state.eta_c);
    let hole = fermi(kinetic_ev(k, material.m_hh) / kt - state.eta_v);
    (f1, 1.0 - hole)
}

/// Emission weight f_c·(1 − f_v): an electron in the upper (conduction)
/// state and an empty lower (valence) state. This is the f₂(1 − f₁) factor
/// of the two-photon matrix element with level 2 the conduction band.
pub fn emission_weight(state: &CarrierState, material: &MaterialParams, k: f64) -> f64 {
    let kt = state.kt();
    fermi(kinetic_ev(k, material.m_e) / kt - state.eta_c) * fermi(kinetic_ev(k, material.m_hh) / kt - state.eta_v)
}

/// Carrier density from optical pump power; a calibration, not a transport
/// model. `p_pump` in W, spot diameter in µm.
pub fn pump_to_density(p_pump: f64, spot_diameter_um: f64, _material: &MaterialParams) -> Result<f64> {
    if !(p_pump >= 0.0) {
        return Err(Error::domain(format!("pump power must be non-negative, got {p_pump}")));
    }
    if !(spot_diameter_um > 0.0) {
        return Err(Error::domain("spot diameter must be positive"));
    }
    if p_pump > PUMP_MAX_W {
        return Err(Error::domain(format!(
            "pump power {p_pump} W above the {PUMP_MAX_W} W calibrated range; give the density directly"
        )));
    }
    let area = std::f64::consts::PI * 0.25 * spot_diameter_um * spot_diameter_um;
    Ok(PUMP_KAPPA * p_pump / area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::lookup;
    use proptest::prelude::*;

    #[test]
    fn joyce_dixon_examples() {
        assert!((joyce_dixon_eta(1.0, 1.0).unwrap() - 0.3487).abs() < 1e-4);
        assert!((joyce_dixon_eta(0.01, 1.0).unwrap() - (-4.6016)).abs() < 1e-4);
        let u: f64 = 1e-9;
        assert!((joyce_dixon_eta(u, 1.0).unwrap() - u.ln()).abs() < 1e-9);
        assert!(matches!(joyce_dixon_eta(11.0, 1.0), Err(Error::Validity { .. })));
        assert!(joyce_dixon_eta(0.0, 1.0).is_err());
    }

    #[test]
    fn fd_half_known_values() {
        // (2/√π)·Γ(3/2)(1 − 2^{-1/2})ζ(3/2)
        assert!((fd_half(0.0) - 0.765_147_024).abs() < 1e-8);
        // nondegenerate limit e^η
        assert!((fd_half(-20.0) / (-20.0f64).exp() - 1.0).abs() < 1e-8);
        // degenerate limit (4/3√π) η^{3/2}(1 + π²/8 η⁻²)
        let eta = 60.0f64;
        let sommerfeld = 4.0 / (3.0 * std::f64::consts::PI.sqrt()) * eta.powf(1.5)
            * (1.0 + std::f64::consts::PI.powi(2) / (8.0 * eta * eta));
        assert!((fd_half(eta) / sommerfeld - 1.0).abs() < 1e-6);
    }

    #[test]
    fn exact_eta_examples() {
        assert!(exact_eta(0.7653, 1.0).unwrap().abs() < 1e-3);
        assert!(exact_eta(fd_half(0.0), 1.0).unwrap().abs() < 1e-9);
        assert!((exact_eta(1e-6, 1.0).unwrap() - (1e-6f64).ln()).abs() < 1e-5);
        // large degeneracy beyond the series
        assert!(exact_eta(50.0, 1.0).unwrap() > 10.0);
    }

    #[test]
    fn joyce_dixon_agrees_with_exact_sweep() {
        for i in 0..=60 {
            let u = 10f64.powf(-2.0 + 3.0 * i as f64 / 60.0);
            let d = (joyce_dixon_eta(u, 1.0).unwrap() - exact_eta(u, 1.0).unwrap()).abs();
            assert!(d < 0.01, "u = {u}: {d}");
        }
    }

    #[test]
    fn gaas_state_degeneracy() {
        let g = lookup("GaAs").unwrap();
        let s = make_carrier_state(&g, 1.2e18, 330.0, DEFAULT_GAMMA).unwrap();
        assert!(s.eta_c > 0.0);
        assert!(s.eta_v < 0.0);
        let (f1, _) = occupation_factors(&s, &g, 0.0);
        assert!(f1 > 0.5 && f1 < 1.0);
        let s2 = make_carrier_state(&g, 2e18, 330.0, DEFAULT_GAMMA).unwrap();
        assert!(s2.eta_c > s.eta_c);
        assert!(s.eg_eff <= g.bandgap(330.0).unwrap());
    }

    #[test]
    fn empty_bands() {
        let g = lookup("GaAs").unwrap();
        let s = make_carrier_state(&g, 0.0, 300.0, DEFAULT_GAMMA).unwrap();
        assert_eq!(s.eta_c, f64::NEG_INFINITY);
        for k in [0.0, 1e8, 1e9] {
            assert_eq!(emission_weight(&s, &g, k), 0.0);
        }
        let tiny = make_carrier_state(&g, 1e6, 300.0, DEFAULT_GAMMA).unwrap();
        assert!(emission_weight(&tiny, &g, 0.0) < 1e-20);
    }

    #[test]
    fn invalid_state_inputs() {
        let g = lookup("GaAs").unwrap();
        assert!(make_carrier_state(&g, 1e18, 300.0, 0.0).is_err());
        assert!(make_carrier_state(&g, -1.0, 300.0, 1e13).is_err());
        assert!(make_carrier_state(&g, 1e18, 0.0, 1e13).is_err());
    }

    #[test]
    fn cold_limit_is_a_step() {
        let g = lookup("GaAs").unwrap();
        let s = make_carrier_state(&g, 1e18, 2.0, DEFAULT_GAMMA).unwrap();
        let k_f = wavevector(s.eta_c * s.kt(), g.m_e);
        let (below, _) = occupation_factors(&s, &g, 0.9 * k_f);
        let (above, _) = occupation_factors(&s, &g, 1.1 * k_f);
        assert!(below > 1.0 - 1e-6 && above < 1e-6);
        // zero-temperature Fermi wavevector (3π²n)^{1/3}
        let k3d = (3.0 * std::f64::consts::PI.powi(2) * 1e18 * 1e6).cbrt();
        assert!((k_f / k3d - 1.0).abs() < 0.01);
    }

    #[test]
    fn renormalization() {
        let g = lookup("GaAs").unwrap();
        assert_eq!(renormalized_gap(&g, 0.0, 330.0).unwrap(), g.bandgap(330.0).unwrap());
        let eg = g.bandgap(330.0).unwrap();
        let d1 = eg - renormalized_gap(&g, 1.2e18, 330.0).unwrap();
        let d2 = eg - renormalized_gap(&g, 2e18, 330.0).unwrap();
        assert!((d2 / d1 - (2.0f64 / 1.2).cbrt()).abs() < 1e-12);
        assert!(((2.0f64 / 1.2).cbrt() - 1.186).abs() < 1e-3);
        let mut huge = g.clone();
        huge.c_bgr = 10.0;
        assert!(matches!(renormalized_gap(&huge, 1e18, 300.0), Err(Error::Configuration(_))));
    }

    #[test]
    fn pump_calibration() {
        let g = lookup("GaAs").unwrap();
        assert!((pump_to_density(0.1, 30.0, &g).unwrap() / 1.2e18 - 1.0).abs() < 1e-12);
        assert_eq!(pump_to_density(0.0, 30.0, &g).unwrap(), 0.0);
        assert!((pump_to_density(0.18, 30.0, &g).unwrap() / 2.16e18 - 1.0).abs() < 1e-12);
        assert!(pump_to_density(0.3, 30.0, &g).is_err());
    }

    #[test]
    fn quantum_well_statistics_closed_form() {
        let w = lookup("GaInP-well").unwrap();
        let s = make_qw_carrier_state(&w, 50.0, 1.9, 6e18, 300.0, DEFAULT_GAMMA).unwrap();
        let sheet = 6e18 * 50e-8;
        let back = effective_dos_2d(w.m_e, 300.0) * s.eta_c.exp().ln_1p();
        assert!((back / sheet - 1.0).abs() < 1e-12);
        assert!(s.eg_eff < 1.9);
    }

    proptest! {
        #[test]
        fn occupations_bounded_and_monotone(n in 1e15f64..5e19, t in 50.0f64..450.0, k in 0.0f64..2e9) {
            let g = lookup("GaAs").unwrap();
            let s = make_carrier_state(&g, n, t, DEFAULT_GAMMA).unwrap();
            let (f1, f2) = occupation_factors(&s, &g, k);
            let (g1, g2) = occupation_factors(&s, &g, k * 1.1 + 1e6);
            prop_assert!((0.0..=1.0).contains(&f1) && (0.0..=1.0).contains(&f2));
            prop_assert!(g1 <= f1 && g2 >= f2);
            let w = emission_weight(&s, &g, k);
            prop_assert!((0.0..=1.0).contains(&w));
            prop_assert!((w - f1 * (1.0 - f2)).abs() < 1e-12);
        }

        #[test]
        fn state_monotone_in_density(n in 1e15f64..2e19, factor in 1.0f64..3.0) {
            let g = lookup("GaAs").unwrap();
            let a = make_carrier_state(&g, n, 330.0, DEFAULT_GAMMA).unwrap();
            let b = make_carrier_state(&g, n * factor, 330.0, DEFAULT_GAMMA).unwrap();
            prop_assert!(b.eta_c >= a.eta_c && b.eta_v >= a.eta_v);
            prop_assert!(b.eg_eff <= a.eg_eff);
        }
    }
}
