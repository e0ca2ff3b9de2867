//! Invariants of the physics modules over randomized inputs.

use proptest::prelude::*;
use tpespec::carriers::{make_carrier_state, make_qw_carrier_state, DEFAULT_GAMMA};
use tpespec::coincidence::{afterpulse_prob, simulate, CoincidenceConfig};
use tpespec::materials::{lookup, MaterialTable, QWLayerSpec};
use tpespec::quantumwell::{build_stack, ground_state, infinite_well_energy};
use tpespec::spectra::{
    convolve_instrument, find_peaks, matrix_element_sq, spontaneous_spectrum, uniform_grid, CollectionGeometry, Spectrum,
    SpectrumKind, SpectrumMeta, System,
};
use tpespec::units::{energy_from_wavelength, wavelength_from_energy};

fn bulk_system() -> System {
    System::Bulk { material: lookup("GaAs").unwrap() }
}

fn geometry() -> CollectionGeometry {
    CollectionGeometry::new(0.01, 0.3, 7e-10).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wavelength_round_trip(e in 0.1f64..5.0) {
        let back = energy_from_wavelength(wavelength_from_energy(e).unwrap()).unwrap();
        prop_assert!((back / e - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quasi_fermi_levels_rise_with_density(n in 1e16f64..5e18, t in 150.0f64..450.0) {
        let gaas = lookup("GaAs").unwrap();
        let a = make_carrier_state(&gaas, n, t, DEFAULT_GAMMA).unwrap();
        let b = make_carrier_state(&gaas, 1.1 * n, t, DEFAULT_GAMMA).unwrap();
        prop_assert!(b.eta_c > a.eta_c && b.eta_v > a.eta_v);
        prop_assert!(b.eg_eff < a.eg_eff);
    }

    #[test]
    fn spontaneous_spectrum_is_positive_and_finite(
        n in 3e17f64..5e18,
        t in 250.0f64..350.0,
        gamma in 1e12f64..1e14,
    ) {
        let gaas = lookup("GaAs").unwrap();
        let state = make_carrier_state(&gaas, n, t, gamma).unwrap().shifted(0.17).unwrap();
        let grid = uniform_grid(0.4, 1.2, 41).unwrap();
        let spec = spontaneous_spectrum(&state, &bulk_system(), &geometry(), &grid).unwrap();
        prop_assert!(spec.values.iter().all(|v| v.is_finite() && *v >= 0.0));
        prop_assert!(spec.values.iter().any(|v| *v > 0.0));
    }

    #[test]
    fn matrix_element_is_exchange_symmetric(frac in 0.01f64..0.99, e21 in 1.3f64..1.8, k in 0.0f64..5e8) {
        let gaas = lookup("GaAs").unwrap();
        let state = make_carrier_state(&gaas, 1.2e18, 330.0, DEFAULT_GAMMA).unwrap();
        let e1 = frac * e21;
        let a = matrix_element_sq(e1, e21, k, &state, &gaas).unwrap();
        let b = matrix_element_sq(e21 - e1, e21, k, &state, &gaas).unwrap();
        prop_assert!(a >= 0.0 && (a - b).abs() <= 1e-12 * a.abs().max(1e-300));
    }

    #[test]
    fn convolution_preserves_area(
        center in 0.7f64..1.0,
        width in 0.005f64..0.1,
        resolution in 0.5f64..40.0,
    ) {
        let grid = uniform_grid(0.5, 1.2, 701).unwrap();
        let values: Vec<f64> = grid.iter().map(|e| (-(e - center).powi(2) / (2.0 * width * width)).exp()).collect();
        let gaas = lookup("GaAs").unwrap();
        let state = make_carrier_state(&gaas, 1e18, 300.0, DEFAULT_GAMMA).unwrap();
        let spec = Spectrum {
            grid,
            values,
            kind: SpectrumKind::SpontaneousTpeBulk,
            meta: SpectrumMeta { state, system: bulk_system(), geometry: geometry(), stimulation: None, resolution_nm: None },
        };
        let conv = convolve_instrument(&spec, resolution).unwrap();
        prop_assert!((conv.area() / spec.area() - 1.0).abs() < 1e-6);
        for p in find_peaks(&conv) {
            prop_assert!(p.energy >= 0.5 && p.energy <= 1.2 && p.fwhm > 0.0);
        }
    }

    #[test]
    fn ground_state_lies_below_both_limits(l in 20.0f64..200.0, v in 0.02f64..1.0, m_w in 0.04f64..0.3, m_b in 0.04f64..0.4) {
        let e = ground_state(l, v, m_w, m_b).unwrap().energy_above_band_edge;
        prop_assert!(e > 0.0 && e < v && e < infinite_well_energy(l, m_w));
        let deeper = ground_state(l, 1.5 * v, m_w, m_b).unwrap().energy_above_band_edge;
        prop_assert!(deeper > e);
        let wider = ground_state(1.2 * l, v, m_w, m_b).unwrap().energy_above_band_edge;
        prop_assert!(wider < e);
    }

    #[test]
    fn well_overlap_is_a_probability(width in 30.0f64..120.0, cbo in 0.1f64..0.5, vbo in 0.05f64..0.3) {
        let spec = QWLayerSpec {
            well_width: width,
            barrier_width: 55.0,
            well_material: "GaInP-well".into(),
            barrier_material: "AlGaInP-barrier".into(),
            conduction_band_offset: cbo,
            valence_band_offset: vbo,
            num_periods: 4,
            strain_shift: 0.0,
        };
        let stack = build_stack(&spec, &MaterialTable::shipped(), 300.0, 1e-4).unwrap();
        prop_assert!(stack.overlap_sq > 0.5 && stack.overlap_sq <= 1.0 + 1e-9);
        let s = make_qw_carrier_state(&stack.well, width, stack.transition_gap, 6e18, 300.0, DEFAULT_GAMMA).unwrap();
        prop_assert!(s.eg_eff < stack.transition_gap);
    }

    #[test]
    fn afterpulse_probability_decays(dt in 0.0f64..1e3, p0 in 0.0f64..1.0, tau in 1.0f64..200.0) {
        let p = afterpulse_prob(dt, p0, tau);
        prop_assert!(p <= p0 && p >= 0.0);
        prop_assert!(afterpulse_prob(dt + 1.0, p0, tau) <= p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn coincidence_fractions_are_probabilities_and_peak_at_zero(
        pair in 0.005f64..0.05,
        eta_si in 0.1f64..0.8,
        eta_ig in 0.05f64..0.5,
        p0 in 0.0f64..0.1,
        seed in any::<u64>(),
    ) {
        let cfg = CoincidenceConfig {
            pulse_width: 10.0,
            period: 10.0,
            n_pulses: 100_000,
            pair_prob_per_pulse: pair,
            eta_si,
            eta_ingaas: eta_ig,
            dark_prob_si: 1e-5,
            dark_prob_ingaas: 1e-3,
            p0_afterpulse: p0,
            tau_trap: 50.0,
            rng_seed: seed,
        };
        let delays: Vec<f64> = (-5..=10).map(|k| 10.0 * k as f64).collect();
        let r = simulate(&cfg, &delays).unwrap();
        let zero = r.coincidence_fraction[5];
        for (f, e) in r.coincidence_fraction.iter().zip(&r.stderr) {
            prop_assert!((0.0..=1.0).contains(f) && *e >= 0.0);
            prop_assert!(zero >= *f);
        }
        prop_assert_eq!(r, simulate(&cfg, &delays).unwrap());
    }
}
