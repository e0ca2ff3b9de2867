//! Independent reference computations for the statistics, the well solver
//! and the two-photon matrix element.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tpespec::carriers::{effective_dos, exact_eta, joyce_dixon_eta, make_carrier_state, DEFAULT_GAMMA};
use tpespec::materials::lookup;
use tpespec::quantumwell::{ground_state, infinite_well_energy};
use tpespec::spectra::{matrix_element_sq, photon_dos};

mod common;
use common::{eta_by_bisection, shooting_ground_state, C, EPS, HB, KB, ME, Q};

#[test]
fn joyce_dixon_tracks_fermi_dirac_inversion() {
    let gaas = lookup("GaAs").unwrap();
    for t in [200.0, 300.0, 330.0] {
        let nc = effective_dos(gaas.m_e, t);
        let mut worst = 0.0f64;
        for i in 0..=40 {
            let ratio = 10f64.powf(-2.0 + 3.0 * i as f64 / 40.0);
            let reference = eta_by_bisection(ratio);
            let jd = joyce_dixon_eta(ratio * nc, nc).unwrap();
            let exact = exact_eta(ratio * nc, nc).unwrap();
            assert!((exact - reference).abs() < 1e-7, "exact inversion off at {ratio}: {exact} vs {reference}");
            worst = worst.max((jd - reference).abs());
        }
        assert!(worst < 0.01, "Joyce-Dixon deviation {worst} at {t} K");
    }
}

#[test]
fn effective_dos_matches_closed_form() {
    // 2(2π m kT/h²)^{3/2}
    let h = 2.0 * std::f64::consts::PI * HB;
    let reference = 2.0 * (2.0 * std::f64::consts::PI * 0.067 * ME * KB * 300.0 / (h * h)).powf(1.5) * 1e-6;
    let got = effective_dos(0.067, 300.0);
    assert!((got / reference - 1.0).abs() < 1e-8, "{got} vs {reference}");
}

#[test]
fn well_ground_state_matches_shooting_on_random_wells() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let l = rng.gen_range(30.0..150.0);
        let v = rng.gen_range(0.05..0.6);
        let m_w = rng.gen_range(0.05..0.25);
        let m_b = rng.gen_range(m_w..0.35);
        let solved = ground_state(l, v, m_w, m_b).unwrap().energy_above_band_edge;
        let shot = shooting_ground_state(l, v, m_w, m_b);
        assert!(
            (solved - shot).abs() < 1e-6,
            "L={l} V={v} m_w={m_w} m_b={m_b}: {solved} vs {shot}"
        );
    }
}

#[test]
fn deepening_barrier_approaches_infinite_well_from_below() {
    let inf = infinite_well_energy(50.0, 0.067);
    let mut last = 0.0;
    for v in [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0, 1e3, 1e4] {
        let e = ground_state(50.0, v, 0.067, 0.067).unwrap().energy_above_band_edge;
        assert!(e > last && e < inf, "V = {v}: {e}");
        last = e;
    }
    assert!((inf - last) / inf < 0.01);
}

#[test]
fn photon_dos_matches_hand_arithmetic() {
    let e = 0.8;
    let n = 3.4;
    let w = e * Q / HB;
    let reference = w * w * n * n * n / (8.0 * std::f64::consts::PI.powi(3) * C * C * C);
    // the typed ħ carries ten significant digits
    assert!((photon_dos(e, n) / reference - 1.0).abs() < 1e-8);
    // quadratic in energy, cubic in index
    assert!((photon_dos(2.0 * e, n) / photon_dos(e, n) - 4.0).abs() < 1e-12);
    assert!((photon_dos(e, 2.0 * n) / photon_dos(e, n) - 8.0).abs() < 1e-12);
}

#[test]
fn matrix_element_matches_hand_arithmetic() {
    let gaas = lookup("GaAs").unwrap();
    let state = make_carrier_state(&gaas, 1.2e18, 330.0, DEFAULT_GAMMA).unwrap();
    let (e1, e21) = (0.7, 1.62);
    let k = 2.0e8;
    let pcv2 = 0.5 * ME * gaas.ep * Q;
    let pi = std::f64::consts::PI;
    let pref = (Q / ME).powi(4) * pcv2 / (2.0 * pi.powi(5) * EPS * EPS * C.powi(6)) / (gaas.m_r * gaas.m_r);
    let (w1, w2) = (e1 * Q / HB, (e21 - e1) * Q / HB);
    let g = DEFAULT_GAMMA;
    let re = g / (g * g + w1 * w1) + g / (g * g + w2 * w2);
    let im = w1 / (g * g + w1 * w1) + w2 / (g * g + w2 * w2);
    let n1 = gaas.refractive_index(e1).unwrap();
    let n2 = gaas.refractive_index(e21 - e1).unwrap();
    let kt = KB * 330.0 / Q;
    let kin = |m: f64| HB * HB * k * k / (2.0 * m * ME) / Q;
    let fc = 1.0 / (1.0 + (kin(gaas.m_e) / kt - state.eta_c).exp());
    let holes = 1.0 / (1.0 + (kin(gaas.m_hh) / kt - state.eta_v).exp());
    let reference = pref * n1 * n2 * (re * re + im * im) * w1 * w2 * fc * holes;
    let got = matrix_element_sq(e1, e21, k, &state, &gaas).unwrap();
    assert!((got / reference - 1.0).abs() < 1e-9, "{got} vs {reference}");
}
