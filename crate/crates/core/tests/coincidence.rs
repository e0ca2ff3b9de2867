//! Statistical behavior of the coincidence Monte Carlo.

use tpespec::coincidence::{accidental_background, analyze_scan, fit_exponential, simulate, CoincidenceConfig};
use tpespec::config::default_coincidence;

fn whole_periods(lo: i64, hi: i64, period: f64) -> Vec<f64> {
    (lo..=hi).map(|k| k as f64 * period).collect()
}

#[test]
fn without_afterpulsing_both_delay_signs_match() {
    let cfg = CoincidenceConfig {
        p0_afterpulse: 0.0,
        rng_seed: 7,
        ..default_coincidence(7)
    };
    let delays = whole_periods(-20, 20, cfg.period);
    let r = simulate(&cfg, &delays).unwrap();
    let mean = |sel: &dyn Fn(f64) -> bool| {
        let idx: Vec<usize> = (0..delays.len()).filter(|&i| sel(delays[i])).collect();
        let m = idx.iter().map(|&i| r.coincidence_fraction[i]).sum::<f64>() / idx.len() as f64;
        let se = idx.iter().map(|&i| r.stderr[i].powi(2)).sum::<f64>().sqrt() / idx.len() as f64;
        (m, se)
    };
    let (pos, se_p) = mean(&|d| d > 0.0);
    let (neg, se_n) = mean(&|d| d < 0.0);
    let z = (pos - neg) / (se_p * se_p + se_n * se_n).sqrt();
    assert!(z.abs() < 3.0, "positive {pos} vs negative {neg}, z = {z}");
}

#[test]
fn negative_delays_agree_with_closed_form_background() {
    let cfg = default_coincidence(3);
    let delays = whole_periods(-40, 10, cfg.period);
    let r = simulate(&cfg, &delays).unwrap();
    let a = analyze_scan(&cfg, &r).unwrap();
    assert!((a.negative_mean - accidental_background(&cfg)).abs() < 3.0 * a.negative_stderr);
}

#[test]
fn off_grid_delays_show_no_correlation() {
    let cfg = default_coincidence(5);
    let r = simulate(&cfg, &[0.0, 2.5, 5.0, 17.0, -3.0]).unwrap();
    for i in 1..5 {
        // consistent with zero: below three standard errors of a single count
        let bound = 3.0 / r.si_singles as f64;
        assert!(r.coincidence_fraction[i] <= bound, "delay {}: {}", r.delays[i], r.coincidence_fraction[i]);
    }
}

#[test]
fn single_photon_efficiency_sets_zero_delay_fraction() {
    let cfg = CoincidenceConfig {
        p0_afterpulse: 0.0,
        dark_prob_si: 0.0,
        dark_prob_ingaas: 0.0,
        ..default_coincidence(11)
    };
    let r = simulate(&cfg, &[0.0]).unwrap();
    assert!((r.coincidence_fraction[0] - cfg.eta_ingaas).abs() < 3.0 * r.stderr[0]);
}

/// Decay constant of the positive-delay tail for the given trap lifetime.
/// Weak afterpulsing keeps the cascade of afterpulses-of-afterpulses small.
fn fitted_tau(tau: f64) -> f64 {
    let cfg = CoincidenceConfig {
        n_pulses: 100_000_000,
        p0_afterpulse: 0.01,
        tau_trap: tau,
        ..default_coincidence(11)
    };
    let d = whole_periods(1, 60, cfg.period);
    let r = simulate(&cfg, &d).unwrap();
    fit_exponential(&d, &r.coincidence_fraction, &r.stderr, 2.0, 2000.0).unwrap().tau
}

#[test]
fn decay_fit_recovers_trap_lifetime() {
    for tau in [25.0, 50.0, 100.0] {
        let fit = fitted_tau(tau);
        assert!((fit / tau - 1.0).abs() < 0.10, "tau {tau}: fitted {fit}");
    }
}
