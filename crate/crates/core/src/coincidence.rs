//! Monte Carlo of the pulsed two-detector coincidence measurement: a
//! free-running Si counter and a gated InGaAs counter with afterpulsing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Afterpulse probabilities below this are treated as zero.
pub const AFTERPULSE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceConfig {
    /// [ns]
    pub pulse_width: f64,
    /// Drive and gate period [µs].
    pub period: f64,
    pub n_pulses: u64,
    /// Probability per pulse that a pair is emitted into the collection path.
    pub pair_prob_per_pulse: f64,
    pub eta_si: f64,
    pub eta_ingaas: f64,
    /// Dark count probability per pulse-length window.
    pub dark_prob_si: f64,
    /// Dark count probability per gate.
    pub dark_prob_ingaas: f64,
    pub p0_afterpulse: f64,
    /// Trap lifetime [µs].
    pub tau_trap: f64,
    pub rng_seed: u64,
}

impl CoincidenceConfig {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("pair_prob_per_pulse", self.pair_prob_per_pulse),
            ("eta_si", self.eta_si),
            ("eta_ingaas", self.eta_ingaas),
            ("dark_prob_si", self.dark_prob_si),
            ("dark_prob_ingaas", self.dark_prob_ingaas),
            ("p0_afterpulse", self.p0_afterpulse),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Configuration(format!("{name} = {p} is not a probability")));
            }
        }
        if !(self.pulse_width > 0.0 && self.period * 1e3 > self.pulse_width) {
            return Err(Error::Configuration("need 0 < pulse_width < period".into()));
        }
        if !(self.tau_trap > 0.0) {
            return Err(Error::Configuration("tau_trap must be positive".into()));
        }
        if self.n_pulses == 0 {
            return Err(Error::Configuration("n_pulses must be positive".into()));
        }
        Ok(())
    }

    /// Gates after an avalanche beyond which afterpulsing is negligible.
    fn horizon(&self) -> usize {
        if self.p0_afterpulse <= AFTERPULSE_FLOOR {
            return 0;
        }
        ((self.p0_afterpulse / AFTERPULSE_FLOOR).ln() * self.tau_trap / self.period).ceil() as usize
    }

    /// Probability of a primary (photon or dark) InGaAs count in one gate.
    fn primary_ingaas(&self) -> f64 {
        1.0 - (1.0 - self.pair_prob_per_pulse * self.eta_ingaas) * (1.0 - self.dark_prob_ingaas)
    }

    /// Si singles probability per pulse window.
    pub fn si_singles(&self) -> f64 {
        1.0 - (1.0 - self.pair_prob_per_pulse * self.eta_si) * (1.0 - self.dark_prob_si)
    }
}

/// Afterpulse probability a time `dt` [µs] after the last avalanche.
pub fn afterpulse_prob(dt: f64, p0: f64, tau_trap: f64) -> f64 {
    p0 * (-dt / tau_trap).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceResult {
    /// InGaAs time minus Si time [µs].
    pub delays: Vec<f64>,
    /// Coincidences ÷ Si singles.
    pub coincidence_fraction: Vec<f64>,
    /// Binomial standard error.
    pub stderr: Vec<f64>,
    /// Coincidence counts per delay.
    pub counts: Vec<u64>,
    /// Si singles in pulse windows (the normalization).
    pub si_singles: u64,
    pub ingaas_singles: u64,
    /// Analytic accidental fraction.
    pub background: f64,
}

impl CoincidenceResult {
    /// CSV `delay_us,fraction,stderr,background`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delay_us,fraction,stderr,background\n");
        for i in 0..self.delays.len() {
            out.push_str(&format!(
                "{:.11e},{:.11e},{:.11e},{:.11e}\n",
                self.delays[i], self.coincidence_fraction[i], self.stderr[i], self.background
            ));
        }
        out
    }
}

/// Integer number of periods in `delay`, if it is one.
fn whole_periods(delay: f64, period: f64) -> Option<i64> {
    let r = delay / period;
    let k = r.round();
    ((r - k).abs() < 1e-9).then_some(k as i64)
}

/// Runs the pulse sequence once and scores every delay against it.
///
/// Per pulse: a pair is emitted with `pair_prob_per_pulse`, each photon is
/// detected independently, dark counts are added, and the InGaAs counter may
/// afterpulse with `afterpulse_prob` of the time since its last avalanche.
/// Every avalanche, afterpulses included, restarts the trap clock. A delay
/// pairs a Si count with an InGaAs gate `delay` later; delays that are not
/// whole periods put the Si window between pulses, where only its dark
/// counts fall.
pub fn simulate(config: &CoincidenceConfig, delays: &[f64]) -> Result<CoincidenceResult> {
    config.validate()?;
    if delays.is_empty() {
        return Err(Error::domain("delay list is empty"));
    }
    let n = config.n_pulses as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let horizon = config.horizon();
    let after: Vec<f64> = (0..=horizon)
        .map(|m| afterpulse_prob(m as f64 * config.period, config.p0_afterpulse, config.tau_trap))
        .collect();
    // InGaAs avalanches as a bitset; Si counts as a sorted index list
    let mut ig = vec![0u64; n.div_ceil(64)];
    let mut si: Vec<usize> = Vec::with_capacity((n as f64 * config.si_singles() * 1.2) as usize + 16);
    let mut ig_total = 0u64;
    let mut last: Option<usize> = None;
    for j in 0..n {
        let pair = rng.gen::<f64>() < config.pair_prob_per_pulse;
        let si_photon = pair && rng.gen::<f64>() < config.eta_si;
        let ig_photon = pair && rng.gen::<f64>() < config.eta_ingaas;
        if rng.gen::<f64>() < config.dark_prob_si || si_photon {
            si.push(j);
        }
        let dark = rng.gen::<f64>() < config.dark_prob_ingaas;
        let afterpulse = match last {
            Some(l) if j - l <= horizon => rng.gen::<f64>() < after[j - l],
            _ => false,
        };
        if ig_photon || dark || afterpulse {
            ig[j / 64] |= 1 << (j % 64);
            ig_total += 1;
            last = Some(j);
        }
    }
    let fired = |g: usize| ig[g / 64] >> (g % 64) & 1 == 1;
    let si_total = si.len() as u64;
    let mut fractions = Vec::with_capacity(delays.len());
    let mut errs = Vec::with_capacity(delays.len());
    let mut counts = Vec::with_capacity(delays.len());
    for (idx, &d) in delays.iter().enumerate() {
        let (count, trials) = match whole_periods(d, config.period) {
            Some(k) => {
                let mut c = 0u64;
                let mut t = 0u64;
                for &s in &si {
                    let g = s as i64 + k;
                    if g < 0 || g >= n as i64 {
                        continue;
                    }
                    t += 1;
                    c += fired(g as usize) as u64;
                }
                (c, t)
            }
            None => {
                // Si dark counts between pulses, an independent stream per delay
                let sub = config.rng_seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(idx as u64 + 1);
                let mut off = ChaCha8Rng::seed_from_u64(sub);
                let c = (0..n)
                    .filter(|&g| {
                        let dark = off.gen::<f64>() < config.dark_prob_si;
                        dark && fired(g)
                    })
                    .count() as u64;
                (c, si_total)
            }
        };
        let f = if trials > 0 { count as f64 / trials as f64 } else { 0.0 };
        fractions.push(f);
        errs.push(if trials > 0 { (f * (1.0 - f) / trials as f64).sqrt() } else { 0.0 });
        counts.push(count);
    }
    Ok(CoincidenceResult {
        delays: delays.to_vec(),
        coincidence_fraction: fractions,
        stderr: errs,
        counts,
        si_singles: si_total,
        ingaas_singles: ig_total,
        background: accidental_background(config),
    })
}

/// Stationary InGaAs firing probability per gate. Avalanches form a renewal
/// process whose hazard at lag m is 1 − (1 − r)(1 − p0·e^{−mT/τ}), r the
/// primary probability; the firing probability is one over the mean gap.
pub fn ingaas_firing_prob(config: &CoincidenceConfig) -> f64 {
    let r = config.primary_ingaas();
    let horizon = config.horizon();
    let mut survival = 1.0;
    let mut mean_gap = 0.0;
    for m in 1..=horizon {
        mean_gap += survival;
        let h = 1.0 - (1.0 - r) * (1.0 - afterpulse_prob(m as f64 * config.period, config.p0_afterpulse, config.tau_trap));
        survival *= 1.0 - h;
    }
    if r == 0.0 {
        // only afterpulses: any chain dies out, nothing fires in steady state
        return 0.0;
    }
    mean_gap += survival / r;
    1.0 / mean_gap
}

/// Accidental coincidence fraction: Si and InGaAs fire independently with
/// per-gate probabilities P_Si and P_InGaAs, so coincidences per gate are
/// P_Si·P_InGaAs and, normalized by Si singles, the fraction is P_InGaAs.
pub fn accidental_background(config: &CoincidenceConfig) -> f64 {
    let p_si = config.si_singles();
    if p_si == 0.0 {
        return 0.0;
    }
    p_si * ingaas_firing_prob(config) / p_si
}

/// Least-squares fit of fraction = B + A·exp(−delay/τ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub background: f64,
    pub amplitude: f64,
    /// [µs]
    pub tau: f64,
    pub chi2: f64,
}

/// Weighted fit over the given points. For each τ the linear parameters
/// follow in closed form; τ minimizes χ² by golden-section search over
/// `[tau_lo, tau_hi]` after a coarse logarithmic scan.
pub fn fit_exponential(delays: &[f64], values: &[f64], stderr: &[f64], tau_lo: f64, tau_hi: f64) -> Result<DecayFit> {
    fit_decay(delays, values, stderr, None, tau_lo, tau_hi)
}

/// As [`fit_exponential`] with the background held at a measured level,
/// e.g. the mean fraction at negative delays.
pub fn fit_exponential_over(
    delays: &[f64],
    values: &[f64],
    stderr: &[f64],
    background: f64,
    tau_lo: f64,
    tau_hi: f64,
) -> Result<DecayFit> {
    fit_decay(delays, values, stderr, Some(background), tau_lo, tau_hi)
}

fn fit_decay(
    delays: &[f64],
    values: &[f64],
    stderr: &[f64],
    fixed_background: Option<f64>,
    tau_lo: f64,
    tau_hi: f64,
) -> Result<DecayFit> {
    if delays.len() < 3 || !(tau_lo > 0.0 && tau_hi > tau_lo) || delays.len() != values.len() || values.len() != stderr.len() {
        return Err(Error::domain("exponential fit needs at least 3 matching points"));
    }
    let floor = stderr.iter().copied().filter(|s| *s > 0.0).fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = stderr
        .iter()
        .map(|s| {
            let s = if *s > 0.0 { *s } else if floor.is_finite() { floor } else { 1.0 };
            1.0 / (s * s)
        })
        .collect();
    let solve = |tau: f64| -> DecayFit {
        let (mut s, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..delays.len() {
            let x = (-delays[i] / tau).exp();
            s += w[i];
            sx += w[i] * x;
            sxx += w[i] * x * x;
            sy += w[i] * values[i];
            sxy += w[i] * x * values[i];
        }
        let (background, amplitude) = match fixed_background {
            Some(b) => (b, (sxy - b * sx) / sxx),
            None => {
                let amplitude = (s * sxy - sx * sy) / (s * sxx - sx * sx);
                ((sy - amplitude * sx) / s, amplitude)
            }
        };
        let chi2 = (0..delays.len())
            .map(|i| {
                let r = values[i] - background - amplitude * (-delays[i] / tau).exp();
                w[i] * r * r
            })
            .sum();
        DecayFit {
            background,
            amplitude,
            tau,
            chi2,
        }
    };
    let steps = 200;
    let ratio = (tau_hi / tau_lo).ln();
    let taus: Vec<f64> = (0..=steps).map(|i| tau_lo * (ratio * i as f64 / steps as f64).exp()).collect();
    let best = (0..taus.len()).fold(0, |b, i| if solve(taus[i]).chi2 < solve(taus[b]).chi2 { i } else { b });
    let (mut a, mut b) = (taus[best.saturating_sub(1)], taus[(best + 1).min(steps)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if solve(c).chi2 < solve(d).chi2 {
            b = d;
        } else {
            a = c;
        }
    }
    let fit = solve(0.5 * (a + b));
    if !(fit.amplitude.is_finite() && fit.tau.is_finite()) {
        return Err(Error::Solver("exponential fit did not converge".into()));
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn config() -> CoincidenceConfig {
        CoincidenceConfig {
            pulse_width: 10.0,
            period: 10.0,
            n_pulses: 200_000,
            pair_prob_per_pulse: 0.028,
            eta_si: 0.36,
            eta_ingaas: 0.1,
            dark_prob_si: 1e-6,
            dark_prob_ingaas: 1e-4,
            p0_afterpulse: 0.1,
            tau_trap: 50.0,
            rng_seed: 7,
        }
    }

    #[test]
    fn afterpulse_limits() {
        assert_eq!(afterpulse_prob(0.0, 0.2, 50.0), 0.2);
        assert!((afterpulse_prob(50.0, 0.2, 50.0) - 0.2 / std::f64::consts::E).abs() < 1e-15);
        assert_eq!(afterpulse_prob(f64::INFINITY, 0.2, 50.0), 0.0);
    }

    #[test]
    fn background_zero_without_sources() {
        let c = CoincidenceConfig {
            pair_prob_per_pulse: 0.0,
            dark_prob_si: 0.0,
            dark_prob_ingaas: 0.0,
            ..config()
        };
        assert_eq!(accidental_background(&c), 0.0);
    }

    #[test]
    fn renewal_rate_without_afterpulsing_is_primary() {
        let c = CoincidenceConfig { p0_afterpulse: 0.0, ..config() };
        assert!((ingaas_firing_prob(&c) - c.primary_ingaas()).abs() < 1e-15);
    }

    #[test]
    fn deterministic_and_ordered() {
        let d = [-50.0, -10.0, 0.0, 10.0, 50.0, 15.0];
        let a = simulate(&config(), &d).unwrap();
        let b = simulate(&config(), &d).unwrap();
        assert_eq!(a, b);
        for f in &a.coincidence_fraction[..] {
            assert!(*f <= a.coincidence_fraction[2]);
        }
        assert!(simulate(&config(), &[]).is_err());
    }

    #[test]
    fn fit_recovers_noise_free_decay() {
        let d: Vec<f64> = (1..40).map(|k| 10.0 * k as f64).collect();
        let v: Vec<f64> = d.iter().map(|x| 0.005 + 0.02 * (-x / 37.0).exp()).collect();
        let e = vec![1e-4; d.len()];
        let f = fit_exponential(&d, &v, &e, 5.0, 500.0).unwrap();
        assert!((f.tau - 37.0).abs() < 1e-4);
        assert!((f.background - 0.005).abs() < 1e-9);
    }
}

/// Summary observables of a delay scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanAnalysis {
    pub zero_delay: f64,
    pub zero_delay_stderr: f64,
    /// Mean fraction over negative whole-period delays.
    pub negative_mean: f64,
    pub negative_stderr: f64,
    /// Analytic accidental level.
    pub background: f64,
    /// (negative_mean − background) / negative_stderr
    pub background_z: f64,
    /// Fit over positive whole-period delays with the background held at
    /// `negative_mean`.
    pub fit: DecayFit,
    /// Same points with the background free.
    pub fit_free: DecayFit,
    /// (delay, fraction, stderr) at delays off the period grid.
    pub off_grid: Vec<(f64, f64, f64)>,
}

/// Extracts the zero-delay peak, the negative-delay level and the decay
/// constant of the positive-delay tail from a scan.
pub fn analyze_scan(config: &CoincidenceConfig, result: &CoincidenceResult) -> Result<ScanAnalysis> {
    let t = config.period;
    let on_grid = |d: f64| ((d / t) - (d / t).round()).abs() < 1e-9;
    let mut zero = None;
    let (mut neg, mut neg_var) = (Vec::new(), 0.0);
    let (mut px, mut py, mut pe) = (Vec::new(), Vec::new(), Vec::new());
    let mut off_grid = Vec::new();
    for (i, &d) in result.delays.iter().enumerate() {
        let (f, e) = (result.coincidence_fraction[i], result.stderr[i]);
        if !on_grid(d) {
            off_grid.push((d, f, e));
        } else if (d / t).round() == 0.0 {
            zero = Some((f, e));
        } else if d < 0.0 {
            neg.push(f);
            neg_var += e * e;
        } else {
            px.push(d);
            py.push(f);
            pe.push(e);
        }
    }
    let (zero_delay, zero_delay_stderr) = zero.ok_or_else(|| Error::domain("scan has no zero delay"))?;
    if neg.is_empty() {
        return Err(Error::domain("scan has no negative delays"));
    }
    let k = neg.len() as f64;
    let negative_mean = neg.iter().sum::<f64>() / k;
    let negative_stderr = neg_var.sqrt() / k;
    let background = result.background;
    let tau_hi = 4.0 * px.iter().copied().fold(t, f64::max);
    Ok(ScanAnalysis {
        zero_delay,
        zero_delay_stderr,
        negative_mean,
        negative_stderr,
        background,
        background_z: if negative_stderr > 0.0 { (negative_mean - background) / negative_stderr } else { 0.0 },
        fit: fit_exponential_over(&px, &py, &pe, negative_mean, 0.2 * t, tau_hi)?,
        fit_free: fit_exponential(&px, &py, &pe, 0.2 * t, tau_hi)?,
        off_grid,
    })
}
