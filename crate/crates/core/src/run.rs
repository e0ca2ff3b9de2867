//! Executes a [`SimulationPlan`]: CSVs, a key-value summary, SVG plots and
//! the config echo, all in one output directory.
//!
//! The summary (`summary.txt`) holds one `key = value` pair per line; keys
//! are dotted, values are plain numbers or words. Energies are in eV,
//! powers in W, rates in s⁻¹ and delays in µs.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::carriers::make_carrier_state;
use crate::coincidence::{analyze_scan, simulate};
use crate::config::{build_system, carriers_for, coincidence_delays, material_table, Command, SimulationPlan, SystemKind};
use crate::error::{Error, Result};
use crate::numerics;
use crate::spectra::{
    complementary_peak, convolve_instrument, find_peaks, one_photon_spectrum, spontaneous_spectrum, stimulated_components,
    total_power, tpe_center, write_file, Spectrum, StimulationConfig,
};
use crate::svg::{Arrow, Plot, Series, PALETTE};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "TPESPEC_OUT";
const DEFAULT_OUT_ROOT: &str = "tpespec-out";

/// Ordered key-value run summary.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub entries: Vec<(String, String)>,
}

impl Summary {
    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    fn num(&mut self, key: impl Into<String>, v: f64) {
        self.put(key, format!("{v:.9e}"));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: Summary,
}

/// Fitted calibration constants and the centers they produce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationRecord {
    pub gap_offset_ev: f64,
    pub strain_shift_ev: f64,
    pub bulk_center_ev: f64,
    pub check_center_ev: f64,
    pub qw_center_ev: f64,
}

impl CalibrationRecord {
    pub fn to_config(&self) -> String {
        format!(
            "[calibration]\ngap_offset_eV = {:?}\nstrain_shift_eV = {:?}\n",
            self.gap_offset_ev, self.strain_shift_ev
        )
    }
}

/// Output directory: the plan's, else `$TPESPEC_OUT/<source>`, else
/// `tpespec-out/<source>`.
pub fn output_dir(plan: &SimulationPlan) -> PathBuf {
    plan.output_dir.clone().unwrap_or_else(|| {
        let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT));
        root.join(&plan.source)
    })
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_file(&path, text.as_bytes())?;
        self.files.push(path);
        Ok(())
    }

    fn spectrum(&mut self, spec: &Spectrum, stem: &str) -> Result<()> {
        spec.write(&self.dir, stem)?;
        self.files.push(self.dir.join(format!("{stem}.csv")));
        self.files.push(self.dir.join(format!("{stem}.meta.json")));
        Ok(())
    }

    fn plot(&mut self, name: &str, plot: &Plot) -> Result<()> {
        self.text(name, &plot.render())
    }
}

pub fn run(plan: &SimulationPlan) -> Result<RunReport> {
    let dir = output_dir(plan);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut w = Writer { dir, files: Vec::new() };
    let mut summary = Summary::default();
    summary.put("command", plan.command.name());
    w.text("config.echo.cfg", &plan.inputs.to_config())?;
    match plan.command {
        Command::Spectrum => run_spectrum(plan, &mut w, &mut summary)?,
        Command::Onephoton => run_onephoton(plan, &mut w, &mut summary)?,
        Command::Stimulated => run_stimulated(plan, &mut w, &mut summary)?,
        Command::Sweep => run_sweep(plan, &mut w, &mut summary)?,
        Command::Coincidence => run_coincidence(plan, &mut w, &mut summary)?,
        Command::Calibrate => {
            let rec = calibrate(plan)?;
            summary.num("calibration.gap_offset_eV", rec.gap_offset_ev);
            summary.num("calibration.strain_shift_eV", rec.strain_shift_ev);
            summary.num("bulk.center_eV", rec.bulk_center_ev);
            summary.num("bulk.check_center_eV", rec.check_center_ev);
            summary.num("qw.center_eV", rec.qw_center_ev);
            w.text("calibration.cfg", &rec.to_config())?;
        }
    }
    w.text("summary.txt", &summary.to_text())?;
    Ok(RunReport {
        output_dir: w.dir,
        files: w.files,
        summary,
    })
}

fn describe_state(plan: &SimulationPlan, s: &mut Summary) -> Result<()> {
    let r = plan.resolved()?;
    s.put("system", if plan.system == SystemKind::Qw { "qw" } else { "bulk" });
    s.num("carriers.density_cm3", r.state.n);
    s.num("carriers.temperature_K", r.state.t);
    s.num("carriers.eta_c", r.state.eta_c);
    s.num("carriers.eta_v", r.state.eta_v);
    s.num("carriers.eg_eff_eV", r.state.eg_eff);
    let c = tpe_center(&r.state, &r.system)?;
    s.num("tpe.center_eV", c.center);
    s.num("tpe.pair_peak_eV", c.pair_peak);
    s.num("tpe.centroid_eV", c.centroid);
    Ok(())
}

fn spectrum_plot(title: &str, log_y: bool) -> Plot {
    Plot {
        title: title.into(),
        x_label: "photon energy [eV]".into(),
        y_label: "collected rate [1/(s eV)]".into(),
        log_y,
        ..Plot::default()
    }
}

fn run_spectrum(plan: &SimulationPlan, w: &mut Writer, s: &mut Summary) -> Result<()> {
    let r = plan.resolved()?;
    describe_state(plan, s)?;
    let sp = spontaneous_spectrum(&r.state, &r.system, &r.geometry, &r.grid)?;
    w.spectrum(&sp, "spontaneous")?;
    let tpe = total_power(&sp, 2)?;
    s.num("tpe.power_W", tpe);
    let mut plot = spectrum_plot("Spontaneous two-photon emission", false);
    plot.series.push(Series::line("spontaneous TPE", &sp.grid, &sp.values, PALETTE[0]));
    if let Some(res) = plan.inputs.resolution_nm {
        let conv = convolve_instrument(&sp, res)?;
        w.spectrum(&conv, "spontaneous_convolved")?;
        for (i, p) in find_peaks(&conv).iter().enumerate() {
            s.num(format!("tpe.convolved_peak{}_eV", i + 1), p.energy);
        }
        plot.series.push(Series::line(format!("{res} nm resolution"), &conv.grid, &conv.values, PALETTE[1]));
    }
    w.plot("spectrum.svg", &plot)?;
    if let Some(grid) = &r.onephoton_grid {
        let op = one_photon_spectrum(&r.state, &r.system, &r.geometry, grid)?;
        w.spectrum(&op, "onephoton")?;
        let p1 = total_power(&op, 1)?;
        s.num("onephoton.peak_eV", op.argmax().0);
        s.num("onephoton.power_W", p1);
        s.num("power_ratio", tpe / p1);
        let mut cmp = spectrum_plot("One- and two-photon emission", true);
        cmp.series.push(Series::line("two-photon", &sp.grid, &sp.values, PALETTE[0]));
        cmp.series.push(Series::line("one-photon", &op.grid, &op.values, PALETTE[1]));
        w.plot("comparison.svg", &cmp)?;
    }
    Ok(())
}

fn run_onephoton(plan: &SimulationPlan, w: &mut Writer, s: &mut Summary) -> Result<()> {
    let r = plan.resolved()?;
    if r.onephoton_grid.is_none() {
        return Err(Error::Configuration("onephoton needs an [onephoton] grid".into()));
    }
    run_spectrum(plan, w, s)
}

/// Copy of `spec` with the bins around `e` dropped, for plotting.
fn without_line(spec: &Spectrum, e: f64) -> Vec<f64> {
    let step = spec.step();
    spec.grid
        .iter()
        .zip(&spec.values)
        .map(|(x, v)| if (x - e).abs() < 1.5 * step { f64::NAN } else { *v })
        .collect()
}

fn run_stimulated(plan: &SimulationPlan, w: &mut Writer, s: &mut Summary) -> Result<()> {
    let r = plan.resolved()?;
    if r.stimulations.is_empty() {
        return Err(Error::Configuration("stimulated needs a [stimulation] section".into()));
    }
    describe_state(plan, s)?;
    let center = s.get_f64("tpe.center_eV").unwrap_or(f64::NAN);
    let sp = spontaneous_spectrum(&r.state, &r.system, &r.geometry, &r.grid)?;
    w.spectrum(&sp, "spontaneous")?;
    s.num("tpe.power_W", total_power(&sp, 2)?);
    let mut plot = spectrum_plot("Singly-stimulated two-photon emission", false);
    plot.series.push(Series::line("spontaneous", &sp.grid, &sp.values, PALETTE[0]));
    for (i, stim) in r.stimulations.iter().enumerate() {
        let tag = format!("stim{}", i + 1);
        let parts = stimulated_components(&r.state, &r.system, stim, &r.geometry, &r.grid)?;
        w.spectrum(&parts.total, &format!("stimulated_{}", i + 1))?;
        w.spectrum(&parts.signal, &format!("stimulated_{}_signal", i + 1))?;
        let predicted = 2.0 * center - stim.e_s;
        s.num(format!("{tag}.e_s_eV"), stim.e_s);
        s.num(format!("{tag}.power_W"), stim.p_s);
        s.num(format!("{tag}.density_cm3"), parts.density);
        s.num(format!("{tag}.line_rate_per_s"), parts.stimulated_rate);
        s.num(format!("{tag}.predicted_e_c_eV"), predicted);
        if let Some(p) = complementary_peak(&parts, stim.e_s) {
            s.num(format!("{tag}.e_c_eV"), p.energy);
            s.num(format!("{tag}.e_c_height"), p.height);
            s.num(format!("{tag}.e_c_fwhm_eV"), p.fwhm);
            s.num(format!("{tag}.pair_sum_eV"), p.energy + stim.e_s);
            s.num(format!("{tag}.pair_sum_error_eV"), p.energy + stim.e_s - 2.0 * center);
        }
        let signal = match plan.inputs.resolution_nm {
            Some(res) => {
                let conv = convolve_instrument(&parts.total, res)?;
                w.spectrum(&conv, &format!("stimulated_{}_convolved", i + 1))?;
                convolve_instrument(&parts.signal, res)?
            }
            None => parts.signal.clone(),
        };
        let peaks = find_peaks(&signal);
        s.put(format!("{tag}.resolved_peaks"), peaks.len());
        s.put(format!("{tag}.merged"), peaks.len() == 1);
        let color = PALETTE[(i + 1) % PALETTE.len()];
        plot.series.push(Series::line(
            format!("E_s = {} eV", stim.e_s),
            &parts.total.grid,
            &without_line(&parts.total, stim.e_s),
            color,
        ));
        plot.arrows.push(Arrow {
            x: stim.e_s,
            label: format!("{:.3}", stim.e_s),
            color: color.into(),
            dashed: false,
        });
        plot.arrows.push(Arrow {
            x: predicted,
            label: format!("{predicted:.3}"),
            color: color.into(),
            dashed: true,
        });
    }
    w.plot("stimulated.svg", &plot)
}

/// Least-squares line y = a + b·x and its R².
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (my - slope * mx, slope, r2)
}

fn run_sweep(plan: &SimulationPlan, w: &mut Writer, s: &mut Summary) -> Result<()> {
    let r = plan.resolved()?;
    let base = *r
        .stimulations
        .first()
        .ok_or_else(|| Error::Configuration("sweep needs a [stimulation] section".into()))?;
    let sweep = plan
        .inputs
        .sweep
        .ok_or_else(|| Error::Configuration("sweep needs a [sweep] section".into()))?;
    describe_state(plan, s)?;
    let n = sweep.points as usize;
    let powers: Vec<f64> = (0..n)
        .map(|i| sweep.power_lo_mw + (sweep.power_hi_mw - sweep.power_lo_mw) * i as f64 / (n - 1) as f64)
        .collect();
    let mut csv = String::from("power_mW,complementary_peak_eV,complementary_height,line_rate_per_s,density_cm3\n");
    let mut heights = Vec::with_capacity(n);
    for &p in &powers {
        let stim = StimulationConfig { p_s: p * 1e-3, ..base };
        let parts = stimulated_components(&r.state, &r.system, &stim, &r.geometry, &r.grid)?;
        let peak = complementary_peak(&parts, stim.e_s)
            .ok_or_else(|| Error::domain(format!("no complementary peak at {p} mW")))?;
        heights.push(peak.height);
        csv.push_str(&format!(
            "{:?},{:.11e},{:.11e},{:.11e},{:.11e}\n",
            p, peak.energy, peak.height, parts.stimulated_rate, parts.density
        ));
    }
    w.text("sweep.csv", &csv)?;
    let (a, b, r2) = linear_fit(&powers, &heights);
    s.num("sweep.e_s_eV", base.e_s);
    s.num("sweep.intercept", a);
    s.num("sweep.slope_per_mW", b);
    s.put("sweep.r_squared", format!("{r2:.12}"));
    let fit: Vec<f64> = powers.iter().map(|p| a + b * p).collect();
    let plot = Plot {
        title: format!("Complementary peak height, E_s = {} eV", base.e_s),
        x_label: "stimulating power [mW]".into(),
        y_label: "peak height [1/(s eV)]".into(),
        series: vec![
            Series {
                err: Some(vec![0.0; n]),
                ..Series::line("computed", &powers, &heights, PALETTE[0])
            },
            Series {
                dashed: true,
                ..Series::line(format!("linear fit, R^2 = {r2:.6}"), &powers, &fit, PALETTE[1])
            },
        ],
        ..Plot::default()
    };
    w.plot("sweep.svg", &plot)
}

fn run_coincidence(plan: &SimulationPlan, w: &mut Writer, s: &mut Summary) -> Result<()> {
    let c = &plan.inputs.coincidence;
    let cfg = &c.config;
    let delays = coincidence_delays(c);
    let res = simulate(cfg, &delays)?;
    w.text("coincidence.csv", &res.to_csv())?;
    let a = analyze_scan(cfg, &res)?;
    s.put("pulses", cfg.n_pulses);
    s.put("seed", cfg.rng_seed);
    s.put("si_singles", res.si_singles);
    s.put("ingaas_singles", res.ingaas_singles);
    s.num("zero_delay.fraction", a.zero_delay);
    s.num("zero_delay.stderr", a.zero_delay_stderr);
    s.num("negative.mean_fraction", a.negative_mean);
    s.num("negative.stderr", a.negative_stderr);
    s.num("background.analytic", a.background);
    s.num("background.z", a.background_z);
    s.num("fit.tau_us", a.fit.tau);
    s.num("fit.amplitude", a.fit.amplitude);
    s.num("fit.background", a.fit.background);
    s.num("fit.chi2", a.fit.chi2);
    s.num("fit_free.tau_us", a.fit_free.tau);
    s.num("fit_free.background", a.fit_free.background);
    for (d, f, e) in &a.off_grid {
        s.num(format!("off_grid.{d}.fraction"), *f);
        s.num(format!("off_grid.{d}.stderr"), *e);
    }
    let grid: Vec<usize> = (0..delays.len())
        .filter(|&i| a.off_grid.iter().all(|(d, _, _)| *d != delays[i]))
        .collect();
    let x: Vec<f64> = grid.iter().map(|&i| delays[i]).collect();
    let y: Vec<f64> = grid.iter().map(|&i| res.coincidence_fraction[i]).collect();
    let e: Vec<f64> = grid.iter().map(|&i| res.stderr[i]).collect();
    let fx: Vec<f64> = x.iter().copied().filter(|d| *d > 0.0).collect();
    let fy: Vec<f64> = fx.iter().map(|d| a.fit.background + a.fit.amplitude * (-d / a.fit.tau).exp()).collect();
    let plot = Plot {
        title: "Coincidences vs relative delay".into(),
        x_label: "delay [us]".into(),
        y_label: "coincidences / Si singles".into(),
        log_y: true,
        series: vec![
            Series {
                err: Some(e),
                ..Series::line("simulated", &x, &y, PALETTE[0])
            },
            Series::line(format!("fit, tau = {:.1} us", a.fit.tau), &fx, &fy, PALETTE[1]),
        ],
        hlines: vec![(a.background, "accidental background".into())],
        ..Plot::default()
    };
    w.plot("coincidence.svg", &plot)
}

/// Fits the bulk gap offset to the bulk center and the well strain shift
/// to the well center, each by a bracketed one-dimensional root search.
/// The result does not depend on the calibration already in the plan.
pub fn calibrate(plan: &SimulationPlan) -> Result<CalibrationRecord> {
    let inputs = &plan.inputs;
    let k = &inputs.calibrate;
    let c = &inputs.carriers;
    let table = material_table(inputs)?;
    let material = table.lookup(&c.material)?;
    let n = c
        .density_cm3
        .ok_or_else(|| Error::Configuration("calibrate needs [carriers] density_cm3".into()))?;

    let bulk_center = |n: f64, off: f64| -> Result<f64> {
        let state = make_carrier_state(&material, n, c.temperature_k, c.gamma_per_s)?.shifted(off)?;
        let system = crate::spectra::System::Bulk { material: material.clone() };
        Ok(tpe_center(&state, &system)?.center)
    };
    let gap_offset_ev = search("gap_offset_eV", (-0.4, 0.6), |off| Ok(bulk_center(n, off)? - k.bulk_center_ev))?;
    let bulk_center_ev = bulk_center(n, gap_offset_ev)?;
    let check_center_ev = bulk_center(k.check_density_cm3, gap_offset_ev)?;

    let qw_center = |strain: f64| -> Result<f64> {
        let system = build_system(inputs, &table, SystemKind::Qw, strain, k.qw_temperature_k)?;
        let state = carriers_for(&system, k.qw_density_cm3, k.qw_temperature_k, c.gamma_per_s, 0.0)?;
        Ok(tpe_center(&state, &system)?.center)
    };
    let strain_shift_ev = search("strain_shift_eV", (-0.3, 0.3), |s| Ok(qw_center(s)? - k.qw_center_ev))?;
    let qw_center_ev = qw_center(strain_shift_ev)?;
    Ok(CalibrationRecord {
        gap_offset_ev,
        strain_shift_ev,
        bulk_center_ev,
        check_center_ev,
        qw_center_ev,
    })
}

/// Brent root of `f` on `bracket`; failures carry the evaluation trace.
fn search(name: &str, bracket: (f64, f64), f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut trace: Vec<(f64, String)> = Vec::new();
    let mut first_error = None;
    let root = numerics::brent(
        |x| match f(x) {
            Ok(v) => {
                trace.push((x, format!("{v:+.3e}")));
                v
            }
            Err(e) => {
                trace.push((x, format!("error: {e}")));
                first_error.get_or_insert(e);
                f64::NAN
            }
        },
        bracket.0,
        bracket.1,
        1e-10,
        200,
    );
    match (root, first_error) {
        (Ok(x), None) => Ok(x),
        (root, err) => {
            let reason = match (root, err) {
                (_, Some(e)) => e.to_string(),
                (Err(e), None) => e.to_string(),
                (Ok(_), None) => unreachable!(),
            };
            let steps: Vec<String> = trace.iter().map(|(x, v)| format!("{x:.6} -> {v}")).collect();
            Err(Error::Solver(format!(
                "calibration of {name} did not converge ({reason}); trace: {}",
                steps.join("; ")
            )))
        }
    }
}

/// Runs a plan into `dir`.
pub fn run_into(plan: &SimulationPlan, dir: impl AsRef<Path>) -> Result<RunReport> {
    run(&plan.clone().with_output_dir(dir.as_ref()))
}
