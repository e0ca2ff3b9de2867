//! Run configuration: INI-style files, defaults, validation and the config
//! echo that reproduces a run.
//!
//! ```text
//! [run]
//! command = spectrum        # spectrum | stimulated | onephoton | coincidence | sweep | calibrate
//! system = bulk             # bulk | qw
//! seed = 1
//! calibration = calibration.cfg
//!
//! [carriers]
//! material = GaAs
//! density_cm3 = 1.2e18
//! temperature_K = 330
//! ```
//!
//! Every key is listed with its default in `Inputs::to_config`, which is also
//! what a run writes as `config.echo.cfg`.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::carriers::{make_carrier_state, make_qw_carrier_state, pump_to_density, CarrierState, DEFAULT_GAMMA};
use crate::coincidence::CoincidenceConfig;
use crate::error::{Error, Result};
use crate::kv::{Document, Reader};
use crate::materials::{MaterialTable, QWLayerSpec};
use crate::quantumwell::build_stack;
use crate::spectra::{uniform_grid, CollectionGeometry, StimulationConfig, System, BULK_WINDOW, DEFAULT_GRID_POINTS, QW_WINDOW};

/// Shipped presets, addressable with `--preset <name>`.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig1a", include_str!("../presets/fig1a.cfg")),
    ("fig1b", include_str!("../presets/fig1b.cfg")),
    ("fig3a", include_str!("../presets/fig3a.cfg")),
    ("fig3b", include_str!("../presets/fig3b.cfg")),
    ("fig4", include_str!("../presets/fig4.cfg")),
    ("calibrate", include_str!("../presets/calibrate.cfg")),
    ("calibration", include_str!("../presets/calibration.cfg")),
];

pub fn preset(name: &str) -> Result<&'static str> {
    let key = name.trim_end_matches(".cfg");
    PRESETS
        .iter()
        .find(|(n, _)| *n == key)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            Error::Usage(format!(
                "unknown preset `{name}` (available: {})",
                PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
            ))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum,
    Stimulated,
    Onephoton,
    Coincidence,
    Sweep,
    Calibrate,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        Some(match s {
            "spectrum" => Command::Spectrum,
            "stimulated" => Command::Stimulated,
            "onephoton" => Command::Onephoton,
            "coincidence" => Command::Coincidence,
            "sweep" => Command::Sweep,
            "calibrate" => Command::Calibrate,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Stimulated => "stimulated",
            Command::Onephoton => "onephoton",
            Command::Coincidence => "coincidence",
            Command::Sweep => "sweep",
            Command::Calibrate => "calibrate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Bulk,
    Qw,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarrierInputs {
    pub material: String,
    pub density_cm3: Option<f64>,
    pub pump_mw: Option<f64>,
    pub spot_um: f64,
    pub temperature_k: f64,
    pub gamma_per_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridInputs {
    pub lo_ev: f64,
    pub hi_ev: f64,
    pub points: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryInputs {
    pub solid_angle_fraction: f64,
    pub optics_efficiency: f64,
    pub volume_cm3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QwInputs {
    pub well_width_a: f64,
    pub barrier_width_a: f64,
    pub well_material: String,
    pub barrier_material: String,
    pub cbo_ev: f64,
    pub vbo_ev: f64,
    pub periods: u64,
    pub sheet_area_cm2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StimulationInputs {
    pub energies_ev: Vec<f64>,
    pub power_mw: f64,
    pub mode_area_um2: f64,
    pub confinement: f64,
    pub n_s: Option<f64>,
    pub carrier_budget: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepInputs {
    pub power_lo_mw: f64,
    pub power_hi_mw: f64,
    pub points: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceInputs {
    pub config: CoincidenceConfig,
    pub delay_lo_us: f64,
    pub delay_hi_us: f64,
    pub extra_delays_us: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationInputs {
    pub gap_offset_ev: f64,
    pub strain_shift_ev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrateInputs {
    pub bulk_center_ev: f64,
    pub check_density_cm3: f64,
    pub check_center_ev: f64,
    pub qw_center_ev: f64,
    pub qw_density_cm3: f64,
    pub qw_temperature_k: f64,
}

/// Every input of a run after defaulting; serializes back to a config file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inputs {
    pub command: Command,
    pub system: SystemKind,
    pub seed: u64,
    pub materials: Option<String>,
    pub carriers: CarrierInputs,
    pub grid: GridInputs,
    pub geometry: GeometryInputs,
    pub qw: QwInputs,
    pub stimulation: Option<StimulationInputs>,
    pub resolution_nm: Option<f64>,
    pub onephoton: Option<GridInputs>,
    pub sweep: Option<SweepInputs>,
    pub coincidence: CoincidenceInputs,
    pub calibration: CalibrationInputs,
    pub calibrate: CalibrateInputs,
}

/// Physics inputs resolved from [`Inputs`].
#[derive(Debug, Clone)]
pub struct Resolved {
    pub table: MaterialTable,
    pub system: System,
    /// Carriers with the calibration shift applied.
    pub state: CarrierState,
    pub geometry: CollectionGeometry,
    pub grid: Vec<f64>,
    pub stimulations: Vec<StimulationConfig>,
    pub onephoton_grid: Option<Vec<f64>>,
    pub delays: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimulationPlan {
    pub command: Command,
    pub system: SystemKind,
    pub inputs: Inputs,
    /// `None` for coincidence runs, which need no band structure.
    pub resolved: Option<Resolved>,
    pub output_dir: Option<PathBuf>,
    /// Label of the config source, used for default output names.
    pub source: String,
}

const SECTIONS: &[&str] = &[
    "run",
    "carriers",
    "grid",
    "geometry",
    "qw",
    "stimulation",
    "instrument",
    "onephoton",
    "sweep",
    "coincidence",
    "calibration",
    "calibrate",
];

/// Where relative paths in a config resolve: a directory, or the embedded
/// presets.
#[derive(Debug, Clone)]
pub enum Origin {
    Dir(PathBuf),
    Presets,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses and validates a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<SimulationPlan> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    parse_config_text(&path.display().to_string(), &text, Origin::Dir(dir), &stem)
}

/// Parses a shipped preset.
pub fn parse_preset(name: &str) -> Result<SimulationPlan> {
    let text = preset(name)?;
    parse_config_text(&format!("preset:{name}"), text, Origin::Presets, name.trim_end_matches(".cfg"))
}

pub fn parse_config_text(label: &str, text: &str, origin: Origin, source: &str) -> Result<SimulationPlan> {
    let doc = Document::parse(label, text)?;
    let inputs = read_inputs(&doc, &origin)?;
    plan_from_inputs(inputs, source)
}

/// Resolves materials, wells and carriers for validated inputs.
pub fn plan_from_inputs(inputs: Inputs, source: &str) -> Result<SimulationPlan> {
    let resolved = if inputs.command == Command::Coincidence {
        None
    } else {
        Some(resolve(&inputs)?)
    };
    let mut delays = Vec::new();
    if inputs.command == Command::Coincidence {
        delays = coincidence_delays(&inputs.coincidence);
    }
    let mut plan = SimulationPlan {
        command: inputs.command,
        system: inputs.system,
        inputs,
        resolved,
        output_dir: None,
        source: source.to_string(),
    };
    if let Some(r) = plan.resolved.as_mut() {
        r.delays = delays;
    } else {
        plan.resolved = None;
        plan.inputs.coincidence.extra_delays_us.sort_by(f64::total_cmp);
    }
    Ok(plan)
}

/// Whole-period delays from `delay_lo_us` to `delay_hi_us`, then the extras.
pub fn coincidence_delays(c: &CoincidenceInputs) -> Vec<f64> {
    let t = c.config.period;
    let lo = (c.delay_lo_us / t).ceil() as i64;
    let hi = (c.delay_hi_us / t).floor() as i64;
    let mut d: Vec<f64> = (lo..=hi).map(|k| k as f64 * t).collect();
    d.extend(&c.extra_delays_us);
    d
}

fn section_reader<'a>(doc: &'a Document, name: &str) -> Option<Reader<'a>> {
    doc.section(name).map(|s| Reader::new(doc, s))
}

fn positive(r: &Reader, key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(r.invalid(key, format!("must be positive, got {v}")))
    }
}

fn unit_interval(r: &Reader, key: &str, v: f64, open_low: bool) -> Result<f64> {
    let ok = if open_low { v > 0.0 && v <= 1.0 } else { (0.0..=1.0).contains(&v) };
    if ok {
        Ok(v)
    } else {
        Err(r.invalid(key, format!("must lie in {}0, 1], got {v}", if open_low { "(" } else { "[" })))
    }
}

fn read_inputs(doc: &Document, origin: &Origin) -> Result<Inputs> {
    for (i, s) in doc.sections.iter().enumerate() {
        if !SECTIONS.contains(&s.name.as_str()) {
            return Err(doc.error(s.line, &s.name, format!("unknown section (known: {})", SECTIONS.join(", "))));
        }
        if doc.sections[..i].iter().any(|p| p.name == s.name) {
            return Err(doc.error(s.line, &s.name, "duplicate section"));
        }
    }

    // [run]
    let run_section = doc
        .section("run")
        .ok_or_else(|| doc.error(1, "run", "missing [run] section"))?;
    let mut r = Reader::new(doc, run_section);
    let command_text = r
        .str_opt("command")
        .ok_or_else(|| doc.error(run_section.line, "command", "missing required key in [run]"))?;
    let command = Command::parse(&command_text).ok_or_else(|| {
        r.invalid(
            "command",
            "expected spectrum | stimulated | onephoton | coincidence | sweep | calibrate",
        )
    })?;
    let system = match r.str_opt("system").as_deref() {
        None | Some("bulk") => SystemKind::Bulk,
        Some("qw") => SystemKind::Qw,
        Some(_) => return Err(r.invalid("system", "expected bulk | qw")),
    };
    let seed = r.u64_opt("seed")?.unwrap_or(1);
    let materials = r.str_opt("materials").map(|p| resolve_path(origin, &p));
    let calibration_file = r.str_opt("calibration");
    let calibration_line = r.line_of("calibration");
    r.finish()?;

    // [carriers]
    let carriers = {
        let mut r = section_reader(doc, "carriers");
        let mut get = |k: &str| -> Result<Option<f64>> { r.as_mut().map_or(Ok(None), |r| r.f64_opt(k)) };
        let density = get("density_cm3")?;
        let pump = get("pump_mW")?;
        let spot = get("spot_um")?;
        let temperature = get("temperature_K")?;
        let gamma = get("gamma_per_s")?;
        let material = r.as_mut().and_then(|r| r.str_opt("material"));
        let c = CarrierInputs {
            material: material.unwrap_or_else(|| "GaAs".into()),
            density_cm3: density,
            pump_mw: pump,
            spot_um: spot.unwrap_or(30.0),
            temperature_k: temperature.unwrap_or(if system == SystemKind::Qw { 300.0 } else { 330.0 }),
            gamma_per_s: gamma.unwrap_or(DEFAULT_GAMMA),
        };
        if let Some(r) = &r {
            if let Some(d) = c.density_cm3 {
                if !(d >= 0.0 && d.is_finite()) {
                    return Err(r.invalid("density_cm3", format!("must be non-negative, got {d}")));
                }
            }
            if c.density_cm3.is_some() && c.pump_mw.is_some() {
                return Err(r.invalid("pump_mW", "give either density_cm3 or pump_mW, not both"));
            }
            if let Some(p) = c.pump_mw {
                if !(p >= 0.0) {
                    return Err(r.invalid("pump_mW", format!("must be non-negative, got {p}")));
                }
            }
            positive(r, "spot_um", c.spot_um)?;
            if !(c.temperature_k > 0.0 && c.temperature_k <= 500.0) {
                return Err(r.invalid("temperature_K", format!("must lie in (0, 500] K, got {}", c.temperature_k)));
            }
            if !(c.gamma_per_s > 0.0 && c.gamma_per_s.is_finite()) {
                return Err(r.invalid("gamma_per_s", "must be positive"));
            }
        }
        if let Some(r) = r {
            r.finish()?;
        }
        c
    };

    let window = if system == SystemKind::Qw { QW_WINDOW } else { BULK_WINDOW };
    let grid = read_grid(doc, "grid", window)?.unwrap_or(GridInputs {
        lo_ev: window.0,
        hi_ev: window.1,
        points: DEFAULT_GRID_POINTS as u64,
    });

    // [geometry]
    let geometry = {
        let mut g = GeometryInputs {
            solid_angle_fraction: 0.01,
            optics_efficiency: 0.3,
            // 30 µm spot, 1 µm deep
            volume_cm3: std::f64::consts::PI * 0.25 * (30e-4f64).powi(2) * 1e-4,
        };
        if let Some(mut r) = section_reader(doc, "geometry") {
            if let Some(v) = r.f64_opt("solid_angle_fraction")? {
                g.solid_angle_fraction = unit_interval(&r, "solid_angle_fraction", v, true)?;
            }
            if let Some(v) = r.f64_opt("optics_efficiency")? {
                g.optics_efficiency = unit_interval(&r, "optics_efficiency", v, true)?;
            }
            if let Some(v) = r.f64_opt("volume_cm3")? {
                g.volume_cm3 = positive(&r, "volume_cm3", v)?;
            }
            r.finish()?;
        }
        g
    };

    // [qw]
    let qw = {
        let mut q = QwInputs {
            well_width_a: 50.0,
            barrier_width_a: 55.0,
            well_material: "GaInP-well".into(),
            barrier_material: "AlGaInP-barrier".into(),
            cbo_ev: 0.28,
            vbo_ev: 0.14,
            periods: 4,
            sheet_area_cm2: 1e-4,
        };
        if let Some(mut r) = section_reader(doc, "qw") {
            if let Some(v) = r.f64_opt("well_width_A")? {
                q.well_width_a = positive(&r, "well_width_A", v)?;
            }
            if let Some(v) = r.f64_opt("barrier_width_A")? {
                q.barrier_width_a = positive(&r, "barrier_width_A", v)?;
            }
            if let Some(v) = r.str_opt("well_material") {
                q.well_material = v;
            }
            if let Some(v) = r.str_opt("barrier_material") {
                q.barrier_material = v;
            }
            if let Some(v) = r.f64_opt("cbo_eV")? {
                q.cbo_ev = positive(&r, "cbo_eV", v)?;
            }
            if let Some(v) = r.f64_opt("vbo_eV")? {
                q.vbo_ev = positive(&r, "vbo_eV", v)?;
            }
            if let Some(v) = r.u64_opt("periods")? {
                if v == 0 || v > u32::MAX as u64 {
                    return Err(r.invalid("periods", "must be a positive integer"));
                }
                q.periods = v;
            }
            if let Some(v) = r.f64_opt("sheet_area_cm2")? {
                q.sheet_area_cm2 = positive(&r, "sheet_area_cm2", v)?;
            }
            r.finish()?;
        }
        q
    };

    // [stimulation]
    let stimulation = match section_reader(doc, "stimulation") {
        None => None,
        Some(mut r) => {
            let energies = match (r.f64_list_opt("energies_eV")?, r.f64_list_opt("wavelengths_nm")?) {
                (Some(_), Some(_)) => return Err(r.invalid("wavelengths_nm", "give energies_eV or wavelengths_nm, not both")),
                (Some(e), None) => e,
                (None, Some(w)) => {
                    let mut e = Vec::new();
                    for l in w {
                        e.push(crate::units::energy_from_wavelength(l).map_err(|m| r.invalid("wavelengths_nm", m.to_string()))?);
                    }
                    e
                }
                (None, None) => return Err(r.invalid("energies_eV", "missing required key in [stimulation]")),
            };
            if energies.is_empty() || energies.iter().any(|e| !(*e > 0.0)) {
                return Err(r.invalid("energies_eV", "energies must be positive"));
            }
            let mut s = StimulationInputs {
                energies_ev: energies,
                power_mw: 1.0,
                mode_area_um2: 5.0,
                confinement: if system == SystemKind::Qw { 0.008 } else { 1.0 },
                n_s: None,
                carrier_budget: false,
            };
            if let Some(v) = r.f64_opt("power_mW")? {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(r.invalid("power_mW", "must be non-negative"));
                }
                s.power_mw = v;
            }
            if let Some(v) = r.f64_opt("mode_area_um2")? {
                s.mode_area_um2 = positive(&r, "mode_area_um2", v)?;
            }
            if let Some(v) = r.f64_opt("confinement")? {
                s.confinement = unit_interval(&r, "confinement", v, true)?;
            }
            if let Some(v) = r.f64_opt("n_s")? {
                if !(v >= 1.0) {
                    return Err(r.invalid("n_s", "refractive index must be >= 1"));
                }
                s.n_s = Some(v);
            }
            if let Some(v) = r.bool_opt("carrier_budget")? {
                s.carrier_budget = v;
            }
            r.finish()?;
            Some(s)
        }
    };

    let resolution_nm = match section_reader(doc, "instrument") {
        None => None,
        Some(mut r) => {
            let v = r.f64_req("resolution_nm")?;
            positive(&r, "resolution_nm", v)?;
            r.finish()?;
            Some(v)
        }
    };

    let onephoton = read_grid(doc, "onephoton", if system == SystemKind::Qw { (1.8, 2.4) } else { (1.3, 1.9) })?;

    let sweep = match section_reader(doc, "sweep") {
        None => None,
        Some(mut r) => {
            let mut s = SweepInputs {
                power_lo_mw: 0.05,
                power_hi_mw: 2.0,
                points: 20,
            };
            if let Some(v) = r.f64_opt("power_lo_mW")? {
                s.power_lo_mw = positive(&r, "power_lo_mW", v)?;
            }
            if let Some(v) = r.f64_opt("power_hi_mW")? {
                s.power_hi_mw = positive(&r, "power_hi_mW", v)?;
            }
            if let Some(v) = r.u64_opt("points")? {
                if v < 2 {
                    return Err(r.invalid("points", "need at least 2 points"));
                }
                s.points = v;
            }
            if s.power_hi_mw <= s.power_lo_mw {
                return Err(r.invalid("power_hi_mW", "must exceed power_lo_mW"));
            }
            r.finish()?;
            Some(s)
        }
    };

    let coincidence = read_coincidence(doc, seed)?;

    // [calibration], inline or from the referenced file
    let calibration = match (doc.section("calibration"), calibration_file) {
        (Some(s), Some(_)) => {
            return Err(doc.error(s.line, "calibration", "give either [calibration] or run.calibration, not both"))
        }
        (Some(_), None) => read_calibration(doc)?,
        (None, Some(file)) => {
            let (label, text) = match origin {
                Origin::Presets => (format!("preset:{file}"), preset(&file)?.to_string()),
                Origin::Dir(_) => {
                    let p = resolve_path(origin, &file);
                    let text = read_text(Path::new(&p)).map_err(|e| match e {
                        Error::Io { source, .. } => doc.error(calibration_line, "calibration", format!("cannot read {p}: {source}")),
                        other => other,
                    })?;
                    (p, text)
                }
            };
            let cal_doc = Document::parse(&label, &text)?;
            read_calibration(&cal_doc)?
        }
        (None, None) => CalibrationInputs {
            gap_offset_ev: 0.0,
            strain_shift_ev: 0.0,
        },
    };

    let calibrate = {
        let mut c = CalibrateInputs {
            bulk_center_ev: 0.81,
            check_density_cm3: 2e18,
            check_center_ev: 0.84,
            qw_center_ev: 0.98,
            qw_density_cm3: 6e18,
            qw_temperature_k: 300.0,
        };
        if let Some(mut r) = section_reader(doc, "calibrate") {
            for (key, slot) in [
                ("bulk_center_eV", &mut c.bulk_center_ev),
                ("check_density_cm3", &mut c.check_density_cm3),
                ("check_center_eV", &mut c.check_center_ev),
                ("qw_center_eV", &mut c.qw_center_ev),
                ("qw_density_cm3", &mut c.qw_density_cm3),
                ("qw_temperature_K", &mut c.qw_temperature_k),
            ] {
                if let Some(v) = r.f64_opt(key)? {
                    *slot = positive(&r, key, v)?;
                }
            }
            r.finish()?;
        }
        c
    };

    Ok(Inputs {
        command,
        system,
        seed,
        materials,
        carriers,
        grid,
        geometry,
        qw,
        stimulation,
        resolution_nm,
        onephoton,
        sweep,
        coincidence,
        calibration,
        calibrate,
    })
}

fn resolve_path(origin: &Origin, p: &str) -> String {
    match origin {
        Origin::Dir(dir) if Path::new(p).is_relative() => {
            let joined = dir.join(p);
            std::fs::canonicalize(&joined).unwrap_or(joined).display().to_string()
        }
        _ => p.to_string(),
    }
}

fn read_grid(doc: &Document, name: &str, default: (f64, f64)) -> Result<Option<GridInputs>> {
    let Some(mut r) = section_reader(doc, name) else {
        return Ok(None);
    };
    let g = GridInputs {
        lo_ev: r.f64_opt("lo_eV")?.unwrap_or(default.0),
        hi_ev: r.f64_opt("hi_eV")?.unwrap_or(default.1),
        points: r.u64_opt("points")?.unwrap_or(DEFAULT_GRID_POINTS as u64),
    };
    positive(&r, "lo_eV", g.lo_ev)?;
    if !(g.hi_ev > g.lo_ev) {
        return Err(r.invalid("hi_eV", "must exceed lo_eV"));
    }
    if !(3..=1_000_000).contains(&g.points) {
        return Err(r.invalid("points", "must lie in [3, 1e6]"));
    }
    r.finish()?;
    Ok(Some(g))
}

fn read_calibration(doc: &Document) -> Result<CalibrationInputs> {
    let section = doc
        .section("calibration")
        .ok_or_else(|| doc.error(1, "calibration", "missing [calibration] section"))?;
    let mut r = Reader::new(doc, section);
    let c = CalibrationInputs {
        gap_offset_ev: r.f64_opt("gap_offset_eV")?.unwrap_or(0.0),
        strain_shift_ev: r.f64_opt("strain_shift_eV")?.unwrap_or(0.0),
    };
    for (k, v) in [("gap_offset_eV", c.gap_offset_ev), ("strain_shift_eV", c.strain_shift_ev)] {
        if !(v.abs() < 1.0) {
            return Err(r.invalid(k, "calibration shifts must be finite and below 1 eV in magnitude"));
        }
    }
    r.finish()?;
    Ok(c)
}

/// Defaults: 100 kHz drive, Si singles near 1000 counts/s, InGaAs
/// efficiency 10 %, 50 µs traps.
pub fn default_coincidence(seed: u64) -> CoincidenceConfig {
    CoincidenceConfig {
        pulse_width: 10.0,
        period: 10.0,
        n_pulses: 1_000_000,
        pair_prob_per_pulse: 0.028,
        eta_si: 0.36,
        eta_ingaas: 0.10,
        dark_prob_si: 1e-6,
        dark_prob_ingaas: 8e-4,
        p0_afterpulse: 0.05,
        tau_trap: 50.0,
        rng_seed: seed,
    }
}

fn read_coincidence(doc: &Document, seed: u64) -> Result<CoincidenceInputs> {
    let mut c = CoincidenceInputs {
        config: default_coincidence(seed),
        delay_lo_us: -300.0,
        delay_hi_us: 600.0,
        extra_delays_us: vec![5.0, 25.0, -15.0],
    };
    let Some(mut r) = section_reader(doc, "coincidence") else {
        return Ok(c);
    };
    let cfg = &mut c.config;
    if let Some(v) = r.f64_opt("pulse_width_ns")? {
        cfg.pulse_width = positive(&r, "pulse_width_ns", v)?;
    }
    if let Some(v) = r.f64_opt("period_us")? {
        cfg.period = positive(&r, "period_us", v)?;
    }
    if let Some(v) = r.u64_opt("n_pulses")? {
        if v == 0 {
            return Err(r.invalid("n_pulses", "must be positive"));
        }
        cfg.n_pulses = v;
    }
    for (key, slot) in [
        ("pair_prob", &mut cfg.pair_prob_per_pulse),
        ("eta_si", &mut cfg.eta_si),
        ("eta_ingaas", &mut cfg.eta_ingaas),
        ("dark_prob_si", &mut cfg.dark_prob_si),
        ("dark_prob_ingaas", &mut cfg.dark_prob_ingaas),
        ("p0_afterpulse", &mut cfg.p0_afterpulse),
    ] {
        if let Some(v) = r.f64_opt(key)? {
            *slot = unit_interval(&r, key, v, false)?;
        }
    }
    if let Some(v) = r.f64_opt("tau_trap_us")? {
        cfg.tau_trap = positive(&r, "tau_trap_us", v)?;
    }
    if cfg.period * 1e3 <= cfg.pulse_width {
        return Err(r.invalid("pulse_width_ns", "pulse must be shorter than the period"));
    }
    if let Some(v) = r.f64_opt("delay_lo_us")? {
        c.delay_lo_us = v;
    }
    if let Some(v) = r.f64_opt("delay_hi_us")? {
        c.delay_hi_us = v;
    }
    if let Some(v) = r.f64_list_opt("extra_delays_us")? {
        c.extra_delays_us = v;
    }
    if !(c.delay_hi_us >= c.delay_lo_us) {
        return Err(r.invalid("delay_hi_us", "must not be below delay_lo_us"));
    }
    r.finish()?;
    Ok(c)
}

/// Builds the system for the inputs with explicit calibration shifts.
pub fn build_system(inputs: &Inputs, table: &MaterialTable, kind: SystemKind, strain_shift: f64, temperature: f64) -> Result<System> {
    Ok(match kind {
        SystemKind::Bulk => System::Bulk {
            material: table.lookup(&inputs.carriers.material)?,
        },
        SystemKind::Qw => {
            let q = &inputs.qw;
            let spec = QWLayerSpec {
                well_width: q.well_width_a,
                barrier_width: q.barrier_width_a,
                well_material: q.well_material.clone(),
                barrier_material: q.barrier_material.clone(),
                conduction_band_offset: q.cbo_ev,
                valence_band_offset: q.vbo_ev,
                num_periods: q.periods as u32,
                strain_shift,
            };
            System::QuantumWell {
                stack: build_stack(&spec, table, temperature, q.sheet_area_cm2)?,
            }
        }
    })
}

/// Carrier state in `system` at density `n`, with the bulk gap offset applied
/// for bulk systems (the well calibration lives in the stack).
pub fn carriers_for(system: &System, n: f64, t: f64, gamma: f64, gap_offset: f64) -> Result<CarrierState> {
    match system {
        System::Bulk { material } => make_carrier_state(material, n, t, gamma)?.shifted(gap_offset),
        System::QuantumWell { stack } => make_qw_carrier_state(&stack.well, stack.layers.well_width, stack.transition_gap, n, t, gamma),
    }
}

pub fn material_table(inputs: &Inputs) -> Result<MaterialTable> {
    match &inputs.materials {
        None => Ok(MaterialTable::shipped()),
        Some(p) => MaterialTable::parse(p, &read_text(Path::new(p))?),
    }
}

fn stimulation_configs(inputs: &Inputs, system: &System) -> Result<Vec<StimulationConfig>> {
    let Some(s) = &inputs.stimulation else {
        return Ok(Vec::new());
    };
    s.energies_ev
        .iter()
        .map(|&e| {
            let n_s = match s.n_s {
                Some(n) => n,
                None => system.material().refractive_index(e)?,
            };
            let c = StimulationConfig {
                e_s: e,
                p_s: s.power_mw * 1e-3,
                mode_area: s.mode_area_um2,
                confinement: s.confinement,
                n_s,
                carrier_budget: s.carrier_budget,
            };
            c.validate()?;
            Ok(c)
        })
        .collect()
}

fn resolve(inputs: &Inputs) -> Result<Resolved> {
    let table = material_table(inputs)?;
    let c = &inputs.carriers;
    let system = build_system(inputs, &table, inputs.system, inputs.calibration.strain_shift_ev, c.temperature_k)?;
    let n = match (c.density_cm3, c.pump_mw) {
        (Some(n), _) => n,
        (None, Some(p)) => pump_to_density(p * 1e-3, c.spot_um, system.material())?,
        (None, None) => {
            return Err(Error::Parse {
                path: "config".into(),
                line: 0,
                key: "density_cm3".into(),
                message: "give [carriers] density_cm3 or pump_mW".into(),
            })
        }
    };
    let state = carriers_for(&system, n, c.temperature_k, c.gamma_per_s, inputs.calibration.gap_offset_ev)?;
    let volume_or_area = match inputs.system {
        SystemKind::Bulk => inputs.geometry.volume_cm3,
        SystemKind::Qw => inputs.qw.sheet_area_cm2,
    };
    let geometry = CollectionGeometry::new(
        inputs.geometry.solid_angle_fraction,
        inputs.geometry.optics_efficiency,
        volume_or_area,
    )?;
    let grid = uniform_grid(inputs.grid.lo_ev, inputs.grid.hi_ev, inputs.grid.points as usize)?;
    let onephoton_grid = match &inputs.onephoton {
        Some(g) => Some(uniform_grid(g.lo_ev, g.hi_ev, g.points as usize)?),
        None => None,
    };
    let stimulations = stimulation_configs(inputs, &system)?;
    Ok(Resolved {
        table,
        system,
        state,
        geometry,
        grid,
        stimulations,
        onephoton_grid,
        delays: Vec::new(),
    })
}

fn f(v: f64) -> String {
    format!("{v:?}")
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| f(*x)).collect::<Vec<_>>().join(", ")
}

impl Inputs {
    /// Config text that parses back to these inputs.
    pub fn to_config(&self) -> String {
        let mut o = String::new();
        let mut line = |s: String| {
            o.push_str(&s);
            o.push('\n');
        };
        line("[run]".into());
        line(format!("command = {}", self.command.name()));
        line(format!("system = {}", if self.system == SystemKind::Qw { "qw" } else { "bulk" }));
        line(format!("seed = {}", self.seed));
        if let Some(m) = &self.materials {
            line(format!("materials = {m}"));
        }
        line(String::new());
        line("[carriers]".into());
        line(format!("material = {}", self.carriers.material));
        if let Some(n) = self.carriers.density_cm3 {
            line(format!("density_cm3 = {}", f(n)));
        }
        if let Some(p) = self.carriers.pump_mw {
            line(format!("pump_mW = {}", f(p)));
        }
        line(format!("spot_um = {}", f(self.carriers.spot_um)));
        line(format!("temperature_K = {}", f(self.carriers.temperature_k)));
        line(format!("gamma_per_s = {}", f(self.carriers.gamma_per_s)));
        line(String::new());
        for (name, g) in [("grid", Some(self.grid)), ("onephoton", self.onephoton)] {
            if let Some(g) = g {
                line(format!("[{name}]"));
                line(format!("lo_eV = {}", f(g.lo_ev)));
                line(format!("hi_eV = {}", f(g.hi_ev)));
                line(format!("points = {}", g.points));
                line(String::new());
            }
        }
        line("[geometry]".into());
        line(format!("solid_angle_fraction = {}", f(self.geometry.solid_angle_fraction)));
        line(format!("optics_efficiency = {}", f(self.geometry.optics_efficiency)));
        line(format!("volume_cm3 = {}", f(self.geometry.volume_cm3)));
        line(String::new());
        let q = &self.qw;
        line("[qw]".into());
        line(format!("well_width_A = {}", f(q.well_width_a)));
        line(format!("barrier_width_A = {}", f(q.barrier_width_a)));
        line(format!("well_material = {}", q.well_material));
        line(format!("barrier_material = {}", q.barrier_material));
        line(format!("cbo_eV = {}", f(q.cbo_ev)));
        line(format!("vbo_eV = {}", f(q.vbo_ev)));
        line(format!("periods = {}", q.periods));
        line(format!("sheet_area_cm2 = {}", f(q.sheet_area_cm2)));
        line(String::new());
        if let Some(s) = &self.stimulation {
            line("[stimulation]".into());
            line(format!("energies_eV = {}", list(&s.energies_ev)));
            line(format!("power_mW = {}", f(s.power_mw)));
            line(format!("mode_area_um2 = {}", f(s.mode_area_um2)));
            line(format!("confinement = {}", f(s.confinement)));
            if let Some(n) = s.n_s {
                line(format!("n_s = {}", f(n)));
            }
            line(format!("carrier_budget = {}", s.carrier_budget));
            line(String::new());
        }
        if let Some(r) = self.resolution_nm {
            line("[instrument]".into());
            line(format!("resolution_nm = {}", f(r)));
            line(String::new());
        }
        if let Some(s) = &self.sweep {
            line("[sweep]".into());
            line(format!("power_lo_mW = {}", f(s.power_lo_mw)));
            line(format!("power_hi_mW = {}", f(s.power_hi_mw)));
            line(format!("points = {}", s.points));
            line(String::new());
        }
        let c = &self.coincidence;
        line("[coincidence]".into());
        line(format!("pulse_width_ns = {}", f(c.config.pulse_width)));
        line(format!("period_us = {}", f(c.config.period)));
        line(format!("n_pulses = {}", c.config.n_pulses));
        line(format!("pair_prob = {}", f(c.config.pair_prob_per_pulse)));
        line(format!("eta_si = {}", f(c.config.eta_si)));
        line(format!("eta_ingaas = {}", f(c.config.eta_ingaas)));
        line(format!("dark_prob_si = {}", f(c.config.dark_prob_si)));
        line(format!("dark_prob_ingaas = {}", f(c.config.dark_prob_ingaas)));
        line(format!("p0_afterpulse = {}", f(c.config.p0_afterpulse)));
        line(format!("tau_trap_us = {}", f(c.config.tau_trap)));
        line(format!("delay_lo_us = {}", f(c.delay_lo_us)));
        line(format!("delay_hi_us = {}", f(c.delay_hi_us)));
        if !c.extra_delays_us.is_empty() {
            line(format!("extra_delays_us = {}", list(&c.extra_delays_us)));
        }
        line(String::new());
        line("[calibration]".into());
        line(format!("gap_offset_eV = {}", f(self.calibration.gap_offset_ev)));
        line(format!("strain_shift_eV = {}", f(self.calibration.strain_shift_ev)));
        line(String::new());
        let k = &self.calibrate;
        line("[calibrate]".into());
        line(format!("bulk_center_eV = {}", f(k.bulk_center_ev)));
        line(format!("check_density_cm3 = {}", f(k.check_density_cm3)));
        line(format!("check_center_eV = {}", f(k.check_center_ev)));
        line(format!("qw_center_eV = {}", f(k.qw_center_ev)));
        line(format!("qw_density_cm3 = {}", f(k.qw_density_cm3)));
        line(format!("qw_temperature_K = {}", f(k.qw_temperature_k)));
        o
    }
}

impl SimulationPlan {
    /// Overrides the seed from the command line.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.inputs.seed = seed;
        self.inputs.coincidence.config.rng_seed = seed;
        self
    }

    pub fn with_output_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.output_dir = Some(dir.into());
        self
    }

    pub fn resolved(&self) -> Result<&Resolved> {
        self.resolved
            .as_ref()
            .ok_or_else(|| Error::Usage(format!("command `{}` has no band-structure inputs", self.command.name())))
    }
}
