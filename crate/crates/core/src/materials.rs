//! Material parameters, temperature-dependent gaps and refractive index.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kv::{Document, Reader};
use crate::units::{E_CHARGE, M0};

const SHIPPED_TABLE: &str = include_str!("../data/materials.cfg");

/// Photon-energy window over which refractive indices are evaluated [eV].
pub const INDEX_WINDOW: (f64, f64) = (0.3, 2.5);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RefractiveModel {
    Constant { n: f64 },
    /// Single-oscillator fit: n² = 1 + E_d·E_0 / (E_0² − E²).
    Wemple { e0: f64, ed: f64 },
}

impl RefractiveModel {
    fn parse(text: &str) -> Option<Self> {
        let mut it = text.split_whitespace();
        let kind = it.next()?;
        let nums: Vec<f64> = it.map(|s| s.parse().ok()).collect::<Option<_>>()?;
        match (kind, nums.as_slice()) {
            ("constant", [n]) => Some(RefractiveModel::Constant { n: *n }),
            ("wemple", [e0, ed]) => Some(RefractiveModel::Wemple { e0: *e0, ed: *ed }),
            _ => None,
        }
    }

    fn to_text(self) -> String {
        match self {
            RefractiveModel::Constant { n } => format!("constant {n}"),
            RefractiveModel::Wemple { e0, ed } => format!("wemple {e0} {ed}"),
        }
    }

    fn eval(self, e: f64) -> f64 {
        match self {
            RefractiveModel::Constant { n } => n,
            RefractiveModel::Wemple { e0, ed } => (1.0 + ed * e0 / (e0 * e0 - e * e)).sqrt(),
        }
    }

    /// Upper energy edge of the model's validity.
    fn edge(self) -> f64 {
        match self {
            RefractiveModel::Constant { .. } => f64::INFINITY,
            // stay clear of the oscillator pole
            RefractiveModel::Wemple { e0, .. } => 0.95 * e0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub name: String,
    /// Band gap at 0 K [eV].
    pub eg0: f64,
    /// Varshni α [eV/K].
    pub varshni_alpha: f64,
    /// Varshni β [K].
    pub varshni_beta: f64,
    /// Conduction-band mass [m0].
    pub m_e: f64,
    /// Heavy-hole mass [m0].
    pub m_hh: f64,
    /// Reduced mass [m0], always m_e·m_hh/(m_e+m_hh).
    pub m_r: f64,
    /// Kane energy E_p [eV]; p_cv² = (m0/2)·E_p.
    pub ep: f64,
    /// Band-gap shrinkage coefficient [eV] at n = 1e18 cm⁻³.
    pub c_bgr: f64,
    pub n_model: RefractiveModel,
}

impl MaterialParams {
    /// Builds and validates a record. `m_r` is derived here.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        eg0: f64,
        varshni_alpha: f64,
        varshni_beta: f64,
        m_e: f64,
        m_hh: f64,
        ep: f64,
        c_bgr: f64,
        n_model: RefractiveModel,
    ) -> Result<Self> {
        let m = MaterialParams {
            name: name.into(),
            eg0,
            varshni_alpha,
            varshni_beta,
            m_e,
            m_hh,
            m_r: m_e * m_hh / (m_e + m_hh),
            ep,
            c_bgr,
            n_model,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Configuration(format!("material {}: {what}", self.name)));
        if !(self.eg0 > 0.0) {
            return bad("Eg0 must be positive");
        }
        if !(self.ep > 0.0) {
            return bad("Ep must be positive");
        }
        if !(self.m_e > 0.0 && self.m_e < self.m_hh) {
            return bad("need 0 < m_e < m_hh");
        }
        if self.m_r != self.m_e * self.m_hh / (self.m_e + self.m_hh) {
            return bad("m_r inconsistent with m_e and m_hh");
        }
        if !(self.varshni_alpha >= 0.0 && self.varshni_beta > 0.0) {
            return bad("Varshni coefficients must be alpha >= 0, beta > 0");
        }
        if !(self.c_bgr >= 0.0) {
            return bad("c_bgr must be non-negative");
        }
        match self.n_model {
            RefractiveModel::Constant { n } if !(n >= 1.0) => return bad("constant index must be >= 1"),
            RefractiveModel::Wemple { e0, ed } if !(e0 > INDEX_WINDOW.1 / 0.95 && ed > 0.0) => {
                return bad("Wemple model needs E0 above the evaluation window and Ed > 0")
            }
            _ => {}
        }
        Ok(())
    }

    /// Squared interband momentum matrix element p_cv² [kg² m² s⁻²].
    pub fn p_cv_sq(&self) -> f64 {
        0.5 * M0 * self.ep * E_CHARGE
    }

    /// Varshni gap [eV] at temperature `t` [K], 0 ≤ t ≤ 500.
    pub fn bandgap(&self, t: f64) -> Result<f64> {
        if !(0.0..=500.0).contains(&t) {
            return Err(Error::domain(format!("temperature {t} K outside [0, 500] K")));
        }
        Ok(self.eg0 - self.varshni_alpha * t * t / (t + self.varshni_beta))
    }

    /// Refractive index at photon energy `e` [eV].
    pub fn refractive_index(&self, e: f64) -> Result<f64> {
        let (lo, hi) = INDEX_WINDOW;
        if !(e >= lo && e <= hi && e < self.n_model.edge()) {
            return Err(Error::domain(format!(
                "photon energy {e} eV outside refractive-index window [{lo}, {hi}] eV"
            )));
        }
        Ok(self.n_model.eval(e))
    }

    /// Refractive index clamped into the validity window; for internal use
    /// where the spectral grid may graze the window edges.
    pub(crate) fn index_clamped(&self, e: f64) -> f64 {
        let (lo, hi) = INDEX_WINDOW;
        self.n_model.eval(e.clamp(lo, hi.min(self.n_model.edge())))
    }

    fn to_block(&self) -> String {
        format!(
            "[{}]\nEg0 = {}\nvarshni_alpha = {}\nvarshni_beta = {}\nm_e = {}\nm_hh = {}\nEp = {}\nc_bgr = {}\nn_model = {}\n",
            self.name,
            self.eg0,
            self.varshni_alpha,
            self.varshni_beta,
            self.m_e,
            self.m_hh,
            self.ep,
            self.c_bgr,
            self.n_model.to_text()
        )
    }
}

/// A set of materials keyed by name.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialTable {
    entries: BTreeMap<String, MaterialParams>,
}

impl MaterialTable {
    /// The table compiled into the crate.
    pub fn shipped() -> Self {
        Self::parse("materials.cfg", SHIPPED_TABLE).expect("shipped material table is valid")
    }

    pub fn parse(path: &str, text: &str) -> Result<Self> {
        let doc = Document::parse(path, text)?;
        let mut entries = BTreeMap::new();
        for section in &doc.sections {
            let mut r = Reader::new(&doc, section);
            let model_text = r
                .str_opt("n_model")
                .ok_or_else(|| doc.error(section.line, "n_model", "missing required key"))?;
            let n_model = RefractiveModel::parse(&model_text)
                .ok_or_else(|| r.invalid("n_model", format!("cannot parse `{model_text}`")))?;
            let eg0 = r.f64_req("Eg0")?;
            let alpha = r.f64_req("varshni_alpha")?;
            let beta = r.f64_req("varshni_beta")?;
            let m_e = r.f64_req("m_e")?;
            let m_hh = r.f64_req("m_hh")?;
            let m_r = r.f64_opt("m_r")?;
            let ep = r.f64_req("Ep")?;
            let c_bgr = r.f64_opt("c_bgr")?.unwrap_or(0.0);
            let params = MaterialParams::new(&section.name, eg0, alpha, beta, m_e, m_hh, ep, c_bgr, n_model)
                .map_err(|e| doc.error(section.line, &section.name, e.to_string()))?;
            if let Some(given) = m_r {
                if ((given - params.m_r) / params.m_r).abs() > 1e-6 {
                    return Err(r.invalid("m_r", format!("expected {} from m_e, m_hh", params.m_r)));
                }
            }
            r.finish()?;
            entries.insert(section.name.clone(), params);
        }
        Ok(MaterialTable { entries })
    }

    /// Adds (or replaces) a row.
    pub fn insert(&mut self, params: MaterialParams) -> Result<()> {
        params.validate()?;
        self.entries.insert(params.name.clone(), params);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Result<MaterialParams> {
        self.entries.get(name).cloned().ok_or_else(|| Error::Lookup {
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn to_text(&self) -> String {
        self.entries.values().map(|m| m.to_block()).collect::<Vec<_>>().join("\n")
    }
}

/// Shorthand for a lookup in the shipped table.
pub fn lookup(name: &str) -> Result<MaterialParams> {
    MaterialTable::shipped().lookup(name)
}

/// Geometry of the multi-quantum-well active region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QWLayerSpec {
    /// [Å]
    pub well_width: f64,
    /// [Å]
    pub barrier_width: f64,
    pub well_material: String,
    pub barrier_material: String,
    /// [eV]
    pub conduction_band_offset: f64,
    /// [eV]
    pub valence_band_offset: f64,
    pub num_periods: u32,
    /// Additive shift of the well gap from strain [eV].
    pub strain_shift: f64,
}

impl QWLayerSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.well_width > 0.0 && self.barrier_width > 0.0) {
            return Err(Error::Configuration("well and barrier widths must be positive".into()));
        }
        if !(self.conduction_band_offset > 0.0 && self.valence_band_offset > 0.0) {
            return Err(Error::Configuration(format!(
                "band offsets must be positive (cbo = {}, vbo = {}): no bound state",
                self.conduction_band_offset, self.valence_band_offset
            )));
        }
        if self.num_periods < 1 {
            return Err(Error::Configuration("num_periods must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaas_lookup() {
        let g = lookup("GaAs").unwrap();
        assert!((g.m_e - 0.067).abs() < 1e-12);
        assert_eq!(g.m_r, g.m_e * g.m_hh / (g.m_e + g.m_hh));
    }

    #[test]
    fn unknown_material_lists_available() {
        match lookup("unobtainium") {
            Err(Error::Lookup { available, .. }) => {
                assert!(available.contains("GaAs"));
                assert!(available.contains("GaInP-well"));
                assert!(available.contains("AlGaInP-barrier"));
            }
            other => panic!("expected lookup error, got {other:?}"),
        }
    }

    #[test]
    fn varshni_gaas() {
        let g = lookup("GaAs").unwrap();
        assert_eq!(g.bandgap(0.0).unwrap(), 1.519);
        assert!((g.bandgap(300.0).unwrap() - 1.424).abs() < 0.003);
        assert!(g.bandgap(-1.0).is_err());
        assert!(g.bandgap(501.0).is_err());
    }

    #[test]
    fn gap_non_increasing_for_all_shipped() {
        let table = MaterialTable::shipped();
        for name in table.names() {
            let m = table.lookup(&name).unwrap();
            assert_eq!(m.bandgap(0.0).unwrap(), m.eg0);
            let mut prev = f64::INFINITY;
            for i in 0..=400 {
                let eg = m.bandgap(i as f64).unwrap();
                assert!(eg <= prev, "{name} at {i} K");
                prev = eg;
            }
        }
    }

    #[test]
    fn refractive_index_models() {
        let mut g = lookup("GaAs").unwrap();
        // published single-oscillator values for GaAs give ~3.37-3.38 at 0.81 eV
        assert!((g.refractive_index(0.81).unwrap() - 3.37).abs() < 0.02);
        let mut prev = 0.0;
        for i in 0..=100 {
            let e = 0.3 + 1.1 * i as f64 / 100.0;
            let n = g.refractive_index(e).unwrap();
            assert!(n >= prev && n >= 1.0);
            prev = n;
        }
        assert!(g.refractive_index(0.1).is_err());
        assert!(g.refractive_index(3.0).is_err());
        g.n_model = RefractiveModel::Constant { n: 3.4 };
        assert_eq!(g.refractive_index(0.5).unwrap(), 3.4);
        assert_eq!(g.refractive_index(2.0).unwrap(), 3.4);
    }

    #[test]
    fn table_text_rejects_unknown_keys_and_bad_rows() {
        let bad = "[X]\nEg0 = 1\nvarshni_alpha = 0\nvarshni_beta = 1\nm_e = 0.1\nm_hh = 0.5\nEp = 20\nn_model = constant 3\ncolour = red\n";
        assert!(matches!(MaterialTable::parse("t", bad), Err(Error::Parse { key, .. }) if key == "colour"));
        let inverted = "[X]\nEg0 = 1\nvarshni_alpha = 0\nvarshni_beta = 1\nm_e = 0.6\nm_hh = 0.5\nEp = 20\nn_model = constant 3\n";
        assert!(MaterialTable::parse("t", inverted).is_err());
        let wrong_mr = "[X]\nEg0 = 1\nvarshni_alpha = 0\nvarshni_beta = 1\nm_e = 0.1\nm_hh = 0.5\nm_r = 0.2\nEp = 20\nn_model = constant 3\n";
        assert!(MaterialTable::parse("t", wrong_mr).is_err());
    }

    #[test]
    fn table_round_trips_through_text() {
        let t = MaterialTable::shipped();
        let again = MaterialTable::parse("echo", &t.to_text()).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn complementary_pair_indices_finite() {
        let table = MaterialTable::shipped();
        for name in table.names() {
            let m = table.lookup(&name).unwrap();
            for e1 in [0.4, 0.7, 0.81, 0.98] {
                for e21 in [1.5, 1.62, 1.96] {
                    let e2: f64 = e21 - e1;
                    if e2 < INDEX_WINDOW.0 {
                        continue;
                    }
                    let (n1, n2) = (m.refractive_index(e1).unwrap(), m.refractive_index(e2).unwrap());
                    assert!(n1.is_finite() && n1 >= 1.0 && n2.is_finite() && n2 >= 1.0);
                }
            }
        }
    }
}
