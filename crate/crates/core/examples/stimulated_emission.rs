//! Singly-stimulated emission: the partner photon appears at E21 − E_s.

use tpespec::spectra::{complementary_peak, find_peaks, stimulated_components, tpe_center, StimulationConfig};

fn main() -> tpespec::Result<()> {
    let plan = tpespec::parse_preset("fig1a")?;
    let r = plan.resolved()?;
    let center = tpe_center(&r.state, &r.system)?.center;
    println!("spontaneous center {center:.4} eV");
    for e_s in [0.74, 0.761, 0.775, 0.79] {
        let stim = StimulationConfig {
            e_s,
            n_s: r.system.material().refractive_index(e_s)?,
            ..r.stimulations[0]
        };
        let parts = stimulated_components(&r.state, &r.system, &stim, &r.geometry, &r.grid)?;
        let band = complementary_peak(&parts, e_s).expect("complementary band");
        println!(
            "E_s {e_s:.3}: E_c {:.4} eV (pair sum {:.4}), {} resolved peak(s), {:.3e} stimulated pairs/s",
            band.energy,
            band.energy + e_s,
            find_peaks(&parts.signal).len(),
            parts.stimulated_rate
        );
    }
    Ok(())
}
