//! Spectrometer broadening and peak merging near the spontaneous center.

use tpespec::spectra::{convolve_instrument, find_peaks, stimulated_components, StimulationConfig};

fn main() -> tpespec::Result<()> {
    let plan = tpespec::parse_preset("fig1a")?;
    let r = plan.resolved()?;
    for detuning in [0.015, 0.03, 0.045, 0.06] {
        let e_s = 0.81 - detuning;
        let stim = StimulationConfig { e_s, ..r.stimulations[0] };
        let parts = stimulated_components(&r.state, &r.system, &stim, &r.geometry, &r.grid)?;
        let seen = convolve_instrument(&parts.signal, 5.0)?;
        let peaks = find_peaks(&seen);
        let list: Vec<String> = peaks.iter().map(|p| format!("{:.3} eV (FWHM {:.0} meV)", p.energy, 1e3 * p.fwhm)).collect();
        println!("detuning {:>2.0} meV: {}", 1e3 * detuning, list.join(", "));
        println!("  area before {:.4e}, after {:.4e}", parts.signal.area(), seen.area());
    }
    Ok(())
}
