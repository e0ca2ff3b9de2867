//! Spontaneous two-photon spectrum of calibrated bulk GaAs.

use tpespec::carriers::{make_carrier_state, DEFAULT_GAMMA};
use tpespec::materials::lookup;
use tpespec::spectra::{spontaneous_spectrum, total_power, tpe_center, uniform_grid, CollectionGeometry, System};

fn main() -> tpespec::Result<()> {
    let gaas = lookup("GaAs")?;
    let plan = tpespec::parse_preset("fig1a")?;
    let offset = plan.inputs.calibration.gap_offset_ev;
    let state = make_carrier_state(&gaas, 1.2e18, 330.0, DEFAULT_GAMMA)?.shifted(offset)?;
    let system = System::Bulk { material: gaas };
    let geom = CollectionGeometry::new(0.01, 0.3, 7.07e-10)?;
    let grid = uniform_grid(0.55, 1.15, 121)?;

    let spec = spontaneous_spectrum(&state, &system, &geom, &grid)?;
    for (e, v) in spec.grid.iter().zip(&spec.values).step_by(10) {
        println!("{e:.3} eV  {v:.4e} /s/eV");
    }
    let c = tpe_center(&state, &system)?;
    println!("center {:.4} eV, mean photon energy {:.4} eV", c.center, c.centroid);
    println!("collected power {:.3e} W", total_power(&spec, 2)?);
    Ok(())
}
