//! One-photon against two-photon output of the quantum well.

use tpespec::spectra::{one_photon_spectrum, spontaneous_spectrum, total_power};

fn main() -> tpespec::Result<()> {
    let plan = tpespec::parse_preset("fig3b")?;
    let r = plan.resolved()?;
    let tpe = spontaneous_spectrum(&r.state, &r.system, &r.geometry, &r.grid)?;
    let one = one_photon_spectrum(&r.state, &r.system, &r.geometry, r.onephoton_grid.as_ref().unwrap())?;
    let (p2, p1) = (total_power(&tpe, 2)?, total_power(&one, 1)?);
    println!("one-photon peak {:.3} eV, {p1:.3e} W", one.argmax().0);
    println!("two-photon {p2:.3e} W, ratio {:.2e}", p2 / p1);
    Ok(())
}
