//! Ground states of the GaInP/AlGaInP well and the resulting transition gap.

use tpespec::materials::{MaterialTable, QWLayerSpec};
use tpespec::quantumwell::{build_stack, ground_state, infinite_well_energy};

fn main() -> tpespec::Result<()> {
    let table = MaterialTable::shipped();
    let well = table.lookup("GaInP-well")?;
    let barrier = table.lookup("AlGaInP-barrier")?;

    // Finite barriers approach the infinite-well level from below.
    for v in [0.05, 0.28, 1.0, 10.0, 100.0] {
        let s = ground_state(50.0, v, well.m_e, barrier.m_e)?;
        println!("V = {v:>6} eV: E0 = {:.5} eV", s.energy_above_band_edge);
    }
    println!("infinite well: {:.5} eV", infinite_well_energy(50.0, well.m_e));

    let spec = QWLayerSpec {
        well_width: 50.0,
        barrier_width: 55.0,
        well_material: "GaInP-well".into(),
        barrier_material: "AlGaInP-barrier".into(),
        conduction_band_offset: 0.28,
        valence_band_offset: 0.14,
        num_periods: 4,
        strain_shift: 0.0,
    };
    let stack = build_stack(&spec, &table, 300.0, 1e-4)?;
    println!(
        "e0_c = {:.4} eV, e0_v = {:.4} eV, |<c|v>|^2 = {:.4}, transition gap = {:.4} eV",
        stack.e0_c, stack.e0_v, stack.overlap_sq, stack.transition_gap
    );
    Ok(())
}
