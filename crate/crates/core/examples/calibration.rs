//! Fits the calibration constants and checks the held-out bulk center.

fn main() -> tpespec::Result<()> {
    let plan = tpespec::parse_preset("calibrate")?;
    let rec = tpespec::calibrate(&plan)?;
    println!("gap offset {:.6} eV, strain shift {:.6} eV", rec.gap_offset_ev, rec.strain_shift_ev);
    println!(
        "centers: bulk {:.4} eV, bulk at 2e18 {:.4} eV, well {:.4} eV",
        rec.bulk_center_ev, rec.check_center_ev, rec.qw_center_ev
    );
    print!("{}", rec.to_config());
    Ok(())
}
