//! Quasi-Fermi levels and the renormalized gap of injected GaAs.

use tpespec::carriers::{effective_dos, exact_eta, joyce_dixon_eta, make_carrier_state, DEFAULT_GAMMA};
use tpespec::materials::lookup;

fn main() -> tpespec::Result<()> {
    let gaas = lookup("GaAs")?;
    let t = 330.0;
    let nc = effective_dos(gaas.m_e, t);
    println!("N_c(330 K) = {nc:.3e} cm^-3");
    println!("{:>10} {:>10} {:>10} {:>10}", "n/N_c", "eta JD", "eta exact", "diff");
    for ratio in [0.01, 0.1, 1.0, 3.0, 10.0] {
        let jd = joyce_dixon_eta(ratio * nc, nc)?;
        let ex = exact_eta(ratio * nc, nc)?;
        println!("{ratio:>10} {jd:>10.5} {ex:>10.5} {:>10.2e}", jd - ex);
    }
    for n in [1e17, 1.2e18, 2e18, 5e18] {
        let s = make_carrier_state(&gaas, n, t, DEFAULT_GAMMA)?;
        println!(
            "n = {n:.1e}: eta_c = {:+.3}, eta_v = {:+.3}, Eg_eff = {:.4} eV",
            s.eta_c, s.eta_v, s.eg_eff
        );
    }
    Ok(())
}
