//! Delay scan of the pulsed coincidence experiment with afterpulsing.

use tpespec::coincidence::{accidental_background, analyze_scan, simulate};
use tpespec::config::{coincidence_delays, parse_preset};

fn main() -> tpespec::Result<()> {
    let plan = parse_preset("fig4")?;
    let c = &plan.inputs.coincidence;
    let result = simulate(&c.config, &coincidence_delays(c))?;
    let a = analyze_scan(&c.config, &result)?;
    println!("Si singles {} per {} pulses", result.si_singles, c.config.n_pulses);
    println!("zero delay {:.4} +- {:.4}", a.zero_delay, a.zero_delay_stderr);
    println!(
        "negative delays {:.5} +- {:.5} (analytic {:.5})",
        a.negative_mean,
        a.negative_stderr,
        accidental_background(&c.config)
    );
    println!("decay constant {:.1} us (trap lifetime {} us)", a.fit.tau, c.config.tau_trap);
    for (d, f, e) in &a.off_grid {
        println!("off-grid delay {d} us: {f:.2e} +- {e:.1e}");
    }
    Ok(())
}
