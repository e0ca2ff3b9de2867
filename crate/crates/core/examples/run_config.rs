//! Runs a config file end to end, as the command-line tool does.
//!
//! `cargo run --example run_config -- path/to/run.cfg [out_dir]`

use tpespec::{parse_config, parse_preset, run};

fn main() -> tpespec::Result<()> {
    let mut args = std::env::args().skip(1);
    let plan = match args.next() {
        Some(path) => parse_config(path)?,
        None => parse_preset("fig3a")?,
    };
    let out = args.next().unwrap_or_else(|| std::env::temp_dir().join("tpespec-example").display().to_string());
    let report = run(&plan.with_output_dir(out))?;
    print!("{}", report.summary.to_text());
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
