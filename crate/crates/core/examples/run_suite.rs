//! Load a configuration, run one verification suite in-process and print
//! the summary; the same report the `malliavin-kit` binary writes.
//!
//! ```text
//! cargo run --release --example run_suite -- [suite] [config.toml]
//! ```

use malliavin_kit::{suites, ExperimentConfig};

fn main() -> malliavin_kit::Result<()> {
    let mut args = std::env::args().skip(1);
    let suite = args.next().unwrap_or_else(|| "gradcheck".into());
    let mut cfg = match args.next() {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => ExperimentConfig::default(),
    };
    cfg.suite = suite;
    cfg.validate()?;
    malliavin_kit::configure_threads()?;
    let report = suites::run(&cfg)?;
    print!("{}", report.summary());
    for (name, table) in &report.tables {
        println!("table {name}: {} records", table.len());
    }
    std::process::exit(i32::from(!report.pass));
}
