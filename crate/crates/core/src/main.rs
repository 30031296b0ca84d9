use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use malliavin_kit::config::SUITES;
use malliavin_kit::report::{version_string, OutputFormat, RunMetadata};
use malliavin_kit::{configure_threads, suites, ExperimentConfig};

/// Verification suites for Malliavin calculus along an operator.
#[derive(Parser)]
#[command(name = "malliavin-kit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite and write its report.
    Run(Overrides),
    /// List the available suites.
    ListSuites,
    /// Print the effective configuration as TOML.
    ShowConfig(Overrides),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Overrides {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; the report goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    suite: Option<String>,
}

impl Overrides {
    fn resolve(&self) -> malliavin_kit::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(f) = self.format {
            cfg.format = match f {
                Format::Csv => OutputFormat::Csv,
                Format::Json => OutputFormat::Json,
            };
        }
        if let Some(s) = &self.suite {
            cfg.suite = s.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn run(o: &Overrides) -> ExitCode {
    let cfg = match o.resolve() {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    let threads = match configure_threads() {
        Ok(t) => t,
        Err(e) => return usage_error(e),
    };
    let start = Instant::now();
    let report = match suites::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let meta = RunMetadata {
        seed: cfg.seed,
        version: version_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        threads,
    };
    let written = match &cfg.out {
        Some(path) => report.write(path, cfg.format, &meta).map(Some),
        None => match cfg.format {
            OutputFormat::Json => report.body_json(),
            OutputFormat::Csv => report.rows_csv(),
        }
        .map(|s| {
            print!("{s}");
            None
        }),
    };
    match written {
        Ok(Some(files)) => {
            print!("{}", report.summary());
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Ok(None) => eprint!("{}", report.summary()),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    if !report.pass {
        for r in report.failing() {
            eprintln!("failing: {} {} {}", r.suite, r.name, r.subject);
        }
    }
    eprintln!("wall time {:.2} s on {threads} threads", meta.wall_time_s);
    ExitCode::from(u8::from(!report.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(o) => run(&o),
        Command::ListSuites => {
            for (name, about) in SUITES {
                println!("{name:<12} {about}");
            }
            println!("{:<12} every suite above, in order", "all");
            ExitCode::SUCCESS
        }
        Command::ShowConfig(o) => match o.resolve() {
            Ok(cfg) => {
                print!("{}", cfg.to_toml());
                ExitCode::SUCCESS
            }
            Err(e) => usage_error(e),
        },
    }
}
