use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qledger::scenarios::{energy_transfer_scenario, stern_gerlach_scenario, Check};
use qledger::verify::{run_suite, Suite};
use qledger_cli::output::{self, format_value, Format, Table};
use qledger_cli::{parse_script, runner};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "qledger", version, about = "Entropy ledgers for purified quantum evolutions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario script.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Run a built-in scenario.
    Scenario {
        #[arg(value_enum)]
        name: ScenarioName,
        /// Record qubits for stern-gerlach.
        #[arg(long, default_value_t = 1)]
        lab_qubits: usize,
        /// Field register size for energy-transfer.
        #[arg(long, default_value_t = 8)]
        field_qubits: usize,
        #[arg(long, default_value_t = 1)]
        detector_size: usize,
        #[arg(long, default_value_t = 4)]
        detectors: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Run a randomized verification suite.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioName {
    SternGerlach,
    EnergyTransfer,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

fn emit(table: &Table, checks: &[Check], format: Format) -> ExitCode {
    print!("{}", output::render(table, format));
    let report = output::render_checks(checks);
    if format == Format::Table {
        println!();
        print!("{report}");
    } else {
        eprint!("{report}");
    }
    if checks.iter().all(|c| c.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn usage_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_USAGE)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { file, seed, format } => {
            let text = match std::fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => return usage_error(format!("{}: {e}", file.display())),
            };
            let script = match parse_script(&text) {
                Ok(s) => s,
                Err(e) => return usage_error(format!("{}:{e}", file.display())),
            };
            match runner::run(&script, seed) {
                Ok(run) => emit(&run.table(), &run.checks, format),
                Err(e) => usage_error(e),
            }
        }
        Command::Scenario {
            name,
            lab_qubits,
            field_qubits,
            detector_size,
            detectors,
            seed,
            format,
        } => {
            let run = match name {
                ScenarioName::SternGerlach => stern_gerlach_scenario(lab_qubits, seed),
                ScenarioName::EnergyTransfer => energy_transfer_scenario(field_qubits, detector_size, detectors, seed),
            };
            match run {
                Ok(run) => emit(&Table::from_scenario(&run), &run.checks, format),
                Err(e) => usage_error(e),
            }
        }
        Command::Verify { suite, instances, seed } => {
            let report = match run_suite(suite, instances, seed) {
                Ok(r) => r,
                Err(e) => return usage_error(e),
            };
            println!("suite: {}", report.suite);
            println!("seed: {seed}");
            println!("passed: {}/{}", report.passed, report.instances);
            println!("{}: {:.6e}", suite.metric(), report.worst);
            if let Some(i) = report.first_failure {
                println!("first failure: instance {i}");
            }
            for (name, value) in &report.notes {
                let value = *value + 0.0;
                if value.fract() == 0.0 && value.abs() < 1e15 {
                    println!("{name}: {value}");
                } else {
                    println!("{name}: {}", format_value(value));
                }
            }
            let ok = report.ok();
            println!("verdict: {}", if ok { "PASS" } else { "FAIL" });
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED)
            }
        }
    }
}
