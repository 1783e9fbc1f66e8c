//! `hystcmp`: run DC, sweep, transient, hysteresis and delay analyses on
//! netlist files or on the generated comparator circuits.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hystcmp_core::comparator::Variant;
use hystcmp_core::units::parse_value;

#[derive(Parser, Debug)]
#[command(name = "hystcmp", version, about = "Analog circuit simulator for latch current comparators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// DC operating point: node voltages and device table.
    Op {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Output,
    },
    /// DC sweep of one independent source, as CSV.
    Dc {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        source: String,
        #[arg(long, value_parser = value, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, value_parser = value, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, value_parser = value)]
        step: f64,
        /// Also sweep back from `--to` to `--from`.
        #[arg(long)]
        both: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Fixed-step transient, as CSV.
    Tran {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = value)]
        dt: f64,
        #[arg(long, value_parser = value)]
        stop: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Bidirectional sweep over [-range, range] and the transition currents.
    Hyst {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "IIN")]
        source: String,
        #[arg(long, value_parser = value)]
        range: f64,
        #[arg(long, value_parser = value)]
        step: f64,
        /// Bisection bracket width; defaults to max(1n, step/100).
        #[arg(long, value_parser = value)]
        resolution: Option<f64>,
        #[arg(long, default_value = "OUT")]
        node: String,
        /// Output threshold; defaults to half the supply.
        #[arg(long, value_parser = value)]
        threshold: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Propagation delay for a square-wave stimulus of +/- amp around centre.
    Delay {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = value)]
        amp: f64,
        #[arg(long, value_parser = value)]
        period: f64,
        #[arg(long, value_parser = value, allow_hyphen_values = true, default_value = "0")]
        center: f64,
        /// Edge time of the pulse.
        #[arg(long, value_parser = value, default_value = "100p")]
        rise: f64,
        /// Time step; defaults to rise/20.
        #[arg(long, value_parser = value)]
        dt: Option<f64>,
        #[arg(long, default_value = "IIN")]
        source: String,
        #[arg(long, default_value = "OUT")]
        node: String,
        #[command(flatten)]
        out: Output,
    },
    /// Print a generated comparator netlist.
    Gen {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long, value_parser = value)]
        lambda: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate the closed-form latch and transition-current expressions.
    Analytic {
        #[arg(long, value_parser = value)]
        kn7: f64,
        #[arg(long, value_parser = value)]
        kn9: f64,
        #[arg(long, value_parser = value)]
        kp3: f64,
        #[arg(long, value_parser = value)]
        kp5: f64,
        #[arg(long, value_parser = value, allow_hyphen_values = true)]
        vth: f64,
        #[arg(long, value_parser = value)]
        id1: f64,
        #[arg(long, value_parser = value)]
        id2: f64,
        #[arg(long, value_parser = value, allow_hyphen_values = true)]
        iref: f64,
        #[arg(long, value_parser = value, allow_hyphen_values = true)]
        vc: f64,
        #[arg(long, value_parser = value, allow_hyphen_values = true)]
        vd: f64,
        /// Input current for the node-square expressions.
        #[arg(long, value_parser = value, allow_hyphen_values = true, default_value = "0")]
        iin: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug)]
struct Input {
    /// Netlist file.
    #[arg(required_unless_present = "variant", conflicts_with = "variant")]
    netlist: Option<PathBuf>,
    /// Use a generated comparator instead of a file.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Channel-length modulation for both models of a generated comparator.
    #[arg(long, value_parser = value, requires = "variant")]
    lambda: Option<f64>,
}

#[derive(Args, Debug)]
struct Output {
    /// Write to a file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VariantArg {
    Hysteresis,
    Plain,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Hysteresis => Variant::Hysteresis,
            VariantArg::Plain => Variant::Plain,
        }
    }
}

fn value(s: &str) -> Result<f64, String> {
    parse_value(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
