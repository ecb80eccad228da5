use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mmp", version, about = "Flips, rational blow-downs and minimal models of quotient surface singularities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the fraction n/q represented by a chain
    Fraction { chain: String },
    /// Print the minimal resolution of n/q or 1/n(1,q)
    Resolve { fraction: String },
    /// Class T0 utilities
    T0 {
        #[command(subcommand)]
        command: T0Command,
    },
    /// Check the M-resolution conditions
    Validate { chain: String },
    /// Apply a flip (first available site by default)
    Flip {
        chain: String,
        #[arg(long)]
        site: Option<String>,
    },
    /// Apply an antiflip (first available site by default)
    Antiflip {
        chain: String,
        #[arg(long)]
        site: Option<String>,
    },
    /// Print the moves between the minimal resolution and an M-resolution
    Trace {
        chain: String,
        #[arg(long)]
        json: bool,
        #[arg(long, value_enum, default_value_t = Direction::Down)]
        direction: Direction,
    },
    /// Re-run a JSON trace and print its end chain
    Replay { trace: PathBuf },
    /// Trace a decorated tree given as JSON
    Toi {
        tree: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Check that the second chain is the flip of the first via homology
    Certify {
        y: String,
        y_plus: String,
        #[arg(long)]
        show_classes: bool,
    },
    /// Zero continued fractions
    Zero {
        #[command(subcommand)]
        command: ZeroCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum T0Command {
    /// Recognize a class T chain
    Check { weights: String },
    /// List T0 chains up to a length
    Generate { max_len: usize },
    /// Position of the initial curve
    Initial { weights: String },
}

#[derive(Debug, Subcommand)]
pub enum ZeroCommand {
    /// List zero strings below the given bounds
    Enum {
        #[arg(long, value_delimiter = ',', required = true)]
        bounds: Vec<i64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    /// Blow-downs and antiflips from the minimal resolution
    Down,
    /// Blow-ups and flips towards the minimal resolution
    Up,
}
