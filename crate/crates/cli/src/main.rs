//! `quatcm` command-line front end.
//!
//! Exit status: 0 on success, 1 for invalid input, 2 when an exact
//! consistency check fails.

mod cache;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "quatcm", version, about = "CM points, definite quaternion orders and ternary theta series")]
pub struct Cli {
    /// Directory for cached class sets.
    #[arg(long, global = true, env = "QUATCM_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// TOML file with defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Locus {
    /// Reduced discriminant of the definite algebra.
    #[arg(long)]
    pub delta: Option<u64>,
    /// Eichler level.
    #[arg(long)]
    pub level: Option<u64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Range {
    /// Smallest |D| (inclusive).
    #[arg(long)]
    pub d_min: Option<u64>,
    /// Largest |D| (exclusive).
    #[arg(long)]
    pub d_max: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Right ideal classes of the Eichler order of level N.
    Classset {
        #[command(flatten)]
        locus: Locus,
    },
    /// Gross lattices of the left orders, one per class.
    Gross {
        #[command(flatten)]
        locus: Locus,
    },
    /// Theta coefficients r(m) and r*(m) of the Gross lattices.
    Theta {
        #[command(flatten)]
        locus: Locus,
        #[arg(long)]
        bound: Option<u64>,
        /// Only this class.
        #[arg(long)]
        class: Option<u64>,
        /// Write one CSV per class into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Genus and spinor genera of a Gross lattice.
    Genus {
        #[command(flatten)]
        locus: Locus,
        #[arg(long)]
        class: Option<u64>,
    },
    /// Optimal embeddings of O_{D,c} into each left order.
    Embed {
        #[command(flatten)]
        locus: Locus,
        /// Fundamental discriminant D < 0.
        #[arg(long, allow_hyphen_values = true)]
        disc: Option<i64>,
        #[arg(long)]
        conductor: Option<u64>,
    },
    /// Reduction measures of CM orbits and their distance to the canonical one.
    Equidist {
        #[command(flatten)]
        locus: Locus,
        /// Reduction prime, dividing Δ·N.
        #[arg(long)]
        p: Option<u64>,
        #[command(flatten)]
        range: Range,
        #[arg(long)]
        c_min: Option<u64>,
        #[arg(long)]
        c_max: Option<u64>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Counting layer for Shimura curves.
    Census {
        #[command(subcommand)]
        which: Census,
    },
}

#[derive(Subcommand, Debug)]
pub enum Census {
    /// Genus of the Shimura curve of discriminant Δ (indefinite) and level N.
    Genus {
        #[command(flatten)]
        locus: Locus,
    },
    /// Supersingular count (p−1)(g−1).
    Ss {
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        genus: Option<u64>,
    },
    /// Superspecial count h(Δ/p, Np).
    Ssp {
        #[command(flatten)]
        locus: Locus,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Dual graph of the fiber at p | Δ.
    Dualgraph {
        #[command(flatten)]
        locus: Locus,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// r*(Q_i, |D|)/h(D) over fundamental D.
    Ratio {
        #[command(flatten)]
        locus: Locus,
        #[command(flatten)]
        range: Range,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("quatcm: {e}");
            match e {
                quatcm::Error::Input(_) => ExitCode::from(1),
                quatcm::Error::Consistency(_) => ExitCode::from(2),
            }
        }
    }
}
