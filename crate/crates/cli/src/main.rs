use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;

use error::Failure;

#[derive(Parser)]
#[command(name = "liesym", version, about = "Lie point symmetries of y'' = w(x, y, y')")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Markdown,
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// ODE fixture path or right-hand side in x, y, p.
    #[arg(long)]
    pub ode: Option<String>,
    /// Total degree of the polynomial ansatz for xi and eta.
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Numeric tolerance for sampled audits.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Default)]
pub struct Basis {
    /// Generator as "xi,eta"; repeat for a basis. Defaults to the three
    /// symmetries of the bundled equation.
    #[arg(long = "gen")]
    pub gens: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the determining equations and audit each generator.
    Symmetries {
        #[command(flatten)]
        common: Common,
    },
    /// Commutator table, adjoint table, Killing form and classification.
    Algebra {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        basis: Basis,
    },
    /// Adjoint action, symbolic or applied to a coefficient vector.
    Adjoint {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        basis: Basis,
        /// Coefficient vector such as "1,0,1/2".
        #[arg(long)]
        vector: Option<String>,
        /// 1-based basis direction of the group element.
        #[arg(long)]
        direction: Option<usize>,
        /// Group parameter, any expression.
        #[arg(long, default_value = "lambda")]
        lambda: String,
    },
    /// Canonical forms and coverage of the optimal list.
    Optimal {
        #[command(flatten)]
        common: Common,
        /// Canonicalize this coefficient vector.
        #[arg(long)]
        vector: Option<String>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// JSON list of representative families; defaults to the stated list.
        #[arg(long)]
        families: Option<PathBuf>,
    },
    /// Invariant-curve reduction and solution for a subalgebra element.
    Invariant {
        #[command(flatten)]
        common: Common,
        /// Coefficients in the Pi basis; defaults to every tabulated element.
        #[arg(long)]
        element: Option<String>,
    },
    /// Multiplier, Lagrangian, variational symmetry and first integral.
    Noether {
        #[command(flatten)]
        common: Common,
        /// Noether fixture JSON; defaults to the bundled one.
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        trajectories: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol_conservation: f64,
    },
    /// Full reproduction report.
    VerifyPaper {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        trajectories: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol_conservation: f64,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (common, out) = match cli.command {
        Command::Symmetries { common } => {
            let o = commands::symmetries(&common)?;
            (common, o)
        }
        Command::Algebra { common, basis } => {
            let o = commands::algebra(&common, &basis)?;
            (common, o)
        }
        Command::Adjoint { common, basis, vector, direction, lambda } => {
            let o = commands::adjoint(&common, &basis, vector.as_deref(), direction, &lambda)?;
            (common, o)
        }
        Command::Optimal { common, vector, samples, families } => {
            let o = commands::optimal(&common, vector.as_deref(), samples, families.as_deref())?;
            (common, o)
        }
        Command::Invariant { common, element } => {
            let o = commands::invariant(&common, element.as_deref())?;
            (common, o)
        }
        Command::Noether { common, fixture, trajectories, tol_conservation } => {
            let o = commands::noether(&common, fixture.as_deref(), trajectories, tol_conservation)?;
            (common, o)
        }
        Command::VerifyPaper { common, samples, trajectories, tol_conservation } => {
            let o = commands::verify_paper(&common, samples, trajectories, tol_conservation);
            (common, o)
        }
    };
    let text = match common.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).expect("json value");
            s.push('\n');
            s
        }
        Format::Markdown => out.markdown,
    };
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::other(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
