//! Command-line surface of the cr3d library: mesh generation and IO,
//! invariant check suites, basis dumps for plotting, Poisson solves and
//! h-convergence studies.
//!
//! Exit codes: 0 success, 1 numerical failure (a check or solve did not meet
//! its tolerance), 2 usage or IO errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod checks;
mod commands;

#[derive(Parser)]
#[command(
    name = "cr3d",
    version,
    about = "High-order Crouzeix-Raviart finite elements in 3D"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeshKind {
    Cube,
    Octahedron,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BasisFamily {
    Sym,
    Refl,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Problem {
    /// u = sin(pi x) sin(pi y) sin(pi z) on the unit cube
    Sine,
    /// u = x(1-x) y(1-y) z(1-z), a degree-6 polynomial
    Bubble,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a structured mesh and write it in the cr3dmesh format.
    GenMesh {
        kind: MeshKind,
        /// Subdivisions per axis (cube only).
        #[arg(default_value_t = 1)]
        n: usize,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant check suites of all modules.
    Check {
        /// Largest polynomial degree exercised (at most 8).
        #[arg(long, default_value_t = 4)]
        p_max: u32,
        /// Scale factor applied to every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
        /// Quadrature exactness override for quadrature-based checks.
        #[arg(long)]
        quad_exactness: Option<u32>,
        /// Test mode: perturb a coefficient to demonstrate failure reporting.
        #[arg(long, hide = true)]
        inject_perturbation: bool,
    },
    /// Dump a basis function on the reference triangle and the matching
    /// non-conforming function on a tetrahedron surface as CSV grids.
    BasisDump {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long)]
        family: BasisFamily,
        /// Grid resolution; the triangle dump has grid_n^2 points.
        #[arg(long, default_value_t = 40)]
        grid_n: usize,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the Poisson model problem with a manufactured solution and
    /// report the discretization errors as CSV.
    Solve {
        #[arg(long)]
        p: u32,
        /// Mesh file in cr3dmesh format.
        #[arg(long, conflicts_with = "gen")]
        mesh: Option<PathBuf>,
        /// Generator spec: "cube:N" or "octahedron".
        #[arg(long)]
        gen: Option<String>,
        #[arg(long, value_enum, default_value_t = Problem::Sine)]
        problem: Problem,
        /// Quadrature exactness override for the stiffness integrals.
        #[arg(long)]
        quad_exactness: Option<u32>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an h-convergence study on the unit cube and report rates as CSV.
    Convergence {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = Problem::Sine)]
        problem: Problem,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::GenMesh { kind, n, out } => commands::gen_mesh(kind, n, out),
        Command::Check {
            p_max,
            tol,
            quad_exactness,
            inject_perturbation,
        } => checks::run(p_max, tol, quad_exactness, inject_perturbation),
        Command::BasisDump {
            p,
            k,
            family,
            grid_n,
            out,
        } => commands::basis_dump(p, k, family, grid_n, out),
        Command::Solve {
            p,
            mesh,
            gen,
            problem,
            quad_exactness,
            out,
        } => commands::solve(p, mesh, gen, problem, quad_exactness, out),
        Command::Convergence {
            p,
            levels,
            problem,
            out,
        } => commands::convergence(p, levels, problem, out),
    };
    match outcome {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}

/// Errors bubbled to the process boundary with their exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Numerical(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<cr3d::Error> for CliError {
    fn from(error: cr3d::Error) -> Self {
        match error {
            cr3d::Error::Solver(msg) | cr3d::Error::Internal(msg) => CliError::Numerical(msg),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(error: std::io::Error) -> Self {
        CliError::Usage(error.to_string())
    }
}
