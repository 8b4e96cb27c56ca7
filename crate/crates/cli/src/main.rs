use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use loglap_cli::{run, with_overrides, Command, EXIT_ERROR};

/// Logarithmic Laplacian: spectrum, Fučík curve, fractional expansion and
/// nonresonance runs. Log level is read from `LOGLAP_LOG`.
#[derive(Parser, Debug)]
#[command(name = "loglap", version)]
struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Mesh size (overrides `mesh.n`).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Print c_N, rho_N and d_N.
    Constants {
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Write the stiffness and mass matrices.
    Assemble {
        /// Also write little-endian binary dumps.
        #[arg(long)]
        binary: bool,
    },
    /// Lowest Dirichlet eigenpairs.
    Eig {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        dump_vectors: bool,
    },
    /// First nontrivial curve over an r grid.
    Curve {
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        grad_tol: Option<f64>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        dump_vectors: bool,
    },
    /// Check a pair; exit 0 iff the residual is within `tol.verify`. Without
    /// a seed file Newton starts from the eigenfunction nearest a diagonal
    /// pair, or from the second eigenfunction otherwise.
    Verify {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        /// One nodal value per line.
        #[arg(long)]
        seed_file: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Defects of the first-order fractional expansion.
    Fracexp {
        #[arg(long, value_name = "S1,S2,...")]
        s_list: Option<String>,
    },
    /// Nonresonance mountain pass for the configured nonlinearity.
    Nonres,
}

fn push<V: ToString>(out: &mut Vec<String>, key: &str, v: Option<V>) {
    if let Some(v) = v {
        out.push(format!("{key}={}", v.to_string()));
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LOGLAP_LOG", "warn")).init();
    let cli = Cli::parse();

    let base = match &cli.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", p.display());
                return ExitCode::from(EXIT_ERROR as u8);
            }
        },
        None => String::new(),
    };
    let mut overrides = Vec::new();
    push(&mut overrides, "mesh.n", cli.n);
    push(&mut overrides, "output.dir", cli.out.as_ref().map(|p| p.display()));
    let command = match cli.command {
        Sub::Constants { dim } => Command::Constants { dim },
        Sub::Assemble { binary } => Command::Assemble { binary },
        Sub::Eig { k, dump_vectors } => {
            push(&mut overrides, "eig.k", k);
            if dump_vectors {
                overrides.push("eig.dump_vectors=true".into());
            }
            Command::Eig
        }
        Sub::Curve {
            r_min,
            r_max,
            steps,
            m,
            grad_tol,
            restarts,
            dump_vectors,
        } => {
            push(&mut overrides, "curve.r_min", r_min);
            push(&mut overrides, "curve.r_max", r_max);
            push(&mut overrides, "curve.steps", steps);
            push(&mut overrides, "path.m", m);
            push(&mut overrides, "tol.grad", grad_tol);
            push(&mut overrides, "curve.restarts", restarts);
            if dump_vectors {
                overrides.push("eig.dump_vectors=true".into());
            }
            Command::Curve
        }
        Sub::Verify {
            alpha,
            beta,
            seed_file,
            tol,
        } => {
            push(&mut overrides, "tol.verify", tol);
            Command::Verify { alpha, beta, seed_file }
        }
        Sub::Fracexp { s_list } => {
            push(&mut overrides, "fracexp.s_list", s_list);
            Command::Fracexp
        }
        Sub::Nonres => Command::Nonres,
    };
    overrides.extend(cli.set);

    let cfg = match with_overrides(&base, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: config: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    match run(&command, &cfg) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
