use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use permres::cli::{self, Outcome, RunConfig};
use permres::Caps;

/// Permutation resolutions of modules over elementary abelian p-groups.
#[derive(Parser)]
#[command(name = "permres", version)]
struct Cli {
    /// Largest module dimension any step may produce.
    #[arg(long, global = true, default_value_t = Caps::default().max_dim)]
    cap_dim: usize,
    /// Largest admissible group order p^r.
    #[arg(long, global = true, default_value_t = Caps::default().max_order)]
    cap_order: usize,
    /// Seed for random modules and isomorphism probes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Random trials for isomorphism probes.
    #[arg(long, global = true, default_value_t = 64)]
    trials: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a certified resolution free up to degree m.
    Build {
        module: PathBuf,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recheck every certificate of a complex file.
    Verify {
        complex: PathBuf,
        #[arg(long)]
        m: Option<usize>,
    },
    /// The n-th Heller loop of a module.
    Omega {
        module: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Probe the result for an isomorphism with this module.
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Tensor product of two permutation descriptors.
    Tensor {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A seeded random module.
    Random {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a module, descriptor or complex file.
    Info { file: PathBuf },
    /// Remove free summands of the resolved module from degree 0.
    Trim {
        complex: PathBuf,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let cfg = RunConfig {
        caps: Caps {
            max_dim: args.cap_dim,
            max_order: args.cap_order,
        },
        seed: args.seed,
        trials: args.trials,
    };
    if cfg.caps.max_dim == 0 || cfg.caps.max_order == 0 {
        eprintln!("error: caps must be positive");
        return ExitCode::from(2);
    }
    let result = match &args.command {
        Command::Build { module, m, out } => cli::cmd_build(module, *m, out, &cfg),
        Command::Verify { complex, m } => cli::cmd_verify(complex, *m, &cfg),
        Command::Omega { module, n, out, compare } => cli::cmd_omega(module, *n, out.as_deref(), compare.as_deref(), &cfg),
        Command::Tensor { first, second, out } => cli::cmd_tensor(first, second, out.as_deref(), &cfg),
        Command::Random { p, r, dim, out } => cli::cmd_random(*p, *r, *dim, out.as_deref(), &cfg),
        Command::Info { file } => cli::cmd_info(file, &cfg),
        Command::Trim { complex, m, out } => cli::cmd_trim(complex, *m, out, &cfg),
    };
    match result {
        Ok(Outcome { stdout, stderr, code }) => {
            print!("{stdout}");
            eprint!("{stderr}");
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
