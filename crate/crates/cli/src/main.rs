//! `nilcube`: batch verification of finite nilspace computations.
//!
//! Every command prints a `nilcube-report v1` on stdout (or a summary with
//! `--format human`) and exits 0 when all verdicts pass, 1 when one fails,
//! 2 on usage or input errors and 3 when a budget stops the computation.

mod commands;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nilcube::report::{Report, Status};
use nilcube::{Error, Limits};

#[derive(Parser)]
#[command(name = "nilcube", version, about = "Exact checks on finite nilspaces")]
struct Cli {
    /// Report style on stdout
    #[arg(long, value_enum, default_value = "machine", global = true)]
    format: OutputFormat,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Highest cube dimension stored (overrides NILCUBE_NMAX)
    #[arg(long, global = true)]
    nmax: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Human,
    Machine,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum SpaceKind {
    /// D_k(A) with A from --group and k from --step
    Dk,
    /// Heisenberg group mod --p
    Heis,
    /// Z/2N with G_2 = {0, N}, N from --n
    CyclicDeg2,
    /// G/Γ with G from --filtered and Γ from --gamma
    Quotient,
    /// D_1(Z/n) × D_1(A) as a zero-cocycle extension
    Split,
    /// D_1(Z/nm) as the carry extension of D_1(Z/n) by Z/m
    Twisted,
    /// a space file given by --file
    File,
}

#[derive(Args, Clone, Debug)]
pub struct SpaceArgs {
    #[arg(long, value_enum, default_value = "dk")]
    pub space: SpaceKind,
    /// Cyclic factors of A, e.g. "2,2"
    #[arg(long, default_value = "2")]
    pub group: String,
    /// Degree of D_k(A); for `check`, the step to verify
    #[arg(long)]
    pub step: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub p: u64,
    #[arg(long, default_value_t = 2)]
    pub n: u64,
    #[arg(long, default_value_t = 2)]
    pub m: u64,
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Filtered group file for `--space quotient`
    #[arg(long)]
    pub filtered: Option<PathBuf>,
    /// Element indices of Γ, e.g. "0,4"
    #[arg(long)]
    pub gamma: Option<String>,
}

#[derive(Args, Clone, Debug)]
pub struct CocycleArgs {
    /// Cocycle file indexed by the space's cube order
    #[arg(long, conflicts_with_all = ["carry", "coboundary"])]
    pub cocycle: Option<PathBuf>,
    /// Carry cocycle of Z/nm -> Z/n into Z/M on D_1(Z/n)
    #[arg(long, conflicts_with = "coboundary")]
    pub carry: Option<u64>,
    /// Random coboundary from this seed (default: the zero cocycle)
    #[arg(long)]
    pub coboundary: Option<u64>,
    /// Cube dimension the cocycle lives on
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Coefficients: cyclic factors like "2,3", or "circle"
    #[arg(long, default_value = "2")]
    pub coeff: String,
}

#[derive(Subcommand)]
enum Command {
    /// Build a space and write its file
    Gen {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the nilspace axioms
    Check {
        #[command(flatten)]
        space: SpaceArgs,
    },
    /// Classes of ~_k and the factor F_k
    Factor {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tower of factors with structure groups
    Structure {
        #[command(flatten)]
        space: SpaceArgs,
    },
    /// Host-Kra cube factorization against brute force
    Hk {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Cocycles, coboundaries, extensions and cohomology
    #[command(subcommand)]
    Cocycle(CocycleCommand),
    /// Translation groups
    #[command(subcommand)]
    Trans(TransCommand),
    /// Rectify a perturbed lift into a coboundary extension of D_1(Z/n)
    Rectify {
        #[arg(long, default_value_t = 3)]
        n: u64,
        /// Z/N coefficients (default 64·n)
        #[arg(long)]
        modulus: Option<u64>,
        #[arg(long, default_value_t = 1)]
        point: u32,
        /// Offset added at the point, as a fraction of the circle
        #[arg(long, default_value = "1/64")]
        offset: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify a chain of reductions D_1(Z/a) -> D_1(Z/b) -> ...
    Invsys {
        #[arg(long, default_value = "8,4,2")]
        chain: String,
    },
}

#[derive(Subcommand)]
enum CocycleCommand {
    /// Check both cocycle axioms
    Verify {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        cocycle: CocycleArgs,
    },
    /// Solve ρ = δg
    Coboundary {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        cocycle: CocycleArgs,
    },
    /// Build M(ρ) and check its axioms
    Extend {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        cocycle: CocycleArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cocycle of a cross-section of the top bundle, and the isomorphism θ
    Fromsection {
        #[command(flatten)]
        space: SpaceArgs,
        /// Random section from this seed (default: least points)
        #[arg(long)]
        section_seed: Option<u64>,
    },
    /// Average a perturbed pulled-back cocycle along D_1(Z/a) -> D_1(Z/b)
    Average {
        #[arg(long, default_value_t = 8)]
        from: u64,
        #[arg(long, default_value_t = 4)]
        to: u64,
        /// Carry cocycle coefficients Z/M on the target
        #[arg(long, default_value_t = 4)]
        carry_mod: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// H_k(X, A) by linear algebra
    Cohomology {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value = "2")]
        coeff: String,
    },
    /// Tricube identity for every cube and every extension
    Tricube {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        cocycle: CocycleArgs,
    },
}

#[derive(Subcommand)]
enum TransCommand {
    /// Translations of height i
    Enum {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 1)]
        height: usize,
    },
    /// Arrow test for one point map
    Check {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 1)]
        height: usize,
        /// Image of each point, e.g. "1,2,0"
        #[arg(long)]
        map: String,
    },
    /// Top-height translations against the top structure shifts
    Tau {
        #[command(flatten)]
        space: SpaceArgs,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotNilspace(_)
        | Error::NotExtension(_)
        | Error::NotIsomorphic(_)
        | Error::Concentration { .. }
        | Error::Completion(_) => 1,
        Error::Budget { .. } => 3,
        _ => 2,
    }
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Pass => 0,
        Status::Fail => 1,
        // the enumeration was capped by a budget
        Status::Inconclusive => 3,
    }
}

fn run(cli: Cli) -> nilcube::Result<Report> {
    let mut limits = Limits::from_env()?;
    if let Some(n) = cli.nmax {
        limits.n_max = n;
    }
    match cli.command {
        Command::Gen { space, out } => commands::gen(&space, &out, &limits),
        Command::Check { space } => commands::check(&space, &limits),
        Command::Factor { space, k, out } => commands::factor(&space, k, out.as_deref(), &limits),
        Command::Structure { space } => commands::structure(&space, &limits),
        Command::Hk { space, dim } => commands::hk(&space, dim, &limits),
        Command::Cocycle(c) => match c {
            CocycleCommand::Verify { space, cocycle } => commands::cocycle_verify_cmd(&space, &cocycle, &limits),
            CocycleCommand::Coboundary { space, cocycle } => commands::cocycle_coboundary(&space, &cocycle, &limits),
            CocycleCommand::Extend { space, cocycle, out } => {
                commands::cocycle_extend(&space, &cocycle, out.as_deref(), &limits)
            }
            CocycleCommand::Fromsection { space, section_seed } => {
                commands::cocycle_fromsection(&space, section_seed, &limits)
            }
            CocycleCommand::Average {
                from,
                to,
                carry_mod,
                seed,
            } => commands::cocycle_average(from, to, carry_mod, seed, &limits),
            CocycleCommand::Cohomology { space, k, coeff } => commands::cohomology(&space, k, &coeff, &limits),
            CocycleCommand::Tricube { space, cocycle } => commands::tricube(&space, &cocycle, &limits),
        },
        Command::Trans(t) => match t {
            TransCommand::Enum { space, height } => commands::trans_enum(&space, height, &limits),
            TransCommand::Check { space, height, map } => commands::trans_check(&space, height, &map, &limits),
            TransCommand::Tau { space } => commands::trans_tau(&space, &limits),
        },
        Command::Rectify {
            n,
            modulus,
            point,
            offset,
            seed,
        } => commands::rectify(n, modulus.unwrap_or(64 * n), point, &offset, seed, &limits),
        Command::Invsys { chain } => commands::invsys(&chain, &limits),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let format = cli.format;
    match run(cli) {
        Ok(report) => {
            match format {
                OutputFormat::Machine => {
                    print!("{}", report.render());
                    eprint!("{}", report.summary());
                }
                OutputFormat::Human => print!("{}", report.summary()),
            }
            ExitCode::from(status_code(report.status()))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
