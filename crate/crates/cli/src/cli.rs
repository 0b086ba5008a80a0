//! `minrank-ic` subcommands.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 validation error, 3 refusal
//! (exhaustive cap or oracle guard), 4 verification failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use minrank_core::{
    brute_force_optimal_length, extract_code, simulate_roundtrip, solve, verify_algebraic, Method,
    OracleError, ProblemInstance, SolveError, SolverConfig, Verification,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::format::{
    parse_instance, parse_solution, serialize_solution, FormatError, SolutionMeta,
};
use crate::sweep::{run_sweep, SweepConfig, SweepError};

/// Largest `N·F` for which `verify` enumerates every input by default.
pub const ALL_INPUTS_MAX_BITS: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(#[from] FormatError),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Refused(String),
    #[error("{0}")]
    VerificationFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Format(_) | CliError::Invalid(_) => 2,
            CliError::Refused(_) => 3,
            CliError::VerificationFailed(_) => 4,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::TooManyFreeBits { .. } => CliError::Refused(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "minrank-ic", version, about = "Binary linear index codes for coded side information")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exhaustive,
    Greedy,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exhaustive => Method::Exhaustive,
            MethodArg::Greedy => Method::Greedy,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize the objective rank and write the code with its decoders.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "exhaustive")]
        method: MethodArg,
        /// Greedy stall limit U.
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        /// Greedy threshold T: each free bit is 1 with probability 1 - T.
        #[arg(long = "t-param", default_value_t = 0.1)]
        t_param: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Refuse exhaustive search above this many free bits.
        #[arg(long = "bit-cap", default_value_t = 24)]
        bit_cap: usize,
        /// Solution file; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a solution algebraically and by simulated transmission.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
        /// Check this many random inputs instead of all 2^(N·F).
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Average greedy rank over seeded trials for each (T, U) pair.
    Sweep {
        instance: PathBuf,
        #[arg(long = "t-list", value_delimiter = ',', default_value = "0.1")]
        t_list: Vec<f64>,
        #[arg(
            long = "iterations-list",
            value_delimiter = ',',
            default_value = "1,2,3,4,5,6,7,8,9,10"
        )]
        iterations_list: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// First trial seed; trial i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output; printed to stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Shortest valid code by direct enumeration of linear codes.
    Oracle {
        instance: PathBuf,
        /// Longest code length to try; defaults to N·F.
        #[arg(long = "max-length")]
        max_length: Option<usize>,
    },
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_instance(path: &Path) -> Result<ProblemInstance, CliError> {
    Ok(parse_instance(&read(path)?)?)
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

/// Runs a parsed command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut impl Write) -> Result<(), CliError> {
    match cli.command {
        Command::Solve {
            instance,
            method,
            iterations,
            t_param,
            seed,
            bit_cap,
            out: out_path,
        } => {
            let inst = load_instance(&instance)?;
            let cfg = SolverConfig {
                method: method.into(),
                iterations,
                t_param,
                seed,
                exhaustive_bit_cap: bit_cap,
            };
            cfg.validate()?;
            cmd_solve(&inst, &cfg, out_path.as_deref(), out)
        }
        Command::Verify {
            instance,
            solution,
            random,
            seed,
        } => {
            let inst = load_instance(&instance)?;
            let (sol, _) = parse_solution(&read(&solution)?, &inst)?;
            let mode = match random {
                Some(n) => InputSet::Random { count: n, seed },
                None => InputSet::All,
            };
            cmd_verify(&inst, &sol, mode, out)
        }
        Command::Sweep {
            instance,
            t_list,
            iterations_list,
            trials,
            seed,
            csv,
        } => {
            let inst = load_instance(&instance)?;
            let cfg = SweepConfig {
                t_params: t_list,
                iterations: iterations_list,
                trials,
                base_seed: seed,
                ..SweepConfig::default()
            };
            cmd_sweep(&inst, &cfg, csv.as_deref(), out)
        }
        Command::Oracle {
            instance,
            max_length,
        } => {
            let inst = load_instance(&instance)?;
            let max = max_length.unwrap_or(inst.total_bits());
            cmd_oracle(&inst, max, out)
        }
    }
}

pub fn cmd_solve(
    inst: &ProblemInstance,
    cfg: &SolverConfig,
    out_path: Option<&Path>,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let outcome = solve(inst, cfg)?;
    let sol = extract_code(inst, &outcome.best)
        .map_err(|e| CliError::VerificationFailed(e.to_string()))?;
    if verify_algebraic(inst, &sol) != Verification::Valid {
        return Err(CliError::VerificationFailed(
            "extracted code fails the decodability check".into(),
        ));
    }
    let meta = SolutionMeta {
        method: cfg.method,
        seed: cfg.seed,
        optimal_certified: outcome.optimal_certified,
    };
    let json = serialize_solution(&sol, &meta);
    let summary = format!(
        "beta={} certified={} method={} iterations_run={}",
        outcome.beta,
        outcome.optimal_certified,
        cfg.method.as_str(),
        outcome.iterations_run
    );
    match out_path {
        Some(p) => {
            write_file(p, json.as_bytes())?;
            writeln!(out, "{summary}").map_err(stdout_err)?;
        }
        None => {
            eprintln!("{summary}");
            out.write_all(json.as_bytes()).map_err(stdout_err)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputSet {
    All,
    Random { count: usize, seed: u64 },
}

fn bits_of(v: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| (v >> i) & 1 == 1).collect()
}

fn fmt_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn cmd_verify(
    inst: &ProblemInstance,
    sol: &minrank_core::IndexCodeSolution,
    mode: InputSet,
    out: &mut impl Write,
) -> Result<(), CliError> {
    match verify_algebraic(inst, sol) {
        Verification::Valid => {}
        Verification::Violation { user, row } => {
            return Err(CliError::VerificationFailed(format!(
                "decodability fails for user {user} at request row {row}"
            )))
        }
        Verification::Malformed { user } => {
            return Err(CliError::VerificationFailed(format!(
                "decoder shapes do not fit user {user}"
            )))
        }
    }
    let width = inst.total_bits();
    let inputs: Box<dyn Iterator<Item = Vec<bool>>> = match mode {
        InputSet::All => {
            if width > ALL_INPUTS_MAX_BITS {
                return Err(CliError::Refused(format!(
                    "all-inputs check over 2^{width} vectors exceeds 2^{ALL_INPUTS_MAX_BITS}; use --random"
                )));
            }
            Box::new((0u64..1 << width).map(move |v| bits_of(v, width)))
        }
        InputSet::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Box::new((0..count).map(move |_| (0..width).map(|_| rng.random_bool(0.5)).collect()))
        }
    };
    let mut checked = 0u64;
    for x in inputs {
        let decoded = simulate_roundtrip(inst, sol, &x)
            .map_err(|e| CliError::VerificationFailed(e.to_string()))?;
        for (k, got) in decoded.iter().enumerate() {
            let want = inst
                .request_matrix(k)
                .mul_vec(&x)
                .expect("request matrix has N·F columns");
            if *got != want {
                return Err(CliError::VerificationFailed(format!(
                    "user {k} decodes {} instead of {} for x={}",
                    fmt_bits(got),
                    fmt_bits(&want),
                    fmt_bits(&x)
                )));
            }
        }
        checked += 1;
    }
    let o = &mut *out;
    if sol.beta() == 0 {
        writeln!(o, "note: empty code, side information alone satisfies every user")
            .map_err(stdout_err)?;
    }
    writeln!(o, "pass: algebraic check and {checked} simulated inputs, beta={}", sol.beta())
        .map_err(stdout_err)?;
    Ok(())
}

pub fn cmd_sweep(
    inst: &ProblemInstance,
    cfg: &SweepConfig,
    csv_path: Option<&Path>,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let report = run_sweep(inst, cfg).map_err(|e| match e {
        SweepError::Solve(s) => CliError::from(s),
        other => CliError::Invalid(other.to_string()),
    })?;
    let csv = report.to_csv_string();
    match csv_path {
        Some(p) => {
            write_file(p, csv.as_bytes())?;
            writeln!(
                out,
                "wrote {} rows to {}{}",
                report.rows.len(),
                p.display(),
                report
                    .optimum
                    .map(|b| format!(" (exhaustive optimum {b})"))
                    .unwrap_or_default()
            )
            .map_err(stdout_err)?;
        }
        None => out.write_all(csv.as_bytes()).map_err(stdout_err)?,
    }
    Ok(())
}

pub fn cmd_oracle(
    inst: &ProblemInstance,
    max_len: usize,
    out: &mut impl Write,
) -> Result<(), CliError> {
    match brute_force_optimal_length(inst, max_len) {
        Ok(len) => writeln!(out, "optimal_length={len}").map_err(stdout_err),
        Err(OracleError::NotFoundWithin(m)) => {
            writeln!(out, "not_found_within={m}").map_err(stdout_err)
        }
        Err(e @ OracleError::GuardExceeded { .. }) => Err(CliError::Refused(e.to_string())),
    }
}
