//! `qk`: compile, inspect and run quantum kernels from `.qk` files.

mod args;
mod commands;
mod error;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qk", version, about = "Compile, inspect and run quantum kernels")]
struct Cli {
    /// Skip the on-disk program cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Cache directory (default: $QK_CACHE_DIR, else the user cache directory).
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Raise log verbosity on stderr; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile every kernel in a file and report digests and cache provenance.
    Compile { file: PathBuf },
    /// Execute a kernel and print a JSON results document.
    Run(RunArgs),
    /// Print the resolved instruction listing of a kernel.
    Print(KernelArgs),
    /// Emit OpenQASM 2.0 for a kernel.
    ExportOpenqasm(KernelArgs),
    /// Write the unitary matrix of a kernel.
    Unitary {
        #[command(flatten)]
        kernel: KernelArgs,
        /// Output file (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the expectation value of an operator on a kernel's output state.
    Observe {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        backend: BackendArgs,
        /// Operator file in Pauli or fermionic syntax.
        #[arg(long)]
        operator: PathBuf,
        /// Zero gives the exact value.
        #[arg(long, default_value_t = 0)]
        shots: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Composition benchmarks.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Inspect or empty the on-disk cache.
    #[command(subcommand)]
    Cache(CacheCommand),
}

#[derive(Debug, Args)]
struct KernelArgs {
    file: PathBuf,
    #[arg(long)]
    kernel: String,
    /// JSON args file mapping parameter names to values.
    #[arg(long, value_name = "JSON_FILE")]
    args: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BackendArgs {
    /// Backend name; `-qpu` is accepted as a spelling of this flag.
    #[arg(long = "qpu", default_value = qk_core::runtime::DEFAULT_BACKEND)]
    qpu: String,
    /// `key: value` backend configuration file.
    #[arg(long, value_name = "FILE")]
    qpu_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    backend: BackendArgs,
    /// Zero records exact probabilities instead of counts.
    #[arg(long, default_value_t = 1024)]
    shots: u64,
    /// Overrides `__seed__` from the args file; default 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Circuit)]
    mode: ModeArg,
    /// Operator file whose expectation is added under its file stem.
    #[arg(long = "observe", value_name = "OP_FILE")]
    observe: Vec<PathBuf>,
    /// Skip the peephole pass.
    #[arg(long)]
    no_optimize: bool,
    /// Report zero for every timing field, for reproducible output.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Circuit,
    Ftqc,
}

impl From<ModeArg> for qk_core::Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Circuit => qk_core::Mode::Circuit,
            ModeArg::Ftqc => qk_core::Mode::Ftqc,
        }
    }
}

#[derive(Debug, Subcommand)]
enum BenchCommand {
    /// Compose the Trotter evolution kernel for an operator.
    Trotter {
        #[arg(long)]
        operator: PathBuf,
        #[arg(long, default_value_t = 1)]
        steps: u32,
        /// Print a JSON object instead of `key: value` lines.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
enum CacheCommand {
    /// Entry count, size and the counters of the last compiling invocation.
    Stats,
    /// Remove every cached program.
    Clear,
}

/// Rewrites the single-dash `-qpu` spelling into `--qpu`.
fn normalize_args(args: impl IntoIterator<Item = OsString>) -> Vec<OsString> {
    args.into_iter()
        .map(|a| match a.to_str() {
            Some("-qpu") => "--qpu".into(),
            Some(s) if s.starts_with("-qpu=") => format!("-{s}").into(),
            _ => a,
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(normalize_args(std::env::args_os())) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match commands::dispatch(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(normalize_args(args.iter().map(OsString::from)))
    }

    #[test]
    fn single_dash_qpu_is_accepted() {
        let cli = parse(&["qk", "run", "b.qk", "--kernel", "bell", "-qpu", "ftqc"]).unwrap();
        let Command::Run(r) = cli.command else { panic!("expected run") };
        assert_eq!(r.backend.qpu, "ftqc");
        let cli = parse(&["qk", "run", "b.qk", "--kernel", "bell", "-qpu=qpp"]).unwrap();
        let Command::Run(r) = cli.command else { panic!("expected run") };
        assert_eq!(r.backend.qpu, "qpp");
    }

    #[test]
    fn run_defaults() {
        let cli = parse(&["qk", "run", "b.qk", "--kernel", "bell"]).unwrap();
        let Command::Run(r) = cli.command else { panic!("expected run") };
        assert_eq!((r.shots, r.seed, r.backend.qpu.as_str()), (1024, None, "qpp"));
        assert!(matches!(r.mode, ModeArg::Circuit));
    }

    #[test]
    fn global_flags_follow_the_subcommand() {
        let cli = parse(&["qk", "compile", "b.qk", "--no-cache", "--cache-dir", "/tmp/x"]).unwrap();
        assert!(cli.no_cache);
        assert_eq!(cli.cache_dir, Some(PathBuf::from("/tmp/x")));
    }

    #[test]
    fn bad_mode_is_a_usage_error() {
        let e = parse(&["qk", "run", "b.qk", "--kernel", "k", "--mode", "fast"]).unwrap_err();
        assert!(e.use_stderr());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
