use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use casp_forge::bench::{run_bench, write_csv, BenchConfig, Family, Instance};
use casp_forge::format::{emit_program, read_csp};
use casp_forge::solver::{solve_csp, Heuristic, SolverConfig};
use casp_forge::verify::{cardinality_suite, run_suite, semantic_suite, OracleKind};
use casp_forge::{encode, normalize, DomainState, EncodeOptions, EncodingKind, RegionMode};

#[derive(Parser)]
#[command(name = "casp-forge", version, about = "Encode finite-domain CSPs as logic programs and solve them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the ground program of a CSP file.
    Encode {
        #[command(flatten)]
        enc: EncodeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a CSP file. Exits with 10 (sat), 20 (unsat) or 30 (unknown).
    Solve {
        #[command(flatten)]
        enc: EncodeArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Cross-check encoding propagation against the consistency oracles.
    Verify {
        /// ac, bound, range, domain, direct, hall, semantic or cardinality.
        #[arg(long, default_value = "ac")]
        oracle: String,
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, env = "CASP_FORGE_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Run a benchmark family and write one CSV row per instance and encoding.
    Bench(BenchArgs),
}

#[derive(Args)]
struct EncodeArgs {
    /// CSP file in text or JSON form; `-` reads stdin.
    input: PathBuf,
    /// direct, support, bound, range or a label such as S, B3, R1.
    #[arg(long, default_value = "support")]
    encoding: EncodingKind,
    #[arg(long)]
    hall_bound: Option<usize>,
    /// maximal, greedy or unit.
    #[arg(long, default_value = "maximal")]
    regions: RegionMode,
}

impl EncodeArgs {
    fn kind(&self) -> EncodingKind {
        match self.hall_bound {
            Some(k) => self.encoding.with_hall_bound(Some(k)),
            None => self.encoding,
        }
    }

    fn options(&self) -> EncodeOptions {
        EncodeOptions { regions: self.regions }
    }
}

#[derive(Args)]
struct SolverArgs {
    /// activity or smallest-domain.
    #[arg(long, default_value = "activity")]
    heuristic: Heuristic,
    #[arg(long, env = "CASP_FORGE_SEED", default_value_t = 0)]
    seed: u64,
    /// Time budget in seconds.
    #[arg(long)]
    budget_s: Option<f64>,
    #[arg(long)]
    budget_conflicts: Option<u64>,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            heuristic: self.heuristic,
            seed: self.seed,
            time_budget: self.budget_s.map(Duration::from_secs_f64),
            conflict_budget: self.budget_conflicts,
            ..SolverConfig::default()
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// pigeonhole, qcp or graceful.
    #[arg(long)]
    family: Family,
    /// Instance sizes, e.g. `8,9,10`.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Preassignment percentages for qcp.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    ratio: Vec<f64>,
    /// Instance seeds for qcp.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seeds: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "S,B,R")]
    encodings: Vec<EncodingKind>,
    #[arg(long, default_value = "maximal")]
    regions: RegionMode,
    #[arg(long, default_value = "activity")]
    heuristic: Heuristic,
    /// Solver seed.
    #[arg(long, env = "CASP_FORGE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 60.0)]
    budget_s: f64,
    #[arg(long)]
    budget_conflicts: Option<u64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn read_input(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        Ok(text)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn run_encode(args: &EncodeArgs, out: Option<&PathBuf>) -> Result<ExitCode> {
    let csp = read_csp(&read_input(&args.input)?)?;
    let norm = normalize(&csp)?;
    let enc = encode(&norm.csp, &DomainState::from_csp(&norm.csp), args.kind(), args.options())?;
    let text = emit_program(&enc.program);
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn run_solve(args: &EncodeArgs, solver: &SolverArgs) -> Result<ExitCode> {
    let csp = read_csp(&read_input(&args.input)?)?;
    let out = solve_csp(&csp, args.kind(), args.options(), &solver.config())?;
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "status {}", out.status)?;
    if let Some(a) = &out.assignment {
        for decl in csp.variables() {
            if let Some(x) = a.get(&decl.name) {
                writeln!(stdout, "{} = {x}", decl.name)?;
            }
        }
    }
    let s = &out.stats;
    writeln!(
        stdout,
        "decisions {} conflicts {} propagations {} restarts {} time {:.3}s",
        s.decisions, s.conflicts, s.propagations, s.restarts, s.time_s
    )?;
    Ok(ExitCode::from(out.status.exit_code() as u8))
}

fn run_verify(oracle: &str, instances: usize, seed: u64) -> Result<ExitCode> {
    let report = match oracle {
        "semantic" => semantic_suite(instances, seed)?,
        "cardinality" => cardinality_suite(instances, seed)?,
        other => run_suite(other.parse::<OracleKind>()?, instances, seed)?,
    };
    println!("{report}");
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn run_bench_cmd(args: &BenchArgs) -> Result<ExitCode> {
    let mut instances = Vec::new();
    for &n in &args.n {
        match args.family {
            Family::Pigeonhole => instances.push(Instance::Pigeonhole { n }),
            Family::Graceful => instances.push(Instance::Graceful { n }),
            Family::Qcp => {
                for &ratio in &args.ratio {
                    for &seed in &args.seeds {
                        instances.push(Instance::Qcp { n, ratio, seed });
                    }
                }
            }
        }
    }
    let cfg = BenchConfig {
        encodings: args.encodings.clone(),
        options: EncodeOptions { regions: args.regions },
        solver: SolverConfig {
            heuristic: args.heuristic,
            seed: args.seed,
            time_budget: Some(Duration::from_secs_f64(args.budget_s)),
            conflict_budget: args.budget_conflicts,
            ..SolverConfig::default()
        },
        jobs: args.jobs,
    };
    let rows = run_bench(&instances, &cfg);
    match &args.csv {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(file, &rows)?;
        }
        None => write_csv(io::stdout().lock(), &rows)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Encode { enc, out } => run_encode(enc, out.as_ref()),
        Command::Solve { enc, solver } => run_solve(enc, solver),
        Command::Verify {
            oracle,
            instances,
            seed,
        } => run_verify(oracle, *instances, *seed),
        Command::Bench(args) => run_bench_cmd(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
