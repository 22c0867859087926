mod selftest;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lis_core::powerctl::{closed_form_allocation, solve_allocation};
use lis_core::scenarios::{emit_table, run_experiment};
use lis_core::{AllocationProblem, Column, Error, Experiment, ResultTable, ScenarioConfig, TableFormat, UtilityKind};

const EXIT_CONFIG: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_SELFTEST: u8 = 1;

#[derive(Parser)]
#[command(name = "lis-sim", version, about = "Precoding and power-control simulator for large planar antenna surfaces")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// JSON scenario config; absent keys take the experiment defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; output does not depend on it
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Skip the `<out>.meta.json` file written next to CSV output
    #[arg(long, global = true)]
    no_meta: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for TableFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => TableFormat::Csv,
            Format::Json => TableFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Interference gain versus azimuth for each spacing
    Beampattern,
    /// Relative SE loss of MR and ZF over interferer directions
    SeLossMap,
    /// MR and ZF SE as the surface widens
    WidthSweep,
    /// Random user drops with ZF and power allocation
    UserDrops(DropOpts),
    /// Solve one power allocation problem
    PowerAlloc(AllocOpts),
    /// Run the built-in numerical checks
    Selftest,
}

#[derive(Args)]
struct DropOpts {
    #[arg(long)]
    drops: Option<usize>,
    #[arg(long)]
    users: Option<usize>,
    /// Utility name; all three when omitted
    #[arg(long, value_parser = parse_utility)]
    utility: Option<UtilityKind>,
    /// Use the dense-surface gains instead of a sampled array
    #[arg(long)]
    dense: bool,
}

#[derive(Args)]
struct AllocOpts {
    /// Comma-separated ZF gains b_i
    #[arg(long, value_delimiter = ',', required = true)]
    gains: Vec<f64>,
    /// Comma-separated power costs c_i
    #[arg(long, value_delimiter = ',', required = true)]
    costs: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    budget: f64,
    #[arg(long, value_parser = parse_utility, default_value = "sum_se")]
    utility: UtilityKind,
}

fn parse_utility(s: &str) -> Result<UtilityKind, String> {
    UtilityKind::from_name(s).ok_or_else(|| {
        let names: Vec<_> = UtilityKind::NAMED.iter().map(UtilityKind::name).collect();
        format!("unknown utility `{s}`, expected one of {}", names.join(", "))
    })
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::DegenerateAngles { .. } | Error::DegenerateDropLimit { .. } => EXIT_DEGENERATE,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn with_path(e: io::Error, path: &Path) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn load_config(path: Option<&Path>, experiment: Experiment) -> lis_core::Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::from_json(&fs::read_to_string(p).map_err(|e| with_path(e, p))?, experiment),
        None => Ok(ScenarioConfig::defaults(experiment)),
    }
}

fn write_output(table: &ResultTable, opts: &GlobalOpts) -> lis_core::Result<()> {
    let format = opts.format.into();
    match &opts.out {
        Some(path) => emit_table(table, path, format, !opts.no_meta).map_err(|e| match e {
            Error::Io(io) => with_path(io, path),
            other => other,
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write(&mut lock, format)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn scenario(experiment: Experiment, opts: &GlobalOpts, drops: Option<&DropOpts>) -> lis_core::Result<ResultTable> {
    let mut cfg = load_config(opts.config.as_deref(), experiment)?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(d) = drops {
        if let Some(n) = d.drops {
            cfg.drops = n;
        }
        if let Some(k) = d.users {
            cfg.users = lis_core::scenarios::UsersSpec::Count(k);
        }
        if let Some(u) = &d.utility {
            cfg.utility = Some(u.clone());
        }
        if d.dense {
            cfg.spacings = vec![0.0];
        }
    }
    cfg.validate()?;
    run_experiment(&cfg)
}

fn power_alloc(opts: &AllocOpts) -> lis_core::Result<ResultTable> {
    let problem = AllocationProblem::new(opts.gains.clone(), opts.costs.clone(), opts.budget)?;
    let alloc = match closed_form_allocation(&problem, &opts.utility) {
        Some(a) => a,
        None => solve_allocation(&problem, &opts.utility)?,
    };
    let users = (0..problem.users() as i64).collect();
    let mut table = ResultTable::new()
        .with_column("user", Column::Int(users))?
        .with_column("gain", Column::Float(opts.gains.clone()))?
        .with_column("cost", Column::Float(opts.costs.clone()))?
        .with_column("rho", Column::Float(alloc.powers.clone()))?
        .with_column("power", Column::Float(alloc.physical_powers(&problem)))?
        .with_column("rho_gain", Column::Float(alloc.sinrs.clone()))?;
    table.metadata.insert("utility".into(), opts.utility.name().into());
    table.metadata.insert("budget".into(), opts.budget.into());
    table.metadata.insert("multiplier".into(), alloc.multiplier.into());
    table.metadata.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    Ok(table)
}

fn run(cli: &Cli) -> lis_core::Result<ExitCode> {
    let table = match &cli.command {
        Command::Beampattern => scenario(Experiment::BeamPattern, &cli.global, None)?,
        Command::SeLossMap => scenario(Experiment::SeLossMap, &cli.global, None)?,
        Command::WidthSweep => scenario(Experiment::WidthSweep, &cli.global, None)?,
        Command::UserDrops(d) => scenario(Experiment::UserDrops, &cli.global, Some(d))?,
        Command::PowerAlloc(a) => power_alloc(a)?,
        Command::Selftest => {
            let ok = selftest::run(&mut io::stdout().lock())?;
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(EXIT_SELFTEST) });
        }
    };
    write_output(&table, &cli.global)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("lis-sim: cannot start {n} threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("lis-sim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
