use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use hyw_core::group::ModelKind;
use hyw_core::suite::{explain, generate_fixtures, parse_checks, run_suite, RunConfig};
use hyw_core::verify::ConstantRegime;
use hyw_core::HywError;
use sha2::{Digest, Sha256};

/// Thread count of the work pool; unset means one thread per core.
const THREADS_ENV: &str = "HYW_THREADS";

#[derive(Parser)]
#[command(name = "hyw", version, about = "Fourier transform and Hausdorff-Young checks on ax+b and Heisenberg")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the selected checks and write a report.
    Run(RunArgs),
    /// Describe a check and the formula it evaluates.
    Explain { check: String },
    /// Write the fixtures of a configuration with a checksum manifest.
    Fixtures(FixtureArgs),
}

#[derive(Args, Default)]
struct Overrides {
    /// TOML configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    group: Option<ModelKind>,
    /// Comma-separated exponents in (1, 2].
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    grid_h: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of test functions (the Gaussian plus random packets).
    #[arg(long)]
    fixtures: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Overrides,
    /// `all` or a comma-separated list of check names.
    #[arg(long)]
    checks: Option<String>,
    #[arg(long)]
    constants: Option<ConstantRegime>,
    /// Tolerance override such as `plancherel=1e-3` or `chain.exact=1e-9`.
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    tol: Vec<String>,
    /// Report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FixtureArgs {
    #[command(flatten)]
    common: Overrides,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<HywError> for Failure {
    fn from(e: HywError) -> Self {
        match e {
            HywError::Config(_) | HywError::Input(_) | HywError::ModelMismatch(_) => Failure::Usage(e.into()),
            other => Failure::Runtime(other.into()),
        }
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn load_config(o: &Overrides) -> Result<RunConfig, Failure> {
    let mut cfg = match &o.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(usage)?;
            let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display())).map_err(usage)?;
            // a file naming only the group still gets that group's grid defaults
            let table: toml::Table = toml::from_str(&text).map_err(usage)?;
            let defaults = RunConfig::for_group(cfg.group);
            if !table.contains_key("grid_n") {
                cfg.grid_n = defaults.grid_n;
            }
            cfg
        }
        None => RunConfig::for_group(o.group.unwrap_or(ModelKind::Axb)),
    };
    if let Some(g) = o.group {
        if g != cfg.group {
            let fresh = RunConfig::for_group(g);
            cfg.group = g;
            cfg.grid_n = fresh.grid_n;
            cfg.extents = None;
        }
    }
    if !o.p.is_empty() {
        cfg.p = o.p.clone();
    }
    if let Some(v) = o.grid_n {
        cfg.grid_n = v;
    }
    if let Some(v) = o.grid_h {
        cfg.grid_h = v;
    }
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.fixtures {
        cfg.fixtures = v;
    }
    Ok(cfg)
}

fn apply_tolerance(cfg: &mut RunConfig, spec: &str) -> Result<(), Failure> {
    let (key, value) = spec.split_once('=').ok_or_else(|| usage(anyhow!("tolerance override '{spec}' is not KEY=VALUE")))?;
    let value: f64 = value.trim().parse().map_err(|_| usage(anyhow!("tolerance '{value}' is not a number")))?;
    let mut json = serde_json::to_value(cfg.tolerances).map_err(runtime)?;
    let mut slot = &mut json;
    for part in key.trim().split('.') {
        slot = slot.get_mut(part).ok_or_else(|| usage(anyhow!("unknown tolerance '{key}'")))?;
    }
    if !slot.is_number() {
        return Err(usage(anyhow!("'{key}' names a group of tolerances, not a value")));
    }
    *slot = serde_json::json!(value);
    cfg.tolerances = serde_json::from_value(json).map_err(runtime)?;
    Ok(())
}

/// Writes through a temporary sibling and a rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn run(args: RunArgs) -> Result<bool, Failure> {
    let mut cfg = load_config(&args.common)?;
    if let Some(c) = &args.checks {
        cfg.checks = parse_checks(c)?;
    }
    if let Some(c) = args.constants {
        cfg.constants = c;
    }
    for t in &args.tol {
        apply_tolerance(&mut cfg, t)?;
    }
    cfg.validate()?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let report = run_suite(&cfg)?;
    let text = report.render(started);
    match &args.out {
        Some(path) => {
            write_atomic(path, text.as_bytes()).map_err(runtime)?;
            if !report.dumps.is_empty() {
                let dir = path.with_extension("failures");
                fs::create_dir_all(&dir).map_err(runtime)?;
                for (name, bytes) in &report.dumps {
                    write_atomic(&dir.join(format!("{name}.hyw1")), bytes).map_err(runtime)?;
                }
                eprintln!("offending fixtures written to {}", dir.display());
            }
        }
        None => print!("{text}"),
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let s = report.summary();
    eprintln!("{}: {} records, {} passed, {} failed", cfg.group, s.total, s.passed, s.failed);
    Ok(report.all_passed())
}

fn fixtures(args: FixtureArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.common)?;
    let files = generate_fixtures(&cfg)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display())).map_err(runtime)?;
    let mut entries = Vec::new();
    for (name, seed, spec, bytes) in &files {
        let file = format!("{name}.hyw1");
        write_atomic(&args.out.join(&file), bytes).map_err(runtime)?;
        entries.push(serde_json::json!({
            "file": file,
            "seed": seed,
            "spec": spec,
            "bytes": bytes.len(),
            "sha256": hex::encode(Sha256::digest(bytes)),
        }));
    }
    let manifest = serde_json::json!({
        "generator": format!("hyw {}", env!("CARGO_PKG_VERSION")),
        "group": cfg.group,
        "grid_n": cfg.grid_n,
        "grid_h": cfg.grid_h,
        "extents": cfg.extents(),
        "seed": cfg.seed,
        "fixtures": entries,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(runtime)? + "\n";
    write_atomic(&args.out.join("manifest.json"), text.as_bytes()).map_err(runtime)?;
    eprintln!("wrote {} fixtures to {}", files.len(), args.out.display());
    Ok(())
}

fn init_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| usage(anyhow!("{THREADS_ENV}='{v}' is not a thread count")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(runtime)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = init_threads().and_then(|_| match cli.command {
        Command::Run(args) => run(args),
        Command::Explain { check } => explain(&check).map(|t| println!("{t}")).map(|_| true).map_err(Failure::from),
        Command::Fixtures(args) => fixtures(args).map(|_| true),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
