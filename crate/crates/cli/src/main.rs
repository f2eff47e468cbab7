//! `smac`: ingest, analyze, query, stats, serve and export over one corpus store.
//!
//! Exit codes: 0 success, 1 operational failure, 2 usage error.
//! `SMAC_STORE`, `SMAC_BIND`, `SMAC_MAX_ROWS` and `SMAC_CORS_ORIGIN` take
//! precedence over the matching flags.

use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};
use smac_api::{ServiceConfig, DEFAULT_BIND, DEFAULT_MAX_ROWS};
use smac_core::ingest::{
    scan_blocks, Clock, ExplorerClient, ExtractionRule, FixtureExplorer, IngestError, RateLimit, SystemClock, Throttle,
};
use smac_core::query::respond;
use smac_core::{analyze_bytes, ContractAddress, CorpusStore};

#[derive(Parser)]
#[command(name = "smac", version, about = "Smart-contract corpus engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Walk a block range and store every verified contract created in it.
    Ingest {
        #[arg(long)]
        store: Option<PathBuf>,
        /// `fixture:DIR` or an http(s) base URL.
        #[arg(long)]
        explorer: String,
        #[arg(long)]
        from_block: u64,
        #[arg(long)]
        to_block: u64,
        /// Explorer requests per second.
        #[arg(long, default_value_t = 2.0)]
        rate: f64,
        /// Explorer requests per UTC day.
        #[arg(long)]
        daily_cap: Option<u64>,
    },
    /// Print source metrics for files (directories expand to their `.sol` files).
    Analyze {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run a metrics query and print the same envelope as POST /graphql.
    Query {
        #[arg(long)]
        store: Option<PathBuf>,
        query: String,
        /// `name=value`; the value is read as JSON, or as a string if it is not JSON.
        #[arg(long = "var", value_parser = parse_var)]
        vars: Vec<(String, Value)>,
        #[arg(long)]
        max_rows: Option<usize>,
    },
    /// Print per-day ingest counts.
    Stats {
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Run the HTTP service until interrupted.
    Serve {
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        max_rows: Option<usize>,
        #[arg(long)]
        cors_origin: Option<String>,
    },
    /// Copy artifacts and metadata of listed addresses into a directory, in shard layout.
    Export {
        #[arg(long)]
        store: Option<PathBuf>,
        /// One address per line.
        #[arg(long)]
        addresses: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Usage(String),
    Operational(String),
}

type Outcome = Result<(), Failure>;

fn op<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Operational(e.to_string())
}

fn parse_var(s: &str) -> Result<(String, Value), String> {
    let (name, raw) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let name = name.trim_start_matches('$');
    if name.is_empty() {
        return Err("variable name is empty".into());
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((name.to_string(), value))
}

/// The environment wins over the flag.
fn setting(env: &str, flag: Option<String>) -> Option<String> {
    std::env::var(env).ok().filter(|v| !v.is_empty()).or(flag)
}

fn store_path(flag: Option<PathBuf>) -> Result<PathBuf, Failure> {
    setting("SMAC_STORE", flag.map(|p| p.to_string_lossy().into_owned()))
        .map(PathBuf::from)
        .ok_or_else(|| Failure::Usage("no store given (--store or SMAC_STORE)".into()))
}

fn max_rows(flag: Option<usize>) -> Result<usize, Failure> {
    match setting("SMAC_MAX_ROWS", flag.map(|n| n.to_string())) {
        None => Ok(DEFAULT_MAX_ROWS),
        Some(s) => match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Failure::Usage(format!("max rows must be a positive integer, got {s:?}"))),
        },
    }
}

fn open(flag: Option<PathBuf>) -> Result<CorpusStore, Failure> {
    CorpusStore::open(store_path(flag)?).map_err(op)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(io::stderr)
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()))
        .init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Ingest { store, explorer, from_block, to_block, rate, daily_cap } => {
            ingest(store, &explorer, from_block, to_block, rate, daily_cap)
        }
        Command::Analyze { paths, format } => analyze(&paths, format),
        Command::Query { store, query, vars, max_rows: rows } => run_query(store, &query, vars, rows),
        Command::Stats { store } => stats(store),
        Command::Serve { store, bind, max_rows: rows, cors_origin } => serve(store, bind, rows, cors_origin),
        Command::Export { store, addresses, out } => export(store, &addresses, &out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Operational(m)) => {
            if !m.is_empty() {
                eprintln!("error: {m}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
    }
}

fn explorer_client(target: &str) -> Result<Box<dyn ExplorerClient>, Failure> {
    if let Some(dir) = target.strip_prefix("fixture:") {
        if !Path::new(dir).is_dir() {
            return Err(Failure::Usage(format!("fixture directory {dir:?} does not exist")));
        }
        return Ok(Box::new(FixtureExplorer::new(dir)));
    }
    if target.starts_with("http://") || target.starts_with("https://") {
        #[cfg(feature = "live")]
        return Ok(Box::new(smac_core::ingest::live::HttpExplorer::new(target)));
        #[cfg(not(feature = "live"))]
        return Err(Failure::Usage("this build has no HTTP explorer support (enable the `live` feature)".into()));
    }
    Err(Failure::Usage(format!("explorer must be fixture:DIR or an http(s) URL, got {target:?}")))
}

fn ingest(store: Option<PathBuf>, explorer: &str, from: u64, to: u64, rate: f64, daily_cap: Option<u64>) -> Outcome {
    if from > to {
        return Err(Failure::Usage(format!("--from-block {from} is after --to-block {to}")));
    }
    let limit = RateLimit::new(rate, daily_cap).map_err(|e| Failure::Usage(e.to_string()))?;
    let client = explorer_client(explorer)?;
    let store = open(store)?;
    let clock: Arc<dyn Clock> = Arc::new(SystemClock);
    let throttle = Throttle::new(limit, clock);
    let report = scan_blocks(client.as_ref(), from..=to, &throttle, &store, &ExtractionRule::default()).map_err(
        |e| match e {
            IngestError::InvalidRange { .. } => Failure::Usage(e.to_string()),
            IngestError::Storage(s) => op(s),
        },
    )?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(op)?);
    Ok(())
}

fn expand(paths: &[PathBuf]) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for p in paths {
        match fs::read_dir(p) {
            Ok(entries) => {
                let mut files: Vec<PathBuf> = entries
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "sol"))
                    .collect();
                files.sort();
                out.extend(files);
            }
            Err(_) => out.push(p.clone()),
        }
    }
    out
}

const CSV_HEADER: [&str; 9] =
    ["file", "pragma", "sloc", "functions", "events", "modifiers", "payable", "mapping", "addressVars"];

fn analyze(paths: &[PathBuf], format: Format) -> Outcome {
    let stdout = io::stdout();
    let mut csv_out = matches!(format, Format::Csv).then(|| csv::Writer::from_writer(stdout.lock()));
    if let Some(w) = csv_out.as_mut() {
        w.write_record(CSV_HEADER).map_err(op)?;
    }
    let mut failed = 0usize;
    for path in expand(paths) {
        let name = path.to_string_lossy().into_owned();
        let metrics =
            match fs::read(&path).map_err(|e| e.to_string()).and_then(|b| analyze_bytes(&b).map_err(|e| e.to_string()))
            {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("{name}: {e}");
                    failed += 1;
                    continue;
                }
            };
        match csv_out.as_mut() {
            Some(w) => w
                .write_record([
                    name,
                    metrics.pragma.clone(),
                    metrics.sloc.to_string(),
                    metrics.functions.to_string(),
                    metrics.events.to_string(),
                    metrics.modifiers.to_string(),
                    metrics.payable.to_string(),
                    metrics.mapping.to_string(),
                    metrics.address_vars.to_string(),
                ])
                .map_err(op)?,
            None => {
                let mut row = Map::new();
                row.insert("file".into(), Value::String(name));
                if let Value::Object(m) = serde_json::to_value(&metrics).map_err(op)? {
                    row.extend(m);
                }
                println!("{}", Value::Object(row));
            }
        }
    }
    if let Some(mut w) = csv_out {
        w.flush().map_err(op)?;
    }
    if failed > 0 {
        return Err(Failure::Operational(format!("{failed} file(s) could not be analyzed")));
    }
    Ok(())
}

fn run_query(store: Option<PathBuf>, text: &str, vars: Vec<(String, Value)>, rows: Option<usize>) -> Outcome {
    let max = max_rows(rows)?;
    let store = open(store)?;
    let vars: Map<String, Value> = vars.into_iter().collect();
    let response = respond(text, &vars, &store, max);
    println!("{}", response.to_json());
    match response.error {
        Some(e) => Err(Failure::Operational(e.to_string())),
        None => Ok(()),
    }
}

fn stats(store: Option<PathBuf>) -> Outcome {
    let store = open(store)?;
    println!("{}", serde_json::to_string(&store.daily_counts()).map_err(op)?);
    Ok(())
}

fn serve(store: Option<PathBuf>, bind: Option<String>, rows: Option<usize>, cors: Option<String>) -> Outcome {
    let mut config = ServiceConfig::new(store_path(store)?);
    let bind = setting("SMAC_BIND", bind).unwrap_or_else(|| DEFAULT_BIND.to_string());
    config.bind = bind.parse::<SocketAddr>().map_err(|e| Failure::Usage(format!("bad bind address {bind:?}: {e}")))?;
    config.max_rows = max_rows(rows)?;
    if let Some(origin) = setting("SMAC_CORS_ORIGIN", cors) {
        config.cors_origin = origin;
    }
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    if !config.store_path.is_dir() {
        return Err(Failure::Operational(format!("store {} does not exist", config.store_path.display())));
    }
    let runtime = tokio::runtime::Runtime::new().map_err(op)?;
    runtime.block_on(smac_api::serve(config)).map_err(op)
}

fn export(store: Option<PathBuf>, list: &Path, out: &Path) -> Outcome {
    let text = fs::read_to_string(list).map_err(|e| Failure::Usage(format!("{}: {e}", list.display())))?;
    let mut addresses = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let a: ContractAddress =
            line.parse().map_err(|e| Failure::Usage(format!("{}:{}: {e}", list.display(), n + 1)))?;
        if !addresses.contains(&a) {
            addresses.push(a);
        }
    }
    let store = open(store)?;
    let mut included = Vec::new();
    let mut missing = Vec::new();
    for a in addresses {
        let entries = match store.export_entries(&a) {
            Ok(e) => e,
            Err(smac_core::StoreError::NotFound(_)) => {
                eprintln!("not in store: {a}");
                missing.push(a);
                continue;
            }
            Err(e) => return Err(op(e)),
        };
        for (name, bytes) in entries {
            let path = out.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(op)?;
            }
            fs::write(&path, bytes).map_err(|e| op(format!("{}: {e}", path.display())))?;
        }
        included.push(a);
    }
    let manifest = serde_json::json!({ "included": included, "missing": missing });
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{}", serde_json::to_string_pretty(&manifest).map_err(op)?).map_err(op)?;
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Operational(format!("{} address(es) not found", missing.len())))
    }
}
