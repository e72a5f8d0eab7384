//! Command-line frontend: `db build`, `db map-patches` and `scan`.

pub mod config;

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use vulture::clients::{
    fetch_advisories, AdvisorySource, ChatOracle, ClientError, HttpRequest, HttpResponse, HttpTransport, OfflineTransport,
    read_directory, RecordingTransport, ReplayTransport, ReqwestTransport, WithFallback,
};
use vulture::component_db::{self, ComponentDbError};
use vulture::flaw_detect::exit_code;
use vulture::pipeline::{self, ScanOptions, Selection};
use vulture::reuse_id::collect_target;
use vulture::vuln_db::{self, VulnDbError, VulnSegment};

use config::{Config, ConfigError, Layer};

#[derive(Debug, Parser)]
#[command(name = "vulture", version, about = "Find reused C/C++ libraries and unpatched 1-day vulnerabilities")]
pub struct Cli {
    /// Database directory [env: VULTURE_DB]
    #[arg(long, global = true)]
    db: Option<PathBuf>,
    /// TOML config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Never touch the network
    #[arg(long, global = true)]
    offline: bool,
    /// Worker threads (default: logical CPUs)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Database maintenance
    #[command(subcommand)]
    Db(DbCommand),
    /// Scan a source tree
    Scan(ScanArgs),
}

#[derive(Debug, Subcommand)]
enum DbCommand {
    /// Fingerprint every tagged version of the listed repositories
    Build(BuildArgs),
    /// Map advisories to patch commits
    MapPatches(MapArgs),
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// JSON list of repositories
    #[arg(long)]
    repos: PathBuf,
    /// Platform keywords; repositories must mention one
    #[arg(long, value_delimiter = ',')]
    keywords: Vec<String>,
    /// Repositories mentioning any of these words are skipped
    #[arg(long, value_delimiter = ',')]
    exclude_keywords: Vec<String>,
    #[arg(long)]
    min_stars: Option<u64>,
}

#[derive(Debug, Args)]
struct MapArgs {
    #[arg(long)]
    repos: PathBuf,
    /// Directory of advisory JSON files, instead of the NVD API
    #[arg(long)]
    advisories: Option<PathBuf>,
    /// Serve HTTP from recordings in this directory
    #[arg(long, conflicts_with = "record")]
    replay: Option<PathBuf>,
    /// Save every HTTP exchange to this directory
    #[arg(long)]
    record: Option<PathBuf>,
    /// Commits per search slice
    #[arg(long)]
    k: Option<usize>,
    /// Print each mapping step
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    th_hash: Option<u32>,
    #[arg(long)]
    th_sim: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    ComponentDb(#[from] ComponentDbError),
    #[error(transparent)]
    VulnDb(#[from] VulnDbError),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Usage(String),
}

/// Process-wide dependencies, injectable for tests.
pub struct Context {
    /// Used only when not offline.
    pub network: Arc<dyn HttpTransport>,
    pub env: Box<dyn Fn(&str) -> Option<String>>,
}

/// Builds the live client on first use.
struct LazyReqwest(OnceLock<Result<ReqwestTransport, ClientError>>);

impl HttpTransport for LazyReqwest {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, ClientError> {
        match self.0.get_or_init(ReqwestTransport::new) {
            Ok(t) => t.send(request),
            Err(e) => Err(e.clone()),
        }
    }
}

impl Context {
    pub fn system() -> Self {
        Context { network: Arc::new(LazyReqwest(OnceLock::new())), env: Box::new(|k| std::env::var(k).ok()) }
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, S>(args: I, ctx: &Context, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(cli, ctx, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn flags_layer(cli: &Cli) -> Layer {
    let mut layer = Layer { db_path: cli.db.clone(), jobs: cli.jobs, offline: cli.offline.then_some(true), ..Layer::default() };
    match &cli.command {
        Command::Db(DbCommand::Build(a)) => layer.min_stars = a.min_stars,
        Command::Db(DbCommand::MapPatches(a)) => layer.k = a.k,
        Command::Scan(a) => {
            layer.th_hash = a.th_hash;
            layer.th_sim = a.th_sim;
            layer.seed = a.seed;
        }
    }
    layer
}

fn execute(cli: Cli, ctx: &Context, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let file = match cli.config.clone().or_else(|| (ctx.env)("VULTURE_CONFIG").map(PathBuf::from)) {
        Some(p) => Some(Layer::read(&p)?),
        None => None,
    };
    let config = Config::resolve(file, &*ctx.env, flags_layer(&cli))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(e.to_string()))?;
    match &cli.command {
        Command::Db(DbCommand::Build(a)) => db_build(a, &config, &pool, cli.json, out, err),
        Command::Db(DbCommand::MapPatches(a)) => map_patches(a, &config, ctx, cli.json, out, err),
        Command::Scan(a) => scan(a, &config, &pool, cli.json, out, err),
    }
}

fn db_build(a: &BuildArgs, config: &Config, pool: &rayon::ThreadPool, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let entries = pipeline::load_repo_list(&a.repos)?;
    let selection = Selection { keywords: a.keywords.clone(), exclude: a.exclude_keywords.clone(), min_stars: config.min_stars };
    let built = pool.install(|| pipeline::build_database(&entries, &selection));
    for w in &built.warnings {
        writeln!(err, "warning: {w}")?;
    }
    std::fs::create_dir_all(&config.db_path)?;
    component_db::persist(&built.segment, &config.component_path())?;
    if json {
        let summary = serde_json::json!({
            "tpls": built.segment.tpls.len(),
            "versions": built.segment.version_count(),
            "fingerprints": built.segment.fingerprint_count(),
            "eliminated": built.stats.removed,
        });
        writeln!(out, "{summary}")?;
    } else {
        writeln!(out, "{}", built.summary())?;
    }
    Ok(0)
}

fn load_component(path: &Path) -> Result<component_db::ComponentSegment, CliError> {
    if !path.exists() {
        return Err(CliError::Usage(format!("no component segment at {}; run `vulture db build` first", path.display())));
    }
    Ok(component_db::load(path)?)
}

fn map_patches(a: &MapArgs, config: &Config, ctx: &Context, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let component = load_component(&config.component_path())?;
    if config.offline && a.advisories.is_none() && a.replay.is_none() {
        return Err(CliError::Usage(
            "offline mode has no advisory source: pass --advisories <dir> or --replay <recordings dir>".into(),
        ));
    }
    let transport: Arc<dyn HttpTransport> = match (&a.replay, &a.record) {
        (Some(dir), _) => Arc::new(ReplayTransport::open(dir)?),
        (None, _) if config.offline => Arc::new(OfflineTransport::new()),
        (None, Some(dir)) => Arc::new(RecordingTransport::new(ctx.network.clone(), dir.clone())),
        (None, None) => ctx.network.clone(),
    };
    let chat_allowed = !config.offline || a.replay.is_some();
    let oracle = WithFallback {
        primary: config.oracle.clone().filter(|_| chat_allowed).map(|s| ChatOracle::new(s, transport.clone())),
    };
    let entries = pipeline::load_repo_list(&a.repos)?;
    let directory = a.advisories.as_ref().map(|d| read_directory(d)).transpose()?;
    let advisories = |tpl: &str| match &directory {
        Some(feed) => Ok(feed.clone()),
        None => fetch_advisories(&AdvisorySource::NvdApi { keyword: tpl.to_string() }, transport.clone()),
    };
    let mapped = pipeline::map_patches(&component, &entries, &advisories, &oracle, &oracle, config.k)?;
    for w in &mapped.warnings {
        writeln!(err, "warning: {w}")?;
    }
    std::fs::create_dir_all(&config.db_path)?;
    vuln_db::persist(&mapped.segment, &config.vulnerability_path())?;
    if a.trace {
        if json {
            writeln!(out, "{}", serde_json::to_string_pretty(&mapped.traces).expect("traces serialize"))?;
        } else {
            for t in &mapped.traces {
                for line in t.lines() {
                    writeln!(out, "{line}")?;
                }
            }
        }
    }
    let with_patch = mapped.segment.records.iter().filter(|r| r.patch_commit.is_some()).count();
    writeln!(err, "{} advisories matched, {} mapped to patch commits", mapped.segment.records.len(), with_patch)?;
    Ok(0)
}

fn scan(a: &ScanArgs, config: &Config, pool: &rayon::ThreadPool, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let targets = collect_target(&a.target).map_err(|e| CliError::Usage(format!("cannot read target {}: {e}", a.target.display())))?;
    let component = load_component(&config.component_path())?;
    let vulns = if config.vulnerability_path().exists() {
        vuln_db::load(&config.vulnerability_path())?
    } else {
        writeln!(err, "warning: no vulnerability segment; run `vulture db map-patches` to enable vulnerability checks")?;
        VulnSegment::default()
    };
    let target_id = a.target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| a.target.display().to_string());
    let options = ScanOptions { th_hash: config.th_hash, th_sim: config.th_sim, seed: config.seed };
    let reports = pool.install(|| pipeline::scan(&target_id, &targets, &component, &vulns, &options));
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&reports).expect("reports serialize"))?;
    } else {
        write!(out, "{}", reports.reuse.to_table())?;
        write!(out, "{}", reports.vulnerabilities.to_table())?;
    }
    Ok(exit_code(&reports.vulnerabilities))
}
