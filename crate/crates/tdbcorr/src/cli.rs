//! Command line front end. Every parameter is a long flag with a default or
//! a validated requirement; there are no prompts.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tdbcorr_core::los::{LosTestConfig, RunOptions};
use tdbcorr_core::pipeline::{aligned_mesh, run_analysis, AnalysisConfig, RoughnessComparison};
use tdbcorr_core::sampling::{DirectionSpec, EyepointSpec};
use tdbcorr_core::terrain::{load_tdb, TdbFormat, TerrainDatabase, DEFAULT_BOX_MARGIN};
use tdbcorr_core::{Error, ThresholdConfig};

use crate::service::{self, AppState, TdbEntry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tdbcorr", version, about = "Correlation analysis of two terrain databases")]
pub struct Cli {
    /// Worker threads for ray tracing (0 = one per core)
    #[arg(long, env = "TDBCORR_WORKERS", default_value_t = 0, global = true)]
    pub workers: usize,

    /// Log progress to stderr (repeat for more detail)
    #[arg(long, short, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print vertex, polygon and LOD counts and the extents of a database
    Info(InfoArgs),
    /// Per-block roughness of two databases
    Roughness(RoughnessArgs),
    /// Paired line-of-sight test, roughness and grid report
    Los(LosArgs),
    /// Serve databases and analysis jobs over HTTP
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    /// Database file (.mesh or .asc)
    #[arg(long)]
    pub tdb: PathBuf,
    /// File format; inferred from the extension when omitted
    #[arg(long)]
    pub format: Option<TdbFormat>,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// First database
    #[arg(long)]
    pub tdb_a: PathBuf,
    /// Second database
    #[arg(long)]
    pub tdb_b: PathBuf,
    /// Format of the first database (trimesh-obj or heightfield-asc)
    #[arg(long)]
    pub format_a: Option<TdbFormat>,
    /// Format of the second database
    #[arg(long)]
    pub format_b: Option<TdbFormat>,
    /// LOD of the first database (0 = most detailed)
    #[arg(long, default_value_t = 0)]
    pub lod_a: usize,
    /// LOD of the second database
    #[arg(long, default_value_t = 0)]
    pub lod_b: usize,
    /// Block rows over the common area
    #[arg(long, default_value_t = 5)]
    pub rows: usize,
    /// Block columns over the common area
    #[arg(long, default_value_t = 5)]
    pub cols: usize,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Roughness below this is GREEN [default: 0.25]
    #[arg(long)]
    pub rough_low: Option<f64>,
    /// Roughness above this is RED [default: 0.5]
    #[arg(long)]
    pub rough_high: Option<f64>,
    /// Mean |delta length| (m) above which a block is SUSPECT [default: 10]
    #[arg(long)]
    pub delta_len_threshold: Option<f64>,
    /// Mismatch ratio above which a block is FLAGGED [default: 0.02]
    #[arg(long)]
    pub mismatch_ratio_threshold: Option<f64>,
}

impl ThresholdArgs {
    fn given(&self) -> bool {
        self.rough_low.is_some()
            || self.rough_high.is_some()
            || self.delta_len_threshold.is_some()
            || self.mismatch_ratio_threshold.is_some()
    }

    fn resolve(&self) -> ThresholdConfig {
        let d = ThresholdConfig::default();
        ThresholdConfig {
            rough_low: self.rough_low.unwrap_or(d.rough_low),
            rough_high: self.rough_high.unwrap_or(d.rough_high),
            delta_len_threshold: self.delta_len_threshold.unwrap_or(d.delta_len_threshold),
            mismatch_ratio_threshold: self.mismatch_ratio_threshold.unwrap_or(d.mismatch_ratio_threshold),
        }
    }
}

#[derive(Debug, Args)]
pub struct RoughnessArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Any threshold flag also writes report.csv and report.html
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct LosArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Test locations per block
    #[arg(long, default_value_t = 4)]
    pub locations: usize,
    /// Eyepoints per location
    #[arg(long, default_value_t = 3)]
    pub eyepoints: usize,
    /// Height above ground of the lowest eyepoint (m)
    #[arg(long, default_value_t = 2.0)]
    pub agl0: f64,
    /// Vertical spacing between eyepoints (m)
    #[arg(long, default_value_t = 5.0)]
    pub dz: f64,
    /// First azimuth, degrees clockwise from north
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub az_start: f64,
    /// Azimuth step (degrees)
    #[arg(long, default_value_t = 45.0, allow_negative_numbers = true)]
    pub az_step: f64,
    /// Number of azimuths
    #[arg(long, default_value_t = 8)]
    pub az_count: usize,
    /// First pitch, degrees above horizontal
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub pitch_start: f64,
    /// Pitch step (degrees)
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub pitch_step: f64,
    /// Number of pitches
    #[arg(long, default_value_t = 3)]
    pub pitch_count: usize,
    /// Gap between the terrain and the bounding box faces (m)
    #[arg(long, default_value_t = DEFAULT_BOX_MARGIN)]
    pub box_margin: f64,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

impl LosArgs {
    pub fn analysis_config(&self) -> AnalysisConfig {
        AnalysisConfig {
            lod_a: self.pair.lod_a,
            lod_b: self.pair.lod_b,
            los: LosTestConfig {
                rows: self.pair.rows,
                cols: self.pair.cols,
                locations_per_block: self.locations,
                eyepoints: EyepointSpec {
                    count: self.eyepoints,
                    agl0: self.agl0,
                    dz: self.dz,
                },
                directions: DirectionSpec {
                    az_start: self.az_start,
                    az_step: self.az_step,
                    az_count: self.az_count,
                    pitch_start: self.pitch_start,
                    pitch_step: self.pitch_step,
                    pitch_count: self.pitch_count,
                },
                box_margin: self.box_margin,
            },
            thresholds: self.thresholds.resolve(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Database to serve; repeat for several. Its id is the file stem.
    #[arg(long, required = true)]
    pub tdb: Vec<PathBuf>,
    /// Address to bind
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Port to bind
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Directory with the built web viewer, served at /
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

/// Failure of a command, with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn from_core(context: &str, e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_) | Error::LodOutOfRange { .. } => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        };
        Self {
            code,
            message: format!("{context}: {e}"),
        }
    }

    fn usage(message: String) -> Self {
        Self {
            code: EXIT_USAGE,
            message,
        }
    }
}

fn load(path: &Path, format: Option<TdbFormat>, label: &str) -> Result<TerrainDatabase, CliError> {
    let format = format.unwrap_or_else(|| TdbFormat::from_path(path));
    load_tdb(path, format).map_err(|e| CliError::from_core(&format!("loading {label}"), e))
}

fn info(args: &InfoArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let db = load(&args.tdb, args.format, "database")?;
    let _ = writeln!(out, "{}", db.source_path().display());
    let _ = write!(out, "{}", db.summary());
    for (i, lod) in db.lods().iter().enumerate() {
        let _ = writeln!(
            out,
            "  lod{i}: {} vertices, {} polygons",
            lod.vertices().len(),
            lod.triangle_count()
        );
    }
    for line in db.load_log() {
        let _ = writeln!(out, "note: {line}");
    }
    Ok(())
}

fn written(out: &mut dyn Write, paths: &[PathBuf]) {
    for p in paths {
        let _ = writeln!(out, "wrote {}", p.display());
    }
}

fn roughness(args: &RoughnessArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let t = args.thresholds.resolve();
    if args.thresholds.given() {
        t.check().map_err(|e| CliError::from_core("thresholds", e))?;
    }
    let p = &args.pair;
    let a = load(&p.tdb_a, p.format_a, "tdb-a")?;
    let b = load(&p.tdb_b, p.format_b, "tdb-b")?;
    let mesh_a = a.select_lod(p.lod_a).map_err(|e| CliError::from_core("lod-a", e))?;
    let mesh_b = aligned_mesh(&a, &b, p.lod_b).map_err(|e| CliError::from_core("lod-b", e))?;
    let cmp = RoughnessComparison::compute(mesh_a, &mesh_b, p.rows, p.cols)
        .map_err(|e| CliError::from_core("roughness", e))?;
    let files = cmp
        .write_outputs(&p.out, args.thresholds.given().then_some(&t))
        .map_err(|e| CliError::from_core("writing output", e))?;
    written(out, &files);
    Ok(())
}

fn los(args: &LosArgs, workers: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.analysis_config();
    let errors = cfg.validate();
    if !errors.is_empty() {
        return Err(CliError::from_core("configuration", Error::InvalidConfig(errors)));
    }
    let p = &args.pair;
    let a = load(&p.tdb_a, p.format_a, "tdb-a")?;
    let b = load(&p.tdb_b, p.format_b, "tdb-b")?;
    let result = run_analysis(&a, &b, &cfg, RunOptions { workers, progress: None })
        .map_err(|e| CliError::from_core("LOS test", e))?;
    let files = result
        .write_outputs(&p.out)
        .map_err(|e| CliError::from_core("writing output", e))?;
    let _ = writeln!(
        out,
        "{} ray pairs, {} blocked/unblocked mismatches, {} location(s) skipped over holes",
        result.los.records.len(),
        result.los.mismatch_count(),
        result.los.skipped.len()
    );
    written(out, &files);
    Ok(())
}

/// Ids for served databases: file stems, suffixed when they collide.
pub fn tdb_ids(paths: &[PathBuf]) -> Vec<String> {
    let mut ids: Vec<String> = Vec::new();
    for p in paths {
        let stem = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "tdb".into());
        let mut id = stem.clone();
        let mut n = 2;
        while ids.contains(&id) {
            id = format!("{stem}-{n}");
            n += 1;
        }
        ids.push(id);
    }
    ids
}

fn serve(args: &ServeArgs, workers: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let mut entries = Vec::new();
    for (id, path) in tdb_ids(&args.tdb).into_iter().zip(&args.tdb) {
        let db = load(path, None, &id)?;
        entries.push(TdbEntry { id, db });
    }
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| CliError::usage(format!("invalid --host/--port: {e}")))?;
    let state = match &args.static_dir {
        Some(dir) => AppState::with_static_dir(entries, workers, dir.clone()),
        None => AppState::new(entries, workers),
    };
    state.spawn_worker();
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError {
        code: EXIT_RUNTIME,
        message: format!("starting runtime: {e}"),
    })?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| CliError {
            code: EXIT_RUNTIME,
            message: format!("binding {addr}: {e}"),
        })?;
        let _ = writeln!(out, "listening on http://{}", listener.local_addr().unwrap_or(addr));
        let _ = out.flush();
        axum::serve(listener, service::router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError {
                code: EXIT_RUNTIME,
                message: format!("server: {e}"),
            })
    })
}

/// Runs a parsed command.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Info(a) => info(a, out),
        Command::Roughness(a) => roughness(a, out),
        Command::Los(a) => los(a, cli.workers, out),
        Command::Serve(a) => serve(a, cli.workers, out),
    }
}

/// Parses `argv` (program name first) and runs it, writing normal output to
/// `out` and diagnostics to `err`. Returns the process exit code.
pub fn execute_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    if cli.verbose > 0 {
        let level = if cli.verbose > 1 { "debug" } else { "info" };
        let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    }
    match run(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

/// [`execute_with`] on the process's stdout and stderr.
pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    execute_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}
