//! HTTP facade for the viewer: database geometry, asynchronous analysis jobs
//! and their results.
//!
//! Jobs run one at a time, first in first out, on a dedicated thread. Every
//! GET is a read of immutable snapshots.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tdbcorr_core::geom::Point;
use tdbcorr_core::los::RunOptions;
use tdbcorr_core::pipeline::{run_analysis, AnalysisConfig, AnalysisOutput};
use tdbcorr_core::report::{results_tsv_string, RESULTS_COLUMNS};
use tdbcorr_core::terrain::{Extents, TdbSummary};
use tdbcorr_core::{BlockFlag, FieldError, RayPairResult, TerrainDatabase, ThresholdConfig};

const INDEX_HTML: &str = include_str!("../static/index.html");

/// A database made available to clients under `id`.
#[derive(Debug)]
pub struct TdbEntry {
    pub id: String,
    pub db: TerrainDatabase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobState {
    pub fn as_str(&self) -> &'static str {
        match self {
            JobState::Queued => "QUEUED",
            JobState::Running => "RUNNING",
            JobState::Done => "DONE",
            JobState::Failed => "FAILED",
        }
    }
}

#[derive(Debug)]
struct Job {
    tdb_a: String,
    tdb_b: String,
    config: AnalysisConfig,
    state: JobState,
    traced: Arc<AtomicUsize>,
    expected: usize,
    result: Option<Arc<AnalysisOutput>>,
    error: Option<String>,
}

impl Job {
    fn progress(&self) -> f64 {
        match self.state {
            JobState::Queued => 0.0,
            JobState::Done => 1.0,
            JobState::Running | JobState::Failed => {
                let done = self.traced.load(Ordering::Relaxed) as f64;
                (done / self.expected.max(1) as f64).min(0.99)
            }
        }
    }
}

#[derive(Default)]
struct Queue {
    pending: Mutex<VecDeque<String>>,
    ready: Condvar,
}

/// Shared service state.
pub struct AppState {
    tdbs: Vec<TdbEntry>,
    jobs: Mutex<BTreeMap<String, Job>>,
    next_id: AtomicUsize,
    queue: Queue,
    workers: usize,
    static_dir: Option<PathBuf>,
}

impl AppState {
    /// State serving `tdbs`; LOS work inside a job uses `workers` threads
    /// (0 = all cores). No job runs until [`AppState::spawn_worker`].
    pub fn new(tdbs: Vec<TdbEntry>, workers: usize) -> Arc<Self> {
        Arc::new(Self {
            tdbs,
            jobs: Mutex::new(BTreeMap::new()),
            next_id: AtomicUsize::new(1),
            queue: Queue::default(),
            workers,
            static_dir: None,
        })
    }

    pub fn with_static_dir(tdbs: Vec<TdbEntry>, workers: usize, dir: PathBuf) -> Arc<Self> {
        let mut state = Self::new(tdbs, workers);
        Arc::get_mut(&mut state).expect("fresh state").static_dir = Some(dir);
        state
    }

    /// Starts the job runner thread.
    pub fn spawn_worker(self: &Arc<Self>) -> std::thread::JoinHandle<()> {
        let state = Arc::clone(self);
        std::thread::Builder::new()
            .name("job-runner".into())
            .spawn(move || loop {
                let id = {
                    let mut pending = state.queue.pending.lock().unwrap();
                    loop {
                        if let Some(id) = pending.pop_front() {
                            break id;
                        }
                        pending = state.queue.ready.wait(pending).unwrap();
                    }
                };
                state.run_job(&id);
            })
            .expect("spawn job runner")
    }

    fn tdb(&self, id: &str) -> Option<&TdbEntry> {
        self.tdbs.iter().find(|t| t.id == id)
    }

    fn run_job(&self, id: &str) {
        let (tdb_a, tdb_b, config, traced) = {
            let mut jobs = self.jobs.lock().unwrap();
            let Some(job) = jobs.get_mut(id) else { return };
            job.state = JobState::Running;
            (job.tdb_a.clone(), job.tdb_b.clone(), job.config, Arc::clone(&job.traced))
        };
        log::info!("job {id} running");
        let (Some(a), Some(b)) = (self.tdb(&tdb_a), self.tdb(&tdb_b)) else {
            return;
        };
        let outcome = run_analysis(
            &a.db,
            &b.db,
            &config,
            RunOptions {
                workers: self.workers,
                progress: Some(&traced),
            },
        );
        let mut jobs = self.jobs.lock().unwrap();
        let job = jobs.get_mut(id).expect("job exists");
        match outcome {
            Ok(out) => {
                job.state = JobState::Done;
                job.result = Some(Arc::new(out));
                log::info!("job {id} done");
            }
            Err(e) => {
                job.state = JobState::Failed;
                job.error = Some(e.to_string());
                log::warn!("job {id} failed: {e}");
            }
        }
    }

    /// Validates and queues a job; returns its id.
    pub fn submit(&self, request: JobRequest) -> Result<String, Vec<FieldError>> {
        let mut errors = Vec::new();
        let a = self.tdb(&request.tdb_a);
        let b = self.tdb(&request.tdb_b);
        if a.is_none() {
            errors.push(FieldError::new("tdb_a", format!("unknown database '{}'", request.tdb_a)));
        }
        if b.is_none() {
            errors.push(FieldError::new("tdb_b", format!("unknown database '{}'", request.tdb_b)));
        }
        match (a, b) {
            (Some(a), Some(b)) => errors.extend(request.config.validate_for(&a.db, &b.db)),
            _ => errors.extend(request.config.validate()),
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        let los = &request.config.los;
        let expected = los.rows
            * los.cols
            * los.locations_per_block
            * los.eyepoints.count
            * los.directions.direction_count();
        let id = format!("job-{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        self.jobs.lock().unwrap().insert(
            id.clone(),
            Job {
                tdb_a: request.tdb_a,
                tdb_b: request.tdb_b,
                config: request.config,
                state: JobState::Queued,
                traced: Arc::new(AtomicUsize::new(0)),
                expected,
                result: None,
                error: None,
            },
        );
        self.queue.pending.lock().unwrap().push_back(id.clone());
        self.queue.ready.notify_one();
        Ok(id)
    }

    pub fn job_state(&self, id: &str) -> Option<JobState> {
        self.jobs.lock().unwrap().get(id).map(|j| j.state)
    }
}

/// Body of `POST /api/jobs`: the two database ids plus the analysis
/// parameters at top level.
#[derive(Debug, Clone, Deserialize)]
pub struct JobRequest {
    pub tdb_a: String,
    pub tdb_b: String,
    #[serde(flatten)]
    pub config: AnalysisConfig,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    fields: Vec<FieldError>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
            fields: Vec::new(),
        }
    }

    fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, what)
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.message, "errors": self.fields });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/api/tdbs", get(list_tdbs))
        .route("/api/tdbs/{id}/summary", get(tdb_summary))
        .route("/api/tdbs/{id}/mesh", get(tdb_mesh))
        .route("/api/jobs", get(list_jobs).post(submit_job))
        .route("/api/jobs/{id}", get(job_status))
        .route("/api/jobs/{id}/blocks", get(job_blocks))
        .route("/api/jobs/{id}/rays", get(job_rays));
    let router = match &state.static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(INDEX_HTML) })),
    };
    router.with_state(state)
}

#[derive(Serialize)]
struct TdbListing {
    id: String,
    path: String,
    summary: TdbSummary,
}

async fn list_tdbs(State(state): State<Arc<AppState>>) -> Json<Vec<TdbListing>> {
    let list = state
        .tdbs
        .iter()
        .map(|t| TdbListing {
            id: t.id.clone(),
            path: t.db.source_path().display().to_string(),
            summary: t.db.summary(),
        })
        .collect();
    Json(list)
}

fn find_tdb<'a>(state: &'a AppState, id: &str) -> ApiResult<&'a TdbEntry> {
    state
        .tdb(id)
        .ok_or_else(|| ApiError::not_found(format!("unknown database '{id}'")))
}

async fn tdb_summary(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<TdbSummary>> {
    Ok(Json(find_tdb(&state, &id)?.db.summary()))
}

#[derive(Debug, Deserialize)]
struct MeshQuery {
    lod: Option<usize>,
    decimate: Option<usize>,
}

/// Transport copy of one LOD. With `decimate` k > 1 every k-th triangle is
/// kept; vertices are shared with the full mesh so indices stay valid.
#[derive(Debug, Serialize, Deserialize)]
pub struct MeshPayload {
    pub tdb: String,
    pub lod: usize,
    pub decimate: usize,
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
    pub triangle_count: usize,
    pub extents: Extents,
}

async fn tdb_mesh(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<MeshQuery>,
) -> ApiResult<Json<MeshPayload>> {
    let entry = find_tdb(&state, &id)?;
    let lod = q.lod.unwrap_or(0);
    let mesh = entry
        .db
        .select_lod(lod)
        .map_err(|e| ApiError::not_found(e.to_string()))?;
    let decimate = q.decimate.unwrap_or(1);
    if decimate == 0 {
        return Err(ApiError::bad_request("decimate must be at least 1"));
    }
    Ok(Json(MeshPayload {
        tdb: id,
        lod,
        decimate,
        vertices: mesh.vertices().iter().map(|p| [p.x, p.y, p.z]).collect(),
        triangles: mesh.triangles().iter().step_by(decimate).copied().collect(),
        triangle_count: mesh.triangle_count(),
        extents: *entry.db.extents(),
    }))
}

async fn submit_job(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let request: JobRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return ApiError::bad_request(format!("invalid job document: {e}")).into_response(),
    };
    match state.submit(request) {
        Ok(id) => (
            StatusCode::ACCEPTED,
            Json(json!({ "id": id, "state": JobState::Queued, "progress": 0.0 })),
        )
            .into_response(),
        Err(fields) => ApiError {
            status: StatusCode::BAD_REQUEST,
            message: "invalid configuration".into(),
            fields,
        }
        .into_response(),
    }
}

fn job_json(id: &str, job: &Job) -> Value {
    let mut v = json!({
        "id": id,
        "state": job.state,
        "progress": job.progress(),
        "tdb_a": job.tdb_a,
        "tdb_b": job.tdb_b,
        "config": job.config,
    });
    if let Some(e) = &job.error {
        v["error"] = json!(e);
    }
    if let Some(out) = &job.result {
        v["records"] = json!(out.los.records.len());
        v["skipped_locations"] = json!(out.los.skipped.len());
        v["grid"] = json!({ "rows": out.los.grid.rows(), "cols": out.los.grid.cols() });
        v["links"] = json!({
            "blocks": format!("/api/jobs/{id}/blocks"),
            "rays": format!("/api/jobs/{id}/rays"),
        });
    }
    v
}

async fn list_jobs(State(state): State<Arc<AppState>>) -> Json<Vec<Value>> {
    let jobs = state.jobs.lock().unwrap();
    Json(jobs.iter().map(|(id, j)| job_json(id, j)).collect())
}

async fn job_status(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let jobs = state.jobs.lock().unwrap();
    let job = jobs
        .get(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown job '{id}'")))?;
    Ok(Json(job_json(&id, job)))
}

fn finished(state: &AppState, id: &str) -> ApiResult<Arc<AnalysisOutput>> {
    let jobs = state.jobs.lock().unwrap();
    let job = jobs
        .get(id)
        .ok_or_else(|| ApiError::not_found(format!("unknown job '{id}'")))?;
    job.result.clone().ok_or_else(|| {
        ApiError::new(
            StatusCode::CONFLICT,
            format!("job '{id}' is {}, not DONE", job.state.as_str()),
        )
    })
}

fn parse_number(name: &str, v: &str) -> ApiResult<f64> {
    v.trim()
        .parse()
        .map_err(|_| ApiError::bad_request(format!("{name}: '{v}' is not a number")))
}

/// `thresholds=low,high,delta,ratio`, or any of `rough_low`, `rough_high`,
/// `delta_len_threshold`, `mismatch_ratio_threshold` individually; missing
/// values fall back to the job's own thresholds.
fn parse_thresholds(q: &HashMap<String, String>, base: ThresholdConfig) -> ApiResult<ThresholdConfig> {
    let mut t = base;
    if let Some(list) = q.get("thresholds") {
        let parts: Vec<&str> = list.split(',').collect();
        if parts.len() != 4 {
            return Err(ApiError::bad_request(
                "thresholds must be rough_low,rough_high,delta_len_threshold,mismatch_ratio_threshold",
            ));
        }
        t.rough_low = parse_number("rough_low", parts[0])?;
        t.rough_high = parse_number("rough_high", parts[1])?;
        t.delta_len_threshold = parse_number("delta_len_threshold", parts[2])?;
        t.mismatch_ratio_threshold = parse_number("mismatch_ratio_threshold", parts[3])?;
    }
    for (name, slot) in [
        ("rough_low", &mut t.rough_low),
        ("rough_high", &mut t.rough_high),
        ("delta_len_threshold", &mut t.delta_len_threshold),
        ("mismatch_ratio_threshold", &mut t.mismatch_ratio_threshold),
    ] {
        if let Some(v) = q.get(name) {
            *slot = parse_number(name, v)?;
        }
    }
    let errors = t.validate();
    if !errors.is_empty() {
        return Err(ApiError {
            status: StatusCode::BAD_REQUEST,
            message: "invalid thresholds".into(),
            fields: errors,
        });
    }
    Ok(t)
}

async fn job_blocks(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<Vec<BlockFlag>>> {
    let out = finished(&state, &id)?;
    let t = parse_thresholds(&q, out.config.thresholds)?;
    out.flags(&t)
        .map(Json)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum RayFilter {
    All,
    MismatchOnly,
}

#[derive(Debug, Deserialize)]
struct RayQuery {
    block: String,
    filter: Option<RayFilter>,
}

/// One ray pair with both segments, ready to draw.
#[derive(Debug, Serialize, Deserialize)]
pub struct RayView {
    #[serde(flatten)]
    pub record: RayPairResult,
    pub eye_a: [f64; 3],
    pub end_a: [f64; 3],
    pub eye_b: [f64; 3],
    pub end_b: [f64; 3],
    /// Record as printed in the results file, keyed by column name.
    pub fields: BTreeMap<String, String>,
}

fn xyz(p: Point) -> [f64; 3] {
    [p.x, p.y, p.z]
}

fn ray_view(out: &AnalysisOutput, r: &RayPairResult) -> RayView {
    let dir = out.los.directions[r.direction].vector;
    let line = results_tsv_string(std::slice::from_ref(r));
    let values = line.lines().nth(1).unwrap_or_default().split('\t');
    let fields = RESULTS_COLUMNS
        .iter()
        .map(|c| c.to_string())
        .zip(values.map(str::to_string))
        .collect();
    RayView {
        record: *r,
        eye_a: xyz(r.eye_a()),
        end_a: xyz(r.end_a(&dir)),
        eye_b: xyz(r.eye_b()),
        end_b: xyz(r.end_b(&dir)),
        fields,
    }
}

async fn job_rays(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<RayQuery>,
) -> ApiResult<Json<Vec<RayView>>> {
    let out = finished(&state, &id)?;
    let (r, c) = q
        .block
        .split_once(',')
        .and_then(|(r, c)| Some((r.trim().parse::<usize>().ok()?, c.trim().parse::<usize>().ok()?)))
        .ok_or_else(|| ApiError::bad_request(format!("block must be 'row,col', got '{}'", q.block)))?;
    if r >= out.los.grid.rows() || c >= out.los.grid.cols() {
        return Err(ApiError::not_found(format!(
            "block {r},{c} outside the {}x{} grid",
            out.los.grid.rows(),
            out.los.grid.cols()
        )));
    }
    let filter = q.filter.unwrap_or(RayFilter::MismatchOnly);
    let rays = out
        .los
        .records_in_block((r, c))
        .filter(|rec| filter == RayFilter::All || rec.blocked_mismatch)
        .map(|rec| ray_view(&out, rec))
        .collect();
    Ok(Json(rays))
}
