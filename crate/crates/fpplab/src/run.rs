use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Kind};
use crate::error::ExpError;
use crate::experiments::{run_kind, Outcome};

/// `git describe`-style version; a build can inject the real one through
/// `FPPLAB_GIT_DESCRIBE`.
pub fn version() -> String {
    option_env!("FPPLAB_GIT_DESCRIBE").map(str::to_string).unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")))
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultArtifact {
    pub kind: Kind,
    pub config_hash: String,
    pub version: String,
    pub out_dir: PathBuf,
    pub payloads: Vec<PathBuf>,
    pub figures: Vec<PathBuf>,
    /// Name of the payload holding the main table.
    pub table: String,
    pub summary: Value,
    pub wall_time_s: f64,
}

impl ResultArtifact {
    /// The single JSON line printed after a run.
    pub fn summary_line(&self) -> String {
        serde_json::to_string(self).expect("artifact serializes")
    }
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, ExpError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    b.build().map_err(|e| ExpError::Io(format!("thread pool: {e}")))
}

/// Runs the experiment in memory without writing anything.
pub fn compute(cfg: &ExperimentConfig) -> Result<Outcome, ExpError> {
    pool(cfg.threads)?.install(|| run_kind(cfg))
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, ExpError> {
    let io = |e: std::io::Error| ExpError::Io(format!("{}: {e}", dir.join(name).display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| io(e.error))?;
    Ok(path)
}

/// Runs one experiment and writes its payloads, figures and `summary.json`
/// into the config's output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultArtifact, ExpError> {
    let start = Instant::now();
    let outcome = compute(cfg)?;
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir).map_err(|e| ExpError::Io(format!("{}: {e}", dir.display())))?;
    let hash = cfg.hash();
    let version = version();
    let mut payloads = Vec::new();
    for (name, bytes) in &outcome.payloads {
        payloads.push(write_atomic(&dir, name, bytes)?);
    }
    let mut summary = json!({
        "kind": cfg.kind,
        "config_hash": hash,
        "version": version,
        "config": cfg,
        "payloads": outcome.payloads.iter().map(|p| &p.0).collect::<Vec<_>>(),
        "figures": outcome.figures.iter().map(|p| &p.0).collect::<Vec<_>>(),
        "results": outcome.summary,
    });
    // Output location and worker count do not belong in reproducible bytes.
    if let Some(c) = summary["config"].as_object_mut() {
        c.remove("out");
        c.remove("threads");
    }
    let mut bytes = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    bytes.push(b'\n');
    payloads.push(write_atomic(&dir, "summary.json", &bytes)?);
    let mut figures = Vec::new();
    for (name, bytes) in &outcome.figures {
        figures.push(write_atomic(&dir, name, bytes)?);
    }
    Ok(ResultArtifact {
        kind: cfg.kind,
        config_hash: hash,
        version,
        out_dir: dir,
        payloads,
        figures,
        table: outcome.table,
        summary: outcome.summary,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// A sweep member; configs that failed to load are carried as errors so
/// they still get a row.
pub type SweepEntry = Result<ExperimentConfig, ExpError>;

#[derive(Debug)]
pub struct SweepReport {
    /// One slot per entry, in input order.
    pub results: Vec<Result<ResultArtifact, ExpError>>,
    pub merged: PathBuf,
}

impl SweepReport {
    pub fn artifacts(&self) -> impl Iterator<Item = &ResultArtifact> {
        self.results.iter().filter_map(|r| r.as_ref().ok())
    }

    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| r.is_err()).count()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Runs every config in turn; a failing config becomes an error row in
/// `sweep.csv` under `out` and does not stop the others.
pub fn sweep(entries: Vec<SweepEntry>, out: &Path) -> Result<SweepReport, ExpError> {
    if entries.is_empty() {
        return Err(ExpError::Config("sweep needs at least one config".into()));
    }
    let mut kinds = entries.iter().filter_map(|e| e.as_ref().ok()).map(|c| c.kind);
    if let Some(first) = kinds.next() {
        if let Some(other) = kinds.find(|k| *k != first) {
            return Err(ExpError::Config(format!("sweep mixes kinds {first} and {other}")));
        }
    }
    let results: Vec<Result<ResultArtifact, ExpError>> = entries
        .into_iter()
        .map(|e| {
            let cfg = e?;
            let cfg = if cfg.out.is_none() {
                let mut c = cfg.clone();
                c.out = Some(out.join(format!("{}-{}", cfg.kind, &cfg.hash()[..12])));
                c
            } else {
                cfg
            };
            run(&cfg)
        })
        .collect();

    let mut header: Option<String> = None;
    let mut rows = String::new();
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok(a) => {
                let path = a.out_dir.join(&a.table);
                let text = std::fs::read_to_string(&path).map_err(|e| ExpError::Io(format!("{}: {e}", path.display())))?;
                let mut lines = text.lines();
                let h = lines.next().unwrap_or_default();
                header.get_or_insert_with(|| h.to_string());
                for line in lines {
                    rows.push_str(&format!("{i},{},ok,{line}\n", a.config_hash));
                }
            }
            Err(e) => rows.push_str(&format!("{i},,{},\n", csv_field(&format!("error: {e}")))),
        }
    }
    std::fs::create_dir_all(out).map_err(|e| ExpError::Io(format!("{}: {e}", out.display())))?;
    let text = format!("config,config_hash,status,{}\n{rows}", header.unwrap_or_default());
    let merged = write_atomic(out, "sweep.csv", text.as_bytes())?;
    Ok(SweepReport { results, merged })
}
