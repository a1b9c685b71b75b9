//! The `features`, `run`, `synth`, `report` and `cache` subcommands.

use std::path::{Path, PathBuf};

use qkswap_core::audio_features::{extract_file, parse_manifest, stack_rows};
use qkswap_core::digest::{Digest, Hasher};
use qkswap_core::evaluation::{run_protocol, FeatureSet, FittedModel, RunSummary};
use qkswap_core::kernels::GramCache;
use qkswap_core::Error;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifact::{self, FeatureArtifact};
use crate::config::{self, LoadedConfig};
use crate::report;
use crate::synth::{self, SynthSpec};
use crate::{CliError, CliResult};

pub const RUN_FILE: &str = "run.json";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match jobs {
        Some(0) => Err(Error::InvalidConfig("jobs must be >= 1".into()).into()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeaturesOutcome {
    CacheHit(PathBuf),
    Wrote { path: PathBuf, rows: usize, cols: usize },
}

/// Digest of the extraction settings, the manifest and every audio file.
fn features_input_digest(params_digest: &Digest, manifest: &[u8], audio: &[(String, Vec<u8>)]) -> Digest {
    let mut h = Hasher::new();
    h.str("features-input").digest(params_digest).bytes(manifest);
    for (id, bytes) in audio {
        h.str(id).bytes(bytes);
    }
    h.finish()
}

pub fn features(cfg: &LoadedConfig, jobs: Option<usize>) -> CliResult<FeaturesOutcome> {
    let c = &cfg.config;
    let params = c.features.extraction();
    params.validate()?;
    let manifest_path = cfg.resolve(
        c.dataset
            .manifest
            .as_deref()
            .ok_or_else(|| Error::InvalidConfig("dataset.manifest is required for `features`".into()))?,
    );
    let root = c.dataset.audio_root.as_deref().map(|p| cfg.resolve(p)).unwrap_or_else(|| cfg.base_dir.clone());
    let out = cfg.resolve(&c.dataset.features);

    let manifest_bytes = std::fs::read(&manifest_path).map_err(io_err(&manifest_path))?;
    let text = String::from_utf8(manifest_bytes.clone())
        .map_err(|_| Error::InvalidInput(format!("{} is not UTF-8", manifest_path.display())))?;
    let entries = parse_manifest(&text)?;
    if entries.is_empty() {
        return Err(Error::InvalidInput(format!("{} lists no audio files", manifest_path.display())).into());
    }
    let ids: Vec<String> = entries.iter().map(|e| e.path.to_string_lossy().replace('\\', "/")).collect();
    let audio = entries
        .iter()
        .zip(&ids)
        .map(|(e, id)| {
            let p = root.join(&e.path);
            std::fs::read(&p).map(|b| (id.clone(), b)).map_err(io_err(&p))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let params_digest = params.digest();
    let input_digest = features_input_digest(&params_digest, &manifest_bytes, &audio);
    drop(audio);

    if let Ok(existing) = artifact::read(&out) {
        if existing.input_digest == input_digest && existing.params_digest == params_digest {
            return Ok(FeaturesOutcome::CacheHit(out));
        }
    }
    let rows = with_pool(jobs, || {
        entries
            .par_iter()
            .map(|e| extract_file(&root.join(&e.path), &params))
            .collect::<Result<Vec<_>, _>>()
    })??;
    let features = stack_rows(&rows)?;
    let (n, d) = features.dim();
    let labels = entries.iter().map(|e| e.label).collect();
    let art = FeatureArtifact {
        input_digest,
        params_digest,
        set: FeatureSet::new(ids, labels, features)?,
    };
    artifact::write_atomic(&out, &artifact::encode(&art))?;
    Ok(FeaturesOutcome::Wrote { path: out, rows: n, cols: d })
}

/// Everything `run.json` holds: the config digest and echo, the effective
/// seeds and the full summary with per-trial scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_digest: Digest,
    pub config: Vec<String>,
    pub fold_seed: u64,
    pub pca_seed: u64,
    pub models: Vec<String>,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub models: Option<Vec<String>>,
    pub out: Option<PathBuf>,
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Invariant(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(io_err(&path))?;
    Ok(())
}

fn is_generated(name: &str) -> bool {
    let ext = |e: &str| name.ends_with(e);
    ((name.starts_with("roc_") || name.starts_with("det_")) && ext(".csv")) || (name.starts_with("model_") && ext(".json"))
}

/// Removes per-model files left by an earlier run so the directory only
/// describes the current one.
fn clear_generated(dir: &Path) -> CliResult<()> {
    for item in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let item = item.map_err(io_err(dir))?;
        if item.file_name().to_str().is_some_and(is_generated) && item.path().is_file() {
            std::fs::remove_file(item.path()).map_err(io_err(&item.path()))?;
        }
    }
    Ok(())
}

fn fitted_name(f: &FittedModel) -> String {
    format!("model_{}_{}.json", f.model, f.fold)
}

pub fn run(mut cfg: LoadedConfig, opts: &RunOptions) -> CliResult<(PathBuf, RunRecord)> {
    if let Some(seed) = opts.seed {
        cfg.apply_seed(seed);
    }
    let protocol = cfg.config.protocol(opts.models.as_deref())?;
    let out = cfg.output_dir(opts.out.as_deref())?;
    let cache_dir = cfg.cache_dir(&out);
    let features_path = cfg.resolve(&cfg.config.dataset.features);
    let art = artifact::read(&features_path)?;
    let cache = GramCache::open(&cache_dir)?;
    let jobs = opts.jobs.or(cfg.config.jobs);
    let output = with_pool(jobs, || run_protocol(&art.set, &protocol, Some(&cache)))??;

    let record = RunRecord {
        config_digest: cfg.digest,
        config: cfg.canonical.clone(),
        fold_seed: cfg.config.folds.seed,
        pca_seed: cfg.config.features.pca_seed,
        models: protocol.models.iter().map(|m| m.name.clone()).collect(),
        summary: output.summary,
    };
    std::fs::create_dir_all(&out).map_err(io_err(&out))?;
    clear_generated(&out)?;
    for f in &output.fitted {
        write_file(&out, &fitted_name(f), &to_json(f)?)?;
    }
    for (name, contents) in report::render(&record.summary)? {
        write_file(&out, &name, &contents)?;
    }
    write_file(&out, RUN_FILE, &to_json(&record)?)?;
    Ok((out, record))
}

/// Loads `run.json`, checks that every stored number re-derives from the
/// stored scores, and rewrites the table and curve files.
pub fn report(dir: &Path) -> CliResult<RunRecord> {
    let run_path = dir.join(RUN_FILE);
    let text = std::fs::read_to_string(&run_path).map_err(|e| {
        Error::InvalidInput(format!("{} is not a completed run directory: {e}", dir.display()))
    })?;
    let record: RunRecord =
        serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", run_path.display())))?;
    for m in &record.summary.models {
        for f in &m.folds {
            let name = format!("model_{}_{}.json", m.name, f.fold);
            if !dir.join(&name).is_file() {
                return Err(Error::InvalidInput(format!("incomplete run directory: {name} is missing")).into());
            }
        }
    }
    let stored = to_json(&record.summary)?;
    let derived = to_json(&record.summary.recompute()?)?;
    if stored != derived {
        return Err(CliError::Invariant(format!(
            "{} does not match the values re-derived from its trial scores",
            run_path.display()
        )));
    }
    for (name, contents) in report::render(&record.summary)? {
        write_file(dir, &name, &contents)?;
    }
    Ok(record)
}

pub fn synth(spec: &SynthSpec, out: &Path) -> CliResult<FeatureArtifact> {
    let art = synth::generate(spec)?;
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    artifact::write_atomic(&out.join("features.qkft"), &artifact::encode(&art))?;
    artifact::write_atomic(&out.join("manifest.csv"), synth::manifest(&art.set).as_bytes())?;
    Ok(art)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheAction {
    List,
    Verify,
    Clear,
}

/// Cache directory from `--dir`, or from the config (honouring the
/// environment override and `--out`).
pub fn cache_dir(dir: Option<&Path>, config: Option<&Path>, out: Option<&Path>) -> CliResult<PathBuf> {
    match (dir, config) {
        (Some(d), _) => Ok(d.to_path_buf()),
        (None, Some(c)) => {
            let cfg = config::load(c)?;
            let out = cfg.output_dir(out)?;
            Ok(cfg.cache_dir(&out))
        }
        (None, None) => Err(Error::InvalidConfig("cache needs --dir or --config".into()).into()),
    }
}

/// Returns the lines to print; a corrupt entry under `verify` is an error.
pub fn cache(dir: &Path, action: CacheAction) -> CliResult<Vec<String>> {
    let cache = GramCache::open(dir)?;
    let name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    match action {
        CacheAction::List => {
            let entries = cache.entries()?;
            let total: u64 = entries.iter().map(|e| e.bytes).sum();
            let mut lines: Vec<String> = entries.iter().map(|e| format!("{}  {} bytes", name(&e.path), e.bytes)).collect();
            lines.push(format!("{} entries, {total} bytes", entries.len()));
            Ok(lines)
        }
        CacheAction::Verify => {
            let results = cache.verify()?;
            let bad = results.iter().filter(|(_, r)| r.is_err()).count();
            let lines: Vec<String> = results
                .iter()
                .map(|(p, r)| match r {
                    Ok(()) => format!("ok       {}", name(p)),
                    Err(e) => format!("corrupt  {}: {e}", name(p)),
                })
                .collect();
            if bad > 0 {
                return Err(Error::Cache(format!("{bad} corrupt entries:\n{}", lines.join("\n"))).into());
            }
            let mut lines = lines;
            lines.push(format!("{} entries verified", results.len()));
            Ok(lines)
        }
        CacheAction::Clear => Ok(vec![format!("removed {} entries", cache.clear()?)]),
    }
}
