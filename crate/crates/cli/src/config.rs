//! TOML run configuration, its canonical digest and translation into the
//! protocol configuration.
//!
//! ```toml
//! output_dir = "results"          # optional; --out overrides
//! cache_dir = "gram_cache"        # optional; QKSWAP_CACHE_DIR overrides
//! jobs = 4                        # optional; default = available cores
//!
//! [dataset]
//! name = "ADD23"
//! manifest = "add23.csv"          # `relative/path.wav,label` per line
//! audio_root = "audio"
//! features = "add23.qkft"         # feature artifact (written by `features`)
//!
//! [features]                      # extraction and fold-level PCA
//! pca_dim = 2
//! pca_seed = 0
//!
//! [folds]
//! k = 5
//! seed = 0
//!
//! [models.svm_rbf]
//! kernel = "rbf"
//! gamma = [0.01, 0.1, 1, 10]
//! c = [0.1, 1, 10, 100]
//!
//! [models.qsvm_zz2]
//! kernel = "quantum"
//! family = "zz"
//! qubits = 2
//! reps = 2
//! entanglement = "linear"
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qkswap_core::audio_features::ExtractionParams;
use qkswap_core::digest::{Digest, Hasher};
use qkswap_core::evaluation::{ModelConfig, Preprocess, ProtocolConfig};
use qkswap_core::kernels::{KernelSpec, DEFAULT_PSD_TOL};
use qkswap_core::quantum_kernel::{Entanglement, FeatureMapFamily, FeatureMapSpec};
use qkswap_core::{Error, Result};
use serde::{Deserialize, Serialize};

pub const CACHE_DIR_ENV: &str = "QKSWAP_CACHE_DIR";

const DEFAULT_C_GRID: [f64; 4] = [0.1, 1.0, 10.0, 100.0];
const DEFAULT_GAMMA_GRID: [f64; 4] = [0.01, 0.1, 1.0, 10.0];
const DEFAULT_DEGREES: [u32; 2] = [2, 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    pub manifest: Option<PathBuf>,
    pub audio_root: Option<PathBuf>,
    pub features: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeaturesConfig {
    pub sample_rate: u32,
    pub window: usize,
    pub hop: usize,
    pub n_mels: usize,
    pub epsilon: f64,
    pub duration_secs: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub pca_dim: usize,
    pub pca_seed: u64,
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        let p = ExtractionParams::default();
        FeaturesConfig {
            sample_rate: p.sample_rate,
            window: p.window,
            hop: p.hop,
            n_mels: p.n_mels,
            epsilon: p.epsilon,
            duration_secs: p.duration_secs,
            f_min: p.f_min,
            f_max: p.f_max,
            pca_dim: 2,
            pca_seed: 0,
        }
    }
}

impl FeaturesConfig {
    pub fn extraction(&self) -> ExtractionParams {
        ExtractionParams {
            sample_rate: self.sample_rate,
            window: self.window,
            hop: self.hop,
            n_mels: self.n_mels,
            epsilon: self.epsilon,
            duration_secs: self.duration_secs,
            f_min: self.f_min,
            f_max: self.f_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FoldsConfig {
    pub k: usize,
    pub seed: u64,
    pub inner_k: usize,
}

impl Default for FoldsConfig {
    fn default() -> Self {
        FoldsConfig { k: 5, seed: 0, inner_k: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    pub robustness_lambda: f64,
    pub psd_tol: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            robustness_lambda: 1.0,
            psd_tol: DEFAULT_PSD_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub kernel: String,
    pub gamma: Option<OneOrMany<f64>>,
    pub degree: Option<OneOrMany<u32>>,
    pub coef0: Option<f64>,
    pub family: Option<String>,
    pub qubits: Option<usize>,
    pub reps: Option<usize>,
    pub entanglement: Option<String>,
    pub paulis: Option<Vec<String>>,
    pub c: Option<OneOrMany<f64>>,
    pub kkt_tol: Option<f64>,
    pub max_passes: Option<usize>,
    /// Per-model preprocessing overrides. Any difference from the shared
    /// values violates the kernel-swap contract and aborts the run.
    pub pca_seed: Option<u64>,
    pub pca_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub features: FeaturesConfig,
    #[serde(default)]
    pub folds: FoldsConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    pub models: BTreeMap<String, ModelEntry>,
    pub jobs: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_tile")]
    pub tile: usize,
}

fn default_tile() -> usize {
    32
}

/// A parsed config plus where it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub digest: Digest,
    pub canonical: Vec<String>,
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&text, base_dir)
}

pub fn parse(text: &str, base_dir: PathBuf) -> Result<LoadedConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::InvalidConfig(e.message().to_string()))?;
    let canonical = canonical_lines(&table);
    let config: RunConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
    let mut h = Hasher::new();
    h.str("run-config");
    for line in &canonical {
        h.str(line);
    }
    Ok(LoadedConfig {
        config,
        base_dir,
        digest: h.finish(),
        canonical,
    })
}

/// `key.path = value` lines, sorted, with numbers normalised so `1` and
/// `1.0` encode identically.
pub fn canonical_lines(table: &toml::Table) -> Vec<String> {
    let mut out = Vec::new();
    for (k, v) in table {
        flatten(k, v, &mut out);
    }
    out.sort();
    out
}

fn number(x: f64) -> String {
    if x.is_finite() && x == x.trunc() && x.abs() < 9.0e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

fn flatten(path: &str, v: &toml::Value, out: &mut Vec<String>) {
    use toml::Value;
    match v {
        Value::Table(t) if t.is_empty() => out.push(format!("{path} = {{}}")),
        Value::Table(t) => {
            for (k, v) in t {
                flatten(&format!("{path}.{k}"), v, out);
            }
        }
        Value::Array(a) if a.is_empty() => out.push(format!("{path} = []")),
        Value::Array(a) => {
            for (i, v) in a.iter().enumerate() {
                flatten(&format!("{path}[{i}]"), v, out);
            }
        }
        Value::Integer(i) if i.unsigned_abs() < 9_000_000_000_000_000 => out.push(format!("{path} = {}", number(*i as f64))),
        Value::Integer(i) => out.push(format!("{path} = {i}")),
        Value::Float(f) => out.push(format!("{path} = {}", number(*f))),
        Value::String(s) => out.push(format!("{path} = {s:?}")),
        Value::Boolean(b) => out.push(format!("{path} = {b}")),
        Value::Datetime(d) => out.push(format!("{path} = {d}")),
    }
}

impl LoadedConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self, cli_override: Option<&Path>) -> Result<PathBuf> {
        match (cli_override, &self.config.output_dir) {
            (Some(p), _) => Ok(p.to_path_buf()),
            (None, Some(p)) => Ok(self.resolve(p)),
            (None, None) => Err(Error::InvalidConfig("no output directory: set output_dir or pass --out".into())),
        }
    }

    /// Environment override, then the config key, then `<output>/gram_cache`.
    pub fn cache_dir(&self, output_dir: &Path) -> PathBuf {
        if let Some(dir) = std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(dir);
        }
        match &self.config.cache_dir {
            Some(p) => self.resolve(p),
            None => output_dir.join("gram_cache"),
        }
    }

    /// `--seed` replaces the fold seed and the shared PCA seed.
    pub fn apply_seed(&mut self, seed: u64) {
        self.config.folds.seed = seed;
        self.config.features.pca_seed = seed;
    }
}

fn parse_entanglement(s: Option<&str>) -> Result<Entanglement> {
    match s.unwrap_or("linear") {
        "linear" => Ok(Entanglement::Linear),
        "full" => Ok(Entanglement::Full),
        other => Err(Error::InvalidConfig(format!("unknown entanglement {other:?}"))),
    }
}

fn parse_family(s: Option<&str>) -> Result<FeatureMapFamily> {
    match s.unwrap_or("zz").to_ascii_lowercase().as_str() {
        "z" => Ok(FeatureMapFamily::Z),
        "zz" => Ok(FeatureMapFamily::Zz),
        "pauli" => Ok(FeatureMapFamily::Pauli),
        other => Err(Error::InvalidConfig(format!("unknown feature-map family {other:?}"))),
    }
}

impl ModelEntry {
    fn forbid(&self, name: &str, kernel: &str, fields: &[(&str, bool)]) -> Result<()> {
        for (field, set) in fields {
            if *set {
                return Err(Error::InvalidConfig(format!("model {name}: `{field}` does not apply to {kernel} kernels")));
            }
        }
        Ok(())
    }

    pub fn kernels(&self, name: &str, pca_dim: usize) -> Result<Vec<KernelSpec>> {
        let quantum_fields = [
            ("family", self.family.is_some()),
            ("qubits", self.qubits.is_some()),
            ("reps", self.reps.is_some()),
            ("entanglement", self.entanglement.is_some()),
            ("paulis", self.paulis.is_some()),
        ];
        let specs = match self.kernel.as_str() {
            "linear" => {
                self.forbid(name, "linear", &[("gamma", self.gamma.is_some()), ("degree", self.degree.is_some()), ("coef0", self.coef0.is_some())])?;
                self.forbid(name, "linear", &quantum_fields)?;
                vec![KernelSpec::Linear]
            }
            "rbf" => {
                self.forbid(name, "rbf", &[("degree", self.degree.is_some()), ("coef0", self.coef0.is_some())])?;
                self.forbid(name, "rbf", &quantum_fields)?;
                let grid = self.gamma.as_ref().map(OneOrMany::to_vec).unwrap_or_else(|| DEFAULT_GAMMA_GRID.to_vec());
                grid.into_iter().map(|gamma| KernelSpec::Rbf { gamma }).collect()
            }
            "polynomial" | "poly" => {
                self.forbid(name, "polynomial", &[("gamma", self.gamma.is_some())])?;
                self.forbid(name, "polynomial", &quantum_fields)?;
                let coef0 = self.coef0.unwrap_or(1.0);
                let grid = self.degree.as_ref().map(OneOrMany::to_vec).unwrap_or_else(|| DEFAULT_DEGREES.to_vec());
                grid.into_iter().map(|degree| KernelSpec::Polynomial { degree, coef0 }).collect()
            }
            "quantum" => {
                self.forbid(name, "quantum", &[("gamma", self.gamma.is_some()), ("degree", self.degree.is_some()), ("coef0", self.coef0.is_some())])?;
                let family = parse_family(self.family.as_deref())?;
                let ent = parse_entanglement(self.entanglement.as_deref())?;
                let n = self.qubits.unwrap_or(pca_dim);
                let reps = self.reps.unwrap_or(2);
                let feature_map = match family {
                    FeatureMapFamily::Z => {
                        let mut s = FeatureMapSpec::z(n, reps);
                        s.entanglement = ent;
                        s
                    }
                    FeatureMapFamily::Zz => FeatureMapSpec::zz(n, reps, ent),
                    FeatureMapFamily::Pauli => {
                        let labels: Vec<&str> = self.paulis.iter().flatten().map(String::as_str).collect();
                        FeatureMapSpec::pauli(n, reps, ent, &labels)?
                    }
                };
                if family != FeatureMapFamily::Pauli && self.paulis.is_some() {
                    return Err(Error::InvalidConfig(format!("model {name}: `paulis` needs family = \"pauli\"")));
                }
                vec![KernelSpec::Quantum { feature_map }]
            }
            other => return Err(Error::InvalidConfig(format!("model {name}: unknown kernel {other:?}"))),
        };
        for s in &specs {
            s.validate()?;
        }
        Ok(specs)
    }
}

impl RunConfig {
    pub fn model_configs(&self, only: Option<&[String]>) -> Result<Vec<ModelConfig>> {
        let shared = Preprocess {
            pca_dim: self.features.pca_dim,
            seed: self.features.pca_seed,
        };
        if let Some(names) = only {
            if let Some(missing) = names.iter().find(|n| !self.models.contains_key(*n)) {
                return Err(Error::InvalidConfig(format!("--models names unknown model {missing:?}")));
            }
        }
        let mut out = Vec::new();
        for (name, m) in &self.models {
            if name.is_empty() || !name.chars().all(|ch| ch.is_ascii_alphanumeric() || "_-.".contains(ch)) {
                return Err(Error::InvalidConfig(format!("model name {name:?} may only use letters, digits, `_`, `-` and `.`")));
            }
            if only.is_some_and(|names| !names.contains(name)) {
                continue;
            }
            let preprocess = Preprocess {
                pca_dim: m.pca_dim.unwrap_or(shared.pca_dim),
                seed: m.pca_seed.unwrap_or(shared.seed),
            };
            out.push(ModelConfig {
                name: name.clone(),
                kernels: m.kernels(name, preprocess.pca_dim)?,
                c_grid: m.c.as_ref().map(OneOrMany::to_vec).unwrap_or_else(|| DEFAULT_C_GRID.to_vec()),
                kkt_tol: m.kkt_tol.unwrap_or(1e-3),
                max_passes: m.max_passes.unwrap_or(1000),
                preprocess,
            });
        }
        Ok(out)
    }

    pub fn protocol(&self, only: Option<&[String]>) -> Result<ProtocolConfig> {
        let cfg = ProtocolConfig {
            dataset: self.dataset.name.clone(),
            k: self.folds.k,
            fold_seed: self.folds.seed,
            inner_k: self.folds.inner_k,
            tile: self.tile,
            psd_tol: self.diagnostics.psd_tol,
            robustness_lambda: self.diagnostics.robustness_lambda,
            models: self.model_configs(only)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
