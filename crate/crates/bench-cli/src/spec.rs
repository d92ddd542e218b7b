//! Experiment descriptions: flag set, config-file merge, and problem
//! source strings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use poem_core::problems::{
    load_dataset, make_hard_instance, make_hinge_svm, make_synthetic_known_optimum,
    synthetic_classification, HardInstance, HardInstanceKind, HingeSvm, StochasticProblem,
    SyntheticNormProblem,
};

use crate::BenchError;

pub const DEFAULT_GRID: &[f64] = &[
    1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Poem,
    PoemUnbounded,
    Tpbco,
    Tpge,
    Rsnso,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Self, BenchError> {
        match s {
            "poem" => Ok(Algorithm::Poem),
            "poem-unbounded" => Ok(Algorithm::PoemUnbounded),
            "tpbco" => Ok(Algorithm::Tpbco),
            "tpge" => Ok(Algorithm::Tpge),
            "rsnso" => Ok(Algorithm::Rsnso),
            other => Err(BenchError::spec(format!("unknown algorithm `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Poem => "poem",
            Algorithm::PoemUnbounded => "poem-unbounded",
            Algorithm::Tpbco => "tpbco",
            Algorithm::Tpge => "tpge",
            Algorithm::Rsnso => "rsnso",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AveragingMode {
    Uniform,
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpgeMu {
    Coarse,
    Fine,
}

/// A fully resolved experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub source: String,
    pub radius: f64,
    pub algorithm: Algorithm,
    pub iters: u64,
    pub seeds: Vec<u64>,
    pub r_eps: f64,
    pub lbar: Option<f64>,
    pub delta: f64,
    pub s0: f64,
    /// Explicit parameter grid; each command picks its own default when
    /// unset (single point for `run`, the published decade grid for
    /// `sweep`, a contrast pair for `stepsize-trace`).
    pub grid: Option<Vec<f64>>,
    pub stride: u64,
    pub out: PathBuf,
    pub tpge_mu: TpgeMu,
    pub averaging: AveragingMode,
}

/// Raw option bag prior to precedence resolution; every field optional so
/// command line > config file > default can be applied uniformly.
#[derive(Debug, Clone, Default)]
pub struct SpecOverlay {
    pub dataset: Option<String>,
    pub radius: Option<f64>,
    pub algo: Option<String>,
    pub iters: Option<u64>,
    pub seeds: Option<String>,
    pub r_eps: Option<f64>,
    pub lbar: Option<f64>,
    pub delta: Option<f64>,
    pub s0: Option<f64>,
    pub grid: Option<String>,
    pub stride: Option<u64>,
    pub out: Option<PathBuf>,
    pub tpge_mu: Option<String>,
    pub averaging: Option<String>,
}

impl SpecOverlay {
    /// Fills unset fields from `fallback`.
    pub fn or(mut self, fallback: SpecOverlay) -> SpecOverlay {
        self.dataset = self.dataset.or(fallback.dataset);
        self.radius = self.radius.or(fallback.radius);
        self.algo = self.algo.or(fallback.algo);
        self.iters = self.iters.or(fallback.iters);
        self.seeds = self.seeds.or(fallback.seeds);
        self.r_eps = self.r_eps.or(fallback.r_eps);
        self.lbar = self.lbar.or(fallback.lbar);
        self.delta = self.delta.or(fallback.delta);
        self.s0 = self.s0.or(fallback.s0);
        self.grid = self.grid.or(fallback.grid);
        self.stride = self.stride.or(fallback.stride);
        self.out = self.out.or(fallback.out);
        self.tpge_mu = self.tpge_mu.or(fallback.tpge_mu);
        self.averaging = self.averaging.or(fallback.averaging);
        self
    }

    pub fn resolve(self) -> Result<ExperimentSpec, BenchError> {
        let source = self
            .dataset
            .ok_or_else(|| BenchError::spec("missing problem source (--dataset)"))?;
        let seeds = parse_seed_list(self.seeds.as_deref().unwrap_or("0,1,2,3,4"))?;
        if seeds.is_empty() {
            return Err(BenchError::spec("seed list must be nonempty"));
        }
        let iters = self.iters.unwrap_or(10_000);
        if iters == 0 {
            return Err(BenchError::spec("iteration budget must be at least 1"));
        }
        let stride = self.stride.unwrap_or(1000);
        if stride == 0 {
            return Err(BenchError::spec("stride must be at least 1"));
        }
        let grid = match self.grid.as_deref() {
            Some(s) => {
                let values = parse_float_list(s)?;
                if values.is_empty() {
                    return Err(BenchError::spec("grid must be nonempty"));
                }
                Some(values)
            }
            None => None,
        };
        let algorithm = Algorithm::parse(self.algo.as_deref().unwrap_or("poem"))?;
        let tpge_mu = match self.tpge_mu.as_deref().unwrap_or("coarse") {
            "coarse" => TpgeMu::Coarse,
            "fine" => TpgeMu::Fine,
            other => {
                return Err(BenchError::spec(format!(
                    "tpge_mu must be `coarse` or `fine`, got `{other}`"
                )))
            }
        };
        let averaging = match self.averaging.as_deref().unwrap_or("uniform") {
            "uniform" => AveragingMode::Uniform,
            "last" => AveragingMode::Last,
            other => {
                return Err(BenchError::spec(format!(
                    "averaging must be `uniform` or `last`, got `{other}`"
                )))
            }
        };
        let r_eps = self.r_eps.unwrap_or(1e-2);
        if r_eps.is_nan() || r_eps <= 0.0 {
            return Err(BenchError::spec("r_eps must be positive"));
        }
        let delta = self.delta.unwrap_or(0.1);
        if delta.is_nan() || delta <= 0.0 || delta >= 1.0 {
            return Err(BenchError::spec("delta must lie in (0, 1)"));
        }
        let radius = self.radius.unwrap_or(1.0);
        if radius.is_nan() || radius <= 0.0 {
            return Err(BenchError::spec("radius must be positive"));
        }
        let s0 = self.s0.unwrap_or(1.0);
        if s0.is_nan() || s0 <= 0.0 {
            return Err(BenchError::spec("s0 must be positive"));
        }
        Ok(ExperimentSpec {
            source,
            radius,
            algorithm,
            iters,
            seeds,
            r_eps,
            lbar: self.lbar,
            delta,
            s0,
            grid,
            stride,
            out: self.out.unwrap_or_else(|| PathBuf::from("out")),
            tpge_mu,
            averaging,
        })
    }
}

/// Parses a `key = value` config file; keys mirror the long flag names.
pub fn load_config(path: &Path) -> Result<SpecOverlay, BenchError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| BenchError::io(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            BenchError::spec(format!(
                "config line {} is not `key = value`: `{line}`",
                lineno + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    let mut overlay = SpecOverlay::default();
    for (key, value) in map {
        match key.as_str() {
            "dataset" => overlay.dataset = Some(value),
            "radius" => overlay.radius = Some(parse_num(&key, &value)?),
            "algo" => overlay.algo = Some(value),
            "iters" | "T" => overlay.iters = Some(parse_num(&key, &value)?),
            "seeds" => overlay.seeds = Some(value),
            "r_eps" => overlay.r_eps = Some(parse_num(&key, &value)?),
            "lbar" => overlay.lbar = Some(parse_num(&key, &value)?),
            "delta" => overlay.delta = Some(parse_num(&key, &value)?),
            "s0" => overlay.s0 = Some(parse_num(&key, &value)?),
            "grid" => overlay.grid = Some(value),
            "stride" => overlay.stride = Some(parse_num(&key, &value)?),
            "out" => overlay.out = Some(PathBuf::from(value)),
            "tpge_mu" => overlay.tpge_mu = Some(value),
            "averaging" => overlay.averaging = Some(value),
            other => {
                return Err(BenchError::spec(format!("unknown config key `{other}`")));
            }
        }
    }
    Ok(overlay)
}

fn parse_num<N: std::str::FromStr>(key: &str, value: &str) -> Result<N, BenchError> {
    value
        .parse()
        .map_err(|_| BenchError::spec(format!("config key `{key}` has bad value `{value}`")))
}

pub fn parse_seed_list(s: &str) -> Result<Vec<u64>, BenchError> {
    s.split(',')
        .filter(|tok| !tok.trim().is_empty())
        .map(|tok| {
            tok.trim()
                .parse::<u64>()
                .map_err(|_| BenchError::spec(format!("bad seed `{tok}`")))
        })
        .collect()
}

pub fn parse_float_list(s: &str) -> Result<Vec<f64>, BenchError> {
    s.split(',')
        .filter(|tok| !tok.trim().is_empty())
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| BenchError::spec(format!("bad number `{tok}`")))
        })
        .collect()
}

/// A constructed problem, kept as the concrete type behind one enum so
/// runs can borrow it as `&dyn StochasticProblem`.
#[derive(Debug)]
pub enum ProblemInstance {
    Hinge(HingeSvm),
    Synthetic(SyntheticNormProblem),
    Hard(HardInstance),
}

impl ProblemInstance {
    pub fn as_dyn(&self) -> &dyn StochasticProblem {
        match self {
            ProblemInstance::Hinge(p) => p,
            ProblemInstance::Synthetic(p) => p,
            ProblemInstance::Hard(p) => p,
        }
    }
}

/// Builds the problem named by a source string:
///
/// * a path to a LIBSVM file (`.gz` accepted) for the hinge objective,
/// * `gen:n=8124,d=112,nnz=22,seed=1` for a generated hinge dataset,
/// * `synthetic:d=10,noise=0.5,seed=7` for the known-optimum norm
///   objective,
/// * `hard:f1,L=1,T=100,d=5`
///   (or `hard:f2,...`) for the adversarial pair.
pub fn build_problem(spec: &ExperimentSpec) -> Result<ProblemInstance, BenchError> {
    let source = spec.source.as_str();
    if let Some(rest) = source.strip_prefix("synthetic:") {
        let kv = parse_kv(rest)?;
        let d = get_num::<usize>(&kv, "d", "synthetic")?;
        let noise = get_num_or(&kv, "noise", 0.5)?;
        let seed = get_num_or(&kv, "seed", 0u64)?;
        return Ok(ProblemInstance::Synthetic(make_synthetic_known_optimum(
            d, noise, seed,
        )));
    }
    if let Some(rest) = source.strip_prefix("hard:") {
        let mut parts = rest.splitn(2, ',');
        let kind = match parts.next().unwrap_or("") {
            "f1" => HardInstanceKind::F1,
            "f2" => HardInstanceKind::F2,
            other => {
                return Err(BenchError::spec(format!(
                    "hard instance kind must be f1 or f2, got `{other}`"
                )))
            }
        };
        let kv = parse_kv(parts.next().unwrap_or(""))?;
        let l = get_num_or(&kv, "L", 1.0f64)?;
        let t = get_num_or(&kv, "T", spec.iters)?;
        let d = get_num_or(&kv, "d", 5usize)?;
        let p = make_hard_instance(kind, l, t, d)
            .map_err(|e| BenchError::spec(e.to_string()))?;
        return Ok(ProblemInstance::Hard(p));
    }
    let dataset = if let Some(rest) = source.strip_prefix("gen:") {
        let kv = parse_kv(rest)?;
        let n = get_num_or(&kv, "n", 8124usize)?;
        let d = get_num_or(&kv, "d", 112usize)?;
        let nnz = get_num_or(&kv, "nnz", 22usize)?;
        let seed = get_num_or(&kv, "seed", 1u64)?;
        synthetic_classification(n, d, nnz, seed)
    } else {
        load_dataset(Path::new(source)).map_err(|e| BenchError::io(e.to_string()))?
    };
    let p = make_hinge_svm(dataset, spec.radius).map_err(|e| BenchError::spec(e.to_string()))?;
    Ok(ProblemInstance::Hinge(p))
}

fn parse_kv(s: &str) -> Result<BTreeMap<String, String>, BenchError> {
    let mut map = BTreeMap::new();
    for tok in s.split(',').filter(|t| !t.trim().is_empty()) {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| BenchError::spec(format!("expected key=value, got `{tok}`")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn get_num<N: std::str::FromStr>(
    kv: &BTreeMap<String, String>,
    key: &str,
    ctx: &str,
) -> Result<N, BenchError> {
    let raw = kv
        .get(key)
        .ok_or_else(|| BenchError::spec(format!("{ctx} source needs `{key}=...`")))?;
    raw.parse()
        .map_err(|_| BenchError::spec(format!("bad value for `{key}`: `{raw}`")))
}

fn get_num_or<N: std::str::FromStr>(
    kv: &BTreeMap<String, String>,
    key: &str,
    default: N,
) -> Result<N, BenchError> {
    match kv.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .parse()
            .map_err(|_| BenchError::spec(format!("bad value for `{key}`: `{raw}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_overlay() -> SpecOverlay {
        SpecOverlay {
            dataset: Some("synthetic:d=4,noise=0.1,seed=1".into()),
            ..SpecOverlay::default()
        }
    }

    #[test]
    fn defaults_resolve() {
        let spec = minimal_overlay().resolve().unwrap();
        assert_eq!(spec.algorithm, Algorithm::Poem);
        assert_eq!(spec.seeds, vec![0, 1, 2, 3, 4]);
        assert_eq!(spec.stride, 1000);
        assert_eq!(spec.grid, None);
        assert_eq!(spec.radius, 1.0);
    }

    #[test]
    fn cli_overrides_config() {
        let cli = SpecOverlay {
            r_eps: Some(0.5),
            ..minimal_overlay()
        };
        let config = SpecOverlay {
            r_eps: Some(0.125),
            stride: Some(10),
            ..SpecOverlay::default()
        };
        let spec = cli.or(config).resolve().unwrap();
        assert_eq!(spec.r_eps, 0.5); // command line wins
        assert_eq!(spec.stride, 10); // config fills the gap
    }

    #[test]
    fn rejects_bad_fields() {
        let mut o = minimal_overlay();
        o.algo = Some("sgd".into());
        assert!(o.resolve().is_err());

        let mut o = minimal_overlay();
        o.seeds = Some("1,x".into());
        assert!(o.resolve().is_err());

        let mut o = minimal_overlay();
        o.iters = Some(0);
        assert!(o.resolve().is_err());

        let mut o = minimal_overlay();
        o.delta = Some(1.5);
        assert!(o.resolve().is_err());
    }

    #[test]
    fn builds_each_source_kind() {
        let mut spec = minimal_overlay().resolve().unwrap();
        assert!(matches!(
            build_problem(&spec).unwrap(),
            ProblemInstance::Synthetic(_)
        ));
        spec.source = "hard:f2,L=1,T=50,d=3".into();
        assert!(matches!(
            build_problem(&spec).unwrap(),
            ProblemInstance::Hard(_)
        ));
        spec.source = "gen:n=50,d=10,nnz=3,seed=2".into();
        assert!(matches!(
            build_problem(&spec).unwrap(),
            ProblemInstance::Hinge(_)
        ));
        spec.source = "/no/such/file.libsvm".into();
        let err = build_problem(&spec).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn config_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bench.conf");
        std::fs::write(
            &path,
            "# comment\ndataset = gen:n=10,d=4,nnz=2,seed=3\nалго = poem\n",
        )
        .unwrap();
        // unknown key (typo) is an error
        assert!(load_config(&path).is_err());
        std::fs::write(
            &path,
            "dataset = gen:n=10,d=4,nnz=2,seed=3\nr_eps = 0.25\nstride = 7\n",
        )
        .unwrap();
        let overlay = load_config(&path).unwrap();
        assert_eq!(overlay.r_eps, Some(0.25));
        assert_eq!(overlay.stride, Some(7));
    }
}
