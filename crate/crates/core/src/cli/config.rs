//! Experiment manifests.
//!
//! A manifest is a JSON object with a required `schema_version` and a list
//! of instances, each naming a space (or grid) and a weight source. See the
//! repository README for the full schema.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use super::CliError;
use crate::constants::{CubeFamily, Weight};
use crate::corpus::{self, Masses};
use crate::space::{Ball, DistanceMatrix, DyadicGrid, QuasiMetricSpace};

pub const SCHEMA_VERSION: u64 = 1;

/// Every check the verify command knows, in report order.
pub const CHECK_NAMES: [&str; 9] = [
    "rhi-maximal-dyadic",
    "sharp-rhi-cubes",
    "rhi-maximal-local",
    "weak-rhi",
    "open-property",
    "weak-type",
    "buckley",
    "cz-postconditions",
    "localization",
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CzSettings {
    /// Selection scale; defaults to `2κ`.
    #[serde(default)]
    pub n_scale: Option<f64>,
    /// `λ` as multiples of the threshold `Γ f_{B̂₀}`.
    #[serde(default = "default_lambda_factors")]
    pub lambda_factors: Vec<f64>,
    /// Basis parameter `δ`; defaults to the instance's `delta`.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Base balls; defaults to one ball per decile center, at the largest
    /// canonical radius of that center.
    #[serde(default)]
    pub bases: Option<Vec<BallSpec>>,
}

impl Default for CzSettings {
    fn default() -> Self {
        Self {
            n_scale: None,
            delta: None,
            lambda_factors: default_lambda_factors(),
            bases: None,
        }
    }
}

fn default_lambda_factors() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: usize,
    pub radius: f64,
}

/// Weight sources, tagged by `kind`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant {
        value: f64,
    },
    Values {
        values: Vec<f64>,
    },
    File {
        path: PathBuf,
    },
    Power {
        alpha: f64,
    },
    Cascade {
        bound: f64,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        seeds: Option<Vec<u64>>,
    },
    Spike {
        spikes: usize,
        height: f64,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        seeds: Option<Vec<u64>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    id: String,
    space: Value,
    weight: WeightSpec,
    #[serde(default)]
    p: Option<Vec<f64>>,
    #[serde(default)]
    family: Option<CubeFamily>,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default)]
    cz: Option<CzSettings>,
    #[serde(default)]
    checks: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// A grid source (`{"grid": …}`).
    pub space: Value,
    /// `power` (parameter `α`) or `cascade` (parameter `bound`).
    pub family: String,
    pub values: Vec<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "schema_version")]
    _schema_version: u64,
    #[serde(default)]
    p: Option<Vec<f64>>,
    #[serde(default)]
    checks: Option<Vec<String>>,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default)]
    cz: Option<CzSettings>,
    #[serde(default)]
    instances: Vec<RawInstance>,
    #[serde(default)]
    sweep: Option<SweepSpec>,
}

/// A space or grid built from its source.
#[derive(Debug, Clone)]
pub enum Model {
    Space(QuasiMetricSpace),
    Grid(DyadicGrid, CubeFamily),
}

/// One (model, weight) pair ready to run.
#[derive(Debug, Clone)]
pub struct Instance {
    pub id: String,
    pub model: Model,
    pub weight: Weight,
    pub p: Vec<f64>,
    pub delta: f64,
    pub cz: CzSettings,
    /// Checks run on this instance.
    pub checks: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub instances: Vec<Instance>,
    pub sweep: Option<SweepSpec>,
    pub base_dir: PathBuf,
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Reads, validates and ingests a manifest. `seed` replaces every seed in
/// the manifest.
pub fn load(path: &Path, seed: Option<u64>) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&text, &base_dir, seed).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str, base_dir: &Path, seed: Option<u64>) -> Result<Config, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
    match value.get("schema_version") {
        None => return Err(cfg_err("missing field `schema_version`")),
        Some(v) if v.as_u64() != Some(SCHEMA_VERSION) => {
            return Err(cfg_err(format!(
                "schema_version: unsupported value {v}, expected {SCHEMA_VERSION}"
            )))
        }
        _ => {}
    }
    // Re-parse from text so that serde errors carry line and column.
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| cfg_err(e.to_string()))?;

    let checks = check_list(raw.checks, "checks")?;
    let default_p = raw.p.unwrap_or_else(|| vec![2.0]);
    let default_delta = raw.delta.unwrap_or(1.0);
    let default_cz = raw.cz.unwrap_or_default();

    let mut instances = Vec::new();
    for (i, inst) in raw.instances.into_iter().enumerate() {
        let at = format!("instances[{i}]");
        let p = inst.p.unwrap_or_else(|| default_p.clone());
        if let Some(bad) = p.iter().find(|&&p| !(p.is_finite() && p > 1.0)) {
            return Err(cfg_err(format!("{at}.p: {bad} is not in (1, ∞)")));
        }
        let delta = inst.delta.unwrap_or(default_delta);
        if !(delta.is_finite() && delta > 0.0) {
            return Err(cfg_err(format!("{at}.delta: {delta} must be positive")));
        }
        let inst_checks = match inst.checks {
            None => checks.clone(),
            some => check_list(some, &format!("{at}.checks"))?,
        };
        let model = build_model(&inst.space, inst.family, base_dir, seed).map_err(|e| prefix(&format!("{at}.space"), e))?;
        for (suffix, spec) in expand_seeds(&inst.weight, seed) {
            let weight = build_weight(&spec, &model, base_dir).map_err(|e| prefix(&format!("{at}.weight"), e))?;
            instances.push(Instance {
                id: format!("{}{suffix}", inst.id),
                model: model.clone(),
                weight,
                p: p.clone(),
                delta,
                cz: inst.cz.clone().unwrap_or_else(|| default_cz.clone()),
                checks: inst_checks.clone(),
            });
        }
    }
    let mut seen = std::collections::HashSet::new();
    for inst in &instances {
        if !seen.insert(inst.id.as_str()) {
            return Err(cfg_err(format!("duplicate instance id `{}`", inst.id)));
        }
    }
    let sweep = raw.sweep.map(|mut s| {
        if seed.is_some() {
            s.seed = seed;
        }
        s
    });
    Ok(Config {
        instances,
        sweep,
        base_dir: base_dir.to_path_buf(),
    })
}

fn check_list(list: Option<Vec<String>>, at: &str) -> Result<Vec<String>, CliError> {
    let Some(list) = list else {
        return Ok(CHECK_NAMES.iter().map(|s| s.to_string()).collect());
    };
    for (i, name) in list.iter().enumerate() {
        if !CHECK_NAMES.contains(&name.as_str()) {
            return Err(cfg_err(format!(
                "{at}[{i}]: unknown check `{name}`; known checks: {}",
                CHECK_NAMES.join(", ")
            )));
        }
    }
    Ok(list)
}

fn prefix(at: &str, e: CliError) -> CliError {
    match e {
        CliError::Config(m) => CliError::Config(format!("{at}: {m}")),
        CliError::Ingest(m) => CliError::Ingest(format!("{at}: {m}")),
        other => other,
    }
}

fn expand_seeds(spec: &WeightSpec, over: Option<u64>) -> Vec<(String, WeightSpec)> {
    let seeds = |seed: &Option<u64>, seeds: &Option<Vec<u64>>| -> Option<Vec<u64>> {
        match (over, seeds) {
            (Some(s), _) => Some(vec![s]),
            (None, Some(list)) => Some(list.clone()),
            (None, None) => seed.map(|s| vec![s]),
        }
    };
    match spec {
        WeightSpec::Cascade { bound, seed, seeds: list } => match (seeds(seed, list), list) {
            (Some(all), Some(_)) => all
                .into_iter()
                .map(|s| {
                    (format!("-s{s}"), WeightSpec::Cascade { bound: *bound, seed: Some(s), seeds: None })
                })
                .collect(),
            (all, _) => vec![(
                String::new(),
                WeightSpec::Cascade {
                    bound: *bound,
                    seed: all.map(|v| v[0]).or(Some(0)),
                    seeds: None,
                },
            )],
        },
        WeightSpec::Spike { spikes, height, seed, seeds: list } => match (seeds(seed, list), list) {
            (Some(all), Some(_)) => all
                .into_iter()
                .map(|s| {
                    (
                        format!("-s{s}"),
                        WeightSpec::Spike { spikes: *spikes, height: *height, seed: Some(s), seeds: None },
                    )
                })
                .collect(),
            (all, _) => vec![(
                String::new(),
                WeightSpec::Spike {
                    spikes: *spikes,
                    height: *height,
                    seed: all.map(|v| v[0]).or(Some(0)),
                    seeds: None,
                },
            )],
        },
        other => vec![(String::new(), other.clone())],
    }
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, name: &str) -> Result<&'a Value, CliError> {
    obj.get(name).ok_or_else(|| cfg_err(format!("missing field `{name}`")))
}

fn typed<T: serde::de::DeserializeOwned>(v: &Value, name: &str) -> Result<T, CliError> {
    T::deserialize(v).map_err(|e| cfg_err(format!("{name}: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    dim: u32,
    depth: u32,
    #[serde(default)]
    cell_measure: Option<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorSpec {
    name: String,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    s: Option<f64>,
    #[serde(default)]
    chords: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    positions: Option<Vec<f64>>,
    #[serde(default)]
    masses: Option<Value>,
}

/// Builds a space or grid from one of the accepted source shapes:
/// `{"points", "dist", "measure"}`, `{"grid": …}`, `{"generator": …}` or
/// `{"file": path}`.
pub fn build_model(v: &Value, family: Option<CubeFamily>, base_dir: &Path, seed: Option<u64>) -> Result<Model, CliError> {
    let obj = v.as_object().ok_or_else(|| cfg_err("expected an object"))?;
    if let Some(path) = obj.get("file") {
        let rel: PathBuf = typed(path, "file")?;
        let full = base_dir.join(&rel);
        let text = std::fs::read_to_string(&full).map_err(|e| cfg_err(format!("file {}: {e}", full.display())))?;
        let inner: Value = serde_json::from_str(&text).map_err(|e| cfg_err(format!("file {}: {e}", full.display())))?;
        let dir = full.parent().map(Path::to_path_buf).unwrap_or_default();
        return build_model(&inner, family, &dir, seed).map_err(|e| prefix(&format!("file {}", full.display()), e));
    }
    if let Some(g) = obj.get("grid") {
        let spec: GridSpec = typed(g, "grid")?;
        let cell_measure = match spec.cell_measure {
            None => None,
            Some(Value::String(s)) if s == "lebesgue" => None,
            Some(other) => Some(typed::<Vec<f64>>(&other, "grid.cell_measure")?),
        };
        let grid = DyadicGrid::new(spec.dim, spec.depth, cell_measure).map_err(|e| CliError::Ingest(format!("grid: {e}")))?;
        return Ok(Model::Grid(grid, family.unwrap_or(CubeFamily::Dyadic)));
    }
    if family.is_some() {
        return Err(cfg_err("`family` applies to grids only"));
    }
    if let Some(g) = obj.get("generator") {
        let spec: GeneratorSpec = typed(g, "generator")?;
        return generate(&spec, seed).map(Model::Space);
    }
    if obj.contains_key("points") || obj.contains_key("dist") {
        let n: usize = typed(field(obj, "points")?, "points")?;
        let dist: Vec<Vec<f64>> = typed(field(obj, "dist")?, "dist")?;
        let measure: Vec<f64> = typed(field(obj, "measure")?, "measure")?;
        if dist.len() != n {
            return Err(cfg_err(format!("dist: {} rows for {n} points", dist.len())));
        }
        let d = DistanceMatrix::from_rows(dist).map_err(|e| CliError::Ingest(format!("dist: {e}")))?;
        let mut space = QuasiMetricSpace::new(d, measure).map_err(|e| CliError::Ingest(e.to_string()))?;
        if let Some(k) = obj.get("kappa") {
            let k: f64 = typed(k, "kappa")?;
            space = space.with_kappa(k).map_err(|e| CliError::Ingest(e.to_string()))?;
        }
        return Ok(Model::Space(space));
    }
    Err(cfg_err(
        "expected one of `points`/`dist`/`measure`, `grid`, `generator` or `file`",
    ))
}

fn masses(v: &Option<Value>, seed: Option<u64>) -> Result<Masses, CliError> {
    match v {
        None => Ok(Masses::Unit),
        Some(Value::String(s)) if s == "unit" => Ok(Masses::Unit),
        Some(Value::Array(_)) => Ok(Masses::Explicit(typed(v.as_ref().unwrap(), "masses")?)),
        Some(Value::Object(o)) if o.contains_key("random") => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct R {
                seed: u64,
                spread: f64,
            }
            let r: R = typed(&o["random"], "masses.random")?;
            Ok(Masses::Random {
                seed: seed.unwrap_or(r.seed),
                spread: r.spread,
            })
        }
        Some(other) => Err(cfg_err(format!(
            "masses: expected \"unit\", an array or {{\"random\": …}}, found {other}"
        ))),
    }
}

fn generate(spec: &GeneratorSpec, seed: Option<u64>) -> Result<QuasiMetricSpace, CliError> {
    let need_n = || spec.n.ok_or_else(|| cfg_err("generator: missing field `n`"));
    let m = masses(&spec.masses, seed)?;
    let built = match spec.name.as_str() {
        "line" => corpus::unit_line(need_n()?, &m),
        "positions" => {
            let pos = spec.positions.as_ref().ok_or_else(|| cfg_err("generator: missing field `positions`"))?;
            corpus::line_space(pos, &m)
        }
        "snowflake" => {
            let s = spec.s.ok_or_else(|| cfg_err("generator: missing field `s`"))?;
            corpus::snowflake_space(need_n()?, s, &m)
        }
        "ring" => corpus::ring_graph_space(
            need_n()?,
            spec.chords.unwrap_or(0),
            seed.or(spec.seed).unwrap_or(0),
            &m,
        ),
        other => {
            return Err(cfg_err(format!(
                "generator: unknown name `{other}`; expected line, positions, snowflake or ring"
            )))
        }
    };
    built.map_err(|e| CliError::Ingest(format!("generator: {e}")))
}

fn model_len(model: &Model) -> usize {
    match model {
        Model::Space(s) => s.n(),
        Model::Grid(g, _) => g.cells(),
    }
}

pub fn build_weight(spec: &WeightSpec, model: &Model, base_dir: &Path) -> Result<Weight, CliError> {
    let len = model_len(model);
    let ingest = |e: crate::Error| CliError::Ingest(e.to_string());
    let check_len = |v: &[f64]| {
        if v.len() != len {
            Err(cfg_err(format!("{} values for {len} points or cells", v.len())))
        } else {
            Ok(())
        }
    };
    match spec {
        WeightSpec::Constant { value } => Weight::constant(len, *value).map_err(ingest),
        WeightSpec::Values { values } => {
            check_len(values)?;
            Weight::new(values.clone()).map_err(ingest)
        }
        WeightSpec::File { path } => {
            let full = base_dir.join(path);
            let text = std::fs::read_to_string(&full).map_err(|e| cfg_err(format!("file {}: {e}", full.display())))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| cfg_err(format!("file {}: {e}", full.display())))?;
            let arr = match &v {
                Value::Object(o) => field(o, "values")?,
                other => other,
            };
            let values: Vec<f64> = typed(arr, &format!("file {}", full.display()))?;
            check_len(&values)?;
            Weight::new(values).map_err(|e| CliError::Ingest(format!("file {}: {e}", full.display())))
        }
        WeightSpec::Power { alpha } => match model {
            Model::Grid(g, _) => corpus::power_weight(g, *alpha).map_err(ingest),
            Model::Space(_) => Err(cfg_err("power weights need a grid")),
        },
        WeightSpec::Cascade { bound, seed, .. } => {
            let seed = seed.unwrap_or(0);
            match model {
                Model::Grid(g, _) => corpus::cascade_weight(g, *bound, seed).map_err(ingest),
                Model::Space(s) => {
                    if !s.n().is_power_of_two() {
                        return Err(cfg_err(format!("cascade weights on spaces need 2^K points, got {}", s.n())));
                    }
                    corpus::cascade_values(s.n().trailing_zeros(), *bound, seed).map_err(ingest)
                }
            }
        }
        WeightSpec::Spike { spikes, height, seed, .. } => {
            corpus::spike_weight(len, *spikes, *height, seed.unwrap_or(0)).map_err(ingest)
        }
    }
}

/// Base balls for the decomposition checks: the configured ones, or one per
/// decile center at the largest canonical radius of that center.
pub fn cz_bases(space: &QuasiMetricSpace, cz: &CzSettings) -> Result<Vec<Ball>, CliError> {
    if let Some(list) = &cz.bases {
        return list
            .iter()
            .map(|b| {
                if b.center >= space.n() {
                    return Err(cfg_err(format!("cz.bases: center {} out of range", b.center)));
                }
                Ball::new(b.center, b.radius).map_err(|e| cfg_err(format!("cz.bases: {e}")))
            })
            .collect();
    }
    let n = space.n();
    let mut centers: Vec<usize> = (0..10).map(|k| k * n / 10).collect();
    centers.dedup();
    Ok(centers
        .into_iter()
        .map(|c| {
            let radii = space.canonical_radii(c);
            Ball {
                center: c,
                radius: radii[radii.len() - 1],
            }
        })
        .collect())
}
