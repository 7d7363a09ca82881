//! Experiment configuration files.
//!
//! Flat `key = value` lines grouped under `[section]` headers. `#` starts a
//! comment. Every section and key is checked against a fixed schema; unknown
//! names, duplicates, missing required keys and out-of-range values are errors
//! that carry the file line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use spikeforge_core::connectivity::{TableDims, TableKind};
use spikeforge_core::neurocore::CoreConfig;
use spikeforge_core::plasticity::{EngineKind, KernelShape, StdpKernel, WeightBounds};
use spikeforge_core::stimulus::StimulusConfig;

/// Environment variable that replaces `[run] seed`.
pub const SEED_ENV: &str = "SPIKEFORGE_SEED";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown section [{section}]")]
    UnknownSection { line: usize, section: String },
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("line {line}: duplicate key `{key}` in [{section}]")]
    DuplicateKey { line: usize, section: String, key: String },
    #[error("missing required key `{key}` in [{section}]")]
    MissingKey { section: String, key: String },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    InvalidValue { line: usize, key: String, message: String },
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("core", &["inputs", "neurons", "weight_bits", "table", "tick_ms"]),
    ("kernel", &["shape", "t_causal", "t_acausal", "max_dw", "tau"]),
    ("bounds", &["w_min", "w_max"]),
    ("topology", &["density", "edges", "initial_weight"]),
    ("stimulus", &["rate_hz", "refractory_ticks", "duration_ticks"]),
    ("run", &["seed", "engines", "trajectory_sample_period", "route_delay", "checks"]),
    ("output", &["dir", "files"]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Engine {
    Forward,
    Oracle,
    TraceOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    /// Forward and oracle final weights bit-identical.
    Exact,
    /// Every `w_oracle - w_forward >= 0` with no saturation.
    Dominance,
    /// At most 5% of synapses with `w_oracle - w_forward > 4`.
    BoundedBias,
    /// Oracle engine and trace oracle bit-identical.
    OracleEquivalence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutputFile {
    Final,
    Trajectory,
    Diff,
    Histogram,
    Spikes,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    Random { density: f64, initial_weight: f64 },
    Edges(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dims: TableDims,
    pub table_kind: TableKind,
    pub tick_ms: f64,
    pub kernel: StdpKernel,
    pub bounds: WeightBounds,
    pub topology: Topology,
    pub rate_hz: f64,
    pub refractory_ticks: u32,
    pub duration_ticks: u64,
    pub seed: u64,
    pub engines: Vec<Engine>,
    /// `None` disables trajectory sampling.
    pub trajectory_sample_period: Option<u64>,
    pub route_delay: u64,
    pub checks: Vec<Check>,
    pub output_dir: PathBuf,
    pub outputs: Vec<OutputFile>,
}

impl ExperimentConfig {
    pub fn has(&self, engine: Engine) -> bool {
        self.engines.contains(&engine)
    }

    pub fn stimulus(&self) -> StimulusConfig {
        StimulusConfig {
            rate_hz: self.rate_hz,
            tick_ms: self.tick_ms,
            refractory_ticks: self.refractory_ticks,
            duration_ticks: self.duration_ticks,
            seed: self.seed,
        }
    }

    pub fn core_config(&self, table_kind: TableKind, engine: EngineKind) -> CoreConfig {
        let mut c = CoreConfig::new(self.dims, table_kind, self.kernel, self.bounds, engine);
        c.tick_ms = self.tick_ms;
        c.refractory_ticks = self.refractory_ticks;
        c
    }
}

struct Value {
    line: usize,
    text: String,
}

struct Raw {
    sections: BTreeMap<String, BTreeMap<String, Value>>,
}

fn parse_raw(text: &str) -> Result<Raw, ConfigError> {
    let mut sections: BTreeMap<String, BTreeMap<String, Value>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (n, raw_line) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax { line, message: "unterminated section header".into() })?
                .trim();
            if !SCHEMA.iter().any(|(s, _)| *s == name) {
                return Err(ConfigError::UnknownSection { line, section: name.into() });
            }
            sections.entry(name.into()).or_default();
            current = Some(name.into());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line, message: "expected `key = value`".into() })?;
        let (key, value) = (key.trim(), value.trim());
        let section = current
            .clone()
            .ok_or_else(|| ConfigError::Syntax { line, message: "key outside of any section".into() })?;
        let allowed = SCHEMA.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(ConfigError::UnknownKey { line, section, key: key.into() });
        }
        let entries = sections.entry(section.clone()).or_default();
        if entries.contains_key(key) {
            return Err(ConfigError::DuplicateKey { line, section, key: key.into() });
        }
        entries.insert(key.into(), Value { line, text: value.into() });
    }
    Ok(Raw { sections })
}

impl Raw {
    fn get(&self, section: &str, key: &str) -> Option<&Value> {
        self.sections.get(section).and_then(|s| s.get(key))
    }

    fn required(&self, section: &str, key: &str) -> Result<&Value, ConfigError> {
        self.get(section, key).ok_or_else(|| ConfigError::MissingKey { section: section.into(), key: key.into() })
    }

    fn parse<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<(T, usize)>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let Some(v) = self.get(section, key) else {
            return Ok(None);
        };
        v.text.parse::<T>().map(|x| Some((x, v.line))).map_err(|e| ConfigError::InvalidValue {
            line: v.line,
            key: key.into(),
            message: e.to_string(),
        })
    }

    fn require<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<(T, usize), ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.required(section, key)?;
        Ok(self.parse(section, key)?.expect("present"))
    }
}

fn invalid(line: usize, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue { line, key: key.into(), message: message.into() }
}

fn list(value: &Value) -> impl Iterator<Item = &str> {
    value.text.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Parses and validates a configuration text. Relative `edges` paths are
/// resolved against `base_dir`.
pub fn parse_config_str(
    text: &str,
    base_dir: &Path,
    seed_override: Option<u64>,
) -> Result<ExperimentConfig, ConfigError> {
    let raw = parse_raw(text)?;

    let (inputs, _) = raw.require::<usize>("core", "inputs")?;
    let (neurons, _) = raw.require::<usize>("core", "neurons")?;
    let (weight_bits, wl) = raw.require::<u32>("core", "weight_bits")?;
    let dims = TableDims::new(inputs, neurons, weight_bits).map_err(|e| invalid(wl, "weight_bits", e.to_string()))?;
    let table = raw.required("core", "table")?;
    let table_kind = match table.text.as_str() {
        "crossbar" => TableKind::Crossbar,
        "indexed" => TableKind::Indexed,
        other => return Err(invalid(table.line, "table", format!("expected crossbar or indexed, got `{other}`"))),
    };
    let (tick_ms, tl) = raw.require::<f64>("core", "tick_ms")?;
    if !(tick_ms.is_finite() && tick_ms > 0.0) {
        return Err(invalid(tl, "tick_ms", "must be positive"));
    }

    let shape_v = raw.required("kernel", "shape")?;
    let shape = match shape_v.text.as_str() {
        "ramp" => KernelShape::Ramp,
        "box" => KernelShape::Box,
        "exponential" => {
            let (tau, _) = raw.require::<f64>("kernel", "tau")?;
            KernelShape::Exponential { tau }
        }
        other => {
            return Err(invalid(shape_v.line, "shape", format!("expected ramp, box or exponential, got `{other}`")))
        }
    };
    if !matches!(shape, KernelShape::Exponential { .. }) {
        if let Some(v) = raw.get("kernel", "tau") {
            return Err(invalid(v.line, "tau", "only valid for the exponential shape"));
        }
    }
    let (t_causal, _) = raw.require::<u32>("kernel", "t_causal")?;
    let (t_acausal, _) = raw.require::<u32>("kernel", "t_acausal")?;
    let (max_dw, ml) = raw.require::<f64>("kernel", "max_dw")?;
    let kernel =
        StdpKernel::new(shape, t_causal, t_acausal, max_dw).map_err(|e| invalid(ml, "kernel", e.to_string()))?;

    let (w_min, bl) = raw.require::<f64>("bounds", "w_min")?;
    let (w_max, _) = raw.require::<f64>("bounds", "w_max")?;
    let bounds = WeightBounds::new(w_min, w_max).map_err(|e| invalid(bl, "w_min", e.to_string()))?;
    let (lo, hi) = dims.storage_range();
    if w_min < lo || w_max > hi {
        return Err(invalid(bl, "w_min", format!("bounds must fit signed {weight_bits}-bit storage [{lo}, {hi}]")));
    }

    let topology = match (raw.get("topology", "density"), raw.get("topology", "edges")) {
        (Some(d), None) => {
            let (density, _) = raw.require::<f64>("topology", "density")?;
            if !(0.0..=1.0).contains(&density) {
                return Err(invalid(d.line, "density", "must lie in [0, 1]"));
            }
            let initial_weight = raw.parse::<f64>("topology", "initial_weight")?.map_or(0.0, |(w, _)| w);
            Topology::Random { density, initial_weight }
        }
        (None, Some(e)) => {
            if let Some(v) = raw.get("topology", "initial_weight") {
                return Err(invalid(v.line, "initial_weight", "not used with an edge list"));
            }
            let path = base_dir.join(&e.text);
            if !path.is_file() {
                return Err(invalid(e.line, "edges", format!("file {} does not exist", path.display())));
            }
            Topology::Edges(path)
        }
        (Some(_), Some(e)) => return Err(invalid(e.line, "edges", "give either density or edges, not both")),
        (None, None) => return Err(ConfigError::MissingKey { section: "topology".into(), key: "density".into() }),
    };

    let (rate_hz, rl) = raw.require::<f64>("stimulus", "rate_hz")?;
    let p = rate_hz * tick_ms / 1000.0;
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(rl, "rate_hz", format!("rate_hz * tick_ms / 1000 = {p} is outside [0, 1]")));
    }
    let (refractory_ticks, _) = raw.require::<u32>("stimulus", "refractory_ticks")?;
    let (duration_ticks, _) = raw.require::<u64>("stimulus", "duration_ticks")?;

    let (mut seed, _) = raw.require::<u64>("run", "seed")?;
    if let Some(s) = seed_override {
        seed = s;
    }
    let engines_v = raw.required("run", "engines")?;
    let mut engines = Vec::new();
    for name in list(engines_v) {
        let e = match name {
            "forward" => Engine::Forward,
            "oracle" => Engine::Oracle,
            "trace_oracle" => Engine::TraceOracle,
            other => return Err(invalid(engines_v.line, "engines", format!("unknown engine `{other}`"))),
        };
        if !engines.contains(&e) {
            engines.push(e);
        }
    }
    if engines.is_empty() {
        return Err(invalid(engines_v.line, "engines", "select at least one engine"));
    }
    engines.sort();
    let trajectory_sample_period = match raw.parse::<u64>("run", "trajectory_sample_period")? {
        None | Some((0, _)) => None,
        Some((p, _)) => Some(p),
    };
    let route_delay = match raw.parse::<u64>("run", "route_delay")? {
        None => 1,
        Some((0, line)) => return Err(invalid(line, "route_delay", "must be at least 1")),
        Some((d, _)) => d,
    };
    let mut checks = Vec::new();
    if let Some(v) = raw.get("run", "checks") {
        for name in list(v) {
            let (check, needs): (Check, &[Engine]) = match name {
                "exact" => (Check::Exact, &[Engine::Forward, Engine::Oracle]),
                "dominance" => (Check::Dominance, &[Engine::Forward, Engine::Oracle]),
                "bounded_bias" => (Check::BoundedBias, &[Engine::Forward, Engine::Oracle]),
                "oracle_equivalence" => (Check::OracleEquivalence, &[Engine::Oracle, Engine::TraceOracle]),
                other => return Err(invalid(v.line, "checks", format!("unknown check `{other}`"))),
            };
            if needs.iter().any(|e| !engines.contains(e)) {
                return Err(invalid(v.line, "checks", format!("check `{name}` needs engines {needs:?}")));
            }
            if !checks.contains(&check) {
                checks.push(check);
            }
        }
    }

    let output_dir = PathBuf::from(raw.get("output", "dir").map_or("out", |v| v.text.as_str()));
    let outputs = match raw.get("output", "files") {
        None => {
            vec![OutputFile::Final, OutputFile::Trajectory, OutputFile::Diff, OutputFile::Histogram, OutputFile::Spikes]
        }
        Some(v) => list(v)
            .map(|name| match name {
                "final" => Ok(OutputFile::Final),
                "trajectory" => Ok(OutputFile::Trajectory),
                "diff" => Ok(OutputFile::Diff),
                "histogram" => Ok(OutputFile::Histogram),
                "spikes" => Ok(OutputFile::Spikes),
                other => Err(invalid(v.line, "files", format!("unknown output `{other}`"))),
            })
            .collect::<Result<_, _>>()?,
    };

    Ok(ExperimentConfig {
        dims,
        table_kind,
        tick_ms,
        kernel,
        bounds,
        topology,
        rate_hz,
        refractory_ticks,
        duration_ticks,
        seed,
        engines,
        trajectory_sample_period,
        route_delay,
        checks,
        output_dir,
        outputs,
    })
}

/// Reads `path`, honoring the seed override in [`SEED_ENV`].
pub fn parse_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    use anyhow::Context;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let seed_override = match std::env::var(SEED_ENV) {
        Ok(s) => Some(s.trim().parse::<u64>().with_context(|| format!("{SEED_ENV} is not an unsigned integer"))?),
        Err(_) => None,
    };
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&text, base, seed_override).with_context(|| format!("in {}", path.display()))
}
