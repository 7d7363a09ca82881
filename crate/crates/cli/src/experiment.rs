//! Subcommand drivers.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use spikeforge_core::analysis::{self, Crossover, DiffStats, MemoryCurve};
use spikeforge_core::connectivity::{ConnectivityMatrix, TableDims, TableKind};
use spikeforge_core::neurocore::{self, RunOptions, Stimulus, Trajectory};
use spikeforge_core::plasticity::{self, EngineKind, EngineStats, SpikeTrace};
use spikeforge_core::rng::SplitMix64;
use spikeforge_core::stimulus;

use crate::config::{Check, Engine, ExperimentConfig, OutputFile, Topology};
use crate::formats;

/// Random stream used for random topologies; stimulus sources use streams
/// `0..A+B`.
pub const TOPOLOGY_STREAM: u64 = u64::MAX;

/// Largest allowed fraction of synapses with `w_oracle - w_forward > 4`.
pub const BOUNDED_BIAS_FRACTION: f64 = 0.05;

pub fn initial_matrix(config: &ExperimentConfig) -> Result<ConnectivityMatrix> {
    match &config.topology {
        Topology::Random { density, initial_weight } => {
            let mut rng = SplitMix64::for_stream(config.seed, TOPOLOGY_STREAM);
            Ok(ConnectivityMatrix::bernoulli(config.dims, *density, *initial_weight, &mut rng))
        }
        Topology::Edges(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            formats::read_edges(BufReader::new(file), Some(config.dims), config.dims.weight_bits())
                .with_context(|| format!("reading {}", path.display()))
        }
    }
}

#[derive(Debug, Clone)]
pub struct EngineResult {
    pub final_weights: ConnectivityMatrix,
    pub trajectory: Trajectory,
    pub stats: EngineStats,
    pub memory_bits: u64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub trace: SpikeTrace,
    pub synapses: usize,
    pub ticks_run: u64,
    pub forward: Option<EngineResult>,
    pub oracle: Option<EngineResult>,
    pub trace_oracle: Option<ConnectivityMatrix>,
    pub diff: Option<DiffStats>,
    pub oracle_equivalent: Option<bool>,
    pub checks: Vec<(Check, bool)>,
}

impl Simulation {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    pub fn saturations(&self) -> u64 {
        [&self.forward, &self.oracle].iter().filter_map(|r| r.as_ref()).map(|r| r.stats.saturations).sum()
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "synapses: {}", self.synapses);
        let _ = writeln!(s, "ticks_run: {}", self.ticks_run);
        let _ = writeln!(s, "stimulus_spikes: {}", self.trace.spike_count());
        for (name, r) in [("forward", &self.forward), ("oracle", &self.oracle)] {
            if let Some(r) = r {
                let _ = writeln!(
                    s,
                    "{name}: memory_bits={} causal_updates={} acausal_updates={} saturations={}",
                    r.memory_bits, r.stats.causal_updates, r.stats.acausal_updates, r.stats.saturations
                );
            }
        }
        if let Some(d) = &self.diff {
            let _ = writeln!(s, "max_diff: {}", d.max_diff);
            let _ = writeln!(s, "min_diff: {}", d.min_diff);
            for (q, v) in &d.quantiles {
                let _ = writeln!(s, "quantile_{q}: {v}");
            }
            let _ = writeln!(s, "frac_gt_4: {}", d.frac_gt_4);
            let _ = writeln!(s, "all_nonneg: {}", d.all_nonneg);
            let _ = writeln!(s, "saturations: {}", self.saturations());
            let _ = writeln!(s, "exact: {}", d.exact);
        }
        if let Some(eq) = self.oracle_equivalent {
            let _ = writeln!(s, "oracle_equivalent: {eq}");
        }
        for (check, ok) in &self.checks {
            let _ = writeln!(s, "check {}: {}", check_name(*check), if *ok { "PASS" } else { "FAIL" });
        }
        s
    }
}

pub fn check_name(check: Check) -> &'static str {
    match check {
        Check::Exact => "exact",
        Check::Dominance => "dominance",
        Check::BoundedBias => "bounded_bias",
        Check::OracleEquivalence => "oracle_equivalence",
    }
}

fn run_core(
    config: &ExperimentConfig,
    table_kind: TableKind,
    engine: EngineKind,
    matrix: &ConnectivityMatrix,
    stimulus: &Stimulus,
) -> Result<(EngineResult, u64)> {
    let core_config = config.core_config(table_kind, engine);
    let mut cores = [neurocore::build_core(core_config, matrix)?];
    let options = RunOptions {
        route_delay: config.route_delay,
        sample_period: config.trajectory_sample_period,
        sample_pairs: None,
    };
    let mut report = neurocore::run(&mut cores, stimulus, config.duration_ticks, &options)?;
    let core = report.cores.pop().expect("one core");
    Ok((
        EngineResult {
            final_weights: core.final_weights,
            trajectory: core.trajectory,
            stats: core.stats,
            memory_bits: core.memory_bits,
        },
        report.ticks_run,
    ))
}

/// Runs every selected engine on the same stimulus and evaluates the checks.
pub fn simulate(config: &ExperimentConfig) -> Result<Simulation> {
    let matrix = initial_matrix(config)?;
    let trace = stimulus::core_trace(&config.stimulus(), config.dims)?;
    let stim = Stimulus::from_trace(0, &trace);
    let mut ticks_run = 0;
    let mut forward = None;
    let mut oracle = None;
    if config.has(Engine::Forward) {
        let (r, t) = run_core(config, config.table_kind, EngineKind::Forward, &matrix, &stim)?;
        forward = Some(r);
        ticks_run = t;
    }
    if config.has(Engine::Oracle) {
        let (r, t) = run_core(config, TableKind::Crossbar, EngineKind::Oracle, &matrix, &stim)?;
        oracle = Some(r);
        ticks_run = t;
    }
    let trace_oracle = if config.has(Engine::TraceOracle) {
        Some(plasticity::trace_oracle(&trace, &matrix, &config.kernel, &config.bounds)?)
    } else {
        None
    };
    let diff = match (&forward, &oracle) {
        (Some(f), Some(o)) => Some(analysis::diff_stats(&f.final_weights, &o.final_weights)?),
        _ => None,
    };
    let oracle_equivalent = match (&oracle, &trace_oracle) {
        (Some(o), Some(t)) => Some(o.final_weights.bit_eq(t)),
        _ => None,
    };
    let mut sim = Simulation {
        synapses: matrix.present_count(),
        trace,
        ticks_run,
        forward,
        oracle,
        trace_oracle,
        diff,
        oracle_equivalent,
        checks: Vec::new(),
    };
    for &check in &config.checks {
        let ok = match check {
            Check::Exact => sim.diff.as_ref().is_some_and(|d| d.exact),
            Check::Dominance => sim.diff.as_ref().is_some_and(|d| d.all_nonneg) && sim.saturations() == 0,
            Check::BoundedBias => sim.diff.as_ref().is_some_and(|d| d.frac_gt_4 <= BOUNDED_BIAS_FRACTION),
            Check::OracleEquivalence => sim.oracle_equivalent == Some(true),
        };
        sim.checks.push((check, ok));
    }
    Ok(sim)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Writes the requested output files plus `summary.txt` into `dir`.
pub fn write_outputs(config: &ExperimentConfig, sim: &Simulation, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, f: &dyn Fn(&mut BufWriter<File>) -> std::io::Result<()>| -> Result<()> {
        let mut w = create(dir, name)?;
        f(&mut w)?;
        w.flush()?;
        written.push(dir.join(name));
        Ok(())
    };
    let fwd = sim.forward.as_ref();
    let orc = sim.oracle.as_ref();
    for out in &config.outputs {
        match out {
            OutputFile::Final => {
                let oracle = orc.map(|o| &o.final_weights).or(sim.trace_oracle.as_ref());
                emit("final_weights.csv", &|w| formats::write_final_weights(w, fwd.map(|f| &f.final_weights), oracle))?;
            }
            OutputFile::Trajectory => {
                if config.trajectory_sample_period.is_some() {
                    if let Some(f) = fwd {
                        emit("trajectory_forward.csv", &|w| formats::write_trajectory(w, &f.trajectory))?;
                    }
                    if let Some(o) = orc {
                        emit("trajectory_oracle.csv", &|w| formats::write_trajectory(w, &o.trajectory))?;
                    }
                }
            }
            OutputFile::Diff => {
                if let Some(d) = &sim.diff {
                    emit("diff.csv", &|w| formats::write_diff(w, d))?;
                }
            }
            OutputFile::Histogram => {
                if let Some(d) = &sim.diff {
                    emit("histogram.csv", &|w| formats::write_histogram(w, d))?;
                }
            }
            OutputFile::Spikes => emit("spikes.csv", &|w| formats::write_spikes(w, &sim.trace))?,
        }
    }
    let summary = sim.summary();
    emit("summary.txt", &|w| w.write_all(summary.as_bytes()))?;
    Ok(written)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t_ref: u32,
    pub max_diff: f64,
    pub max_abs_diff: f64,
    pub frac_gt_4: f64,
    pub all_nonneg: bool,
    pub exact: bool,
}

/// Runs forward and oracle once per refractory period, writing each run's
/// outputs to `<dir>/t_ref_<n>/` and the table to `<dir>/sweep_refractory.csv`.
pub fn sweep_refractory(config: &ExperimentConfig, t_refs: &[u32], dir: &Path) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &t_ref in t_refs {
        let mut c = config.clone();
        c.refractory_ticks = t_ref;
        c.engines = vec![Engine::Forward, Engine::Oracle];
        c.checks.clear();
        let sim = simulate(&c)?;
        write_outputs(&c, &sim, &dir.join(format!("t_ref_{t_ref}")))?;
        let d = sim.diff.as_ref().expect("forward and oracle ran");
        rows.push(SweepRow {
            t_ref,
            max_diff: d.max_diff,
            max_abs_diff: d.max_abs_diff,
            frac_gt_4: d.frac_gt_4,
            all_nonneg: d.all_nonneg,
            exact: d.exact,
        });
    }
    let mut w = create(dir, "sweep_refractory.csv")?;
    writeln!(w, "t_ref,max_diff,frac_gt_4,exact")?;
    for r in &rows {
        writeln!(w, "{},{},{},{}", r.t_ref, r.max_diff, r.frac_gt_4, r.exact)?;
    }
    w.flush()?;
    Ok(rows)
}

/// Accepts `a,b,c` or `start:stop:step` (inclusive of `stop` within 1e-9).
pub fn parse_density_grid(text: &str) -> Result<Vec<f64>> {
    let grid: Vec<f64> = if let Some((start, rest)) = text.split_once(':') {
        let (stop, step) = rest.split_once(':').context("expected start:stop:step")?;
        let (start, stop, step): (f64, f64, f64) = (start.trim().parse()?, stop.trim().parse()?, step.trim().parse()?);
        if step.is_nan() || step <= 0.0 || stop < start {
            bail!("density grid needs step > 0 and stop >= start");
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect()
    } else {
        text.split(',').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>()?
    };
    if grid.is_empty() || grid.iter().any(|d| !(0.0..=1.0).contains(d)) {
        bail!("densities must lie in [0, 1]");
    }
    Ok(grid)
}

#[derive(Debug, Clone)]
pub struct MemoryResult {
    pub curves: Vec<MemoryCurve>,
    pub crossovers: Vec<(u32, Crossover)>,
}

pub struct MemoryParams<'a> {
    pub inputs: usize,
    pub neurons: usize,
    pub weight_bits: &'a [u32],
    pub densities: &'a [f64],
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
}

/// Memory curves and critical densities per weight width. Writes
/// `memory_curve_w<w>.csv` and `critical_density.csv` into `dir`.
pub fn memory(params: &MemoryParams, dir: &Path) -> Result<MemoryResult> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut curves = Vec::new();
    let mut crossovers = Vec::new();
    for &w in params.weight_bits {
        let dims = TableDims::new(params.inputs, params.neurons, w)?;
        let curve = analysis::memory_curve(dims, params.densities, params.trials, params.seed)?;
        let mut out = create(dir, &format!("memory_curve_w{w}.csv"))?;
        formats::write_memory_curve(&mut out, &curve)?;
        out.flush()?;
        curves.push(curve);
        crossovers.push((w, analysis::critical_density(dims, params.trials, params.seed, params.tolerance)?));
    }
    let mut out = create(dir, "critical_density.csv")?;
    writeln!(out, "weight_bits,d_c")?;
    for (w, c) in &crossovers {
        writeln!(out, "{w},{}", crossover_text(c))?;
    }
    out.flush()?;
    Ok(MemoryResult { curves, crossovers })
}

pub fn crossover_text(c: &Crossover) -> String {
    match c {
        Crossover::At(d) => d.to_string(),
        Crossover::IndexedAlwaysCheaper => "indexed_always_cheaper".into(),
        Crossover::CrossbarAlwaysCheaper => "crossbar_always_cheaper".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_grids() {
        let g = parse_density_grid("0:1:0.25").unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_density_grid("0:1:0.05").unwrap().len(), 21);
        assert_eq!(parse_density_grid("0.1, 0.9").unwrap(), vec![0.1, 0.9]);
        assert!(parse_density_grid("0:2:0.5").is_err());
        assert!(parse_density_grid("1:0:0.1").is_err());
        assert!(parse_density_grid("x").is_err());
    }
}
