//! Bernoulli-per-tick approximation of Poisson spike trains with a refractory
//! period.
//!
//! Source `k` draws from `SplitMix64::for_stream(seed, k)`. Each tick that is
//! not refractory consumes one uniform draw `u` and spikes when `u < p`, with
//! `p = rate_hz * tick_ms / 1000`. A spike at tick `t` makes ticks
//! `t + 1 ..= t + T_ref` refractory; those ticks consume no draws.

use alloc::vec::Vec;

use crate::connectivity::TableDims;
use crate::neurocore::{Stimulus, Target};
use crate::plasticity::SpikeTrace;
use crate::rng::SplitMix64;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StimulusConfig {
    pub rate_hz: f64,
    pub tick_ms: f64,
    pub refractory_ticks: u32,
    pub duration_ticks: u64,
    pub seed: u64,
}

impl StimulusConfig {
    /// Per-tick spike probability, validated to lie in `[0, 1]`.
    pub fn spike_probability(&self) -> Result<f64> {
        if !(self.tick_ms.is_finite() && self.tick_ms > 0.0) {
            return Err(Error::InvalidParameter("tick_ms must be positive"));
        }
        let p = self.rate_hz * self.tick_ms / 1000.0;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter("rate_hz * tick_ms / 1000 must lie in [0, 1]"));
        }
        Ok(p)
    }
}

/// Spike ticks of source `source`, ascending.
pub fn poisson_train(config: &StimulusConfig, source: u64) -> Result<Vec<u64>> {
    let p = config.spike_probability()?;
    let mut spikes = Vec::new();
    if p == 0.0 {
        return Ok(spikes);
    }
    let mut rng = SplitMix64::for_stream(config.seed, source);
    let mut t = 0;
    while t < config.duration_ticks {
        if rng.bernoulli(p) {
            spikes.push(t);
            t += config.refractory_ticks as u64;
        }
        t += 1;
    }
    Ok(spikes)
}

/// Long-run rate in Hz of a train with per-tick probability `p` and
/// refractory period `t_ref`: the mean inter-spike interval is
/// `t_ref + 1 / p` ticks.
pub fn effective_rate(p: f64, t_ref: u32, tick_ms: f64) -> f64 {
    let per_tick = 1.0 / (t_ref as f64 + 1.0 / p);
    per_tick * 1000.0 / tick_ms
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Input { core: usize, index: usize },
    Neuron { core: usize, index: usize },
}

/// For each core in order: its inputs, then its neurons.
pub fn default_sources(cores: &[TableDims]) -> Vec<Source> {
    let mut out = Vec::new();
    for (core, dims) in cores.iter().enumerate() {
        out.extend((0..dims.inputs()).map(|index| Source::Input { core, index }));
        out.extend((0..dims.neurons()).map(|index| Source::Neuron { core, index }));
    }
    out
}

/// One train per source; the source's position in `sources` selects its
/// random stream.
pub fn generate(config: &StimulusConfig, sources: &[Source]) -> Result<Stimulus> {
    let mut stimulus = Stimulus::new();
    for (k, source) in sources.iter().enumerate() {
        let (core, target) = match *source {
            Source::Input { core, index } => (core, Target::Input(index)),
            Source::Neuron { core, index } => (core, Target::Neuron(index)),
        };
        for t in poisson_train(config, k as u64)? {
            stimulus.push(t, core, target);
        }
    }
    Ok(stimulus)
}

/// Trains for a single core laid out as a [`SpikeTrace`], using the same
/// stream numbering as [`default_sources`] for one core.
pub fn core_trace(config: &StimulusConfig, dims: TableDims) -> Result<SpikeTrace> {
    let (a, b) = (dims.inputs(), dims.neurons());
    let pre = (0..a).map(|i| poisson_train(config, i as u64)).collect::<Result<Vec<_>>>()?;
    let post = (0..b).map(|j| poisson_train(config, (a + j) as u64)).collect::<Result<Vec<_>>>()?;
    SpikeTrace::from_lists(pre, post)
}
