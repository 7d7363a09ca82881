//! Neurosynaptic cores, routing, and the tick-synchronous run loop.
//!
//! All cores advance one tick together. Post-synaptic spikes are injected by
//! the stimulus (there is no membrane model) and routed to core inputs with a
//! fixed delay of at least one tick. After the last stimulus tick the run
//! keeps ticking silently until every input timer has expired, so the forward
//! engine's deferred causal updates are all applied.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::connectivity::{ConnectivityMatrix, TableDims, TableKind, WeightTable};
use crate::plasticity::{EngineKind, EngineStats, SpikeTrace, StdpEngine, StdpKernel, TimerBank, WeightBounds};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreConfig {
    pub dims: TableDims,
    pub table_kind: TableKind,
    pub kernel: StdpKernel,
    pub bounds: WeightBounds,
    pub engine: EngineKind,
    /// Wall-clock length of one tick.
    pub tick_ms: f64,
    /// Refractory period applied when generating this core's stimulus.
    pub refractory_ticks: u32,
}

impl CoreConfig {
    /// 1 ms ticks, no refractory period.
    pub fn new(
        dims: TableDims,
        table_kind: TableKind,
        kernel: StdpKernel,
        bounds: WeightBounds,
        engine: EngineKind,
    ) -> Self {
        Self { dims, table_kind, kernel, bounds, engine, tick_ms: 1.0, refractory_ticks: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tick_ms.is_finite() && self.tick_ms > 0.0) {
            return Err(Error::InvalidParameter("tick_ms must be positive"));
        }
        let (lo, hi) = self.dims.storage_range();
        if self.bounds.min() < lo || self.bounds.max() > hi {
            return Err(Error::InvalidParameter("weight bounds exceed the table's weight storage range"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Destination {
    pub core: usize,
    pub input: usize,
}

/// Destinations of each neuron's spikes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoutingTable {
    routes: Vec<Vec<Destination>>,
}

impl RoutingTable {
    pub fn new(neurons: usize) -> Self {
        Self { routes: vec![Vec::new(); neurons] }
    }

    pub fn add(&mut self, neuron: usize, destination: Destination) -> Result<()> {
        let neurons = self.routes.len();
        self.routes.get_mut(neuron).ok_or(Error::NeuronOutOfRange { neuron, neurons })?.push(destination);
        Ok(())
    }

    pub fn destinations(&self, neuron: usize) -> &[Destination] {
        self.routes.get(neuron).map_or(&[], Vec::as_slice)
    }
}

/// Pending input deliveries keyed by tick.
#[derive(Debug, Clone, Default)]
pub struct EventQueue {
    pending: BTreeMap<u64, Vec<Destination>>,
    len: usize,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, tick: u64, destination: Destination) {
        self.pending.entry(tick).or_default().push(destination);
        self.len += 1;
    }

    /// Removes and returns everything scheduled for `tick`.
    pub fn take(&mut self, tick: u64) -> Vec<Destination> {
        let events = self.pending.remove(&tick).unwrap_or_default();
        self.len -= events.len();
        events
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn last_tick(&self) -> Option<u64> {
        self.pending.keys().next_back().copied()
    }
}

/// Schedules one event per destination per spike at `tick + delay`.
/// `core_inputs[c]` is the input count of core `c`. Returns the number of
/// events enqueued.
pub fn route(
    routing: &RoutingTable,
    spikes: &[usize],
    tick: u64,
    delay: u64,
    core_inputs: &[usize],
    queue: &mut EventQueue,
) -> Result<usize> {
    if delay == 0 {
        return Err(Error::InvalidParameter("routing delay must be at least one tick"));
    }
    let mut sent = 0;
    for &neuron in spikes {
        for &dest in routing.destinations(neuron) {
            let inputs = *core_inputs.get(dest.core).ok_or(Error::DanglingCore { core: dest.core })?;
            if dest.input >= inputs {
                return Err(Error::InputOutOfRange { input: dest.input, inputs });
            }
            queue.push(tick + delay, dest);
            sent += 1;
        }
    }
    Ok(sent)
}

#[derive(Debug, Clone)]
pub struct Core {
    config: CoreConfig,
    table: WeightTable,
    engine: StdpEngine,
    routing: RoutingTable,
    last_tick: Option<u64>,
}

pub fn build_core(config: CoreConfig, matrix: &ConnectivityMatrix) -> Result<Core> {
    config.validate()?;
    if matrix.dims() != config.dims {
        return Err(Error::DimensionMismatch);
    }
    let table = WeightTable::build(config.table_kind, matrix)?;
    let engine = StdpEngine::new(config.engine, config.kernel, config.bounds, &table);
    Ok(Core { config, table, engine, routing: RoutingTable::new(config.dims.neurons()), last_tick: None })
}

impl Core {
    pub fn config(&self) -> &CoreConfig {
        &self.config
    }

    pub fn dims(&self) -> TableDims {
        self.config.dims
    }

    pub fn table(&self) -> &WeightTable {
        &self.table
    }

    pub fn timers(&self) -> &TimerBank {
        self.engine.timers()
    }

    pub fn stats(&self) -> EngineStats {
        self.engine.stats()
    }

    pub fn routing(&self) -> &RoutingTable {
        &self.routing
    }

    pub fn routing_mut(&mut self) -> &mut RoutingTable {
        &mut self.routing
    }

    pub fn set_routing(&mut self, routing: RoutingTable) {
        self.routing = routing;
    }

    /// Processes one tick: input events, then injected neuron spikes, then
    /// timer decrement and expiries. Ticks skipped since the previous call are
    /// treated as silent. Duplicate events for one source in the same tick
    /// count once. Returns the neurons that spiked, ascending.
    pub fn step(&mut self, tick: u64, inputs: &[usize], neurons: &[usize]) -> Result<Vec<usize>> {
        if let Some(last) = self.last_tick {
            if tick <= last {
                return Err(Error::NonMonotonicTick { tick, last });
            }
        }
        let dims = self.config.dims;
        for &i in inputs {
            dims.check_input(i)?;
        }
        for &j in neurons {
            dims.check_neuron(j)?;
        }
        // Ticks skipped since the last call were silent: only the timers move.
        let first_silent = self.last_tick.map_or(tick, |l| l + 1);
        for _ in first_silent..tick {
            if self.engine.timers().is_idle() {
                break;
            }
            self.engine.end_tick(&mut self.table);
        }
        self.last_tick = Some(tick);
        if inputs.is_empty() && neurons.is_empty() && self.engine.timers().is_idle() {
            return Ok(Vec::new());
        }
        let mut pre = inputs.to_vec();
        pre.sort_unstable();
        pre.dedup();
        let mut post = neurons.to_vec();
        post.sort_unstable();
        post.dedup();
        self.engine.process_tick(&mut self.table, &pre, &post);
        Ok(post)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Input(usize),
    Neuron(usize),
}

/// Externally injected spikes keyed by tick.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stimulus {
    by_tick: BTreeMap<u64, Vec<(usize, Target)>>,
}

impl Stimulus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, tick: u64, core: usize, target: Target) {
        self.by_tick.entry(tick).or_default().push((core, target));
    }

    /// Every spike of `trace` aimed at core `core`.
    pub fn from_trace(core: usize, trace: &SpikeTrace) -> Self {
        let mut s = Self::new();
        s.add_trace(core, trace);
        s
    }

    pub fn add_trace(&mut self, core: usize, trace: &SpikeTrace) {
        for i in 0..trace.inputs() {
            for &t in trace.pre(i) {
                self.push(t, core, Target::Input(i));
            }
        }
        for j in 0..trace.neurons() {
            for &t in trace.post(j) {
                self.push(t, core, Target::Neuron(j));
            }
        }
    }

    pub fn at(&self, tick: u64) -> &[(usize, Target)] {
        self.by_tick.get(&tick).map_or(&[], Vec::as_slice)
    }

    pub fn last_tick(&self) -> Option<u64> {
        self.by_tick.keys().next_back().copied()
    }

    pub fn len(&self) -> usize {
        self.by_tick.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_tick.is_empty()
    }

    fn validate(&self, cores: &[Core], duration: u64) -> Result<()> {
        for (&tick, events) in &self.by_tick {
            if tick >= duration {
                return Err(Error::EventAfterEnd { tick, duration });
            }
            for &(core, target) in events {
                let dims = cores.get(core).ok_or(Error::DanglingCore { core })?.dims();
                match target {
                    Target::Input(i) => dims.check_input(i)?,
                    Target::Neuron(j) => dims.check_neuron(j)?,
                }
            }
        }
        Ok(())
    }
}

/// Weights of selected synapses sampled on a tick grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pairs: Vec<(usize, usize)>,
    ticks: Vec<u64>,
    /// Row-major: one row of `pairs.len()` weights per sampled tick.
    weights: Vec<f64>,
}

impl Trajectory {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Self { pairs, ticks: Vec::new(), weights: Vec::new() }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn ticks(&self) -> &[u64] {
        &self.ticks
    }

    pub fn record(&mut self, tick: u64, table: &WeightTable) {
        self.ticks.push(tick);
        for &(i, j) in &self.pairs {
            self.weights.push(table.get(i, j).unwrap_or(f64::NAN));
        }
    }

    /// Weights of pair number `pair` in tick order.
    pub fn series(&self, pair: usize) -> impl Iterator<Item = f64> + '_ {
        let n = self.pairs.len();
        self.weights.iter().skip(pair).step_by(n.max(1)).copied().take(if n == 0 { 0 } else { self.ticks.len() })
    }

    pub fn weight(&self, sample: usize, pair: usize) -> f64 {
        self.weights[sample * self.pairs.len() + pair]
    }

    /// `(tick, pre, post, weight)` rows, tick-major.
    pub fn rows(&self) -> impl Iterator<Item = (u64, usize, usize, f64)> + '_ {
        self.ticks.iter().enumerate().flat_map(move |(s, &t)| {
            self.pairs.iter().enumerate().map(move |(p, &(i, j))| (t, i, j, self.weight(s, p)))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    /// Ticks between a neuron spike and its routed input events.
    pub route_delay: u64,
    /// Sample trajectories after every tick divisible by this period, and
    /// once more after the final tick. `None` records nothing.
    pub sample_period: Option<u64>,
    /// Synapses to sample; `None` samples every present connection.
    pub sample_pairs: Option<Vec<(usize, usize)>>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { route_delay: 1, sample_period: None, sample_pairs: None }
    }
}

#[derive(Debug, Clone)]
pub struct CoreReport {
    pub final_weights: ConnectivityMatrix,
    pub trajectory: Trajectory,
    pub stats: EngineStats,
    pub memory_bits: u64,
    pub pre_events: u64,
    pub post_spikes: u64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    /// Stimulus ticks plus drain ticks.
    pub ticks_run: u64,
    pub events_routed: u64,
    pub cores: Vec<CoreReport>,
}

/// Runs every core for `duration_ticks` stimulus ticks, then drains.
///
/// The drain lasts at least one full STDP window and extends until every
/// routed event has been delivered and its input timer has expired.
pub fn run(
    cores: &mut [Core],
    stimulus: &Stimulus,
    duration_ticks: u64,
    options: &RunOptions,
) -> Result<ExperimentReport> {
    if options.route_delay == 0 {
        return Err(Error::InvalidParameter("routing delay must be at least one tick"));
    }
    if options.sample_period == Some(0) {
        return Err(Error::InvalidParameter("sample period must be at least one tick"));
    }
    stimulus.validate(cores, duration_ticks)?;
    let core_inputs: Vec<usize> = cores.iter().map(|c| c.dims().inputs()).collect();
    let window = cores.iter().map(|c| c.config.kernel.window() as u64).max().unwrap_or(0);

    let mut trajectories: Vec<Trajectory> = cores
        .iter()
        .map(|c| {
            let pairs = match &options.sample_pairs {
                Some(p) => p.clone(),
                None => c.table.to_matrix().iter().map(|(i, j, _)| (i, j)).collect(),
            };
            Trajectory::new(pairs)
        })
        .collect();
    let mut pre_events = vec![0u64; cores.len()];
    let mut post_spikes = vec![0u64; cores.len()];
    let mut queue = EventQueue::new();
    let mut events_routed = 0u64;
    let mut end = duration_ticks + window;
    let mut inputs: Vec<Vec<usize>> = vec![Vec::new(); cores.len()];
    let mut neurons: Vec<Vec<usize>> = vec![Vec::new(); cores.len()];

    let mut tick = 0;
    while tick < end {
        for v in inputs.iter_mut().chain(neurons.iter_mut()) {
            v.clear();
        }
        if tick < duration_ticks {
            for &(c, target) in stimulus.at(tick) {
                match target {
                    Target::Input(i) => inputs[c].push(i),
                    Target::Neuron(j) => neurons[c].push(j),
                }
            }
        }
        for dest in queue.take(tick) {
            inputs[dest.core].push(dest.input);
        }
        for (c, core) in cores.iter_mut().enumerate() {
            pre_events[c] += inputs[c].len() as u64;
            let spikes = core.step(tick, &inputs[c], &neurons[c])?;
            post_spikes[c] += spikes.len() as u64;
            let sent = route(&core.routing, &spikes, tick, options.route_delay, &core_inputs, &mut queue)?;
            if sent > 0 {
                events_routed += sent as u64;
                end = end.max(tick + options.route_delay + window);
            }
        }
        if let Some(period) = options.sample_period {
            if tick % period == 0 {
                for (core, traj) in cores.iter().zip(&mut trajectories) {
                    traj.record(tick, &core.table);
                }
            }
        }
        tick += 1;
    }
    debug_assert!(queue.is_empty());
    debug_assert!(cores.iter().all(|c| c.timers().pre_timers().iter().all(|&t| t == 0)));

    if let (Some(period), Some(last)) = (options.sample_period, tick.checked_sub(1)) {
        if last % period != 0 {
            for (core, traj) in cores.iter().zip(&mut trajectories) {
                traj.record(last, &core.table);
            }
        }
    }

    let reports = cores
        .iter()
        .zip(trajectories)
        .enumerate()
        .map(|(c, (core, trajectory))| CoreReport {
            final_weights: core.table.to_matrix(),
            trajectory,
            stats: core.stats(),
            memory_bits: core.table.memory_bits(),
            pre_events: pre_events[c],
            post_spikes: post_spikes[c],
        })
        .collect();
    Ok(ExperimentReport { ticks_run: tick, events_routed, cores: reports })
}
