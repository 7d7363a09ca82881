//! STDP with single countdown timers per source.
//!
//! Every input (pre-synaptic) and neuron (post-synaptic) owns one timer of
//! length `W = max(T_causal, T_acausal)`. A spike sets the timer to `W`; each
//! tick decrements it. While `τ > 0` the owner's last spike happened exactly
//! `W - τ` ticks ago, which is all the nearest-neighbor rule needs.
//!
//! Two engines share this state and the same weight arithmetic:
//!
//! - [`EngineKind::Forward`] reads only the forward (input → neurons) rows of
//!   the weight table. Acausal updates run when an input spikes; causal
//!   updates are deferred until the input's timer expires, or run early when
//!   the input spikes again before expiry.
//! - [`EngineKind::Oracle`] applies causal updates immediately on each
//!   neuron spike through a reverse (neuron → inputs) index.
//!
//! The forward engine misses a causal pair only when a neuron spikes more than
//! once inside one input window: the newer spike overwrites the neuron timer.
//! With refractory periods of at least `W` ticks that cannot happen and both
//! engines agree bit for bit.
//!
//! Within a tick, the order is fixed: input spikes (ascending index), neuron
//! spikes (ascending index), timer decrement, then input-timer expiries
//! (ascending index). Pairs of spikes in the same tick never update.

use alloc::vec;
use alloc::vec::Vec;

use crate::connectivity::{ConnectivityMatrix, TableKind, WeightTable};
use crate::neurocore::{self, CoreConfig, RunOptions, Stimulus, Trajectory};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelShape {
    /// Linear decay from the peak at `|Δt| = 0` to zero at the window edge.
    Ramp,
    /// Constant magnitude across the window.
    Box,
    /// `max_dw * exp(-(|Δt| - 1) / tau)`, peaking at `|Δt| = 1`.
    Exponential { tau: f64 },
}

/// Weight change as a function of the signed spike-time difference
/// `Δt = t_post - t_pre` in ticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StdpKernel {
    shape: KernelShape,
    t_causal: u32,
    t_acausal: u32,
    max_dw: f64,
}

impl StdpKernel {
    pub fn new(shape: KernelShape, t_causal: u32, t_acausal: u32, max_dw: f64) -> Result<Self> {
        if t_causal == 0 || t_acausal == 0 {
            return Err(Error::InvalidParameter("kernel windows must be at least one tick"));
        }
        if !(max_dw.is_finite() && max_dw > 0.0) {
            return Err(Error::InvalidParameter("kernel peak must be positive and finite"));
        }
        if let KernelShape::Exponential { tau } = shape {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(Error::InvalidParameter("exponential tau must be positive and finite"));
            }
        }
        Ok(Self { shape, t_causal, t_acausal, max_dw })
    }

    /// Anti-symmetric ramp with equal windows.
    pub fn ramp(window: u32, max_dw: f64) -> Result<Self> {
        Self::new(KernelShape::Ramp, window, window, max_dw)
    }

    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    pub fn t_causal(&self) -> u32 {
        self.t_causal
    }

    pub fn t_acausal(&self) -> u32 {
        self.t_acausal
    }

    pub fn max_dw(&self) -> f64 {
        self.max_dw
    }

    /// Timer length shared by both windows.
    pub fn window(&self) -> u32 {
        self.t_causal.max(self.t_acausal)
    }

    fn magnitude(&self, lag: u64, window: u32) -> f64 {
        match self.shape {
            KernelShape::Ramp => self.max_dw * (window as u64 - lag) as f64 / window as f64,
            KernelShape::Box => self.max_dw,
            KernelShape::Exponential { tau } => self.max_dw * libm::exp(-((lag - 1) as f64) / tau),
        }
    }

    /// Zero at `Δt = 0` and outside the open windows.
    pub fn dw(&self, dt: i64) -> f64 {
        let lag = dt.unsigned_abs();
        if dt > 0 && lag < self.t_causal as u64 {
            self.magnitude(lag, self.t_causal)
        } else if dt < 0 && lag < self.t_acausal as u64 {
            -self.magnitude(lag, self.t_acausal)
        } else {
            0.0
        }
    }
}

pub fn kernel_dw(kernel: &StdpKernel, dt: i64) -> f64 {
    kernel.dw(dt)
}

/// Saturation range for every engine update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightBounds {
    min: f64,
    max: f64,
}

impl Default for WeightBounds {
    /// Signed 9-bit range.
    fn default() -> Self {
        Self { min: -256.0, max: 255.0 }
    }
}

impl WeightBounds {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidParameter("weight bounds need finite w_min < w_max"));
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// `weight + dw` clamped into range; the flag reports a clamp.
    #[inline]
    pub fn apply(&self, weight: f64, dw: f64) -> (f64, bool) {
        let sum = weight + dw;
        if sum > self.max {
            (self.max, true)
        } else if sum < self.min {
            (self.min, true)
        } else {
            (sum, false)
        }
    }
}

/// Countdown timers for every input and neuron of one core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimerBank {
    window: u32,
    pre: Vec<u32>,
    post: Vec<u32>,
}

impl TimerBank {
    pub fn new(window: u32, inputs: usize, neurons: usize) -> Self {
        Self { window, pre: vec![0; inputs], post: vec![0; neurons] }
    }

    /// Bank with explicit timer values, each at most `window`.
    pub fn from_timers(window: u32, pre: Vec<u32>, post: Vec<u32>) -> Result<Self> {
        if pre.iter().chain(&post).any(|&t| t > window) {
            return Err(Error::InvalidParameter("timer value exceeds the window"));
        }
        Ok(Self { window, pre, post })
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn pre(&self, input: usize) -> u32 {
        self.pre[input]
    }

    pub fn post(&self, neuron: usize) -> u32 {
        self.post[neuron]
    }

    pub fn pre_timers(&self) -> &[u32] {
        &self.pre
    }

    pub fn post_timers(&self) -> &[u32] {
        &self.post
    }

    pub fn start_pre(&mut self, input: usize) {
        self.pre[input] = self.window;
    }

    pub fn start_post(&mut self, neuron: usize) {
        self.post[neuron] = self.window;
    }

    /// All timers at zero.
    pub fn is_idle(&self) -> bool {
        self.pre.iter().chain(&self.post).all(|&t| t == 0)
    }

    /// Decrements every running timer and returns the inputs whose timer
    /// just reached zero, ascending.
    pub fn tick(&mut self) -> Vec<usize> {
        let mut expired = Vec::new();
        self.tick_into(&mut expired);
        expired
    }

    /// Allocation-free form of [`TimerBank::tick`]; `expired` is cleared first.
    pub fn tick_into(&mut self, expired: &mut Vec<usize>) {
        expired.clear();
        for (i, t) in self.pre.iter_mut().enumerate() {
            if *t > 0 {
                *t -= 1;
                if *t == 0 {
                    expired.push(i);
                }
            }
        }
        for t in &mut self.post {
            *t = t.saturating_sub(1);
        }
    }
}

pub fn tick_timers(bank: &mut TimerBank) -> Vec<usize> {
    bank.tick()
}

/// Sorted spike ticks for every input and neuron of one core.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpikeTrace {
    pre: Vec<Vec<u64>>,
    post: Vec<Vec<u64>>,
}

impl SpikeTrace {
    pub fn new(inputs: usize, neurons: usize) -> Self {
        Self { pre: vec![Vec::new(); inputs], post: vec![Vec::new(); neurons] }
    }

    /// Validates that each list is strictly increasing. Source `k` in errors
    /// counts inputs first, then neurons.
    pub fn from_lists(pre: Vec<Vec<u64>>, post: Vec<Vec<u64>>) -> Result<Self> {
        for (source, list) in pre.iter().chain(&post).enumerate() {
            if list.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::UnsortedTrace { source });
            }
        }
        Ok(Self { pre, post })
    }

    pub fn inputs(&self) -> usize {
        self.pre.len()
    }

    pub fn neurons(&self) -> usize {
        self.post.len()
    }

    pub fn pre(&self, input: usize) -> &[u64] {
        &self.pre[input]
    }

    pub fn post(&self, neuron: usize) -> &[u64] {
        &self.post[neuron]
    }

    /// Consecutive spikes of every source are more than `t_ref` ticks apart.
    pub fn respects_refractory(&self, t_ref: u64) -> bool {
        self.pre.iter().chain(&self.post).all(|l| l.windows(2).all(|w| w[1] - w[0] > t_ref))
    }

    pub fn last_tick(&self) -> Option<u64> {
        self.pre.iter().chain(&self.post).filter_map(|l| l.last().copied()).max()
    }

    pub fn spike_count(&self) -> usize {
        self.pre.iter().chain(&self.post).map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EngineKind {
    /// Forward lookup only; causal updates deferred to input-timer expiry.
    Forward,
    /// Reverse lookup; causal updates on every neuron spike.
    Oracle,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub causal_updates: u64,
    pub acausal_updates: u64,
    /// Updates whose result was clamped by the weight bounds.
    pub saturations: u64,
}

#[inline]
fn apply(weight: &mut f64, dw: f64, bounds: &WeightBounds, stats: &mut EngineStats) {
    let (w, clamped) = bounds.apply(*weight, dw);
    *weight = w;
    stats.saturations += clamped as u64;
}

/// Plasticity state of one core.
#[derive(Debug, Clone)]
pub struct StdpEngine {
    kind: EngineKind,
    kernel: StdpKernel,
    bounds: WeightBounds,
    timers: TimerBank,
    /// Inputs connected to each neuron; only populated for the oracle.
    reverse: Vec<Vec<usize>>,
    expired: Vec<usize>,
    stats: EngineStats,
}

impl StdpEngine {
    pub fn new(kind: EngineKind, kernel: StdpKernel, bounds: WeightBounds, table: &WeightTable) -> Self {
        let dims = table.dims();
        let mut reverse = Vec::new();
        if kind == EngineKind::Oracle {
            reverse = vec![Vec::new(); dims.neurons()];
            for i in 0..dims.inputs() {
                for (j, _) in table.iter_row(i).expect("row in range") {
                    reverse[j].push(i);
                }
            }
        }
        Self {
            kind,
            kernel,
            bounds,
            timers: TimerBank::new(kernel.window(), dims.inputs(), dims.neurons()),
            reverse,
            expired: Vec::new(),
            stats: EngineStats::default(),
        }
    }

    pub fn kind(&self) -> EngineKind {
        self.kind
    }

    pub fn kernel(&self) -> &StdpKernel {
        &self.kernel
    }

    pub fn timers(&self) -> &TimerBank {
        &self.timers
    }

    pub fn stats(&self) -> EngineStats {
        self.stats
    }

    /// Input spike: early causal updates for a still-running input timer
    /// (forward engine only), acausal updates against every running neuron
    /// timer, then the input timer restarts.
    pub fn on_pre_spike(&mut self, table: &mut WeightTable, input: usize) {
        let window = self.timers.window() as i64;
        let tau_pre = self.timers.pre(input) as i64;
        let early_causal = self.kind == EngineKind::Forward && tau_pre > 0;
        let (kernel, bounds, timers, stats) = (&self.kernel, &self.bounds, &self.timers, &mut self.stats);
        table.for_each_in_row_mut(input, |j, w| {
            let tau_post = timers.post(j) as i64;
            if tau_post == 0 {
                return;
            }
            if early_causal && tau_post > tau_pre {
                let dw = kernel.dw(tau_post - tau_pre);
                if dw != 0.0 {
                    apply(w, dw, bounds, stats);
                    stats.causal_updates += 1;
                }
            }
            let dw = kernel.dw(-(window - tau_post));
            if dw != 0.0 {
                apply(w, dw, bounds, stats);
                stats.acausal_updates += 1;
            }
        });
        self.timers.start_pre(input);
    }

    /// Neuron spike: the oracle applies causal updates to every connected
    /// input with a running timer; both engines restart the neuron timer.
    pub fn on_post_spike(&mut self, table: &mut WeightTable, neuron: usize) {
        if self.kind == EngineKind::Oracle {
            let window = self.timers.window() as i64;
            for &i in &self.reverse[neuron] {
                let tau_pre = self.timers.pre(i) as i64;
                if tau_pre == 0 {
                    continue;
                }
                let dw = self.kernel.dw(window - tau_pre);
                if dw == 0.0 {
                    continue;
                }
                let (bounds, stats) = (&self.bounds, &mut self.stats);
                let present = table.update_weight(i, neuron, |w| apply(w, dw, bounds, stats));
                debug_assert!(present, "reverse index out of sync with table");
                stats.causal_updates += 1;
            }
        }
        self.timers.start_post(neuron);
    }

    /// Deferred causal updates for an input whose timer just expired. The
    /// input spiked `W - 1` ticks before the current tick, so a neuron timer
    /// value `τ` (after this tick's decrement) is exactly the spike-time
    /// difference.
    pub fn on_pre_expiry(&mut self, table: &mut WeightTable, input: usize) {
        let (kernel, bounds, timers, stats) = (&self.kernel, &self.bounds, &self.timers, &mut self.stats);
        table.for_each_in_row_mut(input, |j, w| {
            let tau_post = timers.post(j) as i64;
            if tau_post == 0 {
                return;
            }
            let dw = kernel.dw(tau_post);
            if dw != 0.0 {
                apply(w, dw, bounds, stats);
                stats.causal_updates += 1;
            }
        });
    }

    /// Decrements the timers and, for the forward engine, runs the deferred
    /// causal updates of every expiring input.
    pub fn end_tick(&mut self, table: &mut WeightTable) {
        let mut expired = core::mem::take(&mut self.expired);
        self.timers.tick_into(&mut expired);
        if self.kind == EngineKind::Forward {
            for &i in &expired {
                self.on_pre_expiry(table, i);
            }
        }
        self.expired = expired;
    }

    /// One full tick in canonical order. `pre` and `post` must be ascending
    /// without duplicates.
    pub fn process_tick(&mut self, table: &mut WeightTable, pre: &[usize], post: &[usize]) {
        debug_assert!(pre.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(post.windows(2).all(|w| w[0] < w[1]));
        for &i in pre {
            self.on_pre_spike(table, i);
        }
        for &j in post {
            self.on_post_spike(table, j);
        }
        self.end_tick(table);
    }
}

/// Offline nearest-neighbor STDP over complete spike lists, independent of
/// timers and tables.
///
/// For each connection, events are replayed in tick order with input spikes
/// ahead of neuron spikes in the same tick. An input spike pairs acausally
/// with the latest earlier neuron spike; a neuron spike pairs causally with
/// the latest input spike at or before it (a same-tick input spike shadows
/// older ones and contributes nothing).
pub fn trace_oracle(
    trace: &SpikeTrace,
    matrix: &ConnectivityMatrix,
    kernel: &StdpKernel,
    bounds: &WeightBounds,
) -> Result<ConnectivityMatrix> {
    let dims = matrix.dims();
    check_trace_fits(trace, matrix)?;
    let mut out = matrix.clone();
    let mut stats = EngineStats::default();
    for (i, j, w0) in matrix.iter() {
        let (pres, posts): (&[u64], &[u64]) =
            (trace.pre.get(i).map_or(&[], Vec::as_slice), trace.post.get(j).map_or(&[], Vec::as_slice));
        let mut w = w0;
        let (mut last_pre, mut last_post) = (None::<u64>, None::<u64>);
        let (mut a, mut b) = (0, 0);
        while a < pres.len() || b < posts.len() {
            let pre_first = b == posts.len() || (a < pres.len() && pres[a] <= posts[b]);
            if pre_first {
                let t = pres[a];
                a += 1;
                if let Some(q) = last_post {
                    let dw = kernel.dw(q as i64 - t as i64);
                    if dw != 0.0 {
                        apply(&mut w, dw, bounds, &mut stats);
                    }
                }
                last_pre = Some(t);
            } else {
                let t = posts[b];
                b += 1;
                if let Some(p) = last_pre {
                    let dw = kernel.dw(t as i64 - p as i64);
                    if dw != 0.0 {
                        apply(&mut w, dw, bounds, &mut stats);
                    }
                }
                last_post = Some(t);
            }
        }
        debug_assert!(i < dims.inputs() && j < dims.neurons());
        out.connect(i, j, w)?;
    }
    Ok(out)
}

fn check_trace_fits(trace: &SpikeTrace, matrix: &ConnectivityMatrix) -> Result<()> {
    let dims = matrix.dims();
    if let Some(i) = (dims.inputs()..trace.inputs()).find(|&i| !trace.pre[i].is_empty()) {
        return Err(Error::InputOutOfRange { input: i, inputs: dims.inputs() });
    }
    if let Some(j) = (dims.neurons()..trace.neurons()).find(|&j| !trace.post[j].is_empty()) {
        return Err(Error::NeuronOutOfRange { neuron: j, neurons: dims.neurons() });
    }
    Ok(())
}

/// Result of driving one engine with a spike trace.
#[derive(Debug, Clone)]
pub struct EngineRun {
    pub final_weights: ConnectivityMatrix,
    pub trajectory: Trajectory,
    pub stats: EngineStats,
    /// Stimulus ticks plus drain ticks.
    pub ticks_run: u64,
}

/// Drives a single core with `trace` for `duration_ticks` ticks plus the
/// drain. The forward engine runs on the index-based table and the oracle
/// on the crossbar.
pub fn run_engine(
    kind: EngineKind,
    trace: &SpikeTrace,
    matrix: &ConnectivityMatrix,
    kernel: &StdpKernel,
    bounds: &WeightBounds,
    duration_ticks: u64,
    options: &RunOptions,
) -> Result<EngineRun> {
    check_trace_fits(trace, matrix)?;
    let table_kind = match kind {
        EngineKind::Forward => TableKind::Indexed,
        EngineKind::Oracle => TableKind::Crossbar,
    };
    let config = CoreConfig::new(matrix.dims(), table_kind, *kernel, *bounds, kind);
    let mut cores = [neurocore::build_core(config, matrix)?];
    let stimulus = Stimulus::from_trace(0, trace);
    let mut report = neurocore::run(&mut cores, &stimulus, duration_ticks, options)?;
    let core = report.cores.pop().expect("one core");
    Ok(EngineRun {
        final_weights: core.final_weights,
        trajectory: core.trajectory,
        stats: core.stats,
        ticks_run: report.ticks_run,
    })
}
