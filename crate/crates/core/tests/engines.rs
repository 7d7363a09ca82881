use proptest::prelude::*;
use spikeforge_core::connectivity::{ConnectivityMatrix, TableDims, TableKind};
use spikeforge_core::neurocore::{build_core, CoreConfig, RunOptions};
use spikeforge_core::plasticity::{
    run_engine, trace_oracle, EngineKind, KernelShape, SpikeTrace, StdpKernel, WeightBounds,
};
use spikeforge_core::rng::SplitMix64;
use spikeforge_core::stimulus::{core_trace, StimulusConfig};

/// Random trains with every inter-spike gap at least `min_gap`.
fn random_trace(dims: TableDims, p: f64, min_gap: u64, duration: u64, seed: u64) -> SpikeTrace {
    let mut rng = SplitMix64::new(seed);
    let mut train = || {
        let mut out = Vec::new();
        let mut t = 0;
        while t < duration {
            if rng.bernoulli(p) {
                out.push(t);
                t += min_gap;
            } else {
                t += 1;
            }
        }
        out
    };
    let pre = (0..dims.inputs()).map(|_| train()).collect();
    let post = (0..dims.neurons()).map(|_| train()).collect();
    SpikeTrace::from_lists(pre, post).unwrap()
}

fn random_matrix(dims: TableDims, density: f64, bounds: &WeightBounds, seed: u64) -> ConnectivityMatrix {
    let mut rng = SplitMix64::new(seed);
    let mut m = ConnectivityMatrix::empty(dims);
    for i in 0..dims.inputs() {
        for j in 0..dims.neurons() {
            if rng.bernoulli(density) {
                let w = bounds.min() + rng.next_f64() * (bounds.max() - bounds.min());
                m.connect(i, j, w).unwrap();
            }
        }
    }
    m
}

fn kernel_from(shape: u8, t_causal: u32, t_acausal: u32, max_dw: f64) -> StdpKernel {
    let shape = match shape % 3 {
        0 => KernelShape::Ramp,
        1 => KernelShape::Box,
        _ => KernelShape::Exponential { tau: 3.0 },
    };
    StdpKernel::new(shape, t_causal, t_acausal, max_dw).unwrap()
}

fn last_before(ticks: &[u64], bound: u64) -> Option<u64> {
    ticks.iter().rev().copied().find(|&t| t < bound)
}

/// Update sequence the forward engine is expected to apply to one synapse,
/// derived from the spike lists alone.
///
/// Each input spike `p` contributes at most one causal pair: the latest
/// neuron spike `q` with `p < q < min(p + W, p_next)`. It is applied at
/// `p_next` ahead of that spike's acausal update if the input fires again
/// within the window, otherwise at the end of tick `p + W - 1`. Each input
/// spike also pairs acausally with the latest neuron spike strictly before it.
/// Returns `(tick, phase, dt)` in application order.
fn forward_pairs(pres: &[u64], posts: &[u64], window: u64) -> Vec<(u64, u8, i64)> {
    let mut out = Vec::new();
    for (k, &p) in pres.iter().enumerate() {
        let next = pres.get(k + 1).copied();
        if let Some(q) = last_before(posts, p) {
            out.push((p, 1, -((p - q) as i64)));
        }
        let rearmed = next.is_some_and(|n| n - p < window);
        let limit = if rearmed { next.unwrap() } else { p + window };
        if let Some(q) = last_before(posts, limit).filter(|&q| q > p) {
            let at = if rearmed { (next.unwrap(), 0) } else { (p + window - 1, 2) };
            out.push((at.0, at.1, (q - p) as i64));
        }
    }
    out.sort_by_key(|&(t, phase, _)| (t, phase));
    out
}

/// Causal and acausal pairs the trace oracle forms for one synapse.
fn oracle_pairs(pres: &[u64], posts: &[u64]) -> Vec<(u64, u8, i64)> {
    let mut out = Vec::new();
    for &p in pres {
        if let Some(q) = last_before(posts, p) {
            out.push((p, 1, -((p - q) as i64)));
        }
    }
    for &q in posts {
        if let Some(p) = last_before(pres, q + 1) {
            out.push((q, 3, (q - p) as i64));
        }
    }
    out.sort_by_key(|&(t, phase, _)| (t, phase));
    out
}

fn replay(w0: f64, pairs: &[(u64, u8, i64)], kernel: &StdpKernel, bounds: &WeightBounds) -> f64 {
    pairs.iter().fold(w0, |w, &(_, _, dt)| {
        let dw = kernel.dw(dt);
        if dw == 0.0 {
            w
        } else {
            bounds.apply(w, dw).0
        }
    })
}

fn engine_weights(
    kind: EngineKind,
    trace: &SpikeTrace,
    m: &ConnectivityMatrix,
    kernel: &StdpKernel,
    bounds: &WeightBounds,
    duration: u64,
) -> ConnectivityMatrix {
    run_engine(kind, trace, m, kernel, bounds, duration, &RunOptions::default()).unwrap().final_weights
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn forward_engine_follows_pair_accounting(
        a in 1usize..6, b in 1usize..6, shape in 0u8..3,
        tc in 1u32..12, ta in 1u32..12, rate in 0.02f64..0.4,
        tight in any::<bool>(), seed in any::<u64>(),
    ) {
        let dims = TableDims::new(a, b, 16).unwrap();
        let kernel = kernel_from(shape, tc, ta, 1.5);
        let bounds = if tight { WeightBounds::new(-3.0, 2.0).unwrap() } else { WeightBounds::new(-1e4, 1e4).unwrap() };
        let m = random_matrix(dims, 0.7, &bounds, seed);
        let trace = random_trace(dims, rate, 1, 300, seed ^ 7);
        let fwd = engine_weights(EngineKind::Forward, &trace, &m, &kernel, &bounds, 300);
        let window = kernel.window() as u64;
        for (i, j, w0) in m.iter() {
            let expect = replay(w0, &forward_pairs(trace.pre(i), trace.post(j), window), &kernel, &bounds);
            prop_assert_eq!(fwd.get(i, j).unwrap().to_bits(), expect.to_bits(), "synapse ({}, {})", i, j);
        }
    }

    #[test]
    fn oracle_engine_equals_trace_oracle(
        a in 1usize..8, b in 1usize..8, shape in 0u8..3,
        tc in 1u32..15, ta in 1u32..15, rate in 0.01f64..0.5,
        density in 0.0f64..1.0, tight in any::<bool>(), seed in any::<u64>(),
    ) {
        let dims = TableDims::new(a, b, 16).unwrap();
        let kernel = kernel_from(shape, tc, ta, 1.0);
        let bounds = if tight { WeightBounds::new(-2.0, 2.0).unwrap() } else { WeightBounds::default() };
        let m = random_matrix(dims, density, &bounds, seed);
        let trace = random_trace(dims, rate, 1, 200, seed ^ 3);
        let engine = engine_weights(EngineKind::Oracle, &trace, &m, &kernel, &bounds, 200);
        let offline = trace_oracle(&trace, &m, &kernel, &bounds).unwrap();
        prop_assert!(engine.bit_eq(&offline));
        for (i, j, w0) in m.iter() {
            let expect = replay(w0, &oracle_pairs(trace.pre(i), trace.post(j)), &kernel, &bounds);
            prop_assert_eq!(offline.get(i, j).unwrap().to_bits(), expect.to_bits());
        }
    }

    #[test]
    fn refractory_at_least_window_is_exact(
        a in 1usize..6, b in 1usize..6, shape in 0u8..3,
        tc in 1u32..10, ta in 1u32..10, extra in 0u64..5,
        tight in any::<bool>(), seed in any::<u64>(),
    ) {
        let dims = TableDims::new(a, b, 16).unwrap();
        let kernel = kernel_from(shape, tc, ta, 1.0);
        let bounds = if tight { WeightBounds::new(-1.0, 1.5).unwrap() } else { WeightBounds::default() };
        let m = random_matrix(dims, 0.8, &bounds, seed);
        let gap = kernel.window() as u64 + 1 + extra;
        let trace = random_trace(dims, 0.3, gap, 400, seed ^ 5);
        let fwd = engine_weights(EngineKind::Forward, &trace, &m, &kernel, &bounds, 400);
        let orc = engine_weights(EngineKind::Oracle, &trace, &m, &kernel, &bounds, 400);
        prop_assert!(fwd.bit_eq(&orc));
    }

    #[test]
    fn forward_never_exceeds_oracle_without_saturation(
        a in 1usize..6, b in 1usize..6, window in 2u32..25, rate in 0.02f64..0.4, seed in any::<u64>(),
    ) {
        let dims = TableDims::new(a, b, 16).unwrap();
        let kernel = StdpKernel::ramp(window, 1.0).unwrap();
        let bounds = WeightBounds::new(-1e4, 1e4).unwrap();
        let m = random_matrix(dims, 1.0, &WeightBounds::new(-5.0, 5.0).unwrap(), seed);
        let trace = random_trace(dims, rate, 1, 300, seed ^ 11);
        let fwd = engine_weights(EngineKind::Forward, &trace, &m, &kernel, &bounds, 300);
        let orc = engine_weights(EngineKind::Oracle, &trace, &m, &kernel, &bounds, 300);
        for (i, j, wf) in fwd.iter() {
            prop_assert!(orc.get(i, j).unwrap() >= wf);
        }
    }
}

/// Forward pairs are a sub-multiset of oracle pairs, and the weight gap is
/// the summed kernel value of the lost causal pairs.
#[test]
fn weight_gap_equals_lost_causal_pairs() {
    let dims = TableDims::new(16, 16, 16).unwrap();
    let kernel = StdpKernel::ramp(20, 1.0).unwrap();
    let bounds = WeightBounds::new(-1e4, 1e4).unwrap();
    let stim = StimulusConfig { rate_hz: 30.0, tick_ms: 1.0, refractory_ticks: 2, duration_ticks: 20_000, seed: 4 };
    let trace = core_trace(&stim, dims).unwrap();
    let m = ConnectivityMatrix::full(dims, 0.0);
    let fwd = engine_weights(EngineKind::Forward, &trace, &m, &kernel, &bounds, 20_000);
    let orc = engine_weights(EngineKind::Oracle, &trace, &m, &kernel, &bounds, 20_000);
    let mut lost_total = 0usize;
    for (i, j, _) in m.iter() {
        let nonzero_dts = |v: Vec<(u64, u8, i64)>| {
            let mut d: Vec<i64> = v.into_iter().map(|p| p.2).filter(|&dt| kernel.dw(dt) != 0.0).collect();
            d.sort();
            d
        };
        let (pres, posts) = (trace.pre(i), trace.post(j));
        let forward = nonzero_dts(forward_pairs(pres, posts, 20));
        let oracle = nonzero_dts(oracle_pairs(pres, posts));
        let mut lost = oracle.clone();
        for dt in &forward {
            let k = lost.iter().position(|x| x == dt).expect("forward pair missing from oracle pairs");
            lost.remove(k);
        }
        assert!(lost.iter().all(|&dt| dt > 0), "only causal pairs can be lost");
        lost_total += lost.len();
        let gap: f64 = lost.iter().map(|&dt| kernel.dw(dt)).sum();
        let observed = orc.get(i, j).unwrap() - fwd.get(i, j).unwrap();
        assert!((observed - gap).abs() < 1e-9, "({i}, {j}): observed {observed}, lost pairs sum {gap}");
    }
    assert!(lost_total > 0);
}

#[test]
fn timers_encode_time_since_last_spike() {
    let dims = TableDims::new(5, 4, 9).unwrap();
    let kernel = StdpKernel::new(KernelShape::Ramp, 7, 11, 1.0).unwrap();
    let w = kernel.window() as u64;
    let trace = random_trace(dims, 0.15, 1, 500, 99);
    for kind in [EngineKind::Forward, EngineKind::Oracle] {
        let cfg = CoreConfig::new(dims, TableKind::Indexed, kernel, WeightBounds::default(), kind);
        let mut core = build_core(cfg, &ConnectivityMatrix::full(dims, 0.0)).unwrap();
        let (mut last_pre, mut last_post) = (vec![None::<u64>; 5], vec![None::<u64>; 4]);
        for t in 0..520 {
            let pre: Vec<usize> = (0..5).filter(|&i| trace.pre(i).contains(&t)).collect();
            let post: Vec<usize> = (0..4).filter(|&j| trace.post(j).contains(&t)).collect();
            core.step(t, &pre, &post).unwrap();
            pre.iter().for_each(|&i| last_pre[i] = Some(t));
            post.iter().for_each(|&j| last_post[j] = Some(t));
            // Timer values as seen at the start of tick t + 1.
            let expected = |last: Option<u64>| match last {
                Some(s) if t + 1 - s < w => (w - (t + 1 - s)) as u32,
                _ => 0,
            };
            for (i, &last) in last_pre.iter().enumerate() {
                assert_eq!(core.timers().pre(i), expected(last), "{kind:?} input {i} tick {t}");
            }
            for (j, &last) in last_post.iter().enumerate() {
                assert_eq!(core.timers().post(j), expected(last), "{kind:?} neuron {j} tick {t}");
            }
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let dims = TableDims::new(8, 8, 9).unwrap();
    let kernel = StdpKernel::ramp(20, 1.0).unwrap();
    let stim = StimulusConfig { rate_hz: 20.0, tick_ms: 1.0, refractory_ticks: 3, duration_ticks: 5_000, seed: 17 };
    let options = RunOptions { sample_period: Some(100), ..RunOptions::default() };
    let run = |seed| {
        let trace = core_trace(&StimulusConfig { seed, ..stim }, dims).unwrap();
        let m = ConnectivityMatrix::full(dims, 0.0);
        run_engine(EngineKind::Forward, &trace, &m, &kernel, &WeightBounds::default(), 5_000, &options).unwrap()
    };
    let (x, y) = (run(17), run(17));
    assert!(x.final_weights.bit_eq(&y.final_weights));
    assert_eq!(x.trajectory, y.trajectory);
    assert!(!x.final_weights.bit_eq(&run(18).final_weights));
}
