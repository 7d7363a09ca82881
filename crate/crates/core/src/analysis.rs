//! Memory curves for the two table layouts and agreement statistics between
//! the forward engine and the reference.

use alloc::vec::Vec;

use crate::connectivity::{ConnectivityMatrix, IndexedTable, TableDims};
use crate::neurocore::Trajectory;
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Default Monte Carlo trial count for memory estimates.
pub const DEFAULT_TRIALS: usize = 32;

/// Forward-vs-reference differences above this count as large.
pub const LARGE_DIFF: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitsEstimate {
    pub mean: f64,
    /// Population standard deviation over trials.
    pub stddev: f64,
}

/// Mean indexed-table size over `trials` random matrices whose slots are
/// independently present with probability `density`.
///
/// Trial `k` draws its matrix from `SplitMix64::for_stream(seed, k)` in
/// row-major order, so the same uniforms are reused at every density and the
/// estimate is a smooth function of `density` for fixed `seed`.
pub fn expected_indexed_bits(dims: TableDims, density: f64, trials: usize, seed: u64) -> Result<BitsEstimate> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameter("density must lie in [0, 1]"));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required"));
    }
    let mut samples = Vec::with_capacity(trials);
    for k in 0..trials {
        let mut rng = SplitMix64::for_stream(seed, k as u64);
        let m = ConnectivityMatrix::bernoulli(dims, density, 0.0, &mut rng);
        samples.push(IndexedTable::encode(&m)?.memory_bits() as f64);
    }
    let mean = samples.iter().sum::<f64>() / trials as f64;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / trials as f64;
    Ok(BitsEstimate { mean, stddev: libm::sqrt(var) })
}

/// Closed-form expectation of the indexed size under independent presence.
///
/// A run entry precedes each present slot whose left neighbour is absent,
/// which gives `(B - 1) * d * (1 - d)` runs per row on average.
pub fn analytic_indexed_bits(dims: TableDims, density: f64) -> f64 {
    let (a, b) = (dims.inputs() as f64, dims.neurons() as f64);
    let (w, r) = (dims.weight_bits() as f64, dims.run_bits() as f64);
    let per_row = b * density * (1.0 + w) + (b - 1.0) * density * (1.0 - density) * (1.0 + r);
    dims.pointer_table_bits() as f64 + a * per_row
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub density: f64,
    pub crossbar_bits: u64,
    pub indexed_bits: BitsEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryCurve {
    pub dims: TableDims,
    pub points: Vec<CurvePoint>,
}

pub fn memory_curve(dims: TableDims, densities: &[f64], trials: usize, seed: u64) -> Result<MemoryCurve> {
    let points = densities
        .iter()
        .map(|&density| {
            Ok(CurvePoint {
                density,
                crossbar_bits: dims.crossbar_bits(),
                indexed_bits: expected_indexed_bits(dims, density, trials, seed)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(MemoryCurve { dims, points })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossover {
    /// Layouts cost the same at this density.
    At(f64),
    /// Indexed is no larger even when fully connected.
    IndexedAlwaysCheaper,
    /// Indexed is no smaller even when empty.
    CrossbarAlwaysCheaper,
}

impl Crossover {
    pub fn density(&self) -> Option<f64> {
        match self {
            Crossover::At(d) => Some(*d),
            _ => None,
        }
    }
}

/// Density where the expected indexed size meets the crossbar size, found by
/// bisection down to an interval of width `tolerance`; returns the midpoint.
pub fn critical_density(dims: TableDims, trials: usize, seed: u64, tolerance: f64) -> Result<Crossover> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::InvalidParameter("tolerance must be positive"));
    }
    let crossbar = dims.crossbar_bits() as f64;
    let excess = |d: f64| expected_indexed_bits(dims, d, trials, seed).map(|e| e.mean - crossbar);
    if excess(0.0)? >= 0.0 {
        return Ok(Crossover::CrossbarAlwaysCheaper);
    }
    if excess(1.0)? <= 0.0 {
        return Ok(Crossover::IndexedAlwaysCheaper);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Crossover::At(0.5 * (lo + hi)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynapseDiff {
    pub pre: usize,
    pub post: usize,
    pub w_oracle: f64,
    pub w_forward: f64,
    /// `w_oracle - w_forward`.
    pub diff: f64,
}

/// Unit-width bin `[low, high)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffStats {
    pub diffs: Vec<SynapseDiff>,
    pub histogram: Vec<HistogramBin>,
    /// `(q, value)` for q in 0.5, 0.9, 0.99 (nearest rank).
    pub quantiles: Vec<(f64, f64)>,
    pub max_diff: f64,
    pub min_diff: f64,
    pub max_abs_diff: f64,
    /// Fraction of synapses with `diff > LARGE_DIFF`.
    pub frac_gt_4: f64,
    pub all_nonneg: bool,
    /// Every synapse bit-identical.
    pub exact: bool,
}

impl DiffStats {
    pub fn fraction_above(&self, threshold: f64) -> f64 {
        if self.diffs.is_empty() {
            return 0.0;
        }
        self.diffs.iter().filter(|d| d.diff > threshold).count() as f64 / self.diffs.len() as f64
    }
}

/// Per-synapse `w_oracle - w_forward` with summary statistics.
pub fn diff_stats(forward: &ConnectivityMatrix, oracle: &ConnectivityMatrix) -> Result<DiffStats> {
    if forward.dims() != oracle.dims() {
        return Err(Error::Mismatch("weight matrices differ in dimensions"));
    }
    let mut diffs = Vec::new();
    for (i, j, w_forward) in forward.iter() {
        let w_oracle = oracle.get(i, j).ok_or(Error::Mismatch("synapse sets differ"))?;
        diffs.push(SynapseDiff { pre: i, post: j, w_oracle, w_forward, diff: w_oracle - w_forward });
    }
    if diffs.len() != oracle.present_count() {
        return Err(Error::Mismatch("synapse sets differ"));
    }

    let mut sorted: Vec<f64> = diffs.iter().map(|d| d.diff).collect();
    sorted.sort_by(f64::total_cmp);
    let quantile = |q: f64| -> f64 {
        if sorted.is_empty() {
            return 0.0;
        }
        let rank = libm::ceil(q * sorted.len() as f64).max(1.0) as usize;
        sorted[rank.min(sorted.len()) - 1]
    };
    let quantiles = [0.5, 0.9, 0.99].iter().map(|&q| (q, quantile(q))).collect();
    let min_diff = sorted.first().copied().unwrap_or(0.0);
    let max_diff = sorted.last().copied().unwrap_or(0.0);

    let mut histogram = Vec::new();
    if let (Some(&lo), Some(&hi)) = (sorted.first(), sorted.last()) {
        let first = libm::floor(lo);
        let bins = (libm::floor(hi) - first) as usize + 1;
        histogram =
            (0..bins).map(|k| HistogramBin { low: first + k as f64, high: first + k as f64 + 1.0, count: 0 }).collect();
        for d in &sorted {
            let k = (libm::floor(*d) - first) as usize;
            histogram[k].count += 1;
        }
    }

    let exact = diffs.iter().all(|d| d.w_oracle.to_bits() == d.w_forward.to_bits());
    let mut stats = DiffStats {
        histogram,
        quantiles,
        max_diff,
        min_diff,
        max_abs_diff: max_diff.abs().max(min_diff.abs()),
        frac_gt_4: 0.0,
        all_nonneg: min_diff >= 0.0,
        exact,
        diffs,
    };
    stats.frac_gt_4 = stats.fraction_above(LARGE_DIFF);
    Ok(stats)
}

/// Aligned oracle and forward weight series for each sampled synapse.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryComparison {
    pub pairs: Vec<(usize, usize)>,
    pub ticks: Vec<u64>,
    /// Per pair, per tick: `(w_oracle, w_forward)`.
    pub series: Vec<Vec<(f64, f64)>>,
    /// Per pair: largest `|w_oracle - w_forward|` over the grid.
    pub sup_norm: Vec<f64>,
}

impl TrajectoryComparison {
    /// `w_oracle - w_forward` over time for pair number `pair`.
    pub fn divergence(&self, pair: usize) -> impl Iterator<Item = f64> + '_ {
        self.series[pair].iter().map(|(o, f)| o - f)
    }
}

pub fn trajectory_compare(forward: &Trajectory, oracle: &Trajectory) -> Result<TrajectoryComparison> {
    if forward.ticks() != oracle.ticks() {
        return Err(Error::Mismatch("trajectories sampled on different tick grids"));
    }
    if forward.pairs() != oracle.pairs() {
        return Err(Error::Mismatch("trajectories sample different synapses"));
    }
    let pairs = forward.pairs().to_vec();
    let mut series = Vec::with_capacity(pairs.len());
    let mut sup_norm = Vec::with_capacity(pairs.len());
    for p in 0..pairs.len() {
        let s: Vec<(f64, f64)> = oracle.series(p).zip(forward.series(p)).collect();
        sup_norm.push(s.iter().map(|(o, f)| (o - f).abs()).fold(0.0, f64::max));
        series.push(s);
    }
    Ok(TrajectoryComparison { pairs, ticks: forward.ticks().to_vec(), series, sup_norm })
}
