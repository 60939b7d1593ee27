//! Seedable Monte Carlo ground truth.
//!
//! Every trial draws from its own ChaCha8 substream: the generator is seeded
//! from the user seed and the trial index selects the stream, so trial `i`
//! sees the same random numbers regardless of how trials are scheduled
//! across threads. Successes are counted as integers, so the estimate is
//! bit-for-bit reproducible for a fixed `(seed, trials, scenario)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::model::{CylinderGeometry, NetworkScenario};
use crate::par::{self, Execution};

/// Seed used by the CLI when none is given.
pub const DEFAULT_SEED: u64 = 42;

/// 97.5% standard normal quantile, for 95% confidence half-widths.
pub const Z_95: f64 = 1.959_963_984_540_054;

// Stream-space tags keep different samplers off each other's substreams.
const COVERAGE_STREAMS: u64 = 0;
const PAIR_STREAMS: u64 = 1 << 62;
const INDEPENDENT_STREAMS: u64 = 1 << 60;

const PAIRS_PER_STREAM: usize = 8192;

pub type Point = [f64; 3];

/// Random generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationEstimate {
    pub mean: f64,
    pub ci_half_width: f64,
    pub successes: u64,
    pub trials: u64,
    pub seed: u64,
    pub scenario: Option<NetworkScenario>,
}

impl SimulationEstimate {
    fn from_counts(successes: u64, trials: u64, seed: u64, scenario: Option<NetworkScenario>) -> Self {
        let p = successes as f64 / trials as f64;
        SimulationEstimate {
            mean: p,
            ci_half_width: Z_95 * (p * (1.0 - p) / trials as f64).sqrt(),
            successes,
            trials,
            seed,
            scenario,
        }
    }

    /// Binomial standard error `√(p̂(1−p̂)/n)`.
    pub fn std_error(&self) -> f64 {
        self.ci_half_width / Z_95
    }
}

/// Uniform point in the cylinder `{x² + y² ≤ R², 0 ≤ z ≤ H}`.
pub fn sample_point<R: Rng + ?Sized>(rng: &mut R, geom: &CylinderGeometry) -> Point {
    let r = geom.radius() * rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    let z = geom.height() * rng.random::<f64>();
    let (s, c) = theta.sin_cos();
    [r * c, r * s, z]
}

pub fn distance(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Gamma(shape m, scale 1/m) power gain sampler (unit mean).
#[derive(Debug, Clone, Copy)]
pub struct FadingSampler(Gamma<f64>);

impl FadingSampler {
    pub fn new(m: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 0.5) {
            return Err(Error::domain("Nakagami parameter", format!("m = {m} must be >= 0.5")));
        }
        Gamma::new(m, 1.0 / m)
            .map(FadingSampler)
            .map_err(|e| Error::domain("Nakagami parameter", e.to_string()))
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.0.sample(rng)
    }
}

pub fn sample_fading_gain<R: Rng + ?Sized>(rng: &mut R, m: f64) -> Result<f64> {
    Ok(FadingSampler::new(m)?.sample(rng))
}

/// Which node of each deployment acts as the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverChoice {
    /// Node 0; nodes are exchangeable so this loses no generality.
    First,
    /// A uniformly drawn node.
    Random,
}

pub fn simulate_coverage(scenario: &NetworkScenario, trials: u64, seed: u64) -> Result<SimulationEstimate> {
    simulate_coverage_with(scenario, trials, seed, ReceiverChoice::First, Execution::default())
}

/// Estimates `P(SIR > β)`: per trial place `N` nodes, serve the receiver from
/// its nearest neighbour and sum the faded interference of the other `N − 2`.
pub fn simulate_coverage_with(
    scenario: &NetworkScenario,
    trials: u64,
    seed: u64,
    receiver: ReceiverChoice,
    exec: Execution,
) -> Result<SimulationEstimate> {
    if trials == 0 {
        return Err(Error::domain("simulate_coverage", "trials must be >= 1"));
    }
    let fading = FadingSampler::new(scenario.channel().m())?;
    let geom = *scenario.geometry();
    let n = scenario.nodes() as usize;
    let alpha = scenario.channel().alpha();
    let beta = scenario.beta();
    let successes = par::count_range(exec, trials, |trial| {
        let mut rng = substream(seed, COVERAGE_STREAMS | trial);
        let nodes: Vec<Point> = (0..n).map(|_| sample_point(&mut rng, &geom)).collect();
        let rx = match receiver {
            ReceiverChoice::First => 0,
            ReceiverChoice::Random => rng.random_range(0..n),
        };
        trial_covered(&mut rng, &nodes, rx, &fading, alpha, beta)
    });
    Ok(SimulationEstimate::from_counts(successes, trials, seed, Some(*scenario)))
}

/// Monte Carlo of the independent-link model behind the analytic engine:
/// each of the `N − 1` receiver-to-node distances is a fresh pair distance,
/// independent of the others. Differs from [`simulate_coverage`] only in
/// dropping the dependence created by the shared receiver position.
pub fn simulate_independent_links(
    scenario: &NetworkScenario,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<SimulationEstimate> {
    if trials == 0 {
        return Err(Error::domain("simulate_independent_links", "trials must be >= 1"));
    }
    let fading = FadingSampler::new(scenario.channel().m())?;
    let geom = *scenario.geometry();
    let n = scenario.nodes() as usize;
    let alpha = scenario.channel().alpha();
    let beta = scenario.beta();
    let successes = par::count_range(exec, trials, |trial| {
        let mut rng = substream(seed, INDEPENDENT_STREAMS | trial);
        let mut nodes = Vec::with_capacity(n);
        nodes.push([0.0; 3]);
        for _ in 1..n {
            let a = sample_point(&mut rng, &geom);
            let b = sample_point(&mut rng, &geom);
            // place the node at the sampled separation along the x axis
            nodes.push([distance(&a, &b), 0.0, 0.0]);
        }
        trial_covered(&mut rng, &nodes, 0, &fading, alpha, beta)
    });
    Ok(SimulationEstimate::from_counts(successes, trials, seed, Some(*scenario)))
}

fn trial_covered(rng: &mut ChaCha8Rng, nodes: &[Point], rx: usize, fading: &FadingSampler, alpha: f64, beta: f64) -> bool {
    let mut serving = f64::INFINITY;
    let mut signal = 0.0;
    let mut interference = 0.0;
    // each transmitter gets a gain in index order, serving or not
    for (i, p) in nodes.iter().enumerate() {
        if i == rx {
            continue;
        }
        let d = distance(&nodes[rx], p);
        let power = fading.sample(rng) * d.powf(-alpha);
        if d < serving {
            interference += signal;
            serving = d;
            signal = power;
        } else {
            interference += power;
        }
    }
    // I = 0 (no interferers) counts as covered
    interference == 0.0 || signal > beta * interference
}

/// `pairs` i.i.d. distances between two uniform points in the cylinder.
pub fn sample_pair_distances(geom: &CylinderGeometry, pairs: usize, seed: u64, exec: Execution) -> Vec<f64> {
    let chunks = pairs.div_ceil(PAIRS_PER_STREAM);
    let per_chunk = par::map_range(exec, chunks, |c| {
        let mut rng = substream(seed, PAIR_STREAMS | c as u64);
        let len = PAIRS_PER_STREAM.min(pairs - c * PAIRS_PER_STREAM);
        (0..len)
            .map(|_| {
                let a = sample_point(&mut rng, geom);
                let b = sample_point(&mut rng, geom);
                distance(&a, &b)
            })
            .collect::<Vec<f64>>()
    });
    per_chunk.concat()
}

/// Normalized histogram of simulated pair distances over `[0, d_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceHistogram {
    pub bin_centers: Vec<f64>,
    pub bin_width: f64,
    /// Fraction of pairs per bin.
    pub mass: Vec<f64>,
    /// `mass / bin_width`, comparable to `f_L` at the bin centers.
    pub density: Vec<f64>,
    pub pairs: usize,
    pub seed: u64,
}

pub fn empirical_distance_histogram(
    geom: &CylinderGeometry,
    pairs: usize,
    bins: usize,
    seed: u64,
) -> Result<DistanceHistogram> {
    if pairs < 10_000 {
        return Err(Error::domain("empirical_distance_histogram", format!("pairs = {pairs} < 10^4")));
    }
    if bins == 0 {
        return Err(Error::domain("empirical_distance_histogram", "bins must be >= 1"));
    }
    let samples = sample_pair_distances(geom, pairs, seed, Execution::default());
    let d_max = geom.max_distance();
    let width = d_max / bins as f64;
    let mut counts = vec![0u64; bins];
    for d in samples {
        let b = ((d / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let mass: Vec<f64> = counts.iter().map(|&c| c as f64 / pairs as f64).collect();
    Ok(DistanceHistogram {
        bin_centers: (0..bins).map(|i| (i as f64 + 0.5) * width).collect(),
        bin_width: width,
        density: mass.iter().map(|m| m / width).collect(),
        mass,
        pairs,
        seed,
    })
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and `cdf`.
/// Sorts `samples` in place.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
