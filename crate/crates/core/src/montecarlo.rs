//! Sample-level simulation of the received-signal model, used as an
//! independent oracle for the analytic densities: seeded sampling of the
//! interference / interference-plus-noise / received components, histogram
//! estimation, and Kullback-Leibler distances between binned laws.
//!
//! Reproducibility: sampling is chunked; each chunk derives its own ChaCha12
//! stream from (seed, stream id, chunk index) via SplitMix64, so batches are
//! bit-identical for a given seed regardless of thread count.

use crate::error::{Error, Result};
use crate::geometry::{link_budget, Point, Scenario};
use crate::quad::{gl15, integrate_singular_at_zero};
use crate::util;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Which component of the received signal a batch holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentTag {
    /// I: co-channel interference only.
    Interference,
    /// Z: interference plus thermal noise.
    InterferencePlusNoise,
    /// Y: desired signal plus interference plus noise.
    Received,
}

impl ComponentTag {
    fn stream_id(self) -> u64 {
        match self {
            ComponentTag::Interference => 1,
            ComponentTag::InterferencePlusNoise => 2,
            ComponentTag::Received => 3,
        }
    }

    fn include_noise(self) -> bool {
        !matches!(self, ComponentTag::Interference)
    }

    fn include_desired(self) -> bool {
        matches!(self, ComponentTag::Received)
    }
}

/// A reproducible batch of real-valued samples.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
    pub tag: ComponentTag,
}

impl SampleBatch {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
            / (self.values.len() - 1) as f64
    }
}

/// Model parameters for sampling without going через a geometric scenario.
#[derive(Debug, Clone)]
pub struct SampleSpec<'a> {
    pub desired_power: f64,
    pub powers: &'a [f64],
    pub loadings: &'a [f64],
    pub noise_variance: f64,
}

const SAMPLE_CHUNK: usize = 1 << 14;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-(seed, stream, chunk) generator.
pub(crate) fn chunk_rng(seed: u64, stream: u64, chunk: u64) -> ChaCha12Rng {
    let mut state = seed
        ^ stream.wrapping_mul(0xA076_1D64_78BD_642F)
        ^ chunk.wrapping_mul(0xE703_7ED1_A0B4_28DB);
    let mut key = [0u8; 32];
    for i in 0..4 {
        key[8 * i..8 * (i + 1)].copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

fn draw_one(rng: &mut ChaCha12Rng, spec: &SampleSpec<'_>, tag: ComponentTag) -> f64 {
    let mut y = 0.0;
    if tag.include_desired() && spec.desired_power > 0.0 {
        let h0: f64 = rng.sample(StandardNormal);
        let x0: f64 = rng.sample(StandardNormal);
        y += spec.desired_power.sqrt() * h0 * x0;
    }
    for (&e, &p) in spec.powers.iter().zip(spec.loadings) {
        let occupied = p > 0.0 && rng.gen::<f64>() < p;
        if occupied {
            let h: f64 = rng.sample(StandardNormal);
            let x: f64 = rng.sample(StandardNormal);
            y += e.sqrt() * h * x;
        }
    }
    if tag.include_noise() && spec.noise_variance > 0.0 {
        let n: f64 = rng.sample(StandardNormal);
        y += spec.noise_variance.sqrt() * n;
    }
    y
}

fn sample_impl(
    spec: &SampleSpec<'_>,
    tag: ComponentTag,
    n: usize,
    seed: u64,
    parallel: bool,
) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::invalid("sample count must be > 0"));
    }
    if spec.powers.len() != spec.loadings.len() {
        return Err(Error::invalid("powers and loadings must have equal length"));
    }
    if !(spec.desired_power >= 0.0) || !(spec.noise_variance >= 0.0) {
        return Err(Error::invalid("powers and variances must be >= 0"));
    }
    let n_chunks = n.div_ceil(SAMPLE_CHUNK);
    let parts = util::map_indices(n_chunks, parallel, |ci| {
        let lo = ci * SAMPLE_CHUNK;
        let len = SAMPLE_CHUNK.min(n - lo);
        let mut rng = chunk_rng(seed, tag.stream_id(), ci as u64);
        let mut vals = Vec::with_capacity(len);
        for _ in 0..len {
            vals.push(draw_one(&mut rng, spec, tag));
        }
        vals
    });
    let mut values = Vec::with_capacity(n);
    for part in parts {
        values.extend_from_slice(&part);
    }
    Ok(SampleBatch { values, seed, tag })
}

/// Draw `n` samples of the tagged component for an MS position in a scenario.
pub fn sample(
    scenario: &Scenario,
    ms_position: Point,
    tag: ComponentTag,
    n: usize,
    seed: u64,
) -> Result<SampleBatch> {
    let budget = link_budget(scenario, ms_position)?;
    let spec = SampleSpec {
        desired_power: budget.desired_power(),
        powers: budget.interferer_powers(),
        loadings: &scenario.loading_rates,
        noise_variance: scenario.noise_variance,
    };
    sample_impl(&spec, tag, n, seed, true)
}

/// Sequential twin of [`sample`]; reference path for the benchmark suite.
pub fn sample_sequential(
    scenario: &Scenario,
    ms_position: Point,
    tag: ComponentTag,
    n: usize,
    seed: u64,
) -> Result<SampleBatch> {
    let budget = link_budget(scenario, ms_position)?;
    let spec = SampleSpec {
        desired_power: budget.desired_power(),
        powers: budget.interferer_powers(),
        loadings: &scenario.loading_rates,
        noise_variance: scenario.noise_variance,
    };
    sample_impl(&spec, tag, n, seed, false)
}

/// Draw `n` samples directly from model parameters.
pub fn sample_spec(
    spec: &SampleSpec<'_>,
    tag: ComponentTag,
    n: usize,
    seed: u64,
) -> Result<SampleBatch> {
    sample_impl(spec, tag, n, seed, true)
}

/// A law on uniform bins over [lo, hi]; probabilities sum to one.
#[derive(Debug, Clone)]
pub struct BinnedLaw {
    pub lo: f64,
    pub hi: f64,
    pub probs: Vec<f64>,
}

impl BinnedLaw {
    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.probs.len() as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.bin_width()
    }

    /// Index of the bin containing x, clamped to the range.
    pub fn bin_index(&self, x: f64) -> usize {
        let w = self.bin_width();
        let i = ((x - self.lo) / w).floor();
        (i.max(0.0) as usize).min(self.probs.len() - 1)
    }

    pub fn variance(&self) -> f64 {
        let mean: f64 = self
            .probs
            .iter()
            .enumerate()
            .map(|(i, &p)| p * self.bin_center(i))
            .sum();
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let d = self.bin_center(i) - mean;
                p * d * d
            })
            .sum()
    }
}

/// Histogram estimate of a sampled law; out-of-range mass lands in the end
/// bins and is reported separately.
#[derive(Debug, Clone)]
pub struct EmpiricalPdf {
    pub law: BinnedLaw,
    pub sample_count: usize,
    pub below_range: usize,
    pub above_range: usize,
}

impl EmpiricalPdf {
    /// Density estimate at x (bin probability over bin width).
    pub fn density_at(&self, x: f64) -> f64 {
        self.law.probs[self.law.bin_index(x)] / self.law.bin_width()
    }
}

/// Normalized histogram of a batch over `bins` uniform bins spanning [lo, hi].
pub fn empirical_pdf(batch: &SampleBatch, bins: usize, lo: f64, hi: f64) -> Result<EmpiricalPdf> {
    if batch.values.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    if bins < 10 {
        return Err(Error::invalid("at least 10 bins required"));
    }
    if !(hi > lo) {
        return Err(Error::invalid("histogram range must have hi > lo"));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    let mut below = 0usize;
    let mut above = 0usize;
    for &v in &batch.values {
        let raw = ((v - lo) / width).floor();
        let idx = if raw < 0.0 {
            below += 1;
            0
        } else if raw >= bins as f64 {
            above += 1;
            bins - 1
        } else {
            raw as usize
        };
        counts[idx] += 1;
    }
    let n = batch.values.len() as f64;
    let probs = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(EmpiricalPdf {
        law: BinnedLaw { lo, hi, probs },
        sample_count: batch.values.len(),
        below_range: below,
        above_range: above,
    })
}

/// Discretize a continuous density (plus optional atom at zero) onto bins.
///
/// Each bin mass comes from GL-15 quadrature of the density; the bin holding
/// zero handles an integrable K0-type singularity by dyadic refinement, and
/// carries the atom. Mass outside [lo, hi] (integrated out to `tail_extent`
/// beyond each edge) accumulates into the end bins. The result is normalized.
pub fn binned_from_density<F: Fn(f64) -> f64>(
    density: F,
    atom: f64,
    singular_at_zero: bool,
    bins: usize,
    lo: f64,
    hi: f64,
    tail_extent: f64,
) -> Result<BinnedLaw> {
    if bins < 10 {
        return Err(Error::invalid("at least 10 bins required"));
    }
    if !(hi > lo) {
        return Err(Error::invalid("range must have hi > lo"));
    }
    let width = (hi - lo) / bins as f64;
    let (gn, gw) = gl15();
    let integrate_bin = |a: f64, b: f64| -> f64 {
        if singular_at_zero && a < 0.0 && b > 0.0 {
            integrate_singular_at_zero(&density, b)
                + integrate_singular_at_zero(|x| density(-x), -a)
        } else if singular_at_zero && (a == 0.0 || b == 0.0) {
            if a == 0.0 {
                integrate_singular_at_zero(&density, b)
            } else {
                integrate_singular_at_zero(|x| density(-x), -a)
            }
        } else {
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            gn.iter()
                .zip(gw)
                .map(|(&t, &w)| w * density(c + h * t))
                .sum::<f64>()
                * h
        }
    };
    let mut probs = vec![0.0; bins];
    for (i, slot) in probs.iter_mut().enumerate() {
        let a = lo + width * i as f64;
        *slot = integrate_bin(a, a + width);
    }
    if tail_extent > 0.0 {
        let panels = 64;
        let step = tail_extent / panels as f64;
        for k in 0..panels {
            probs[bins - 1] += integrate_bin(hi + step * k as f64, hi + step * (k + 1) as f64);
            probs[0] += integrate_bin(lo - step * (k + 1) as f64, lo - step * k as f64);
        }
    }
    // atom lands in the bin containing zero
    let zero_bin = (((0.0 - lo) / width).floor().max(0.0) as usize).min(bins - 1);
    probs[zero_bin] += atom;
    let total: f64 = probs.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Numeric("binned law has no mass".into()));
    }
    for p in &mut probs {
        *p /= total;
    }
    Ok(BinnedLaw { lo, hi, probs })
}

/// Zero-mean Gaussian law discretized on the same grid as `like`.
pub fn gaussian_binned(variance: f64, like: &BinnedLaw) -> Result<BinnedLaw> {
    if !(variance > 0.0) {
        return Err(Error::invalid("Gaussian variance must be > 0"));
    }
    let norm = 1.0 / (2.0 * std::f64::consts::PI * variance).sqrt();
    binned_from_density(
        |x| norm * (-0.5 * x * x / variance).exp(),
        0.0,
        false,
        like.probs.len(),
        like.lo,
        like.hi,
        12.0 * variance.sqrt(),
    )
}

/// Kullback-Leibler distance sum f_i ln(f_i / g_i) in nats, with 0 ln 0 = 0.
///
/// The laws must share a bin grid. A bin where f has mass but g has none is
/// an infinite divergence and is reported distinctly.
pub fn kl_distance(f: &BinnedLaw, g: &BinnedLaw) -> Result<f64> {
    if f.probs.len() != g.probs.len()
        || (f.lo - g.lo).abs() > 1e-9 * (f.hi - f.lo)
        || (f.hi - g.hi).abs() > 1e-9 * (f.hi - f.lo)
    {
        return Err(Error::GridMismatch(format!(
            "f: {} bins on [{}, {}], g: {} bins on [{}, {}]",
            f.probs.len(),
            f.lo,
            f.hi,
            g.probs.len(),
            g.lo,
            g.hi
        )));
    }
    let mut acc = 0.0;
    for (i, (&fi, &gi)) in f.probs.iter().zip(&g.probs).enumerate() {
        if fi > 0.0 {
            if gi <= 0.0 {
                return Err(Error::InfiniteDivergence { bin: i, f_mass: fi });
            }
            acc += fi * (fi / gi).ln();
        }
    }
    // Gibbs: nonnegative for normalized laws; clip rounding-level negatives
    if acc < 0.0 && acc > -1e-12 {
        acc = 0.0;
    }
    Ok(acc)
}

/// KL distance of a binned law against the zero-mean Gaussian of variance
/// `variance` discretized on the same grid.
pub fn kl_vs_matched_gaussian(law: &BinnedLaw, variance: f64) -> Result<f64> {
    kl_distance(law, &gaussian_binned(variance, law)?)
}

/// Default binning for KL comparisons: 401 uniform bins over +-8 sigma.
pub const KL_DEFAULT_BINS: usize = 401;
pub const KL_DEFAULT_HALF_SIGMAS: f64 = 8.0;
