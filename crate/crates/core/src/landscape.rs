//! Monte-Carlo estimates of the QWOA loss variance over random parameters.
//!
//! Sample `i` draws its `2p` angles from a ChaCha stream keyed by
//! `(seed, i)`, so results are bit-identical however the samples are spread
//! across threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problems::{Graph, GraphFamily, ProblemInstance};
use crate::sim::{evolve, LayerParams};
use crate::spectrum::CostSpectrum;

pub const MIN_SAMPLES: usize = 100;

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::domain(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn symmetric(half_width: f64) -> Result<Self> {
        Self::new(-half_width, half_width)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        rng.gen_range(self.lo..self.hi)
    }
}

/// Ranges the phase angles and walk times are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamRanges {
    pub gamma: Interval,
    pub time: Interval,
}

impl ParamRanges {
    /// `gamma` in `[-pi, pi]`, `t` in `[-pi/N * scale, pi/N * scale]`.
    /// The mixer has period `2 pi / N` in `t`, so `scale = 1` covers one
    /// period and the default `scale = N` gives `t` in `[-pi, pi]`.
    pub fn with_time_scale(spec: &CostSpectrum, scale: f64) -> Result<Self> {
        let n = spec.total() as f64;
        Ok(ParamRanges {
            gamma: Interval::symmetric(PI)?,
            time: Interval::symmetric(PI / n * scale)?,
        })
    }

    pub fn default_for(spec: &CostSpectrum) -> Self {
        Self::with_time_scale(spec, spec.total() as f64).expect("default ranges are valid")
    }

    /// Draws `p` layers: all phase angles first, then all walk times.
    pub fn draw(&self, p: usize, rng: &mut ChaCha8Rng) -> LayerParams {
        let gammas = (0..p).map(|_| self.gamma.sample(rng)).collect();
        let times = (0..p).map(|_| self.time.sample(rng)).collect();
        LayerParams::new(gammas, times).expect("finite draws")
    }
}

/// Random stream for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceEstimate {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub samples: usize,
    pub standard_error_of_variance: f64,
    pub ranges: ParamRanges,
    pub depth: usize,
    pub seed: u64,
}

/// One-pass accumulator of the first four central moments.
#[derive(Debug, Clone, Default)]
pub struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n;
        self.n += 1.0;
        let n = self.n;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2 - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn count(&self) -> usize {
        self.n as usize
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased variance; zero with fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2.0 {
            0.0
        } else {
            self.m2 / (self.n - 1.0)
        }
    }

    /// Large-sample standard error of the sample variance,
    /// `sqrt((mu4 - (n-3)/(n-1) sigma^4) / n)`.
    pub fn variance_standard_error(&self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        let n = self.n;
        let mu4 = self.m4 / n;
        let s2 = self.variance();
        ((mu4 - (n - 3.0) / (n - 1.0) * s2 * s2) / n).max(0.0).sqrt()
    }
}

/// Variance of the loss over `samples` random parameter draws at depth `p`.
pub fn estimate_variance(
    spec: &CostSpectrum,
    p: usize,
    samples: usize,
    ranges: &ParamRanges,
    seed: u64,
) -> Result<VarianceEstimate> {
    if p == 0 {
        return Err(Error::domain("variance estimation needs depth p >= 1"));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::domain(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    Interval::new(ranges.gamma.lo, ranges.gamma.hi)?;
    Interval::new(ranges.time.lo, ranges.time.hi)?;

    let losses: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let params = ranges.draw(p, &mut sample_rng(seed, i));
            evolve(spec, &params).loss()
        })
        .collect();
    let mut acc = Moments::default();
    losses.iter().for_each(|&l| acc.push(l));
    Ok(VarianceEstimate {
        mean: acc.mean(),
        variance: acc.variance(),
        samples,
        standard_error_of_variance: acc.variance_standard_error(),
        ranges: *ranges,
        depth: p,
        seed,
    })
}

/// How the marked set of a search family grows with `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarkedRule {
    Count(u64),
    /// `|M| = max(1, round(fraction * N))`.
    Fraction(f64),
}

/// Instance family indexed by a size parameter `s`: `N = 2^s` for search,
/// `n = s` vertices for graph problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InstanceFamily {
    Search(MarkedRule),
    MaxCut(GraphFamily),
    KDensest(GraphFamily, usize),
}

impl InstanceFamily {
    pub fn name(&self) -> String {
        match self {
            InstanceFamily::Search(MarkedRule::Count(c)) => format!("search-M{c}"),
            InstanceFamily::Search(MarkedRule::Fraction(f)) => format!("search-frac{f}"),
            InstanceFamily::MaxCut(g) => format!("maxcut-{}", g.as_str()),
            InstanceFamily::KDensest(g, k) => format!("kdensest-{}-k{k}", g.as_str()),
        }
    }

    pub fn instance(&self, size: usize) -> Result<ProblemInstance> {
        Ok(match *self {
            InstanceFamily::Search(rule) => {
                if size >= 63 {
                    return Err(Error::domain(format!("search size 2^{size} too large")));
                }
                let n = 1u64 << size;
                let marked = match rule {
                    MarkedRule::Count(c) => c,
                    MarkedRule::Fraction(f) => {
                        if !(f > 0.0 && f <= 1.0) {
                            return Err(Error::domain(format!("marked fraction must be in (0, 1], got {f}")));
                        }
                        ((f * n as f64).round() as u64).max(1)
                    }
                };
                ProblemInstance::Search { marked, space_size: n }
            }
            InstanceFamily::MaxCut(g) => ProblemInstance::MaxCut(Graph::family(g, size)?),
            InstanceFamily::KDensest(g, k) => ProblemInstance::KDensest { graph: Graph::family(g, size)?, k },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub family: String,
    pub size: usize,
    pub m: usize,
    pub n: u64,
    pub estimate: VarianceEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `ln(variance)` against size; `None` when fewer
    /// than two sizes have positive variance.
    pub log_variance_slope: Option<f64>,
    pub slope_standard_error: Option<f64>,
}

/// Variance estimates across a family, with the fitted log-variance slope.
/// Ranges are the defaults of [`ParamRanges::default_for`] per instance.
pub fn scaling_report(
    family: InstanceFamily,
    sizes: &[usize],
    p: usize,
    samples: usize,
    seed: u64,
    budget: u64,
) -> Result<ScalingReport> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let spec = family.instance(size)?.spectrum(budget)?;
        let estimate = estimate_variance(&spec, p, samples, &ParamRanges::default_for(&spec), seed)?;
        rows.push(ScalingRow {
            family: family.name(),
            size,
            m: spec.num_classes(),
            n: spec.total(),
            estimate,
        });
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.estimate.variance > 0.0)
        .map(|r| (r.size as f64, r.estimate.variance.ln()))
        .collect();
    let (slope, se) = match fit_line(&pts) {
        Some((s, e)) => (Some(s), e),
        None => (None, None),
    };
    Ok(ScalingReport {
        rows,
        log_variance_slope: slope,
        slope_standard_error: se,
    })
}

/// Ordinary least squares slope and its standard error (the latter needs at
/// least three points).
pub fn fit_line(pts: &[(f64, f64)]) -> Option<(f64, Option<f64>)> {
    let k = pts.len();
    if k < 2 {
        return None;
    }
    let kf = k as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let se = (k > 2).then(|| {
        let icept = my - slope * mx;
        let rss: f64 = pts.iter().map(|p| (p.1 - icept - slope * p.0).powi(2)).sum();
        (rss / (kf - 2.0) / sxx).sqrt()
    });
    Some((slope, se))
}
