//! Minimal QWOA depth to reach a target success probability.
//!
//! Success probability is maximized over the `2p` angles with a multistart
//! Nelder-Mead search. Walk times are optimized in units of `1/N`
//! (`tau = N t`), where the mixer has period `2 pi` just like the phase
//! operator for integer costs; otherwise the landscape oscillates on a scale
//! of `1/N` in `t` and a unit simplex cannot resolve it.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::landscape::sample_rng;
use crate::sim::{evolve, LayerParams};
use crate::spectrum::CostSpectrum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Stop once every vertex is within this distance of the best one.
    pub x_tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            initial_step: 0.5,
            x_tol: 1e-8,
            max_evals: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Minimizes `objective` with the standard Nelder-Mead simplex method
/// (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
pub fn nelder_mead<F>(objective: F, start: &[f64], opts: &NelderMeadOptions) -> Result<Minimum>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = start.len();
    if dim == 0 {
        return Err(Error::domain("Nelder-Mead needs at least one dimension"));
    }
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| -> Result<f64> {
        evals.set(evals.get() + 1);
        let v = objective(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(format!("objective returned {v} at {x:?}")))
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(start)?;
    simplex.push((start.to_vec(), f0));
    for i in 0..dim {
        let mut x = start.to_vec();
        x[i] += opts.initial_step;
        let f = eval(&x)?;
        simplex.push((x, f));
    }

    let order = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal);
    loop {
        simplex.sort_by(order);
        let best = &simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if diameter < opts.x_tol || evals.get() >= opts.max_evals {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let along = |c: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(m, w)| m + c * (m - w))
                .collect()
        };

        let xr = along(1.0);
        let fr = eval(&xr)?;
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe)?;
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(0.5);
            let fc = eval(&xc)?;
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc)?;
            (xc, fc)
        };
        if fc < fr.min(worst.1) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = anchor.iter().zip(&v.0).map(|(a, b)| a + 0.5 * (b - a)).collect();
            let f = eval(&x)?;
            *v = (x, f);
        }
    }
    simplex.sort_by(order);
    let (x, value) = simplex.swap_remove(0);
    Ok(Minimum { x, value, evals: evals.get() })
}

/// What counts as success.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Target {
    /// Measuring an optimal solution.
    Optimal,
    /// Measuring a solution whose cost is at least as good as the given one.
    Cost(f64),
}

impl Target {
    fn probability(&self, spec: &CostSpectrum, params: &LayerParams) -> f64 {
        let st = evolve(spec, params);
        match *self {
            Target::Optimal => st.success_probability(),
            Target::Cost(c) => st.probability_reaching(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthOptions {
    pub restarts: usize,
    pub seed: u64,
    pub target: Target,
    pub nelder_mead: NelderMeadOptions,
}

impl Default for DepthOptions {
    fn default() -> Self {
        DepthOptions {
            restarts: 20,
            seed: 0,
            target: Target::Optimal,
            nelder_mead: NelderMeadOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthResult {
    pub p: usize,
    pub best_success: f64,
    pub best_params: LayerParams,
    pub restarts_used: usize,
    pub evaluations: usize,
}

fn to_layer_params(flat: &[f64], n: f64) -> LayerParams {
    let p = flat.len() / 2;
    LayerParams::new(flat[..p].to_vec(), flat[p..].iter().map(|tau| tau / n).collect())
        .expect("finite optimizer iterate")
}

/// Maximizes the success probability at depth `p` from `restarts` seeded
/// uniform starts (`gamma`, `N t` in `[-pi, pi]`), plus `warm_start` if
/// given. Ties on success are broken by the lexicographically smallest
/// parameter vector.
pub fn best_success_at_depth(
    spec: &CostSpectrum,
    p: usize,
    opts: &DepthOptions,
    warm_start: Option<&LayerParams>,
) -> Result<DepthResult> {
    if p == 0 {
        return Err(Error::domain("depth must be at least 1"));
    }
    if opts.restarts == 0 {
        return Err(Error::domain("need at least one restart"));
    }
    if let Some(w) = warm_start {
        if w.depth() != p {
            return Err(Error::domain(format!("warm start has depth {}, expected {p}", w.depth())));
        }
    }
    let n = spec.total() as f64;
    let mut starts: Vec<Vec<f64>> = (0..opts.restarts as u64)
        .map(|r| {
            let mut rng = sample_rng(opts.seed, r);
            (0..2 * p).map(|_| rng.gen_range(-PI..PI)).collect()
        })
        .collect();
    if let Some(w) = warm_start {
        let mut flat = w.gammas().to_vec();
        flat.extend(w.times().iter().map(|t| t * n));
        starts.push(flat);
    }

    let target = opts.target;
    let runs: Vec<Minimum> = starts
        .par_iter()
        .map(|x0| {
            nelder_mead(
                |x| -target.probability(spec, &to_layer_params(x, n)),
                x0,
                &opts.nelder_mead,
            )
        })
        .collect::<Result<_>>()?;

    let evaluations = runs.iter().map(|r| r.evals).sum();
    let best = runs
        .into_iter()
        .min_by(|a, b| {
            a.value
                .partial_cmp(&b.value)
                .unwrap_or(Ordering::Equal)
                .then_with(|| lexicographic(&a.x, &b.x))
        })
        .expect("at least one run");
    Ok(DepthResult {
        p,
        best_success: (-best.value).clamp(0.0, 1.0),
        best_params: to_layer_params(&best.x, n),
        restarts_used: starts.len(),
        evaluations,
    })
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DepthOutcome {
    Reached { p: usize, history: Vec<DepthResult> },
    NotReached { history: Vec<DepthResult> },
}

impl DepthOutcome {
    pub fn depth(&self) -> Option<usize> {
        match self {
            DepthOutcome::Reached { p, .. } => Some(*p),
            DepthOutcome::NotReached { .. } => None,
        }
    }

    pub fn history(&self) -> &[DepthResult] {
        match self {
            DepthOutcome::Reached { history, .. } | DepthOutcome::NotReached { history } => history,
        }
    }
}

/// Smallest `p <= p_max` whose best success reaches `threshold`, scanning
/// upward from `p = 1`. Each depth is also warm-started from the previous
/// optimum padded with an identity layer, so the recorded best success never
/// decreases with `p`.
pub fn minimal_depth(spec: &CostSpectrum, threshold: f64, p_max: usize, opts: &DepthOptions) -> Result<DepthOutcome> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::domain(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let mut history: Vec<DepthResult> = Vec::new();
    for p in 1..=p_max {
        let warm = history.last().map(|r| r.best_params.with_identity_layer());
        let res = best_success_at_depth(spec, p, opts, warm.as_ref())?;
        let done = res.best_success >= threshold;
        history.push(res);
        if done {
            return Ok(DepthOutcome::Reached { p, history });
        }
    }
    Ok(DepthOutcome::NotReached { history })
}

/// `sqrt(|S'| / |S_opt|)`: the order of the Grover-style lower bound on the
/// optimal depth (constant factor taken as 1).
pub fn lower_bound_depth(spec: &CostSpectrum) -> f64 {
    let (_, d_opt) = spec.optimal_class();
    (spec.total() as f64 / d_opt as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingOutcome {
    pub budget: u64,
    pub trials: u64,
    pub frequency: f64,
    /// `1 - (1 - d_opt/N)^budget`.
    pub closed_form: f64,
    /// Binomial standard deviation of `frequency` around `closed_form`.
    pub sigma: f64,
}

/// Probability that at least one of `budget` uniform samples is optimal.
pub fn sampling_success_probability(spec: &CostSpectrum, budget: u64) -> f64 {
    let (_, d_opt) = spec.optimal_class();
    let q = d_opt as f64 / spec.total() as f64;
    -(budget as f64 * (-q).ln_1p()).exp_m1()
}

/// Monte-Carlo run of the random-sampling baseline: each trial draws up to
/// `budget` uniform feasible solutions and succeeds on the first optimal one.
pub fn random_sampling_trials(spec: &CostSpectrum, budget: u64, trials: u64, seed: u64) -> Result<SamplingOutcome> {
    if budget == 0 || trials == 0 {
        return Err(Error::domain("budget and trials must be at least 1"));
    }
    let (_, d_opt) = spec.optimal_class();
    let n = spec.total();
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = sample_rng(seed, t);
            // optimal solutions occupy labels [0, d_opt)
            u64::from((0..budget).any(|_| rng.gen_range(0..n) < d_opt))
        })
        .sum();
    let closed_form = sampling_success_probability(spec, budget);
    Ok(SamplingOutcome {
        budget,
        trials,
        frequency: hits as f64 / trials as f64,
        closed_form,
        sigma: (closed_form * (1.0 - closed_form) / trials as f64).sqrt(),
    })
}
