//! Exact QWOA evolution in the cost-class space.
//!
//! Every feasible solution in a class carries the same amplitude throughout
//! the circuit, so the state is one complex number per class. The mixer is
//! the all-ones matrix `J` (the complete-graph walk up to a global phase),
//! whose exponential has the closed form `I + (e^{-itN} - 1)/N * J`.
//!
//! Phases use the minimization-form costs of the spectrum, i.e. the problem
//! Hamiltonian of a maximization problem is `-C`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemInstance;
use crate::spectrum::{CostSpectrum, Sense};

/// Largest feasible space the dense oracle accepts.
pub const DENSE_LIMIT: u64 = 4096;

/// Phase angles and walk times of a `p`-layer circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    gammas: Vec<f64>,
    times: Vec<f64>,
}

impl LayerParams {
    pub fn new(gammas: Vec<f64>, times: Vec<f64>) -> Result<Self> {
        if gammas.len() != times.len() {
            return Err(Error::domain(format!(
                "{} phase angles but {} walk times",
                gammas.len(),
                times.len()
            )));
        }
        if gammas.iter().chain(&times).any(|v| !v.is_finite()) {
            return Err(Error::domain("layer parameters must be finite"));
        }
        Ok(LayerParams { gammas, times })
    }

    pub fn empty() -> Self {
        LayerParams { gammas: vec![], times: vec![] }
    }

    /// Grover-equivalent angles: `gamma = pi`, `t = pi / N` in every layer.
    pub fn grover(p: usize, space_size: u64) -> Self {
        let t = std::f64::consts::PI / space_size as f64;
        LayerParams {
            gammas: vec![std::f64::consts::PI; p],
            times: vec![t; p],
        }
    }

    /// Splits a flat `[gamma_1..gamma_p, t_1..t_p]` vector.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if !flat.len().is_multiple_of(2) {
            return Err(Error::domain("flat parameter vector must have even length"));
        }
        let p = flat.len() / 2;
        Self::new(flat[..p].to_vec(), flat[p..].to_vec())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.times).copied().collect()
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn layers(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.gammas.iter().copied().zip(self.times.iter().copied())
    }

    /// Appends an identity layer (`gamma = t = 0`).
    pub fn with_identity_layer(&self) -> Self {
        let mut out = self.clone();
        out.gammas.push(0.0);
        out.times.push(0.0);
        out
    }
}

/// Compressed QWOA state: `amps[i]` is the amplitude of each individual
/// solution in class `i`, so `sum_i d_i |amps[i]|^2 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassState<'a> {
    spectrum: &'a CostSpectrum,
    amps: Vec<Complex64>,
}

impl<'a> ClassState<'a> {
    /// Uniform superposition over the feasible set.
    pub fn uniform(spectrum: &'a CostSpectrum) -> Self {
        let a = Complex64::new(1.0 / (spectrum.total() as f64).sqrt(), 0.0);
        ClassState {
            spectrum,
            amps: vec![a; spectrum.num_classes()],
        }
    }

    /// Wraps explicit amplitudes; they must be normalized to within `1e-12`.
    pub fn from_amplitudes(spectrum: &'a CostSpectrum, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != spectrum.num_classes() {
            return Err(Error::domain(format!(
                "{} amplitudes for {} classes",
                amps.len(),
                spectrum.num_classes()
            )));
        }
        let st = ClassState { spectrum, amps };
        let drift = (st.norm_sqr() - 1.0).abs();
        if drift > 1e-12 {
            return Err(Error::domain(format!("state not normalized (|norm^2 - 1| = {drift:e})")));
        }
        Ok(st)
    }

    pub fn spectrum(&self) -> &'a CostSpectrum {
        self.spectrum
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps
            .iter()
            .zip(self.spectrum.multiplicities())
            .map(|(a, &d)| d as f64 * a.norm_sqr())
            .sum()
    }

    /// Probability mass of each class, `d_i |a_i|^2`.
    pub fn class_probabilities(&self) -> Vec<f64> {
        self.amps
            .iter()
            .zip(self.spectrum.multiplicities())
            .map(|(a, &d)| d as f64 * a.norm_sqr())
            .collect()
    }

    /// `a_i <- e^{-i gamma x_i} a_i`.
    pub fn apply_phase(&mut self, gamma: f64) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            let x = self.spectrum.internal_cost(i);
            *a *= Complex64::from_polar(1.0, -gamma * x);
        }
    }

    /// `a_i <- a_i + (e^{-itN} - 1)/N * sum_j d_j a_j`.
    pub fn apply_mixer(&mut self, t: f64) {
        let n = self.spectrum.total() as f64;
        let overlap: Complex64 = self
            .amps
            .iter()
            .zip(self.spectrum.multiplicities())
            .map(|(a, &d)| a * d as f64)
            .sum();
        let coeff = (Complex64::from_polar(1.0, -t * n) - 1.0) / n;
        let shift = coeff * overlap;
        for a in &mut self.amps {
            *a += shift;
        }
    }

    /// Expected cost in the problem's own units.
    ///
    /// Computed relative to the first class so that a single-class spectrum
    /// returns its cost exactly.
    pub fn loss(&self) -> f64 {
        let costs = self.spectrum.costs();
        let base = costs[0];
        base + self
            .class_probabilities()
            .iter()
            .zip(costs)
            .skip(1)
            .map(|(p, &x)| p * (x - base))
            .sum::<f64>()
    }

    /// Probability of measuring an optimal solution.
    pub fn success_probability(&self) -> f64 {
        if self.spectrum.num_classes() == 1 {
            return 1.0;
        }
        let (idx, d) = self.spectrum.optimal_class();
        d as f64 * self.amps[idx].norm_sqr()
    }

    /// Probability of measuring a solution at least as good as `target`.
    pub fn probability_reaching(&self, target: f64) -> f64 {
        let classes = self.spectrum.classes_reaching(target);
        if classes.len() == self.spectrum.num_classes() {
            return 1.0;
        }
        let probs = self.class_probabilities();
        classes.iter().map(|&i| probs[i]).sum()
    }
}

/// Runs the layered circuit from the uniform state: phase then mixer per layer.
pub fn evolve<'a>(spectrum: &'a CostSpectrum, params: &LayerParams) -> ClassState<'a> {
    let mut st = ClassState::uniform(spectrum);
    for (gamma, t) in params.layers() {
        st.apply_phase(gamma);
        st.apply_mixer(t);
    }
    st
}

/// Full feasible-space state vector produced by [`dense_evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub amps: Vec<Complex64>,
    /// Cost of each basis state, in problem units.
    pub costs: Vec<f64>,
    pub sense: Sense,
}

impl DenseState {
    pub fn loss(&self) -> f64 {
        self.amps.iter().zip(&self.costs).map(|(a, c)| a.norm_sqr() * c).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }
}

/// Entry `(row, col)` of `exp(-i t J)` for the `n x n` all-ones matrix `J`,
/// from its spectral decomposition `J = n |s><s|`.
pub fn mixer_entry(n: usize, t: f64, row: usize, col: usize) -> Complex64 {
    let proj = Complex64::from_polar(1.0, -t * n as f64) - 1.0;
    let delta = if row == col { 1.0 } else { 0.0 };
    Complex64::new(delta, 0.0) + proj / n as f64
}

/// Evolves the explicit `|S'|`-dimensional state vector with a per-solution
/// diagonal phase and an explicit dense mixer product. Validation oracle for
/// the compressed simulator.
pub fn dense_evolve(inst: &ProblemInstance, params: &LayerParams) -> Result<DenseState> {
    let sols = inst.feasible_solutions(DENSE_LIMIT)?;
    let costs: Vec<f64> = sols.into_iter().map(|(_, c)| c).collect();
    dense_evolve_costs(&costs, inst.sense(), params)
}

/// [`dense_evolve`] on an explicit list of per-solution costs.
pub fn dense_evolve_costs(costs: &[f64], sense: Sense, params: &LayerParams) -> Result<DenseState> {
    let n = costs.len();
    if n == 0 {
        return Err(Error::domain("empty feasible space"));
    }
    if n as u64 > DENSE_LIMIT {
        return Err(Error::resource(format!("dense simulation limited to {DENSE_LIMIT} states, got {n}")));
    }
    let mut amps = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let mut next = vec![Complex64::new(0.0, 0.0); n];
    for (gamma, t) in params.layers() {
        for (a, &c) in amps.iter_mut().zip(costs) {
            *a *= Complex64::from_polar(1.0, -gamma * sense.sign() * c);
        }
        for (row, out) in next.iter_mut().enumerate() {
            *out = (0..n).map(|col| mixer_entry(n, t, row, col) * amps[col]).sum();
        }
        std::mem::swap(&mut amps, &mut next);
    }
    Ok(DenseState {
        amps,
        costs: costs.to_vec(),
        sense,
    })
}
