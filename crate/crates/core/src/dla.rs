//! Dynamical Lie algebra of the QWOA generators `{i H_C, i J}`.
//!
//! Group the feasible basis states by cost class. Every nested commutator of
//! the generators is then a multiple of `i H_C` plus a matrix that is constant
//! on each of the `m x m` blocks of that partition. [`BlockElement`] stores
//! exactly that: the coefficient of `i H_C` and the `m x m` matrix of block
//! values. Brackets and inner products are evaluated in this compressed form
//! with the class multiplicities as weights, so the cost of a closure depends
//! on `m` only, never on `N`.
//!
//! The algebra is a real vector space of skew-Hermitian matrices; all
//! dimensions are real dimensions. [`dense_lie_closure`] recomputes the
//! dimension from explicit `N x N` matrices and exists to validate the
//! compressed engine.

use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemInstance;
use crate::spectrum::CostSpectrum;

/// Default relative acceptance threshold for new basis directions.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Candidates whose residual norm falls below this are always rejected.
pub const ABS_FLOOR: f64 = 1e-12;
/// Largest feasible space accepted by [`dense_lie_closure`].
pub const DENSE_DLA_LIMIT: u64 = 64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `i * alpha * H_C + Lambda(block)`, with `block` the row-major `m x m`
/// matrix of block values. `block` is skew-Hermitian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockElement {
    pub alpha: f64,
    #[serde(rename = "B", with = "complex_pairs")]
    pub block: Vec<Complex64>,
}

impl BlockElement {
    /// Checks squareness and the skew-Hermitian block constraint (to `1e-12`
    /// relative to the largest entry).
    pub fn new(alpha: f64, block: Vec<Complex64>) -> Result<Self> {
        let m = (block.len() as f64).sqrt().round() as usize;
        if m * m != block.len() || m == 0 {
            return Err(Error::domain(format!("block of length {} is not a square matrix", block.len())));
        }
        if !alpha.is_finite() || block.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("block element has non-finite entries"));
        }
        let scale = block.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..m {
            for j in 0..m {
                if (block[i * m + j] + block[j * m + i].conj()).norm() > 1e-12 * scale {
                    return Err(Error::domain(format!("block ({i},{j}) violates B_ji = -conj(B_ij)")));
                }
            }
        }
        Ok(BlockElement { alpha, block })
    }

    pub fn zero(m: usize) -> Self {
        BlockElement {
            alpha: 0.0,
            block: vec![Complex64::new(0.0, 0.0); m * m],
        }
    }

    /// `i H_C`. When `H_C` is itself block-constant (every class with non-zero
    /// cost is a singleton) it is stored inside the block part instead, which
    /// keeps the representation injective.
    pub fn cost_generator(spec: &CostSpectrum) -> Self {
        let m = spec.num_classes();
        let injective = (0..m).any(|k| spec.multiplicities()[k] >= 2 && spec.internal_cost(k) != 0.0);
        let mut e = Self::zero(m);
        if injective {
            e.alpha = 1.0;
        } else {
            for k in 0..m {
                e.block[k * m + k] = I * spec.internal_cost(k);
            }
        }
        e
    }

    /// `i J`: every block equal to `i`.
    pub fn mixer_generator(spec: &CostSpectrum) -> Self {
        let m = spec.num_classes();
        BlockElement {
            alpha: 0.0,
            block: vec![I; m * m],
        }
    }

    pub fn dim(&self) -> usize {
        (self.block.len() as f64).sqrt().round() as usize
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &BlockElement) {
        self.alpha += a * other.alpha;
        for (x, y) in self.block.iter_mut().zip(&other.block) {
            *x += y * a;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.alpha *= a;
        for x in &mut self.block {
            *x *= a;
        }
    }

    /// Expands to the explicit `N x N` row-major matrix, basis states ordered
    /// class by class.
    pub fn expand(&self, spec: &CostSpectrum) -> Vec<Complex64> {
        let labels = class_labels(spec);
        let n = labels.len();
        let m = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for (r, &cr) in labels.iter().enumerate() {
            for (c, &cc) in labels.iter().enumerate() {
                out[r * n + c] = self.block[cr * m + cc];
            }
            out[r * n + r] += I * (self.alpha * spec.internal_cost(cr));
        }
        out
    }
}

fn class_labels(spec: &CostSpectrum) -> Vec<usize> {
    spec.multiplicities()
        .iter()
        .enumerate()
        .flat_map(|(k, &d)| std::iter::repeat_n(k, d as usize))
        .collect()
}

mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

fn check_dims(spec: &CostSpectrum, elems: &[&BlockElement]) -> Result<usize> {
    let m = spec.num_classes();
    for e in elems {
        if e.block.len() != m * m {
            return Err(Error::domain(format!(
                "element has {} block entries, spectrum has m={m}",
                e.block.len()
            )));
        }
    }
    Ok(m)
}

/// `Re Tr[A^dagger E]` of the expanded matrices.
pub fn inner(spec: &CostSpectrum, a: &BlockElement, e: &BlockElement) -> Result<f64> {
    check_dims(spec, &[a, e])?;
    Ok(inner_unchecked(spec, a, e))
}

fn inner_unchecked(spec: &CostSpectrum, a: &BlockElement, e: &BlockElement) -> f64 {
    let m = spec.num_classes();
    let d = spec.multiplicities();
    let mut block_part = 0.0;
    for i in 0..m {
        let di = d[i] as f64;
        for j in 0..m {
            let z = a.block[i * m + j].conj() * e.block[i * m + j];
            block_part += di * d[j] as f64 * z.re;
        }
    }
    let mut cross = 0.0;
    let mut diag = 0.0;
    for k in 0..m {
        let w = d[k] as f64 * spec.internal_cost(k);
        cross += w * (a.alpha * e.block[k * m + k].im + e.alpha * a.block[k * m + k].im);
        diag += w * spec.internal_cost(k);
    }
    block_part + cross + a.alpha * e.alpha * diag
}

/// Commutator `[A, E]` in compressed form. The result never has an `i H_C`
/// component.
pub fn bracket(spec: &CostSpectrum, a: &BlockElement, e: &BlockElement) -> Result<BlockElement> {
    check_dims(spec, &[a, e])?;
    Ok(bracket_unchecked(spec, a, e))
}

fn bracket_unchecked(spec: &CostSpectrum, a: &BlockElement, e: &BlockElement) -> BlockElement {
    let m = spec.num_classes();
    let d = spec.multiplicities();
    let mut out = BlockElement::zero(m);
    for i in 0..m {
        let xi = spec.internal_cost(i);
        for j in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..m {
                let dk = d[k] as f64;
                acc += (a.block[i * m + k] * e.block[k * m + j] - e.block[i * m + k] * a.block[k * m + j]) * dk;
            }
            let gap = xi - spec.internal_cost(j);
            if gap != 0.0 {
                acc += I * (gap * (a.alpha * e.block[i * m + j].re - e.alpha * a.block[i * m + j].re))
                    - gap * (a.alpha * e.block[i * m + j].im - e.alpha * a.block[i * m + j].im);
            }
            out.block[i * m + j] = acc;
        }
    }
    out
}

/// Orthonormal basis of a computed Lie algebra.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LieBasis {
    elements: Vec<BlockElement>,
}

impl LieBasis {
    /// Real dimension.
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[BlockElement] {
        &self.elements
    }

    /// Wraps externally supplied elements; orthonormality is checked by the
    /// consumers that rely on it.
    pub fn from_elements(elements: Vec<BlockElement>) -> Self {
        LieBasis { elements }
    }

    /// Gram matrix under [`inner`], row-major.
    pub fn gram(&self, spec: &CostSpectrum) -> Result<Vec<f64>> {
        let refs: Vec<&BlockElement> = self.elements.iter().collect();
        check_dims(spec, &refs)?;
        let k = self.elements.len();
        let mut g = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                g[i * k + j] = inner_unchecked(spec, &self.elements[i], &self.elements[j]);
            }
        }
        Ok(g)
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self, spec: &CostSpectrum) -> Result<f64> {
        let k = self.elements.len();
        let g = self.gram(spec)?;
        Ok((0..k * k)
            .map(|idx| {
                let want = if idx / k == idx % k { 1.0 } else { 0.0 };
                (g[idx] - want).abs()
            })
            .fold(0.0, f64::max))
    }

    /// Norm of the component of `v` orthogonal to the span.
    pub fn residual_norm(&self, spec: &CostSpectrum, v: &BlockElement) -> Result<f64> {
        check_dims(spec, &[v])?;
        let mut r = v.clone();
        for _ in 0..2 {
            for e in &self.elements {
                let c = inner_unchecked(spec, e, &r);
                r.axpy(-c, e);
            }
        }
        Ok(inner_unchecked(spec, &r, &r).max(0.0).sqrt())
    }

    /// Dimension after quotienting out the identity direction, i.e. the rank
    /// of the traceless projections `X - Tr(X)/N * I` of the basis.
    pub fn traceless_dim(&self, spec: &CostSpectrum, tol: f64) -> Result<usize> {
        let refs: Vec<&BlockElement> = self.elements.iter().collect();
        let m = check_dims(spec, &refs)?;
        let n = spec.total() as f64;
        let d = spec.multiplicities();
        let trace = |x: &BlockElement| -> Complex64 {
            (0..m)
                .map(|k| (x.block[k * m + k] + I * (x.alpha * spec.internal_cost(k))) * d[k] as f64)
                .sum()
        };
        let ip = |x: &BlockElement, y: &BlockElement| -> f64 {
            inner_unchecked(spec, x, y) - (trace(x).conj() * trace(y)).re / n
        };
        let mut accepted: Vec<BlockElement> = Vec::new();
        for e in &self.elements {
            if let Some(u) = orthonormalize(e.clone(), &accepted, tol, &ip) {
                accepted.push(u);
            }
        }
        Ok(accepted.len())
    }

    /// JSON array of `{"alpha": .., "B": [[re, im], ...]}` (row-major blocks).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.elements).expect("basis serializes")
    }
}

/// Twice-iterated Gram-Schmidt of `cand` against `basis`; returns the
/// normalized residual if it clears the relative and absolute thresholds.
fn orthonormalize<F>(mut cand: BlockElement, basis: &[BlockElement], tol: f64, ip: &F) -> Option<BlockElement>
where
    F: Fn(&BlockElement, &BlockElement) -> f64,
{
    let norm0 = ip(&cand, &cand).max(0.0).sqrt();
    if !(norm0 > ABS_FLOOR) {
        return None;
    }
    for _ in 0..2 {
        for e in basis {
            let c = ip(e, &cand);
            cand.axpy(-c, e);
        }
    }
    let r = ip(&cand, &cand).max(0.0).sqrt();
    if r > tol * norm0 && r > ABS_FLOOR {
        cand.scale(1.0 / r);
        Some(cand)
    } else {
        None
    }
}

/// Lie closure of `{i H_C, i J}` in the compressed representation.
///
/// Worklist: every accepted element is bracketed against every element of
/// the current basis in FIFO order; residuals that survive orthogonalization
/// are normalized, appended and queued.
pub fn lie_closure(spec: &CostSpectrum, tol: f64) -> Result<LieBasis> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let ip = |x: &BlockElement, y: &BlockElement| inner_unchecked(spec, x, y);
    let mut basis: Vec<BlockElement> = Vec::new();
    let mut queue = VecDeque::new();
    for g in [BlockElement::cost_generator(spec), BlockElement::mixer_generator(spec)] {
        if let Some(u) = orthonormalize(g, &basis, tol, &ip) {
            queue.push_back(basis.len());
            basis.push(u);
        }
    }
    let cap = spec.num_classes() * spec.num_classes() + 1;
    while let Some(k) = queue.pop_front() {
        let mut j = 0;
        while j < basis.len() {
            if j != k {
                let cand = bracket_unchecked(spec, &basis[k], &basis[j]);
                if let Some(u) = orthonormalize(cand, &basis, tol, &ip) {
                    queue.push_back(basis.len());
                    basis.push(u);
                    debug_assert!(basis.len() <= cap, "closure exceeded m^2 + 1");
                }
            }
            j += 1;
        }
    }
    Ok(LieBasis { elements: basis })
}

/// `sum_j <E_j, H>^2` over an orthonormal basis; the squared norm of the
/// projection of `h` onto the algebra.
pub fn g_purity(spec: &CostSpectrum, basis: &LieBasis, h: &BlockElement) -> Result<f64> {
    check_dims(spec, &[h])?;
    let err = basis.orthonormality_error(spec)?;
    if err > 1e-9 {
        return Err(Error::domain(format!("basis is not orthonormal (max Gram deviation {err:e})")));
    }
    Ok(basis
        .elements
        .iter()
        .map(|e| inner_unchecked(spec, e, h).powi(2))
        .sum())
}

/// Explicit dense `n x n` complex matrix, row-major.
#[derive(Debug, Clone)]
struct Dense {
    n: usize,
    data: Vec<Complex64>,
}

impl Dense {
    fn commutator(&self, other: &Dense) -> Dense {
        let n = self.n;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                let b = other.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) && b == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j] - b * self.data[k * n + j];
                }
            }
        }
        Dense { n, data }
    }

    fn dot(&self, other: &Dense) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }
}

/// Real dimension of the closure of `{i H_C, i J}` built from explicit
/// `|S'| x |S'|` matrices, expanding level by level: each round brackets the
/// newest elements against everything found so far.
pub fn dense_lie_closure(inst: &ProblemInstance, tol: f64) -> Result<usize> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let sols = inst.feasible_solutions(DENSE_DLA_LIMIT)?;
    let sign = inst.sense().sign();
    let costs: Vec<f64> = sols.iter().map(|&(_, c)| sign * c).collect();
    Ok(dense_closure_dim(&costs, tol))
}

/// [`dense_lie_closure`] on explicit per-solution minimization-form costs.
pub fn dense_closure_dim(costs: &[f64], tol: f64) -> usize {
    let n = costs.len();
    let mut hc = Dense {
        n,
        data: vec![Complex64::new(0.0, 0.0); n * n],
    };
    for (i, &c) in costs.iter().enumerate() {
        hc.data[i * n + i] = I * c;
    }
    let mix = Dense { n, data: vec![I; n * n] };

    let mut basis: Vec<Dense> = Vec::new();
    let try_add = |basis: &mut Vec<Dense>, mut v: Dense| -> bool {
        let norm0 = v.dot(&v).sqrt();
        if !(norm0 > ABS_FLOOR) {
            return false;
        }
        for _ in 0..2 {
            for e in basis.iter() {
                let c = e.dot(&v);
                v.data.iter_mut().zip(&e.data).for_each(|(x, y)| *x -= y * c);
            }
        }
        let r = v.dot(&v).sqrt();
        if r > tol * norm0 && r > ABS_FLOOR {
            v.data.iter_mut().for_each(|x| *x /= r);
            basis.push(v);
            true
        } else {
            false
        }
    };

    let mut frontier_start = 0;
    try_add(&mut basis, hc);
    try_add(&mut basis, mix);
    while frontier_start < basis.len() {
        let frontier_end = basis.len();
        let pairs: Vec<(usize, usize)> = (frontier_start..frontier_end)
            .flat_map(|a| (0..a).map(move |b| (a, b)))
            .collect();
        let candidates: Vec<Dense> = pairs
            .par_iter()
            .map(|&(a, b)| basis[a].commutator(&basis[b]))
            .collect();
        for c in candidates {
            try_add(&mut basis, c);
        }
        frontier_start = frontier_end;
    }
    basis.len()
}
