//! Concrete combinatorial instances and their brute-force cost spectra.
//!
//! Solutions are bitmasks with vertex `i` stored in bit `i` (little-endian
//! within a `u64`). Search instances label items `0..N` and mark the first
//! `|M|` of them.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectrum::{CostSpectrum, Sense};

/// Default cap on the number of feasible solutions enumerated.
pub const DEFAULT_BUDGET: u64 = 1 << 22;

/// Simple undirected, unweighted graph without loops or parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFamily {
    Cycle,
    Chain,
    Complete,
}

impl GraphFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphFamily::Cycle => "cycle",
            GraphFamily::Chain => "chain",
            GraphFamily::Complete => "complete",
        }
    }
}

impl std::str::FromStr for GraphFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" => Ok(GraphFamily::Cycle),
            "chain" => Ok(GraphFamily::Chain),
            "complete" => Ok(GraphFamily::Complete),
            other => Err(Error::domain(format!(
                "unknown graph family {other:?}, expected cycle, chain or complete"
            ))),
        }
    }
}

impl Graph {
    /// Validates and normalizes an edge list. Edges are stored as `(min, max)`
    /// pairs in sorted order.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n > 63 {
            return Err(Error::domain(format!("graphs are limited to 63 vertices, got {n}")));
        }
        let mut out = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::domain(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::domain(format!("self-loop at vertex {u}")));
            }
            out.push((u.min(v), u.max(v)));
        }
        out.sort_unstable();
        if let Some(w) = out.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::domain(format!("duplicate edge ({},{})", w[0].0, w[0].1)));
        }
        Ok(Graph { n, edges: out })
    }

    /// Named graph families on `n` vertices.
    pub fn family(family: GraphFamily, n: usize) -> Result<Self> {
        let min_n = if family == GraphFamily::Cycle { 3 } else { 2 };
        if n < min_n {
            return Err(Error::domain(format!(
                "{} graph needs at least {min_n} vertices, got {n}",
                family.as_str()
            )));
        }
        let edges: Vec<(usize, usize)> = match family {
            GraphFamily::Cycle => (0..n).map(|i| (i, (i + 1) % n)).collect(),
            GraphFamily::Chain => (0..n - 1).map(|i| (i, i + 1)).collect(),
            GraphFamily::Complete => (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect(),
        };
        Graph::new(n, edges)
    }

    /// Parses the plain-text format: a header line `n m`, then `m` lines of
    /// `u v` (0-indexed). Blank lines and `#` comments are ignored. Lines with
    /// a third column are treated as weighted edges and rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines.next().ok_or_else(|| Error::domain("graph file is empty"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 2 {
            return Err(Error::domain(format!("graph header must be \"n m\", got {header:?}")));
        }
        let n: usize = parse_int(head[0], 1)?;
        let m: usize = parse_int(head[1], 1)?;
        let mut edges = Vec::with_capacity(m);
        for (lineno, line) in lines {
            let cols: Vec<&str> = line.split_whitespace().collect();
            match cols.len() {
                2 => edges.push((parse_int(cols[0], lineno + 1)?, parse_int(cols[1], lineno + 1)?)),
                3 => {
                    return Err(Error::domain(format!(
                        "line {}: weighted edges are not supported",
                        lineno + 1
                    )))
                }
                _ => return Err(Error::domain(format!("line {}: expected \"u v\", got {line:?}", lineno + 1))),
            }
        }
        if edges.len() != m {
            return Err(Error::domain(format!("header declares {m} edges, found {}", edges.len())));
        }
        Graph::new(n, edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn edge_masks(&self) -> Vec<u64> {
        self.edges.iter().map(|&(u, v)| (1u64 << u) | (1u64 << v)).collect()
    }
}

fn parse_int(tok: &str, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::domain(format!("line {line}: {tok:?} is not a non-negative integer")))
}

/// A concrete problem instance before spectral compression.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemInstance {
    /// Unstructured search over `space_size` items, `marked` of which score 1.
    Search { marked: u64, space_size: u64 },
    /// Max-Cut over all `2^n` vertex bipartitions.
    MaxCut(Graph),
    /// Densest subgraph on exactly `k` vertices; feasible set is the
    /// Hamming-weight-`k` bitstrings.
    KDensest { graph: Graph, k: usize },
}

impl ProblemInstance {
    pub fn validate(&self) -> Result<()> {
        match self {
            ProblemInstance::Search { marked, space_size } => {
                if *marked == 0 || marked > space_size {
                    return Err(Error::domain(format!(
                        "search needs 1 <= |M| <= N, got |M|={marked}, N={space_size}"
                    )));
                }
            }
            ProblemInstance::MaxCut(_) => {}
            ProblemInstance::KDensest { graph, k } => {
                let n = graph.num_vertices();
                if !(1 < *k && *k < n) {
                    return Err(Error::domain(format!("k-densest needs 1 < k < n, got k={k}, n={n}")));
                }
            }
        }
        Ok(())
    }

    pub fn sense(&self) -> Sense {
        Sense::Maximize
    }

    /// Size of the feasible space `|S'|`.
    pub fn feasible_size(&self) -> u128 {
        match self {
            ProblemInstance::Search { space_size, .. } => *space_size as u128,
            ProblemInstance::MaxCut(g) => 1u128 << g.num_vertices(),
            ProblemInstance::KDensest { graph, k } => binomial(graph.num_vertices() as u64, *k as u64),
        }
    }

    /// Short human-readable label, e.g. `maxcut-n4`.
    pub fn label(&self) -> String {
        match self {
            ProblemInstance::Search { marked, space_size } => format!("search-N{space_size}-M{marked}"),
            ProblemInstance::MaxCut(g) => format!("maxcut-n{}-e{}", g.num_vertices(), g.edges().len()),
            ProblemInstance::KDensest { graph, k } => {
                format!("kdensest-n{}-e{}-k{k}", graph.num_vertices(), graph.edges().len())
            }
        }
    }

    fn check_budget(&self, budget: u64) -> Result<u64> {
        self.validate()?;
        let size = self.feasible_size();
        if size > budget as u128 {
            return Err(Error::resource(format!(
                "feasible space of {} has {size} solutions, budget is {budget}",
                self.label()
            )));
        }
        Ok(size as u64)
    }

    /// Costs of every feasible solution, in enumeration order, with the
    /// solution encodings alongside.
    pub fn feasible_solutions(&self, budget: u64) -> Result<Vec<(u64, f64)>> {
        self.check_budget(budget)?;
        Ok(match self {
            ProblemInstance::Search { marked, space_size } => {
                (0..*space_size).map(|z| (z, if z < *marked { 1.0 } else { 0.0 })).collect()
            }
            ProblemInstance::MaxCut(g) => {
                let masks = g.edge_masks();
                (0..1u64 << g.num_vertices())
                    .map(|z| (z, cut_size(&masks, z) as f64))
                    .collect()
            }
            ProblemInstance::KDensest { graph, k } => {
                let masks = graph.edge_masks();
                KSubsets::new(graph.num_vertices(), *k)
                    .map(|z| (z, induced_edges(&masks, z) as f64))
                    .collect()
            }
        })
    }

    /// Exact cost spectrum of the feasible set.
    pub fn spectrum(&self, budget: u64) -> Result<CostSpectrum> {
        let size = self.check_budget(budget)?;
        let counts: BTreeMap<u64, u64> = match self {
            ProblemInstance::Search { marked, space_size } => {
                return CostSpectrum::search(*space_size, *marked);
            }
            ProblemInstance::MaxCut(g) => {
                let masks = g.edge_masks();
                let max_cost = masks.len();
                const CHUNK: u64 = 1 << 14;
                let chunks = size.div_ceil(CHUNK);
                let hist = (0..chunks)
                    .into_par_iter()
                    .map(|c| {
                        let mut h = vec![0u64; max_cost + 1];
                        for z in c * CHUNK..((c + 1) * CHUNK).min(size) {
                            h[cut_size(&masks, z) as usize] += 1;
                        }
                        h
                    })
                    .reduce(
                        || vec![0u64; max_cost + 1],
                        |mut a, b| {
                            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                            a
                        },
                    );
                hist_to_map(&hist)
            }
            ProblemInstance::KDensest { graph, k } => {
                let masks = graph.edge_masks();
                let mut h = vec![0u64; masks.len() + 1];
                for z in KSubsets::new(graph.num_vertices(), *k) {
                    h[induced_edges(&masks, z) as usize] += 1;
                }
                hist_to_map(&h)
            }
        };
        let (costs, mults): (Vec<f64>, Vec<u64>) = counts.into_iter().map(|(c, d)| (c as f64, d)).unzip();
        CostSpectrum::new(costs, mults, self.sense())
    }

    /// Exact number of optimal feasible solutions, by brute force.
    pub fn count_optimal(&self, budget: u64) -> Result<u64> {
        Ok(self.spectrum(budget)?.optimal_class().1)
    }
}

fn hist_to_map(h: &[u64]) -> BTreeMap<u64, u64> {
    h.iter()
        .enumerate()
        .filter(|(_, &d)| d > 0)
        .map(|(c, &d)| (c as u64, d))
        .collect()
}

#[inline]
fn cut_size(edge_masks: &[u64], z: u64) -> u32 {
    edge_masks.iter().filter(|&&e| (z & e).count_ones() == 1).count() as u32
}

#[inline]
fn induced_edges(edge_masks: &[u64], z: u64) -> u32 {
    edge_masks.iter().filter(|&&e| z & e == e).count() as u32
}

/// `C(n, k)` in `u128`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Iterates all `n`-bit masks of popcount `k` in increasing order using
/// Gosper's successor.
#[derive(Debug, Clone)]
pub struct KSubsets {
    next: Option<u64>,
    limit: u64,
}

impl KSubsets {
    pub fn new(n: usize, k: usize) -> Self {
        assert!(n < 64, "bit width must be below 64");
        let next = if k > n {
            None
        } else if k == 0 {
            Some(0)
        } else {
            Some((1u64 << k) - 1)
        };
        KSubsets { next, limit: 1u64 << n }
    }
}

impl Iterator for KSubsets {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let succ = (((r ^ cur) >> 2) / c) | r;
            (succ < self.limit).then_some(succ)
        };
        Some(cur)
    }
}
