//! Cost spectra: the distinct feasible costs of an instance together with
//! how many feasible solutions attain each one.
//!
//! QWOA only ever sees an instance through this object. Every downstream
//! module (simulation, Lie closure, variance and depth estimation) works on a
//! [`CostSpectrum`] rather than on the instance itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values closer than this are merged into one cost class by
/// [`CostSpectrum::from_cost_list`].
pub const DEFAULT_MERGE_TOLERANCE: f64 = 1e-9;

/// Optimization direction of the underlying problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "min")]
    Minimize,
    #[serde(rename = "max")]
    Maximize,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Minimize => "min",
            Sense::Maximize => "max",
        }
    }

    /// Factor mapping a reported cost to its minimization-form value.
    pub fn sign(self) -> f64 {
        match self {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }
}

impl std::str::FromStr for Sense {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" | "minimize" => Ok(Sense::Minimize),
            "max" | "maximize" => Ok(Sense::Maximize),
            other => Err(Error::domain(format!("unknown sense {other:?}, expected min or max"))),
        }
    }
}

/// Distinct feasible costs `x_1 < ... < x_m` with multiplicities `d_1..d_m`.
///
/// Costs are stored in the problem's own units and in increasing order
/// regardless of [`Sense`]. Consumers that need a single minimization code
/// path use [`CostSpectrum::internal_cost`], which negates costs of
/// maximization problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumRecord", into = "SpectrumRecord")]
pub struct CostSpectrum {
    costs: Vec<f64>,
    multiplicities: Vec<u64>,
    total: u64,
    sense: Sense,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumRecord {
    costs: Vec<f64>,
    multiplicities: Vec<u64>,
    sense: Sense,
}

impl TryFrom<SpectrumRecord> for CostSpectrum {
    type Error = Error;

    fn try_from(r: SpectrumRecord) -> Result<Self> {
        CostSpectrum::new(r.costs, r.multiplicities, r.sense)
    }
}

impl From<CostSpectrum> for SpectrumRecord {
    fn from(s: CostSpectrum) -> Self {
        SpectrumRecord {
            costs: s.costs,
            multiplicities: s.multiplicities,
            sense: s.sense,
        }
    }
}

impl CostSpectrum {
    /// Builds a spectrum from already-grouped classes.
    pub fn new(costs: Vec<f64>, multiplicities: Vec<u64>, sense: Sense) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::domain("spectrum must contain at least one cost class"));
        }
        if costs.len() != multiplicities.len() {
            return Err(Error::domain(format!(
                "{} costs but {} multiplicities",
                costs.len(),
                multiplicities.len()
            )));
        }
        if let Some(c) = costs.iter().find(|c| !c.is_finite()) {
            return Err(Error::domain(format!("non-finite cost {c}")));
        }
        if costs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("costs must be strictly increasing"));
        }
        if multiplicities.contains(&0) {
            return Err(Error::domain("every multiplicity must be at least 1"));
        }
        let total = multiplicities
            .iter()
            .try_fold(0u64, |acc, &d| acc.checked_add(d))
            .ok_or_else(|| Error::domain("total multiplicity overflows u64"))?;
        Ok(CostSpectrum {
            costs,
            multiplicities,
            total,
            sense,
        })
    }

    /// Groups a list of per-solution costs into classes, merging values within
    /// [`DEFAULT_MERGE_TOLERANCE`].
    pub fn from_cost_list(values: &[f64], sense: Sense) -> Result<Self> {
        Self::from_cost_list_with_tolerance(values, sense, DEFAULT_MERGE_TOLERANCE)
    }

    /// Like [`from_cost_list`](Self::from_cost_list) with an explicit merge
    /// tolerance. A class is represented by its smallest member; a value joins
    /// the open class when it lies within `tol` of that representative.
    pub fn from_cost_list_with_tolerance(values: &[f64], sense: Sense, tol: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("cannot build a spectrum from an empty cost list"));
        }
        if !(tol >= 0.0) {
            return Err(Error::domain(format!("merge tolerance must be non-negative, got {tol}")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite cost {v}")));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);

        let mut costs: Vec<f64> = Vec::new();
        let mut mults: Vec<u64> = Vec::new();
        for v in sorted {
            match costs.last() {
                Some(&rep) if v - rep <= tol => *mults.last_mut().unwrap() += 1,
                _ => {
                    costs.push(v);
                    mults.push(1);
                }
            }
        }
        Self::new(costs, mults, sense)
    }

    /// Builds the two-class spectrum of unstructured search over `space_size`
    /// items with `marked` of them marked (cost 1, maximized).
    pub fn search(space_size: u64, marked: u64) -> Result<Self> {
        if marked == 0 || marked > space_size {
            return Err(Error::domain(format!(
                "search needs 1 <= marked <= space size, got marked={marked}, N={space_size}"
            )));
        }
        if marked == space_size {
            return Self::new(vec![1.0], vec![marked], Sense::Maximize);
        }
        Self::new(vec![0.0, 1.0], vec![space_size - marked, marked], Sense::Maximize)
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.multiplicities
    }

    /// Size of the feasible space, `N = sum d_i`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// Number of distinct cost classes `m`.
    pub fn num_classes(&self) -> usize {
        self.costs.len()
    }

    /// Cost of class `i` in minimization form (negated for maximization).
    pub fn internal_cost(&self, i: usize) -> f64 {
        self.sense.sign() * self.costs[i]
    }

    pub fn internal_costs(&self) -> Vec<f64> {
        (0..self.num_classes()).map(|i| self.internal_cost(i)).collect()
    }

    /// Index of the best class under the recorded sense and its multiplicity.
    pub fn optimal_class(&self) -> (usize, u64) {
        let idx = match self.sense {
            Sense::Minimize => 0,
            Sense::Maximize => self.num_classes() - 1,
        };
        (idx, self.multiplicities[idx])
    }

    /// Classes whose cost is at least as good as `target` under the sense.
    pub fn classes_reaching(&self, target: f64) -> Vec<usize> {
        (0..self.num_classes())
            .filter(|&i| match self.sense {
                Sense::Minimize => self.costs[i] <= target,
                Sense::Maximize => self.costs[i] >= target,
            })
            .collect()
    }

    /// Expands back into the multiset of per-solution costs, in class order.
    pub fn expand(&self) -> Vec<f64> {
        self.costs
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&c, &d)| std::iter::repeat_n(c, d as usize))
            .collect()
    }

    /// Applies `x -> a x + b` to every cost. A negative `a` reverses class order.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain("affine map needs finite a != 0 and finite b"));
        }
        let mut pairs: Vec<(f64, u64)> = self
            .costs
            .iter()
            .zip(&self.multiplicities)
            .map(|(&c, &d)| (a * c + b, d))
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (costs, mults) = pairs.into_iter().unzip();
        Self::new(costs, mults, self.sense)
    }

    /// Mean cost under the uniform distribution over feasible solutions.
    pub fn mean_cost(&self) -> f64 {
        let n = self.total as f64;
        self.costs
            .iter()
            .zip(&self.multiplicities)
            .map(|(&c, &d)| c * d as f64)
            .sum::<f64>()
            / n
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spectrum serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::domain(format!("invalid spectrum JSON: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn groups_binary_costs() {
        let s = CostSpectrum::from_cost_list(&[0.0, 1.0, 0.0, 0.0], Sense::Minimize).unwrap();
        assert_eq!(s.costs(), &[0.0, 1.0]);
        assert_eq!(s.multiplicities(), &[3, 1]);
        assert_eq!(s.total(), 4);
    }

    #[test]
    fn constant_cost_is_single_class() {
        let s = CostSpectrum::from_cost_list(&[5.0, 5.0, 5.0], Sense::Minimize).unwrap();
        assert_eq!(s.costs(), &[5.0]);
        assert_eq!(s.multiplicities(), &[3]);
        assert_eq!(s.num_classes(), 1);
        assert_eq!(s.optimal_class(), (0, 3));
    }

    #[test]
    fn four_cycle_cut_counts() {
        // Brute force: cut edges of the 4-cycle for each of the 16 bitstrings.
        let edges = [(0, 1), (1, 2), (2, 3), (3, 0)];
        let values: Vec<f64> = (0u32..16)
            .map(|z| edges.iter().filter(|&&(u, v)| (z >> u) & 1 != (z >> v) & 1).count() as f64)
            .collect();
        let s = CostSpectrum::from_cost_list(&values, Sense::Maximize).unwrap();
        assert_eq!(s.costs(), &[0.0, 2.0, 4.0]);
        assert_eq!(s.multiplicities(), &[2, 12, 2]);
        assert_eq!(s.optimal_class(), (2, 2));
    }

    #[test]
    fn search_marked_class_is_optimal() {
        let s = CostSpectrum::search(8, 3).unwrap();
        assert_eq!(s.multiplicities(), &[5, 3]);
        assert_eq!(s.optimal_class(), (1, 3));
        assert!(CostSpectrum::search(8, 0).is_err());
        assert!(CostSpectrum::search(8, 9).is_err());
    }

    #[test]
    fn empty_and_invalid_inputs_rejected() {
        assert!(matches!(
            CostSpectrum::from_cost_list(&[], Sense::Minimize),
            Err(Error::Domain(_))
        ));
        assert!(CostSpectrum::from_cost_list(&[f64::NAN], Sense::Minimize).is_err());
        assert!(CostSpectrum::new(vec![1.0, 1.0], vec![1, 1], Sense::Minimize).is_err());
        assert!(CostSpectrum::new(vec![1.0, 2.0], vec![1, 0], Sense::Minimize).is_err());
        assert!(CostSpectrum::new(vec![1.0], vec![1, 2], Sense::Minimize).is_err());
    }

    #[test]
    fn near_equal_values_merge() {
        let s = CostSpectrum::from_cost_list(&[0.1 + 0.2, 0.3, 1.0], Sense::Minimize).unwrap();
        assert_eq!(s.num_classes(), 2);
        assert_eq!(s.multiplicities(), &[2, 1]);
        let strict = CostSpectrum::from_cost_list_with_tolerance(&[0.1 + 0.2, 0.3], Sense::Minimize, 0.0).unwrap();
        assert_eq!(strict.num_classes(), 2);
    }

    #[test]
    fn json_schema() {
        let s = CostSpectrum::new(vec![0.0, 2.0, 4.0], vec![2, 12, 2], Sense::Maximize).unwrap();
        let text = s.to_json();
        assert_eq!(text, r#"{"costs":[0.0,2.0,4.0],"multiplicities":[2,12,2],"sense":"max"}"#);
        assert_eq!(CostSpectrum::from_json(&text).unwrap(), s);
        assert!(CostSpectrum::from_json(r#"{"costs":[1,0],"multiplicities":[1,1],"sense":"min"}"#).is_err());
        assert!(CostSpectrum::from_json(r#"{"costs":[0],"multiplicities":[1],"sense":"min","x":1}"#).is_err());
    }

    #[test]
    fn minimization_view_negates_maximized_costs() {
        let s = CostSpectrum::search(4, 1).unwrap();
        assert_eq!(s.internal_costs(), vec![-0.0, -1.0]);
        let s = CostSpectrum::new(vec![1.0, 3.0], vec![1, 1], Sense::Minimize).unwrap();
        assert_eq!(s.internal_costs(), vec![1.0, 3.0]);
    }

    proptest! {
        #[test]
        fn grouping_is_permutation_invariant(
            raw in prop::collection::vec(-5i32..5, 1..60),
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let values: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
            let mut shuffled = values.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = CostSpectrum::from_cost_list(&values, Sense::Minimize).unwrap();
            let b = CostSpectrum::from_cost_list(&shuffled, Sense::Minimize).unwrap();
            prop_assert_eq!(&a, &b);

            let mut expanded = a.expand();
            let mut sorted = values;
            sorted.sort_by(f64::total_cmp);
            expanded.sort_by(f64::total_cmp);
            prop_assert_eq!(expanded, sorted);
        }

        #[test]
        fn optimal_class_is_extreme(
            raw in prop::collection::vec(0i32..20, 1..40),
            maximize in any::<bool>(),
        ) {
            let sense = if maximize { Sense::Maximize } else { Sense::Minimize };
            let values: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
            let s = CostSpectrum::from_cost_list(&values, sense).unwrap();
            let (idx, count) = s.optimal_class();
            let best = if maximize { *raw.iter().max().unwrap() } else { *raw.iter().min().unwrap() };
            prop_assert_eq!(s.costs()[idx], best as f64);
            prop_assert_eq!(count as usize, raw.iter().filter(|&&v| v == best).count());
            prop_assert_eq!(idx, if maximize { s.num_classes() - 1 } else { 0 });
        }
    }
}
