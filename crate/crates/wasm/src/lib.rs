//! Browser bindings for the interactive demo in `www/`.
//!
//! Build with `wasm-pack build crates/wasm --target web --out-dir www/pkg`.

use std::f64::consts::PI;

use qwoa_core::dla::{self, DEFAULT_TOL};
use qwoa_core::problems::{Graph, GraphFamily, ProblemInstance};
use qwoa_core::sim::{ClassState, LayerParams};
use qwoa_core::{landscape, CostSpectrum, Error};
use wasm_bindgen::prelude::*;

/// Largest feasible space the page will enumerate.
const BROWSER_BUDGET: u64 = 1 << 20;

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// One problem instance, held in compressed form.
#[wasm_bindgen]
pub struct Demo {
    spec: CostSpectrum,
    label: String,
}

impl Demo {
    fn graph_problem(problem: &str, family: &str, n: usize, k: usize) -> qwoa_core::Result<Demo> {
        let graph = Graph::family(family.parse::<GraphFamily>()?, n)?;
        let inst = match problem {
            "maxcut" => ProblemInstance::MaxCut(graph),
            "kdensest" => ProblemInstance::KDensest { graph, k },
            other => return Err(Error::Domain(format!("unknown problem {other:?}"))),
        };
        Ok(Demo {
            spec: inst.spectrum(BROWSER_BUDGET)?,
            label: inst.label(),
        })
    }

    fn search_problem(n: u32, marked: u32) -> qwoa_core::Result<Demo> {
        let inst = ProblemInstance::Search {
            marked: marked.into(),
            space_size: n.into(),
        };
        Ok(Demo {
            spec: inst.spectrum(BROWSER_BUDGET)?,
            label: inst.label(),
        })
    }

    fn closure_dim(&self) -> qwoa_core::Result<usize> {
        Ok(dla::lie_closure(&self.spec, DEFAULT_TOL)?.dim())
    }
}

#[wasm_bindgen]
impl Demo {
    /// `problem` is `maxcut` or `kdensest`; `k` is ignored for Max-Cut.
    #[wasm_bindgen(js_name = fromFamily)]
    pub fn from_family(problem: &str, family: &str, n: usize, k: usize) -> Result<Demo, JsError> {
        Demo::graph_problem(problem, family, n, k).map_err(js)
    }

    #[wasm_bindgen(js_name = fromSearch)]
    pub fn from_search(n: u32, marked: u32) -> Result<Demo, JsError> {
        Demo::search_problem(n, marked).map_err(js)
    }

    pub fn label(&self) -> String {
        self.label.clone()
    }

    pub fn costs(&self) -> Vec<f64> {
        self.spec.costs().to_vec()
    }

    pub fn multiplicities(&self) -> Vec<f64> {
        self.spec.multiplicities().iter().map(|&d| d as f64).collect()
    }

    pub fn total(&self) -> f64 {
        self.spec.total() as f64
    }

    #[wasm_bindgen(js_name = dlaDimension)]
    pub fn dla_dimension(&self) -> Result<usize, JsError> {
        self.closure_dim().map_err(js)
    }

    /// Success probability after `0..=p_max` identical layers with phase
    /// `gamma` and walk time `tau / N`.
    #[wasm_bindgen(js_name = successCurve)]
    pub fn success_curve(&self, gamma: f64, tau: f64, p_max: usize) -> Vec<f64> {
        let t = tau / self.spec.total() as f64;
        let mut st = ClassState::uniform(&self.spec);
        let mut out = Vec::with_capacity(p_max + 1);
        out.push(st.success_probability());
        for _ in 0..p_max {
            st.apply_phase(gamma);
            st.apply_mixer(t);
            out.push(st.success_probability());
        }
        out
    }

    /// Depth-1 loss on a `resolution x resolution` grid, row-major, with
    /// rows indexing `gamma` and columns `tau = N t`, both over `[-pi, pi]`.
    pub fn landscape(&self, resolution: usize) -> Vec<f64> {
        let r = resolution.max(2);
        let n = self.spec.total() as f64;
        let axis = |i: usize| -PI + 2.0 * PI * i as f64 / (r - 1) as f64;
        let mut out = Vec::with_capacity(r * r);
        for gi in 0..r {
            for ti in 0..r {
                let params = LayerParams::new(vec![axis(gi)], vec![axis(ti) / n]).expect("finite grid point");
                out.push(qwoa_core::sim::evolve(&self.spec, &params).loss());
            }
        }
        out
    }

    /// Sample variance of the depth-`p` loss over `samples` seeded draws.
    #[wasm_bindgen(js_name = lossVariance)]
    pub fn loss_variance(&self, p: usize, samples: usize, seed: u32) -> Result<f64, JsError> {
        let ranges = landscape::ParamRanges::default_for(&self.spec);
        landscape::estimate_variance(&self.spec, p, samples, &ranges, seed.into())
            .map(|e| e.variance)
            .map_err(js)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grover_curve_from_search() {
        let d = Demo::search_problem(16, 1).unwrap();
        let curve = d.success_curve(PI, PI, 3);
        let theta = 0.25f64.asin();
        for (p, s) in curve.iter().enumerate() {
            let want = ((2 * p + 1) as f64 * theta).sin().powi(2);
            assert!((s - want).abs() < 1e-12, "p={p}: {s} vs {want}");
        }
        assert_eq!(d.closure_dim().unwrap(), 4);
    }

    #[test]
    fn family_spectrum_and_landscape() {
        let d = Demo::graph_problem("maxcut", "cycle", 5, 0).unwrap();
        assert_eq!(d.costs(), vec![0.0, 2.0, 4.0]);
        assert_eq!(d.multiplicities(), vec![2.0, 20.0, 10.0]);
        assert_eq!(d.total(), 32.0);
        let grid = d.landscape(9);
        assert_eq!(grid.len(), 81);
        // gamma = 0 row is the identity: loss equals the mean cost.
        let mean = d.spec.mean_cost();
        assert!(grid[4 * 9..5 * 9].iter().all(|l| (l - mean).abs() < 1e-12));
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(Demo::graph_problem("tsp", "cycle", 5, 0).is_err());
        assert!(Demo::graph_problem("maxcut", "star", 5, 0).is_err());
        assert!(Demo::graph_problem("kdensest", "cycle", 5, 9).is_err());
        assert!(Demo::search_problem(0, 1).is_err());
    }
}
