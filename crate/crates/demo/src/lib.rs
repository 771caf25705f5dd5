//! Browser bindings: ridge vs classical scores, the columns-vs-error curve
//! with a DRLS selection, and the projection-cost ratio histogram.

use drls_core::drls::{columns_vs_error, drls_select};
use drls_core::guarantees::{pcp_ratios, ALPHA};
use drls_core::leverage::{classical_leverage_scores, ridge_leverage_scores};
use drls_core::pipeline::pcp_histogram;
use drls_core::synth::{random_with_spectrum, SpectrumProfile};
use drls_core::DenseMatrix;
use wasm_bindgen::prelude::*;

/// A seeded synthetic matrix held on the Rust side.
#[wasm_bindgen]
pub struct Instance {
    matrix: DenseMatrix,
}

impl Instance {
    pub fn build(rows: usize, cols: usize, spectrum: &str, seed: u64) -> Result<Instance, String> {
        let profile: SpectrumProfile = spectrum.parse().map_err(|e| format!("{e}"))?;
        let matrix = random_with_spectrum(rows, cols, profile, seed)
            .map_err(|e| e.to_string())?
            .centered_columns();
        Ok(Instance { matrix })
    }

    /// Classical then ridge scores, each of length `cols`.
    pub fn score_pairs(&self, k: usize) -> Result<Vec<f64>, String> {
        let classical = classical_leverage_scores(&self.matrix).map_err(|e| e.to_string())?;
        let ridge = ridge_leverage_scores(&self.matrix, k).map_err(|e| e.to_string())?;
        Ok(classical.scores.into_iter().chain(ridge.scores).collect())
    }

    /// ε̃ after keeping the top m columns, m = 0..=cols.
    pub fn error_curve(&self, k: usize) -> Result<Vec<f64>, String> {
        let ridge = ridge_leverage_scores(&self.matrix, k).map_err(|e| e.to_string())?;
        Ok(columns_vs_error(&ridge.scores))
    }

    /// Selected column indices.
    pub fn selection(&self, k: usize, epsilon: f64) -> Result<Vec<u32>, String> {
        let sel = drls_select(&self.matrix, k, epsilon).map_err(|e| e.to_string())?;
        Ok(sel.theta.iter().map(|&i| i as u32).collect())
    }

    /// Counts in `bins` equal bins over [1 − αε, 1], followed by the minimum and maximum ratio.
    pub fn ratio_histogram(
        &self,
        k: usize,
        epsilon: f64,
        projections: usize,
        bins: usize,
        seed: u64,
    ) -> Result<Vec<f64>, String> {
        if bins == 0 {
            return Err("bins must be positive".into());
        }
        let sel = drls_select(&self.matrix, k, epsilon).map_err(|e| e.to_string())?;
        let sweep = pcp_ratios(&self.matrix, &sel.c, k, projections, seed).map_err(|e| e.to_string())?;
        let mut out: Vec<f64> = pcp_histogram(&sweep.haar_ratios, epsilon, bins)
            .into_iter()
            .map(|(_, _, c)| c as f64)
            .collect();
        out.push(sweep.min_ratio());
        out.push(sweep.max_ratio());
        Ok(out)
    }
}

#[wasm_bindgen]
impl Instance {
    #[wasm_bindgen(constructor)]
    pub fn new(rows: usize, cols: usize, spectrum: &str, seed: u32) -> Result<Instance, JsError> {
        Self::build(rows, cols, spectrum, u64::from(seed)).map_err(|e| JsError::new(&e))
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    #[wasm_bindgen(js_name = scorePairs)]
    pub fn js_score_pairs(&self, k: usize) -> Result<Vec<f64>, JsError> {
        self.score_pairs(k).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = errorCurve)]
    pub fn js_error_curve(&self, k: usize) -> Result<Vec<f64>, JsError> {
        self.error_curve(k).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = selection)]
    pub fn js_selection(&self, k: usize, epsilon: f64) -> Result<Vec<u32>, JsError> {
        self.selection(k, epsilon).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = ratioHistogram)]
    pub fn js_ratio_histogram(
        &self,
        k: usize,
        epsilon: f64,
        projections: usize,
        bins: usize,
        seed: u32,
    ) -> Result<Vec<f64>, JsError> {
        self.ratio_histogram(k, epsilon, projections, bins, u64::from(seed))
            .map_err(|e| JsError::new(&e))
    }
}

/// 1 − αε, the left edge of the histogram.
#[wasm_bindgen(js_name = ratioLowerBound)]
pub fn ratio_lower_bound(epsilon: f64) -> f64 {
    1.0 - ALPHA * epsilon
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scores_are_paired_and_shrunk() {
        let inst = Instance::build(10, 40, "power-law:1", 1).unwrap();
        let pairs = inst.score_pairs(2).unwrap();
        assert_eq!(pairs.len(), 80);
        let (classical, ridge) = pairs.split_at(40);
        assert!(classical.iter().zip(ridge).all(|(c, r)| r <= &(c + 1e-12)));
    }

    #[test]
    fn curve_and_selection_agree() {
        let inst = Instance::build(10, 40, "exponential:0.5", 2).unwrap();
        let curve = inst.error_curve(2).unwrap();
        let theta = inst.selection(2, 0.2).unwrap();
        assert!(curve[theta.len()] < 0.2);
        assert!(theta.len() <= 2 || curve[theta.len() - 1] >= 0.2);
    }

    #[test]
    fn histogram_counts_every_projection() {
        let inst = Instance::build(8, 30, "flat", 3).unwrap();
        let h = inst.ratio_histogram(2, 0.05, 40, 10, 1).unwrap();
        assert_eq!(h.len(), 12);
        assert_eq!(h[..10].iter().sum::<f64>(), 40.0);
        assert!(h[10] >= ratio_lower_bound(0.05) - 1e-8 && h[11] <= 1.0 + 1e-8);
        assert!(Instance::build(8, 30, "wavy", 3).is_err());
    }
}
