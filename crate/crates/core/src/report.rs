//! Bound-ratio reports shared by the sum experiments.

use num_complex::Complex64;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub name: String,
    pub formula: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub experiment: String,
    pub sum_value: Complex64,
    pub params: BTreeMap<String, f64>,
    pub envelopes: Vec<Envelope>,
    pub ratios: Vec<f64>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn new(experiment: &str, sum_value: Complex64) -> Self {
        BoundReport {
            experiment: experiment.to_string(),
            sum_value,
            params: BTreeMap::new(),
            envelopes: Vec::new(),
            ratios: Vec::new(),
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.to_string(), v);
        self
    }

    pub fn envelope(mut self, name: &str, formula: &str, value: f64) -> Self {
        self.ratios.push(self.sum_value.norm() / value);
        self.envelopes.push(Envelope {
            name: name.to_string(),
            formula: formula.to_string(),
            value,
        });
        self
    }

    pub fn diag(mut self, key: &str, v: f64) -> Self {
        self.diagnostics.insert(key.to_string(), v);
        self
    }

    pub fn ratio(&self, name: &str) -> Option<f64> {
        self.envelopes
            .iter()
            .position(|e| e.name == name)
            .map(|i| self.ratios[i])
    }

    /// The first envelope is the one the experiment is judged against.
    pub fn primary_ratio(&self) -> f64 {
        self.ratios[0]
    }

    pub fn is_consistent(&self) -> bool {
        self.envelopes.len() == self.ratios.len()
            && self.envelopes.iter().zip(&self.ratios).all(|(e, r)| {
                let expect = self.sum_value.norm() / e.value;
                (expect - r).abs() <= 1e-15 * expect.abs().max(1.0)
            })
    }
}

/// Least-squares slope of ln(y) against ln(x).
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let den = n * sxx - sx * sx;
    if den.abs() < 1e-300 {
        return 0.0;
    }
    (n * sxy - sx * sy) / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_follow_envelopes() {
        let r = BoundReport::new("t", Complex64::new(3.0, 4.0))
            .envelope("a", "x", 10.0)
            .envelope("b", "y", 2.5);
        assert_eq!(r.ratio("a"), Some(0.5));
        assert_eq!(r.ratio("b"), Some(2.0));
        assert!(r.is_consistent());
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&x: &f64| (x, 3.0 * x.powf(0.25)))
            .collect();
        assert!((log_log_slope(&pts) - 0.25).abs() < 1e-12);
    }
}
