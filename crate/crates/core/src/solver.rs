//! Root search for discounted cash-flow polynomials.
//!
//! `npv(r) = Σ_t flow_t / (1+r)^t` is scanned on a fixed grid over the
//! search domain. Every sign change is refined by safeguarded Newton steps
//! inside the bracket. Cells where the derivative changes sign without a
//! sign change in value are split at the critical point, which recovers
//! root pairs closer together than the grid step.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootSearch {
    /// Exclusive in spirit: the grid starts here but `r = -1` itself is never evaluated.
    pub lower: f64,
    pub upper: f64,
    pub step: f64,
    /// Stop once `|npv|` falls below this (same unit as the flows).
    pub value_tolerance: f64,
    /// Or once the bracket is narrower than this and the value is within tolerance.
    pub rate_tolerance: f64,
    pub max_iterations: u32,
}

impl Default for RootSearch {
    fn default() -> Self {
        RootSearch {
            lower: -0.9999,
            upper: 10.0,
            step: 0.01,
            value_tolerance: 0.005,
            rate_tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("cash flows never change sign, so no rate can zero their present value")]
    NoSignChange,
    #[error("no rate in ({lower}, {upper}] zeroes the present value")]
    NoRootInDomain { lower: f64, upper: f64 },
    #[error("invalid root search settings: {0}")]
    InvalidSearch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub rate: f64,
    /// The curve touches zero without crossing (even multiplicity).
    pub touching: bool,
}

/// Present value of `flows[t]` received at the end of year `t` (`t = 0` undiscounted).
pub fn present_value(flows: &[f64], rate: f64) -> f64 {
    let v = 1.0 / (1.0 + rate);
    flows.iter().rev().fold(0.0, |acc, &f| acc * v + f)
}

/// Present value and its derivative with respect to the rate.
pub fn present_value_with_slope(flows: &[f64], rate: f64) -> (f64, f64) {
    let v = 1.0 / (1.0 + rate);
    let mut value = 0.0;
    let mut slope = 0.0;
    let mut discount = 1.0;
    for (t, &f) in flows.iter().enumerate() {
        value += f * discount;
        if t > 0 {
            slope -= t as f64 * f * discount * v;
        }
        discount *= v;
    }
    (value, slope)
}

fn sign_changes(flows: &[f64]) -> bool {
    let positive = flows.iter().any(|&f| f > 0.0);
    let negative = flows.iter().any(|&f| f < 0.0);
    positive && negative
}

impl RootSearch {
    fn check(&self) -> Result<(), SolveError> {
        if !(self.lower > -1.0 && self.upper > self.lower && self.step > 0.0) {
            return Err(SolveError::InvalidSearch(format!(
                "need -1 < lower < upper and step > 0, got lower={} upper={} step={}",
                self.lower, self.upper, self.step
            )));
        }
        if !(self.value_tolerance > 0.0 && self.rate_tolerance > 0.0) {
            return Err(SolveError::InvalidSearch("tolerances must be positive".into()));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        let cells = ((self.upper - self.lower) / self.step).ceil() as usize;
        let mut grid: Vec<f64> = (0..cells)
            .map(|i| self.lower + i as f64 * self.step)
            .filter(|&r| r < self.upper)
            .collect();
        grid.push(self.upper);
        grid
    }

    /// All roots of the present value in the search domain, ascending.
    pub fn find_roots(&self, flows: &[f64]) -> Result<Vec<Root>, SolveError> {
        self.check()?;
        if !sign_changes(flows) {
            return Err(SolveError::NoSignChange);
        }
        let grid = self.grid();
        let samples: Vec<(f64, f64)> = grid.iter().map(|&r| present_value_with_slope(flows, r)).collect();
        let mut roots: Vec<Root> = Vec::new();
        // A critical value this close to zero is a double root up to rounding.
        let scale: f64 = flows.iter().map(|f| f.abs()).sum();
        let touch_tolerance = self.value_tolerance.min(1e-9 * scale);

        for i in 0..grid.len() - 1 {
            let (a, b) = (grid[i], grid[i + 1]);
            let (fa, da) = samples[i];
            let (fb, db) = samples[i + 1];
            if fa == 0.0 {
                push_root(&mut roots, Root { rate: a, touching: false });
                continue;
            }
            if fb == 0.0 {
                // picked up as the left end of the next cell (or after the loop)
                continue;
            }
            if (fa < 0.0) != (fb < 0.0) {
                push_root(&mut roots, self.refine(flows, a, fa, b));
            } else if (da < 0.0) != (db < 0.0) {
                let c = self.critical_point(flows, a, da, b);
                let fc = present_value(flows, c);
                if fc.abs() <= touch_tolerance {
                    push_root(&mut roots, Root { rate: c, touching: true });
                } else if (fc < 0.0) != (fa < 0.0) {
                    push_root(&mut roots, self.refine(flows, a, fa, c));
                    push_root(&mut roots, self.refine(flows, c, fc, b));
                }
            }
        }
        if samples.last().map(|s| s.0) == Some(0.0) {
            push_root(&mut roots, Root { rate: self.upper, touching: false });
        }

        if roots.is_empty() {
            Err(SolveError::NoRootInDomain { lower: self.lower, upper: self.upper })
        } else {
            Ok(roots)
        }
    }

    /// Safeguarded Newton iteration on a bracket with a sign change.
    fn refine(&self, flows: &[f64], mut lo: f64, f_lo: f64, mut hi: f64) -> Root {
        let lo_negative = f_lo < 0.0;
        let mut x = 0.5 * (lo + hi);
        let mut best = (f64::INFINITY, x);
        for _ in 0..self.max_iterations {
            let (fx, dx) = present_value_with_slope(flows, x);
            if fx.abs() < best.0 {
                best = (fx.abs(), x);
            }
            let newton_step = fx / dx;
            if fx == 0.0 || fx.abs() < self.value_tolerance && newton_step.abs() < self.rate_tolerance {
                break;
            }
            if (fx < 0.0) == lo_negative {
                lo = x;
            } else {
                hi = x;
            }
            // A narrow bracket only ends the search once the value is small too;
            // otherwise keep halving down to adjacent floats.
            let mid = 0.5 * (lo + hi);
            if hi - lo < self.rate_tolerance && best.0 < self.value_tolerance || mid <= lo || mid >= hi {
                break;
            }
            let newton = x - newton_step;
            x = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                mid
            };
        }
        Root { rate: best.1, touching: false }
    }

    /// Bisection on the derivative over a cell where it changes sign.
    fn critical_point(&self, flows: &[f64], mut lo: f64, d_lo: f64, mut hi: f64) -> f64 {
        let lo_negative = d_lo < 0.0;
        for _ in 0..self.max_iterations {
            let mid = 0.5 * (lo + hi);
            if hi - lo < self.rate_tolerance {
                break;
            }
            let (_, d) = present_value_with_slope(flows, mid);
            if (d < 0.0) == lo_negative {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn push_root(roots: &mut Vec<Root>, root: Root) {
    if roots.last().is_some_and(|last| (last.rate - root.rate).abs() < 1e-9) {
        return;
    }
    roots.push(root);
}
