//! The law-invariant functional
//!
//! ```text
//! R(F) = inf_x ( ∫₀¹ Φ*(F^←(u) + x) du − x )
//! ```
//!
//! evaluated on empirical samples and on analytic laws (by quadrature),
//! together with the set `M_F` of inner minimizers.
//!
//! The inner objective is convex in `x`, and every minimizer lies in the
//! data-driven interval
//!
//! ```text
//! a = −Φ(0) − s₂,   b = (Φ(x0) + s₂ + x0·s₁) / (x0 − 1)
//! ```
//!
//! with `s₁ = E|Y|` and `s₂ = E Φ*(|Y|)` under the law being evaluated.

use serde::{Deserialize, Serialize};

use crate::distribution::AnalyticDistribution;
use crate::divergence::{DivergencePair, DivergenceSpec};
use crate::error::{Error, Result};
use crate::optim::{golden_section_min, locate_boundary};

/// Sorted observations with left-continuous quantile access.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalSample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `F̂^←(u) = inf{t : F̂(t) ≥ u}`, i.e. `values[⌈u·n⌉ − 1]`.
    pub fn quantile_left(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::QuantileLevel(u));
        }
        let n = self.values.len();
        let k = ((u * n as f64).ceil() as usize).clamp(1, n);
        Ok(self.values[k - 1])
    }

    /// `F̂^→(u) = inf{t : F̂(t) > u}`, i.e. `values[⌊u·n⌋]`.
    pub fn quantile_right(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::QuantileLevel(u));
        }
        let n = self.values.len();
        let k = ((u * n as f64).floor() as usize).min(n - 1);
        Ok(self.values[k])
    }

    /// Shifts every observation by `c`.
    pub fn shifted(&self, c: f64) -> EmpiricalSample {
        EmpiricalSample {
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }
}

/// Value of the risk functional and its inner minimizer set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskValue {
    pub value: f64,
    /// Minimizer reported as the representative of `M_F`.
    pub x_star: f64,
    /// `M_F = [x_lo, x_hi]`.
    pub minimizer_interval: (f64, f64),
    /// Search interval used for the inner problem.
    pub search_interval: (f64, f64),
    pub iterations: usize,
}

/// How the convex inner problem is minimized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerMethod {
    /// Locates `M_F` directly as the zero set of the one-sided derivatives
    /// (regula falsi with bisection safeguard).
    #[default]
    Subgradient,
    /// Golden-section search on the objective, then expansion until the
    /// objective exceeds the minimum by a relative `1e-9`.
    GoldenSection,
}

/// The convex map `x ↦ Σ w_j Φ*(y_j + x) − x` for a weighted set of values
/// (uniform weights when `weights` is `None`).
#[derive(Clone, Copy)]
pub struct InnerObjective<'a> {
    values: &'a [f64],
    weights: Option<&'a [f64]>,
    pair: &'a DivergencePair,
}

impl<'a> InnerObjective<'a> {
    pub fn new(values: &'a [f64], pair: &'a DivergencePair) -> Self {
        InnerObjective {
            values,
            weights: None,
            pair,
        }
    }

    pub fn weighted(values: &'a [f64], weights: &'a [f64], pair: &'a DivergencePair) -> Self {
        debug_assert_eq!(values.len(), weights.len());
        InnerObjective {
            values,
            weights: Some(weights),
            pair,
        }
    }

    #[inline]
    fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        match self.weights {
            None => {
                let s: f64 = self.values.iter().map(|&y| f(y)).sum();
                s / self.values.len() as f64
            }
            Some(w) => self.values.iter().zip(w).map(|(&y, &w)| w * f(y)).sum(),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let pair = self.pair;
        self.expect(|y| pair.conj(y + x)) - x
    }

    /// One-sided derivatives `(φ′₋(x), φ′₊(x))` of the objective.
    pub fn subgradient(&self, x: f64) -> (f64, f64) {
        (self.dminus(x), self.dplus(x))
    }

    fn dplus(&self, x: f64) -> f64 {
        let pair = self.pair;
        self.expect(|y| pair.conj_dplus(y + x)) - 1.0
    }

    fn dminus(&self, x: f64) -> f64 {
        let pair = self.pair;
        self.expect(|y| pair.conj_dminus(y + x)) - 1.0
    }

    /// Mean absolute value `s₁`.
    pub fn mean_abs(&self) -> f64 {
        self.expect(f64::abs)
    }

    /// Data-driven localization `[a, b]` containing every inner minimizer.
    pub fn localization(&self) -> Result<(f64, f64)> {
        let pair = self.pair;
        let s1 = self.mean_abs();
        let s2 = self.expect(|y| pair.conj(y.abs()));
        if !s2.is_finite() {
            let bad = self
                .values
                .iter()
                .copied()
                .find(|y| !pair.conj(y.abs()).is_finite())
                .unwrap_or(f64::NAN);
            return Err(Error::Range { y: bad });
        }
        let x0 = pair.x0();
        let a = -pair.phi_at_0() - s2;
        let b = (pair.phi_at_x0() + s2 + x0 * s1) / (x0 - 1.0);
        Ok((a, b))
    }

    /// Minimizes over `[lo, hi]`, which must contain `M_F`.
    pub fn minimize(&self, bounds: (f64, f64), method: InnerMethod) -> Result<RiskValue> {
        let (a, b) = bounds;
        if !(a <= b) {
            return Err(Error::invalid("bounds", b, format!("empty search interval [{a}, {b}]")));
        }
        let rv = match method {
            InnerMethod::Subgradient => self.minimize_subgradient(a, b),
            InnerMethod::GoldenSection => self.minimize_golden(a, b),
        };
        if !rv.value.is_finite() {
            let y = self
                .values
                .iter()
                .copied()
                .find(|y| !self.pair.conj(y + rv.x_star).is_finite())
                .unwrap_or(f64::NAN);
            return Err(Error::Range { y });
        }
        Ok(rv)
    }

    fn minimize_subgradient(&self, a: f64, b: f64) -> RiskValue {
        if let DivergenceSpec::Entropic { gamma } = self.pair.spec() {
            return self.minimize_entropic(*gamma, a, b);
        }
        // resolve to adjacent floats so that kinks of Φ* are not overshot
        let abs_tol = 0.0;
        let mut iterations = 0;
        let gp = |x: f64| self.dplus(x);
        let gm = |x: f64| self.dminus(x);

        // x_lo = inf{x : φ′₊(x) ≥ 0}
        let ga = gp(a);
        let x_lo = if ga >= 0.0 {
            a
        } else {
            let gb = gp(b);
            if gb < 0.0 {
                b
            } else {
                let r = locate_boundary(gp, |v| v >= 0.0, a, ga, b, gb, abs_tol, 400);
                iterations += r.iterations;
                r.right
            }
        };

        // x_hi = sup{x : φ′₋(x) ≤ 0}
        let g_at_lo = gm(x_lo);
        let x_hi = if g_at_lo > 0.0 {
            x_lo
        } else {
            let gb = gm(b);
            if gb <= 0.0 {
                b
            } else {
                let r = locate_boundary(gm, |v| v > 0.0, x_lo, g_at_lo, b, gb, abs_tol, 400);
                iterations += r.iterations;
                r.left.max(x_lo)
            }
        };

        let f_lo = self.value(x_lo);
        let (x_star, value) = if x_hi > x_lo {
            let f_hi = self.value(x_hi);
            if f_hi < f_lo {
                (x_hi, f_hi)
            } else {
                (x_lo, f_lo)
            }
        } else {
            (x_lo, f_lo)
        };
        RiskValue {
            value,
            x_star,
            minimizer_interval: (x_lo, x_hi),
            search_interval: (a, b),
            iterations,
        }
    }

    /// The minimizer `x* = −ln E[e^{γY}]/γ` is explicit.
    fn minimize_entropic(&self, gamma: f64, a: f64, b: f64) -> RiskValue {
        let top = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scaled = self.expect(|y| (gamma * (y - top)).exp());
        let x = (-(scaled.ln() / gamma + top)).clamp(a, b);
        RiskValue {
            value: self.value(x),
            x_star: x,
            minimizer_interval: (x, x),
            search_interval: (a, b),
            iterations: 1,
        }
    }

    fn minimize_golden(&self, a: f64, b: f64) -> RiskValue {
        let xtol = 1e-10 * 1f64.max(a.abs()).max(b.abs());
        let f = |x: f64| self.value(x);
        let r = golden_section_min(f, a, b, xtol, 10_000);
        let threshold = r.fx + 1e-9 * r.fx.abs().max(1.0);
        let within = |x: f64| f(x) <= threshold;
        let x_lo = expand_edge(&within, r.x, a, xtol);
        let x_hi = expand_edge(&within, r.x, b, xtol);
        RiskValue {
            value: r.fx,
            x_star: r.x,
            minimizer_interval: (x_lo, x_hi),
            search_interval: (a, b),
            iterations: r.iterations,
        }
    }
}

/// Walks from `start` toward `limit` with doubling steps until `within`
/// fails, then bisects the crossing. Returns the last point inside.
fn expand_edge<F: Fn(f64) -> bool>(within: &F, start: f64, limit: f64, step0: f64) -> f64 {
    let dir = if limit >= start { 1.0 } else { -1.0 };
    let mut good = start;
    let mut step = step0.max(f64::MIN_POSITIVE);
    let bad = loop {
        let cand = start + dir * step;
        let cand = if dir > 0.0 { cand.min(limit) } else { cand.max(limit) };
        if !within(cand) {
            break cand;
        }
        good = cand;
        if cand == limit {
            return limit;
        }
        step *= 2.0;
    };
    let (mut g, mut b) = (good, bad);
    for _ in 0..200 {
        let mid = 0.5 * (g + b);
        if mid == g || mid == b {
            break;
        }
        if within(mid) {
            g = mid;
        } else {
            b = mid;
        }
    }
    g
}

/// `R(F̂)` for an empirical sample.
pub fn oce_empirical(sample: &EmpiricalSample, pair: &DivergencePair) -> Result<RiskValue> {
    oce_values(sample.values(), pair, InnerMethod::default())
}

/// `R(F̂)` for unsorted observations; order does not matter.
pub fn oce_values(values: &[f64], pair: &DivergencePair, method: InnerMethod) -> Result<RiskValue> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let obj = InnerObjective::new(values, pair);
    let bounds = obj.localization()?;
    obj.minimize(bounds, method)
}

/// `R(F)` for a weighted discrete law `Σ w_j δ_{y_j}` (weights sum to one).
pub fn oce_weighted(
    values: &[f64],
    weights: &[f64],
    pair: &DivergencePair,
    method: InnerMethod,
) -> Result<RiskValue> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if values.len() != weights.len() {
        return Err(Error::Dimension("values and weights differ in length".into()));
    }
    let obj = InnerObjective::weighted(values, weights, pair);
    let bounds = obj.localization()?;
    obj.minimize(bounds, method)
}

/// Largest node count tried by [`oce_analytic`] (unless the caller starts
/// above it).
pub const QUADRATURE_CAP: usize = 4096;

/// Change between successive node doublings accepted as converged.
pub const QUADRATURE_TOL: f64 = 1e-6;

/// `R(F)` for an analytic law by quadrature in the quantile variable.
/// Discrete laws are summed exactly; continuous ones use composite
/// Gauss–Legendre with node doubling until successive values agree to
/// [`QUADRATURE_TOL`].
pub fn oce_analytic(
    dist: &AnalyticDistribution,
    pair: &DivergencePair,
    quad_nodes: usize,
) -> Result<RiskValue> {
    if quad_nodes < 16 {
        return Err(Error::invalid("quad_nodes", quad_nodes as f64, "must be >= 16"));
    }
    dist.validate()?;
    let eval = |n: usize| {
        let (v, w): (Vec<f64>, Vec<f64>) = dist.nodes(n).into_iter().unzip();
        oce_weighted(&v, &w, pair, InnerMethod::default())
    };
    if dist.is_discrete() {
        return eval(quad_nodes);
    }
    let cap = QUADRATURE_CAP.max(quad_nodes);
    let mut n = quad_nodes;
    let mut prev = eval(n)?;
    loop {
        let next_n = 2 * n;
        let cur = eval(next_n)?;
        let change = (cur.value - prev.value).abs();
        if change <= QUADRATURE_TOL {
            return Ok(cur);
        }
        if next_n >= cap {
            return Err(Error::QuadratureNotConverged {
                nodes: next_n,
                change,
            });
        }
        n = next_n;
        prev = cur;
    }
}

/// One-sided derivatives of the empirical inner objective at `x`.
pub fn inner_subgradient(sample: &EmpiricalSample, pair: &DivergencePair, x: f64) -> (f64, f64) {
    InnerObjective::new(sample.values(), pair).subgradient(x)
}

/// One-sided derivatives of the analytic inner objective at `x`, using the
/// same quadrature nodes as [`oce_analytic`] at `quad_nodes`.
pub fn inner_subgradient_analytic(
    dist: &AnalyticDistribution,
    pair: &DivergencePair,
    quad_nodes: usize,
    x: f64,
) -> (f64, f64) {
    let (v, w): (Vec<f64>, Vec<f64>) = dist.nodes(quad_nodes).into_iter().unzip();
    InnerObjective::weighted(&v, &w, pair).subgradient(x)
}
