//! Analytic one-dimensional laws given through their left-continuous
//! quantile functions, product laws for `d`-dimensional `Z`, and the
//! quadrature rules built from them.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::optim::composite_unit_rule;

/// Points per Gauss–Legendre panel.
pub const PANEL_ORDER: usize = 16;

/// JSON: `{"kind": "uniform", "a": 0, "b": 1}`,
/// `{"kind": "trunc_normal", "mu": .., "sigma": .., "lo": .., "hi": ..}`,
/// `{"kind": "discrete", "atoms": [[value, prob], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticDistribution {
    Uniform { a: f64, b: f64 },
    TruncNormal { mu: f64, sigma: f64, lo: f64, hi: f64 },
    Discrete { atoms: Vec<(f64, f64)> },
}

impl AnalyticDistribution {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let d = AnalyticDistribution::Uniform { a, b };
        d.validate()?;
        Ok(d)
    }

    /// Atoms are sorted by value; probabilities must sum to one.
    pub fn discrete(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
        let d = AnalyticDistribution::Discrete { atoms };
        d.validate()?;
        Ok(d)
    }

    /// Sorts discrete atoms by value (JSON input may list them in any order).
    pub fn normalize(&mut self) {
        if let AnalyticDistribution::Discrete { atoms } = self {
            atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AnalyticDistribution::Uniform { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::invalid("b", *b, "uniform needs finite a < b"));
                }
            }
            AnalyticDistribution::TruncNormal { mu, sigma, lo, hi } => {
                if !(mu.is_finite() && *sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::invalid("sigma", *sigma, "must be finite and > 0"));
                }
                if !(lo < hi) {
                    return Err(Error::invalid("hi", *hi, "truncation needs lo < hi"));
                }
                let n = Normal::new(*mu, *sigma).map_err(|e| Error::Parse(e.to_string()))?;
                if n.cdf(*hi) - n.cdf(*lo) <= 0.0 {
                    return Err(Error::invalid("hi", *hi, "truncation interval has no mass"));
                }
            }
            AnalyticDistribution::Discrete { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::EmptySample);
                }
                let mut total = 0.0;
                for (i, (v, p)) in atoms.iter().enumerate() {
                    if !v.is_finite() || !(*p >= 0.0) {
                        return Err(Error::NonFinite(i));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid("atoms", total, "probabilities must sum to 1"));
                }
                if atoms.windows(2).any(|w| w[0].0 > w[1].0) {
                    return Err(Error::Parse("discrete atoms must be sorted by value".into()));
                }
            }
        }
        Ok(())
    }

    /// Left-continuous quantile `F^←(u) = inf{t : F(t) ≥ u}` for `u ∈ (0,1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            AnalyticDistribution::Uniform { a, b } => a + u * (b - a),
            AnalyticDistribution::TruncNormal { mu, sigma, lo, hi } => {
                let n = Normal::new(*mu, *sigma).expect("validated");
                let (flo, fhi) = (n.cdf(*lo), n.cdf(*hi));
                n.inverse_cdf(flo + u * (fhi - flo)).clamp(*lo, *hi)
            }
            AnalyticDistribution::Discrete { atoms } => {
                let mut cum = 0.0;
                for (v, p) in atoms {
                    cum += p;
                    if cum >= u {
                        return *v;
                    }
                }
                atoms.last().map(|a| a.0).unwrap_or(f64::NAN)
            }
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, AnalyticDistribution::Discrete { .. })
    }

    /// Weighted nodes `(value, weight)` representing the law: exact atoms for
    /// discrete laws, otherwise a composite Gauss–Legendre rule in the
    /// quantile variable with at least `nodes` points.
    pub fn nodes(&self, nodes: usize) -> Vec<(f64, f64)> {
        match self {
            AnalyticDistribution::Discrete { atoms } => {
                atoms.iter().copied().filter(|a| a.1 > 0.0).collect()
            }
            _ => {
                let panels = nodes.div_ceil(PANEL_ORDER).max(1);
                let (u, w) = composite_unit_rule(panels, PANEL_ORDER);
                u.iter().zip(w).map(|(&u, w)| (self.quantile(u), w)).collect()
            }
        }
    }

    /// Inverse-transform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                return self.quantile(u);
            }
        }
    }
}

/// Law of `Z ∈ R^d` with independent marginals. Serializes as a JSON array
/// of [`AnalyticDistribution`]s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProductDistribution {
    pub marginals: Vec<AnalyticDistribution>,
}

impl ProductDistribution {
    pub fn new(mut marginals: Vec<AnalyticDistribution>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::Dimension("product distribution needs d >= 1".into()));
        }
        for m in &mut marginals {
            m.normalize();
            m.validate()?;
        }
        Ok(ProductDistribution { marginals })
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    /// Tensor-product quadrature: every continuous marginal gets `nodes`
    /// points, discrete marginals their atoms.
    pub fn quadrature(&self, nodes: usize) -> ZQuadrature {
        let per: Vec<Vec<(f64, f64)>> = self.marginals.iter().map(|m| m.nodes(nodes)).collect();
        let d = per.len();
        let total: usize = per.iter().map(Vec::len).product();
        let mut points = Vec::with_capacity(total * d);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            let mut w = 1.0;
            for (k, &i) in idx.iter().enumerate() {
                points.push(per[k][i].0);
                w *= per[k][i].1;
            }
            weights.push(w);
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < per[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
        ZQuadrature { d, points, weights }
    }

    /// Draws `n` i.i.d. vectors.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> ZSample {
        let d = self.dim();
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n {
            for m in &self.marginals {
                data.push(m.sample(rng));
            }
        }
        ZSample { d, data }
    }
}

/// Weighted points in `R^d`, stored row-major.
#[derive(Debug, Clone)]
pub struct ZQuadrature {
    pub d: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ZQuadrature {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.d)
    }
}

/// Observations `Z_1..Z_n` in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ZSample {
    d: usize,
    data: Vec<f64>,
}

impl ZSample {
    pub fn new(d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("z dimension must be >= 1".into()));
        }
        if data.is_empty() {
            return Err(Error::EmptySample);
        }
        if data.len() % d != 0 {
            return Err(Error::Dimension(format!(
                "{} values do not split into rows of length {d}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i / d));
        }
        Ok(ZSample { d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map(Vec::len).ok_or(Error::EmptySample)?;
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension("ragged z rows".into()));
        }
        Self::new(d, rows.concat())
    }

    pub fn scalar(values: &[f64]) -> Result<Self> {
        Self::new(1, values.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}
