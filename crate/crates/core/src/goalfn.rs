//! Goal functions `G(θ, z)`: black-box Hölder goals with envelope data,
//! piecewise-linear (PL) goals, and constants.
//!
//! A PL goal is
//!
//! ```text
//! G(θ,z) = Σ_i [min_l 1_{I_il}(L_il·(Tθ + z) + a_il)] · (Λ_i·(Tθ + z) + b_i)
//! ```
//!
//! where each `I_il` is `(0,∞)` (open) or `[0,∞)` (closed) and exactly one
//! region must be active at every `(θ, z)`. The partition property is checked
//! at evaluation time.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::ZSample;
use crate::divergence::DivergencePair;
use crate::error::{Error, Result};

/// Largest `m` for which the PL envelope enumerates all `2^m` box vertices.
pub const MAX_VERTEX_DIM: usize = 20;

/// `Θ = Π [lo_k, hi_k]`. JSON: `{"lo": [...], "hi": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxRepr", into = "BoxRepr")]
pub struct ParameterBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct BoxRepr {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl TryFrom<BoxRepr> for ParameterBox {
    type Error = Error;
    fn try_from(r: BoxRepr) -> Result<Self> {
        ParameterBox::new(r.lo, r.hi)
    }
}

impl From<ParameterBox> for BoxRepr {
    fn from(b: ParameterBox) -> Self {
        BoxRepr { lo: b.lo, hi: b.hi }
    }
}

impl ParameterBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::Dimension("parameter box needs m >= 1".into()));
        }
        if lo.len() != hi.len() {
            return Err(Error::Dimension(format!(
                "box lo has {} entries, hi has {}",
                lo.len(),
                hi.len()
            )));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !(l.is_finite() && h.is_finite() && l <= h) {
                return Err(Error::invalid("hi", *h, format!("box side needs finite lo <= hi, lo = {l}")));
            }
        }
        Ok(ParameterBox { lo, hi })
    }

    /// `[lo, hi]` in one dimension.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(t, (l, h))| *l <= *t && *t <= *h)
    }

    /// Euclidean diameter `Δ(Θ)`.
    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt()
    }

    /// Componentwise `max(|lo_k|, |hi_k|)`.
    pub fn abs_max(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| l.abs().max(h.abs())).collect()
    }

    /// Tensor grid with `per_dim` equispaced points per side (one point for a
    /// degenerate side), in lexicographic order.
    pub fn grid(&self, per_dim: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| linspace(l, h, per_dim))
            .collect();
        cartesian(&axes)
    }

    /// All `2^m` vertices.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| if l == h { vec![l] } else { vec![l, h] })
            .collect();
        cartesian(&axes)
    }

    /// Uniform draw from the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| if l == h { l } else { l + (h - l) * rng.random::<f64>() })
            .collect()
    }

    /// Sub-box `center ± half_width`, clipped to `self`.
    pub fn around(&self, center: &[f64], half_width: &[f64]) -> ParameterBox {
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            lo.push((center[k] - half_width[k]).max(self.lo[k]));
            hi.push((center[k] + half_width[k]).min(self.hi[k]));
        }
        ParameterBox { lo, hi }
    }
}

pub(crate) fn linspace(l: f64, h: f64, k: usize) -> Vec<f64> {
    if l == h || k <= 1 {
        return vec![l];
    }
    let step = (h - l) / (k - 1) as f64;
    (0..k)
        .map(|i| if i + 1 == k { h } else { l + step * i as f64 })
        .collect()
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(axes.len())];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub type GoalEvalFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type ZFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A goal satisfying `|G(θ,z) − G(ϑ,z)| ≤ D(z)·‖θ − ϑ‖^β` on a box, with
/// `G(θ,z) ≤ D̄(z)` and `|G(θ,z)| ≤ ξ1(z)` there.
#[derive(Clone)]
pub struct HolderGoal {
    pub name: String,
    pub m: usize,
    pub d: usize,
    pub eval: GoalEvalFn,
    pub beta: f64,
    pub d_mod: ZFn,
    pub d_bar: ZFn,
    pub xi1: ZFn,
}

impl fmt::Debug for HolderGoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HolderGoal")
            .field("name", &self.name)
            .field("m", &self.m)
            .field("d", &self.d)
            .field("beta", &self.beta)
            .finish()
    }
}

/// Named Hölder goals available from JSON. All are Lipschitz; a declared
/// `β < 1` rescales `D` by `Δ(Θ)^{1−β}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolderPreset {
    /// `‖θ − z‖` (m = d).
    AbsDistance,
    /// `‖θ − z‖²` (m = d).
    SquaredDistance,
    /// `θ·z` (m = d).
    Product,
    /// `Σθ_k + Σz_k`.
    Sum,
    /// Newsvendor cost `cost·θ − price·min(θ, z)` (m = d = 1).
    Newsvendor { price: f64, cost: f64 },
}

impl HolderGoal {
    /// Builds a preset on `theta_box`. `d` is only consulted by `Sum`.
    pub fn preset(preset: &HolderPreset, theta_box: &ParameterBox, d: usize, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::invalid("beta", beta, "must lie in (0,1]"));
        }
        let m = theta_box.dim();
        let lo = theta_box.lo().to_vec();
        let hi = theta_box.hi().to_vec();
        let scale = theta_box.diameter().powf(1.0 - beta);
        let same_dim = |name: &str| -> Result<()> {
            if d != m {
                return Err(Error::Dimension(format!("{name} needs d = m, got d = {d}, m = {m}")));
            }
            Ok(())
        };
        // max over the box of ‖θ − z‖
        let far = {
            let (lo, hi) = (lo.clone(), hi.clone());
            move |z: &[f64]| -> f64 {
                lo.iter()
                    .zip(&hi)
                    .zip(z)
                    .map(|((l, h), z)| (l - z).abs().max((h - z).abs()).powi(2))
                    .sum::<f64>()
                    .sqrt()
            }
        };
        let g = match preset {
            HolderPreset::AbsDistance => {
                same_dim("abs_distance")?;
                let far = Arc::new(far);
                let f2 = far.clone();
                HolderGoal {
                    name: "abs_distance".into(),
                    m,
                    d,
                    eval: Arc::new(|t: &[f64], z: &[f64]| {
                        t.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
                    }),
                    beta,
                    d_mod: Arc::new(move |_| scale),
                    d_bar: Arc::new(move |z| far(z)),
                    xi1: Arc::new(move |z| f2(z)),
                }
            }
            HolderPreset::SquaredDistance => {
                same_dim("squared_distance")?;
                let far = Arc::new(far);
                let (f1, f2) = (far.clone(), far.clone());
                HolderGoal {
                    name: "squared_distance".into(),
                    m,
                    d,
                    eval: Arc::new(|t: &[f64], z: &[f64]| {
                        t.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
                    }),
                    beta,
                    d_mod: Arc::new(move |z| 2.0 * far(z) * scale),
                    d_bar: Arc::new(move |z| f1(z).powi(2)),
                    xi1: Arc::new(move |z| f2(z).powi(2)),
                }
            }
            HolderPreset::Product => {
                same_dim("product")?;
                let (l1, h1) = (lo.clone(), hi.clone());
                let amax = theta_box.abs_max();
                HolderGoal {
                    name: "product".into(),
                    m,
                    d,
                    eval: Arc::new(|t: &[f64], z: &[f64]| dot(t, z)),
                    beta,
                    d_mod: Arc::new(move |z| z.iter().map(|v| v * v).sum::<f64>().sqrt() * scale),
                    d_bar: Arc::new(move |z| {
                        l1.iter()
                            .zip(&h1)
                            .zip(z)
                            .map(|((l, h), z)| (l * z).max(h * z))
                            .sum()
                    }),
                    xi1: Arc::new(move |z| amax.iter().zip(z).map(|(a, z)| a * z.abs()).sum()),
                }
            }
            HolderPreset::Sum => {
                if d == 0 {
                    return Err(Error::Dimension("sum needs d >= 1".into()));
                }
                let slo: f64 = lo.iter().sum();
                let shi: f64 = hi.iter().sum();
                let root_m = (m as f64).sqrt();
                HolderGoal {
                    name: "sum".into(),
                    m,
                    d,
                    eval: Arc::new(|t: &[f64], z: &[f64]| t.iter().sum::<f64>() + z.iter().sum::<f64>()),
                    beta,
                    d_mod: Arc::new(move |_| root_m * scale),
                    d_bar: Arc::new(move |z| shi + z.iter().sum::<f64>()),
                    xi1: Arc::new(move |z| {
                        let s: f64 = z.iter().sum();
                        (slo + s).abs().max((shi + s).abs())
                    }),
                }
            }
            HolderPreset::Newsvendor { price, cost } => {
                if m != 1 || d != 1 {
                    return Err(Error::Dimension("newsvendor needs m = d = 1".into()));
                }
                let (price, cost) = (*price, *cost);
                if !(price.is_finite() && cost.is_finite() && price >= 0.0 && cost >= 0.0) {
                    return Err(Error::invalid("price", price, "newsvendor needs price, cost >= 0"));
                }
                let (l, h) = (lo[0], hi[0]);
                let lip = cost.max((cost - price).abs());
                HolderGoal {
                    name: "newsvendor".into(),
                    m,
                    d,
                    eval: Arc::new(move |t: &[f64], z: &[f64]| cost * t[0] - price * t[0].min(z[0])),
                    beta,
                    d_mod: Arc::new(move |_| lip * scale),
                    // G is piecewise linear in θ, so its maximum over [l,h]
                    // is at an endpoint or at the kink θ = z
                    d_bar: Arc::new(move |z| {
                        let g = |t: f64| cost * t - price * t.min(z[0]);
                        let mut best = g(l).max(g(h));
                        if z[0] > l && z[0] < h {
                            best = best.max(g(z[0]));
                        }
                        best
                    }),
                    xi1: Arc::new(move |z| {
                        let g = |t: f64| (cost * t - price * t.min(z[0])).abs();
                        let mut best = g(l).max(g(h));
                        if z[0] > l && z[0] < h {
                            best = best.max(g(z[0]));
                        }
                        best
                    }),
                }
            }
        };
        Ok(g)
    }

    /// `G ≡ c`: `D = 0`, `D̄ = c`, `ξ1 = |c|`.
    pub fn constant(c: f64, m: usize, d: usize) -> Self {
        HolderGoal {
            name: "constant".into(),
            m,
            d,
            eval: Arc::new(move |_, _| c),
            beta: 1.0,
            d_mod: Arc::new(|_| 0.0),
            d_bar: Arc::new(move |_| c),
            xi1: Arc::new(move |_| c.abs()),
        }
    }

    /// `C_k(z) = (D(z) + 1)·Φ*′₊(D̄(z) + k)`.
    pub fn ck(&self, pair: &DivergencePair, k: f64, z: &[f64]) -> f64 {
        ((self.d_mod)(z) + 1.0) * pair.conj_dplus((self.d_bar)(z) + k)
    }
}

/// Outcome of [`check_holder_on_conjugate`].
#[derive(Debug, Clone)]
pub struct HolderCheck {
    pub passes: bool,
    /// Largest observed `|ΔΦ*| / (C_k(z)·‖Δ(θ,x)‖^β)`.
    pub max_ratio: f64,
    /// `(θ, x, ϑ, y, z)` attaining `max_ratio` when it exceeds one.
    pub worst: Option<(Vec<f64>, f64, Vec<f64>, f64, Vec<f64>)>,
}

/// Verifies `|Φ*(G(θ,z)+x) − Φ*(G(ϑ,z)+y)| ≤ C_k(z)·‖(θ,x)−(ϑ,y)‖^β` on
/// `pairs_per_z` random pairs with `|x|, |y| ≤ k` for every `z` in `samples`.
/// The modulus is [`HolderGoal::ck`].
pub fn check_holder_on_conjugate(
    goal: &HolderGoal,
    pair: &DivergencePair,
    theta_box: &ParameterBox,
    k: f64,
    samples: &ZSample,
    pairs_per_z: usize,
    seed: u64,
) -> Result<HolderCheck> {
    if !(k >= 1.0) {
        return Err(Error::invalid("k", k, "must be >= 1"));
    }
    if samples.dim() != goal.d || theta_box.dim() != goal.m {
        return Err(Error::Dimension("goal, box and samples disagree".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    let mut worst = None;
    for z in samples.rows() {
        let ck = goal.ck(pair, k, z);
        for _ in 0..pairs_per_z {
            let t1 = theta_box.sample(&mut rng);
            let t2 = theta_box.sample(&mut rng);
            let x1 = k * (2.0 * rng.random::<f64>() - 1.0);
            let x2 = k * (2.0 * rng.random::<f64>() - 1.0);
            let lhs = (pair.conj((goal.eval)(&t1, z) + x1) - pair.conj((goal.eval)(&t2, z) + x2)).abs();
            let dist2: f64 =
                t1.iter().zip(&t2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + (x1 - x2) * (x1 - x2);
            let rhs = ck * dist2.sqrt().powf(goal.beta);
            let ratio = if rhs > 0.0 {
                lhs / rhs
            } else if lhs > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if ratio > max_ratio {
                max_ratio = ratio;
                if ratio > 1.0 + 1e-9 {
                    worst = Some((t1.clone(), x1, t2.clone(), x2, z.to_vec()));
                }
            }
        }
    }
    Ok(HolderCheck {
        passes: worst.is_none(),
        max_ratio,
        worst,
    })
}

/// One inequality `L·w + a ∈ I` with `I = (0,∞)` or `[0,∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlCondition {
    #[serde(rename = "L")]
    pub l: Vec<f64>,
    pub a: f64,
    pub closed: bool,
}

impl PlCondition {
    #[inline]
    fn holds(&self, w: &[f64]) -> bool {
        let v = dot(&self.l, w) + self.a;
        if self.closed {
            v >= 0.0
        } else {
            v > 0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlRegion {
    pub lambda: Vec<f64>,
    pub b: f64,
    pub conditions: Vec<PlCondition>,
}

impl PlRegion {
    #[inline]
    fn active(&self, w: &[f64]) -> bool {
        self.conditions.iter().all(|c| c.holds(w))
    }
}

/// Piecewise-linear goal. JSON:
/// `{"m": 1, "d": 1, "T": [row-major d×m], "regions": [{"lambda": [..], "b": .., "conditions": [{"L": [..], "a": .., "closed": bool}]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlGoal {
    pub m: usize,
    pub d: usize,
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    pub regions: Vec<PlRegion>,
}

impl PlGoal {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.d == 0 {
            return Err(Error::Dimension("PL goal needs m, d >= 1".into()));
        }
        if self.t.len() != self.m * self.d {
            return Err(Error::Dimension(format!(
                "T has {} entries, expected d*m = {}",
                self.t.len(),
                self.m * self.d
            )));
        }
        if self.regions.is_empty() {
            return Err(Error::Dimension("PL goal needs at least one region".into()));
        }
        for r in &self.regions {
            if r.lambda.len() != self.d || r.conditions.iter().any(|c| c.l.len() != self.d) {
                return Err(Error::Dimension("PL functional length differs from d".into()));
            }
            let finite = r.lambda.iter().chain(r.conditions.iter().flat_map(|c| &c.l)).all(|v| v.is_finite())
                && r.b.is_finite()
                && r.conditions.iter().all(|c| c.a.is_finite());
            if !finite {
                return Err(Error::Parse("PL coefficients must be finite".into()));
            }
        }
        Ok(())
    }

    /// `w = Tθ + z`.
    #[inline]
    pub fn shifted(&self, theta: &[f64], z: &[f64]) -> Vec<f64> {
        (0..self.d)
            .map(|i| dot(&self.t[i * self.m..(i + 1) * self.m], theta) + z[i])
            .collect()
    }

    /// Indices of the regions active at `(θ, z)`.
    pub fn active_regions(&self, theta: &[f64], z: &[f64]) -> Vec<usize> {
        let w = self.shifted(theta, z);
        (0..self.regions.len()).filter(|&i| self.regions[i].active(&w)).collect()
    }

    pub fn eval(&self, theta: &[f64], z: &[f64]) -> Result<f64> {
        let w = self.shifted(theta, z);
        let mut found = None;
        let mut active = 0;
        for r in &self.regions {
            if r.active(&w) {
                active += 1;
                found = Some(r);
            }
        }
        match (active, found) {
            (1, Some(r)) => Ok(dot(&r.lambda, &w) + r.b),
            _ => Err(Error::PartitionViolation {
                theta: theta.to_vec(),
                z: z.to_vec(),
                active,
            }),
        }
    }

    /// `Λᵀ T` as an m-vector.
    fn pulled_back(&self, f: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|k| (0..self.d).map(|i| f[i] * self.t[i * self.m + k]).sum())
            .collect()
    }

    /// Envelope `ξ1(z) = Σ|Λ_i·z| + η + Σ|b_i|` with `η = max_Θ Σ|Λ_i·Tθ|`.
    pub fn envelope(&self, theta_box: &ParameterBox) -> Result<PlEnvelope> {
        self.validate()?;
        if theta_box.dim() != self.m {
            return Err(Error::Dimension(format!(
                "box has dimension {}, PL goal expects m = {}",
                theta_box.dim(),
                self.m
            )));
        }
        let coefs: Vec<Vec<f64>> = self.regions.iter().map(|r| self.pulled_back(&r.lambda)).collect();
        let exact = self.m <= MAX_VERTEX_DIM;
        let eta = if exact {
            theta_box
                .vertices()
                .iter()
                .map(|v| coefs.iter().map(|c| dot(c, v).abs()).sum::<f64>())
                .fold(0.0, f64::max)
        } else {
            let amax = theta_box.abs_max();
            coefs.iter().map(|c| c.iter().zip(&amax).map(|(c, a)| c.abs() * a).sum::<f64>()).sum()
        };
        Ok(PlEnvelope {
            lambdas: self.regions.iter().map(|r| r.lambda.clone()).collect(),
            eta,
            sum_abs_b: self.regions.iter().map(|r| r.b.abs()).sum(),
            exact,
        })
    }
}

/// Envelope data of a PL goal over a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlEnvelope {
    pub lambdas: Vec<Vec<f64>>,
    pub eta: f64,
    pub sum_abs_b: f64,
    /// False when `m` was too large for vertex enumeration and the
    /// coordinate-wise bound was used for `η`.
    pub exact: bool,
}

impl PlEnvelope {
    pub fn xi1(&self, z: &[f64]) -> f64 {
        self.lambdas.iter().map(|l| dot(l, z).abs()).sum::<f64>() + self.eta + self.sum_abs_b
    }
}

/// Shorthand for [`PlGoal::envelope`].
pub fn pl_envelope(goal: &PlGoal, theta_box: &ParameterBox) -> Result<PlEnvelope> {
    goal.envelope(theta_box)
}

/// Sample-based evidence for the null-boundary condition: for every closed
/// condition, rejects if some sampled `z` has `L·z` inside the range of
/// `−L·Tθ − a` over the box (padded by `1e-12`). Passing is necessary
/// evidence only.
pub fn check_null_boundary(goal: &PlGoal, theta_box: &ParameterBox, z_samples: &ZSample) -> Result<bool> {
    goal.validate()?;
    if theta_box.dim() != goal.m || z_samples.dim() != goal.d {
        return Err(Error::Dimension("goal, box and samples disagree".into()));
    }
    for r in &goal.regions {
        for c in r.conditions.iter().filter(|c| c.closed) {
            let coef = goal.pulled_back(&c.l);
            let (mut cmin, mut cmax) = (0.0, 0.0);
            for ((k, l), h) in coef.iter().zip(theta_box.lo()).zip(theta_box.hi()) {
                cmin += (k * l).min(k * h);
                cmax += (k * l).max(k * h);
            }
            let (lo, hi) = (-c.a - cmax - 1e-12, -c.a - cmin + 1e-12);
            if z_samples.rows().any(|z| {
                let v = dot(&c.l, z);
                v >= lo && v <= hi
            }) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Shipped PL instances. All have `m = 1`.
pub mod instances {
    use super::*;

    fn cond(l: Vec<f64>, a: f64, closed: bool) -> PlCondition {
        PlCondition { l, a, closed }
    }

    /// `G(θ,z) = θ + z` as a single always-active region.
    pub fn identity() -> PlGoal {
        PlGoal {
            m: 1,
            d: 1,
            t: vec![1.0],
            regions: vec![PlRegion {
                lambda: vec![1.0],
                b: 0.0,
                conditions: vec![cond(vec![0.0], 1.0, true)],
            }],
        }
    }

    /// `G(θ,z) = 1_{θ+z>0}`.
    pub fn step() -> PlGoal {
        PlGoal {
            m: 1,
            d: 1,
            t: vec![1.0],
            regions: vec![
                PlRegion {
                    lambda: vec![0.0],
                    b: 1.0,
                    conditions: vec![cond(vec![1.0], 0.0, false)],
                },
                PlRegion {
                    lambda: vec![0.0],
                    b: 0.0,
                    conditions: vec![cond(vec![-1.0], 0.0, true)],
                },
            ],
        }
    }

    /// `G(θ,z) = |θ − z|` with `w = z − θ`.
    pub fn abs_difference() -> PlGoal {
        PlGoal {
            m: 1,
            d: 1,
            t: vec![-1.0],
            regions: vec![
                PlRegion {
                    lambda: vec![-1.0],
                    b: 0.0,
                    conditions: vec![cond(vec![-1.0], 0.0, false)],
                },
                PlRegion {
                    lambda: vec![1.0],
                    b: 0.0,
                    conditions: vec![cond(vec![1.0], 0.0, true)],
                },
            ],
        }
    }

    /// Two-regime goal on `z = (z₁, z₂)`: `θ + z₁` when `z₂ > 1/2`, else
    /// `2 − θ − z₁`. Bounded by 2 on `Θ = [0,1]`, `z₁ ∈ [0,1]`.
    pub fn switch() -> PlGoal {
        PlGoal {
            m: 1,
            d: 2,
            t: vec![1.0, 0.0],
            regions: vec![
                PlRegion {
                    lambda: vec![1.0, 0.0],
                    b: 0.0,
                    conditions: vec![cond(vec![0.0, 1.0], -0.5, false)],
                },
                PlRegion {
                    lambda: vec![-1.0, 0.0],
                    b: 2.0,
                    conditions: vec![cond(vec![0.0, -1.0], 0.5, true)],
                },
            ],
        }
    }

    pub fn all() -> Vec<(&'static str, PlGoal)> {
        vec![
            ("identity", identity()),
            ("step", step()),
            ("abs_difference", abs_difference()),
            ("switch", switch()),
        ]
    }
}

/// `ξ1` evaluator attached to a goal and box.
#[derive(Clone)]
pub struct Envelope {
    xi1: ZFn,
    /// False when the PL fallback bound was used.
    pub exact: bool,
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Envelope").field("exact", &self.exact).finish()
    }
}

impl Envelope {
    #[inline]
    pub fn xi1(&self, z: &[f64]) -> f64 {
        (self.xi1)(z)
    }
}

/// `G(θ, z)` in one of three flavors.
#[derive(Debug, Clone)]
pub enum GoalFunction {
    Holder(HolderGoal),
    Pl(PlGoal),
    Constant { value: f64, m: usize, d: usize },
}

impl GoalFunction {
    pub fn m(&self) -> usize {
        match self {
            GoalFunction::Holder(h) => h.m,
            GoalFunction::Pl(p) => p.m,
            GoalFunction::Constant { m, .. } => *m,
        }
    }

    pub fn d(&self) -> usize {
        match self {
            GoalFunction::Holder(h) => h.d,
            GoalFunction::Pl(p) => p.d,
            GoalFunction::Constant { d, .. } => *d,
        }
    }

    #[inline]
    pub fn eval(&self, theta: &[f64], z: &[f64]) -> Result<f64> {
        match self {
            GoalFunction::Holder(h) => Ok((h.eval)(theta, z)),
            GoalFunction::Pl(p) => p.eval(theta, z),
            GoalFunction::Constant { value, .. } => Ok(*value),
        }
    }

    /// `ξ1` over `theta_box`. Hölder goals carry their own (built for the
    /// box they were constructed with).
    pub fn envelope(&self, theta_box: &ParameterBox) -> Result<Envelope> {
        Ok(match self {
            GoalFunction::Holder(h) => Envelope {
                xi1: h.xi1.clone(),
                exact: true,
            },
            GoalFunction::Pl(p) => {
                let env = p.envelope(theta_box)?;
                let exact = env.exact;
                Envelope {
                    xi1: Arc::new(move |z| env.xi1(z)),
                    exact,
                }
            }
            GoalFunction::Constant { value, .. } => {
                let c = value.abs();
                Envelope {
                    xi1: Arc::new(move |_| c),
                    exact: true,
                }
            }
        })
    }
}

/// JSON form of a goal: `{"type": "holder", "preset": .., "d": .., "beta": ..}`,
/// `{"type": "pl", ..PlGoal}` or `{"type": "constant", "value": .., "m": .., "d": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GoalSpec {
    Holder {
        preset: HolderPreset,
        /// Dimension of `z`; defaults to `m`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
        #[serde(default = "one")]
        beta: f64,
    },
    Pl(PlGoal),
    Constant {
        value: f64,
        #[serde(default = "one_usize")]
        m: usize,
        #[serde(default = "one_usize")]
        d: usize,
    },
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

impl GoalSpec {
    pub fn build(&self, theta_box: &ParameterBox) -> Result<GoalFunction> {
        let g = match self {
            GoalSpec::Holder { preset, d, beta } => GoalFunction::Holder(HolderGoal::preset(
                preset,
                theta_box,
                d.unwrap_or(theta_box.dim()),
                *beta,
            )?),
            GoalSpec::Pl(p) => {
                p.validate()?;
                GoalFunction::Pl(p.clone())
            }
            GoalSpec::Constant { value, m, d } => {
                if !value.is_finite() {
                    return Err(Error::invalid("value", *value, "must be finite"));
                }
                GoalFunction::Constant {
                    value: *value,
                    m: *m,
                    d: *d,
                }
            }
        };
        if g.m() != theta_box.dim() {
            return Err(Error::Dimension(format!(
                "goal expects m = {}, box has {}",
                g.m(),
                theta_box.dim()
            )));
        }
        Ok(g)
    }
}
