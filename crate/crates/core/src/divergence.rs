//! Divergence functions `Φ` and their Fenchel–Legendre conjugates
//! `Φ*(y) = sup_{x≥0} (x·y − Φ(x))`.
//!
//! Three families have closed forms:
//!
//! | family | `Φ(x)` | `Φ*(y)` | default `x0` |
//! |---|---|---|---|
//! | `Avar { alpha }` | `0` on `[0, 1/(1−α)]`, `∞` beyond | `y⁺/(1−α)` | `1/(1−α)` |
//! | `Entropic { gamma }` | `(x ln x − x + 1)/γ` | `(e^{γy} − 1)/γ` | `2` |
//! | `Polynomial { p }` | `x^p/p` | `(p−1)(y⁺)^{p/(p−1)}/p` | `2` |
//!
//! Any other convex `Φ` with `inf Φ = 0`, finite `Φ(0)`, finite `Φ(x0)` for
//! some `x0 > 1`, and superlinear growth can be supplied as
//! [`CustomDivergence`]; its conjugate is computed numerically by
//! [`conjugate_numeric`].

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::golden_section_min;

/// Scalar divergence `Φ` on `[0, ∞)`. Values outside the effective domain
/// must be reported as `f64::INFINITY`.
pub type PhiFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Absolute accuracy used when a [`DivergencePair`] conjugates a custom `Φ`.
const CUSTOM_CONJ_TOL: f64 = 1e-10;

/// Maximum number of bracket doublings in [`conjugate_numeric`].
const MAX_DOUBLINGS: u32 = 1100;

/// A user-supplied divergence. Only usable from code; it has no JSON form.
#[derive(Clone)]
pub struct CustomDivergence {
    pub name: String,
    pub phi: PhiFn,
    pub x0: f64,
    pub phi_at_0: f64,
    /// Point beyond which `Φ(x)/x` is expected to increase.
    pub x_max_hint: f64,
}

impl fmt::Debug for CustomDivergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDivergence")
            .field("name", &self.name)
            .field("x0", &self.x0)
            .field("phi_at_0", &self.phi_at_0)
            .field("x_max_hint", &self.x_max_hint)
            .finish()
    }
}

impl CustomDivergence {
    pub fn new(name: impl Into<String>, phi: PhiFn, x0: f64, x_max_hint: f64) -> Self {
        let phi_at_0 = phi(0.0);
        CustomDivergence {
            name: name.into(),
            phi,
            x0,
            phi_at_0,
            x_max_hint,
        }
    }
}

/// Divergence description. Serializes as
/// `{"kind": "avar"|"entropic"|"polynomial", "alpha"|"gamma"|"p": number}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DivergenceSpec {
    Avar {
        alpha: f64,
    },
    Entropic {
        gamma: f64,
    },
    Polynomial {
        p: f64,
    },
    #[serde(skip)]
    Custom(CustomDivergence),
}

impl DivergenceSpec {
    /// Evaluates `Φ(x)`; `∞` outside the effective domain, `NaN` for `x < 0`.
    pub fn phi(&self, x: f64) -> f64 {
        if x < 0.0 || x.is_nan() {
            return f64::NAN;
        }
        match self {
            DivergenceSpec::Avar { alpha } => {
                if x <= 1.0 / (1.0 - alpha) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            DivergenceSpec::Entropic { gamma } => {
                if x == 0.0 {
                    1.0 / gamma
                } else {
                    (x * x.ln() - x + 1.0) / gamma
                }
            }
            DivergenceSpec::Polynomial { p } => x.powf(*p) / p,
            DivergenceSpec::Custom(c) => (c.phi)(x),
        }
    }

    fn default_x0(&self) -> f64 {
        match self {
            DivergenceSpec::Avar { alpha } => 1.0 / (1.0 - alpha),
            DivergenceSpec::Entropic { .. } | DivergenceSpec::Polynomial { .. } => 2.0,
            DivergenceSpec::Custom(c) => c.x0,
        }
    }

    /// Checks the parameter bounds of the named families and runs the sampled
    /// admissibility checks for custom divergences.
    pub fn validate(&self) -> Result<()> {
        match self {
            DivergenceSpec::Avar { alpha } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::invalid("alpha", *alpha, "must lie in (0,1)"));
                }
            }
            DivergenceSpec::Entropic { gamma } => {
                if !(*gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::invalid("gamma", *gamma, "must be > 0"));
                }
            }
            DivergenceSpec::Polynomial { p } => {
                if !(*p > 1.0 && p.is_finite()) {
                    return Err(Error::invalid("p", *p, "must be > 1"));
                }
            }
            DivergenceSpec::Custom(c) => validate_custom(c)?,
        }
        Ok(())
    }
}

/// Sampled admissibility checks for a custom divergence. Convexity and growth
/// cannot be decided from point queries, so these are spot checks only.
fn validate_custom(c: &CustomDivergence) -> Result<()> {
    let phi = &c.phi;
    if !(c.x0 > 1.0) {
        return Err(Error::invalid("x0", c.x0, "must be > 1"));
    }
    let p0 = phi(0.0);
    if !p0.is_finite() {
        return Err(Error::DivergenceCheck("phi(0) is not finite".into()));
    }
    if (p0 - c.phi_at_0).abs() > 1e-12 * p0.abs().max(1.0) {
        return Err(Error::DivergenceCheck(format!(
            "phi_at_0 = {} disagrees with phi(0) = {p0}",
            c.phi_at_0
        )));
    }
    if !phi(c.x0).is_finite() {
        return Err(Error::DivergenceCheck(format!("phi(x0) is not finite at x0 = {}", c.x0)));
    }
    if !(c.x_max_hint > 0.0 && c.x_max_hint.is_finite()) {
        return Err(Error::invalid("x_max_hint", c.x_max_hint, "must be positive and finite"));
    }

    let span = c.x0.max(c.x_max_hint);
    let mut min_phi = f64::INFINITY;
    for i in 0..=200 {
        let v = phi(span * i as f64 / 200.0);
        if v < -1e-9 {
            return Err(Error::DivergenceCheck(format!("phi takes negative value {v}")));
        }
        min_phi = min_phi.min(v);
    }
    if min_phi > 1e-8 {
        return Err(Error::DivergenceCheck(format!(
            "inf of phi over the grid is {min_phi}, expected 0"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
    for _ in 0..200 {
        let a: f64 = rng.random::<f64>() * 2.0 * span;
        let b: f64 = rng.random::<f64>() * 2.0 * span;
        let (fa, fb) = (phi(a), phi(b));
        if !(fa.is_finite() && fb.is_finite()) {
            continue;
        }
        let fm = phi(0.5 * (a + b));
        let rhs = 0.5 * (fa + fb);
        if !(fm <= rhs + 1e-9 * (1.0 + rhs.abs())) {
            return Err(Error::DivergenceCheck(format!(
                "midpoint convexity fails between {a} and {b}"
            )));
        }
    }

    let ratio = |x: f64| phi(x) / x;
    let mut prev = ratio(c.x_max_hint);
    let first = prev;
    let mut x = c.x_max_hint;
    for _ in 0..12 {
        x *= 2.0;
        let r = ratio(x);
        if r < prev - 1e-12 * prev.abs().max(1.0) {
            return Err(Error::DivergenceCheck(format!(
                "phi(x)/x decreases beyond x_max_hint near x = {x}"
            )));
        }
        prev = r;
    }
    if !(prev > first || prev == f64::INFINITY) {
        return Err(Error::DivergenceCheck(
            "phi(x)/x does not grow beyond x_max_hint".into(),
        ));
    }
    Ok(())
}

/// A validated divergence together with its conjugate and the constants
/// `Φ(0)`, `x0`, `Φ(x0)` used by the localization formulas.
///
/// Immutable after construction and cheap to clone.
#[derive(Debug, Clone)]
pub struct DivergencePair {
    spec: DivergenceSpec,
    x0: f64,
    phi_at_0: f64,
    phi_at_x0: f64,
}

impl DivergencePair {
    /// Validates `spec` and attaches the closed-form (or numerical) conjugate.
    pub fn new(spec: DivergenceSpec) -> Result<Self> {
        spec.validate()?;
        let x0 = spec.default_x0();
        let phi_at_0 = spec.phi(0.0);
        let phi_at_x0 = spec.phi(x0);
        Ok(DivergencePair {
            spec,
            x0,
            phi_at_0,
            phi_at_x0,
        })
    }

    pub fn avar(alpha: f64) -> Result<Self> {
        Self::new(DivergenceSpec::Avar { alpha })
    }

    pub fn entropic(gamma: f64) -> Result<Self> {
        Self::new(DivergenceSpec::Entropic { gamma })
    }

    pub fn polynomial(p: f64) -> Result<Self> {
        Self::new(DivergenceSpec::Polynomial { p })
    }

    /// Replaces the reference point `x0 > 1` (must lie in the effective domain).
    pub fn with_x0(mut self, x0: f64) -> Result<Self> {
        if !(x0 > 1.0) {
            return Err(Error::invalid("x0", x0, "must be > 1"));
        }
        let v = self.spec.phi(x0);
        if !v.is_finite() {
            return Err(Error::invalid("x0", x0, "phi(x0) must be finite"));
        }
        self.x0 = x0;
        self.phi_at_x0 = v;
        Ok(self)
    }

    pub fn spec(&self) -> &DivergenceSpec {
        &self.spec
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn phi_at_0(&self) -> f64 {
        self.phi_at_0
    }

    pub fn phi_at_x0(&self) -> f64 {
        self.phi_at_x0
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.spec.phi(x)
    }

    /// `Φ*(y)`. May be `+∞` on overflow (entropic with large `γ·y`).
    #[inline]
    pub fn conj(&self, y: f64) -> f64 {
        match &self.spec {
            DivergenceSpec::Avar { alpha } => y.max(0.0) / (1.0 - alpha),
            DivergenceSpec::Entropic { gamma } => (gamma * y).exp_m1() / gamma,
            DivergenceSpec::Polynomial { p } => {
                if y <= 0.0 {
                    0.0
                } else if *p == 2.0 {
                    0.5 * y * y
                } else {
                    (p - 1.0) * y.powf(p / (p - 1.0)) / p
                }
            }
            DivergenceSpec::Custom(c) => {
                conjugate_numeric(&*c.phi, c.x0, y, CUSTOM_CONJ_TOL).unwrap_or(f64::NAN)
            }
        }
    }

    /// Left derivative of `Φ*` at `y`.
    #[inline]
    pub fn conj_dminus(&self, y: f64) -> f64 {
        match &self.spec {
            DivergenceSpec::Avar { alpha } => {
                if y > 0.0 {
                    1.0 / (1.0 - alpha)
                } else {
                    0.0
                }
            }
            DivergenceSpec::Custom(_) => {
                let h = custom_step(y);
                (self.conj(y) - self.conj(y - h)) / h
            }
            _ => self.smooth_derivative(y),
        }
    }

    /// Right derivative of `Φ*` at `y`.
    #[inline]
    pub fn conj_dplus(&self, y: f64) -> f64 {
        match &self.spec {
            DivergenceSpec::Avar { alpha } => {
                if y >= 0.0 {
                    1.0 / (1.0 - alpha)
                } else {
                    0.0
                }
            }
            DivergenceSpec::Custom(_) => {
                let h = custom_step(y);
                (self.conj(y + h) - self.conj(y)) / h
            }
            _ => self.smooth_derivative(y),
        }
    }

    #[inline]
    fn smooth_derivative(&self, y: f64) -> f64 {
        match &self.spec {
            DivergenceSpec::Entropic { gamma } => (gamma * y).exp(),
            DivergenceSpec::Polynomial { p } => {
                if y <= 0.0 {
                    0.0
                } else if *p == 2.0 {
                    y
                } else {
                    y.powf(1.0 / (p - 1.0))
                }
            }
            _ => unreachable!("only smooth families"),
        }
    }

    /// `(Φ*′₋(y), Φ*′₊(y))`.
    pub fn conjugate_derivatives(&self, y: f64) -> (f64, f64) {
        (self.conj_dminus(y), self.conj_dplus(y))
    }

    /// Whether the inner OCE minimizer is unique for every distribution.
    pub fn has_unique_inner_minimizer(&self) -> bool {
        has_unique_inner_minimizer(&self.spec)
    }
}

#[inline]
fn custom_step(y: f64) -> f64 {
    1e-6f64.max(1e-6 * y.abs())
}

/// `sup_{x≥0} (x·y − φ(x))` to absolute accuracy about `tol`.
///
/// The bracket `[0, X]` starts at `X = 1` and doubles until the concave
/// objective decreases between `X` and `2X`, or until `φ(2X) = ∞`, in which
/// case the end of the effective domain is located by bisection and becomes
/// the upper end. Golden-section search then maximizes over the bracket.
pub fn conjugate_numeric(phi: &dyn Fn(f64) -> f64, x0: f64, y: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", tol, "must be > 0"));
    }
    if !(x0 > 1.0) {
        return Err(Error::invalid("x0", x0, "must be > 1"));
    }
    let obj = |x: f64| x * y - phi(x);
    let mut x = 1.0f64;
    let mut upper = None;
    for _ in 0..MAX_DOUBLINGS {
        let next = 2.0 * x;
        if !next.is_finite() {
            break;
        }
        let fnext = phi(next);
        if fnext.is_infinite() {
            // `x` is finite, `next` is not: bisect the domain boundary.
            let (mut lo, mut hi) = (x, next);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if phi(mid).is_finite() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            upper = Some(lo);
            break;
        }
        if obj(next) < obj(x) {
            upper = Some(next);
            break;
        }
        x = next;
    }
    let upper = upper.ok_or(Error::BracketBudget {
        y,
        doublings: MAX_DOUBLINGS,
    })?;
    let xtol = tol / (1.0 + y.abs());
    let r = golden_section_min(|x| -obj(x), 0.0, upper, xtol, 10_000);
    Ok(-r.fx)
}

/// Uniqueness of the inner OCE minimizer for every distribution.
///
/// Polynomial divergences satisfy `Φ(0) = 0` with `Φ*` strictly convex on the
/// positive axis. AVaR's minimizer set is a quantile interval. The entropic
/// family has an explicit unique minimizer even though `Φ(0) = 1/γ ≠ 0`.
/// Custom divergences get a sampled strict-convexity check.
pub fn has_unique_inner_minimizer(spec: &DivergenceSpec) -> bool {
    match spec {
        DivergenceSpec::Polynomial { .. } | DivergenceSpec::Entropic { .. } => true,
        DivergenceSpec::Avar { .. } => false,
        DivergenceSpec::Custom(c) => {
            if (c.phi)(0.0).abs() > 1e-12 {
                return false;
            }
            let conj =
                |y: f64| conjugate_numeric(&*c.phi, c.x0, y, CUSTOM_CONJ_TOL).unwrap_or(f64::NAN);
            let mut y = 1e-2;
            while y < 1e2 {
                let (a, b) = (y, 2.0 * y);
                let mid = conj(0.5 * (a + b));
                let avg = 0.5 * (conj(a) + conj(b));
                if !(mid < avg - 1e-8 * (1.0 + avg.abs())) {
                    return false;
                }
                y *= 2.0;
            }
            true
        }
    }
}
