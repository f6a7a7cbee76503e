//! Finite-sample bound evaluators and Monte Carlo harnesses for the limit
//! behaviour of the SAA optimal value.
//!
//! Bounds:
//!
//! ```text
//! x̄_{ξ,x̄}  = (Φ(x̄) + 1 + x̄ + E Φ*(ξ) + x̄·E ξ) / (x̄ − 1)
//! η_{L,x0}  = Φ(0) + max(Φ*(L + x̄_{L,x0}), 1)
//! B41(n, ε) = min(1, (D√n ε/(√V η))^V e^{−2nε²/η²}, D^V e^{−nε²/η²})
//! B42(n, ε) = (D(ε−δ̄)/(√V h))^V n^{−V/2} e^{−(ε−δ̄)²/(n h²)} + P(B_n),  h = η̄ + Φ(0)
//! K_k       = (2‖C_k‖ + 1)·(4Δ(Θ×[−k,k]) + 1)^β,  N_[](ε) ≤ (K_k/ε)^{(m+1)/β}
//! ```
//!
//! `D` is a universal constant without a computable value; it is an input,
//! and the deviation harness reports the smallest `D` consistent with the
//! observed tail frequencies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::ProductDistribution;
use crate::divergence::DivergencePair;
use crate::error::{Error, Result};
use crate::goalfn::{HolderGoal, ParameterBox};
use crate::rng::{grid_stream, stream_rng, RNG_ID};
use crate::saa::{solve_saa, true_value, GridConfig, ProblemTemplate, TrueMinimizer, TrueValue, TrueValueConfig};
use crate::stats;

/// Constants entering the deviation bounds. Unused fields may stay zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundConstants {
    pub x_bar: f64,
    pub eta: f64,
    pub delta_bar: f64,
    pub eta_bar: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub k_k: f64,
    pub beta: f64,
    pub m: usize,
    /// `Φ(0)`, needed by the second bound.
    pub phi_at_0: f64,
}

/// `x̄_{ξ,x̄}` with `x̄ = pair.x0()`.
pub fn xbar_constant(pair: &DivergencePair, e_xi: f64, e_phistar_xi: f64) -> f64 {
    let x = pair.x0();
    (pair.phi_at_x0() + 1.0 + x + e_phistar_xi + x * e_xi) / (x - 1.0)
}

/// `η_{L,x0}` for goals bounded by `L`.
pub fn eta_bounded(pair: &DivergencePair, l: f64) -> Result<f64> {
    if !(l >= 0.0 && l.is_finite()) {
        return Err(Error::invalid("L", l, "must be finite and >= 0"));
    }
    let conj_l = pair.conj(l);
    if !conj_l.is_finite() {
        return Err(Error::Range { y: l });
    }
    let xbar = xbar_constant(pair, l, conj_l);
    let top = pair.conj(l + xbar);
    if !top.is_finite() {
        return Err(Error::Range { y: l + xbar });
    }
    Ok(pair.phi_at_0() + top.max(1.0))
}

fn check_vd(c: &BoundConstants) -> Result<()> {
    if !(c.v > 0.0 && c.v.is_finite()) {
        return Err(Error::invalid("V", c.v, "must be > 0"));
    }
    if !(c.d > 0.0 && c.d.is_finite()) {
        return Err(Error::invalid("D", c.d, "must be > 0"));
    }
    Ok(())
}

/// Bound for goals with `|G| ≤ L`, using `c.eta`, `c.v`, `c.d`.
pub fn bound_bounded(n: usize, eps: f64, c: &BoundConstants) -> Result<f64> {
    check_vd(c)?;
    if !(c.eta > 0.0) {
        return Err(Error::invalid("eta", c.eta, "must be > 0"));
    }
    if n == 0 {
        return Err(Error::invalid("n", 0.0, "must be >= 1"));
    }
    if !(eps > 0.0) {
        return Ok(1.0);
    }
    let nf = n as f64;
    let (v, d, eta) = (c.v, c.d, c.eta);
    let first = (d * nf.sqrt() * eps / (v.sqrt() * eta)).powf(v) * (-2.0 * nf * eps * eps / (eta * eta)).exp();
    let second = d.powf(v) * (-nf * eps * eps / (eta * eta)).exp();
    Ok(1f64.min(first).min(second))
}

/// Bound for unbounded goals. `var_terms = (Var ξ1, Var Φ*(ξ1), Var Φ*(ξ1 + x̄))`
/// replaces `P(B_n)` by their sum over `√n`; without them `P(B_n)` is
/// taken as 1.
pub fn bound_unbounded(n: usize, eps: f64, c: &BoundConstants, var_terms: Option<(f64, f64, f64)>) -> Result<f64> {
    check_vd(c)?;
    if n == 0 {
        return Err(Error::invalid("n", 0.0, "must be >= 1"));
    }
    if !(eps > c.delta_bar) {
        return Err(Error::BoundDomain {
            eps,
            delta_bar: c.delta_bar,
        });
    }
    let h = c.eta_bar + c.phi_at_0;
    if !(h > 0.0) {
        return Err(Error::invalid("eta_bar", c.eta_bar, "eta_bar + phi(0) must be > 0"));
    }
    let nf = n as f64;
    let gap = eps - c.delta_bar;
    let main = (c.d * gap / (c.v.sqrt() * h)).powf(c.v) * nf.powf(-c.v / 2.0) * (-(gap * gap) / (nf * h * h)).exp();
    let p_bn = match var_terms {
        Some((a, b, d)) => (a + b + d) / nf.sqrt(),
        None => 1.0,
    };
    Ok(1f64.min(main + p_bn))
}

/// `δ̄ = E[(Φ*(ξ1 + x̄) − nη̄ − (n−1)Φ(0))⁺]` over weighted values of `ξ1`.
pub fn delta_bar(
    pair: &DivergencePair,
    xi1: &[f64],
    weights: &[f64],
    x_bar: f64,
    eta_bar: f64,
    n: usize,
) -> Result<f64> {
    if xi1.len() != weights.len() {
        return Err(Error::Dimension("xi1 and weights differ in length".into()));
    }
    let shift = n as f64 * eta_bar + (n as f64 - 1.0) * pair.phi_at_0();
    let mut s = 0.0;
    for (&v, &w) in xi1.iter().zip(weights) {
        let c = pair.conj(v + x_bar);
        if !c.is_finite() {
            return Err(Error::Range { y: v + x_bar });
        }
        s += w * (c - shift).max(0.0);
    }
    Ok(s)
}

/// `K_k` and the bracketing-number bound for a Hölder class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracketing {
    pub k_k: f64,
    /// `(m + 1)/β`.
    pub exponent: f64,
    /// `Δ(Θ × [−k, k])`.
    pub diameter: f64,
}

impl Bracketing {
    /// `max(1, (K_k/ε)^{(m+1)/β})`.
    pub fn bound(&self, eps: f64) -> f64 {
        (self.k_k / eps).powf(self.exponent).max(1.0)
    }
}

pub fn bracketing_constant(ck_l2_norm: f64, theta_box: &ParameterBox, k: f64, beta: f64) -> Result<Bracketing> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::invalid("beta", beta, "must lie in (0,1]"));
    }
    if !(ck_l2_norm >= 0.0) {
        return Err(Error::invalid("ck_l2_norm", ck_l2_norm, "must be >= 0"));
    }
    if !(k > 0.0) {
        return Err(Error::invalid("k", k, "must be > 0"));
    }
    let diameter = (theta_box.diameter().powi(2) + 4.0 * k * k).sqrt();
    Ok(Bracketing {
        k_k: (2.0 * ck_l2_norm + 1.0) * (4.0 * diameter + 1.0).powf(beta),
        exponent: (theta_box.dim() as f64 + 1.0) / beta,
        diameter,
    })
}

/// `‖C_k‖_{L²(P^Z)}` by quadrature.
pub fn ck_l2_norm(goal: &HolderGoal, pair: &DivergencePair, k: f64, z_dist: &ProductDistribution, nodes: usize) -> f64 {
    let q = z_dist.quadrature(nodes);
    q.rows()
        .zip(&q.weights)
        .map(|(z, w)| w * goal.ck(pair, k, z).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Result of an explicit bracket construction at one `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketCheck {
    pub eps: f64,
    pub ck_l2_norm: f64,
    pub k_k: f64,
    /// Number of brackets built.
    pub count: f64,
    /// `(K_k/ε)^{(m+1)/β}`.
    pub bound: f64,
    /// Net radius `r` in `(θ, x)`.
    pub radius: f64,
    /// `L²` size of every bracket, `2 r^β ‖C_k‖`.
    pub l2_width: f64,
    /// Largest `|h_t − h_c| / (r^β C_k)` over the random membership checks.
    pub max_violation: f64,
    pub within_bound: bool,
    pub brackets_valid: bool,
}

/// Builds `ε`-brackets `[h_c − r^β C_k, h_c + r^β C_k]` for
/// `h_{θ,x}(z) = Φ*(G(θ,z) + x)` over `Θ × [−k, k]`, with centres `c` on a
/// cubic grid whose cells have half-diagonal at most
/// `r = (ε / (2‖C_k‖))^{1/β}`. Membership of `checks` random class members
/// in the bracket of their cell is verified at random quadrature nodes.
#[allow(clippy::too_many_arguments)]
pub fn bracket_construction(
    goal: &HolderGoal,
    pair: &DivergencePair,
    theta_box: &ParameterBox,
    k: f64,
    z_dist: &ProductDistribution,
    eps: f64,
    quad_nodes: usize,
    checks: usize,
    seed: u64,
) -> Result<BracketCheck> {
    use rand::Rng;
    if !(eps > 0.0) {
        return Err(Error::invalid("eps", eps, "must be > 0"));
    }
    let beta = goal.beta;
    let norm = ck_l2_norm(goal, pair, k, z_dist, quad_nodes);
    let br = bracketing_constant(norm, theta_box, k, beta)?;
    let m1 = theta_box.dim() + 1;
    let r = if norm > 0.0 {
        (eps / (2.0 * norm)).powf(1.0 / beta)
    } else {
        f64::INFINITY
    };
    let side = 2.0 * r / (m1 as f64).sqrt();
    let mut lo = theta_box.lo().to_vec();
    let mut hi = theta_box.hi().to_vec();
    lo.push(-k);
    hi.push(k);
    let cells: Vec<usize> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| (((h - l) / side).ceil() as usize).max(1))
        .collect();
    let count: f64 = cells.iter().map(|&c| c as f64).product();

    let q = z_dist.quadrature(quad_nodes);
    let zrows: Vec<&[f64]> = q.rows().collect();
    let mut rng = stream_rng(seed, 0);
    let mut max_violation = 0.0f64;
    for _ in 0..checks {
        let t: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect();
        let c: Vec<f64> = (0..m1)
            .map(|i| {
                let w = (hi[i] - lo[i]) / cells[i] as f64;
                if w == 0.0 {
                    return lo[i];
                }
                let idx = (((t[i] - lo[i]) / w).floor() as usize).min(cells[i] - 1);
                lo[i] + w * (idx as f64 + 0.5)
            })
            .collect();
        let z = zrows[rng.random_range(0..zrows.len())];
        let m = m1 - 1;
        let ht = pair.conj((goal.eval)(&t[..m], z) + t[m]);
        let hc = pair.conj((goal.eval)(&c[..m], z) + c[m]);
        let allowed = r.powf(beta) * goal.ck(pair, k, z);
        let ratio = if allowed > 0.0 {
            (ht - hc).abs() / allowed
        } else if ht == hc {
            0.0
        } else {
            f64::INFINITY
        };
        max_violation = max_violation.max(ratio);
    }
    let bound = br.bound(eps);
    Ok(BracketCheck {
        eps,
        ck_l2_norm: norm,
        k_k: br.k_k,
        count,
        bound,
        radius: r,
        l2_width: 2.0 * r.powf(beta) * norm,
        max_violation,
        within_bound: count <= bound,
        brackets_valid: max_violation <= 1.0 + 1e-9,
    })
}

/// `f64` fields that may be `±∞` or NaN serialize as strings in JSON.
pub mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltConfig {
    pub n: usize,
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub truth: TrueValueConfig,
    /// KS against a normal with estimated variance instead of `σ²_theory`.
    #[serde(default)]
    pub estimated_variance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub n: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub rng: String,
    /// `√n (v̂_n − v*)` indexed by replication.
    pub errors: Vec<f64>,
    pub v_star: f64,
    pub theta_star: Vec<f64>,
    pub x_star: f64,
    /// `Var[Φ*(G(θ*,Z) + x*)]`.
    pub sigma2_theory: f64,
    /// `E[Φ*(G(θ*,Z) + x*)²]`.
    pub second_moment_theory: f64,
    /// `E[Φ*(G(θ*,Z) + x*)]`.
    pub conj_mean_theory: f64,
    pub ks_stat: Option<f64>,
    pub ks_pvalue: Option<f64>,
    pub estimated_variance: bool,
    /// `σ²_theory = 0`: the KS test was skipped.
    pub degenerate: bool,
    pub mean_err: f64,
    pub var_err: f64,
}

impl CltReport {
    /// `var_err / σ²_theory`.
    pub fn variance_ratio(&self) -> Option<f64> {
        (self.sigma2_theory > 0.0).then(|| self.var_err / self.sigma2_theory)
    }

    /// `var_err / E[Φ*(G + x*)²]`.
    pub fn uncentered_variance_ratio(&self) -> Option<f64> {
        (self.second_moment_theory > 0.0).then(|| self.var_err / self.second_moment_theory)
    }
}

/// `σ²` at or below this multiple of `max(1, E[h²])` counts as zero.
const DEGENERATE_VARIANCE: f64 = 1e-24;

fn is_degenerate(m: &TrueMinimizer) -> bool {
    m.sigma2 <= DEGENERATE_VARIANCE * m.second_moment.max(1.0)
}

/// A non-unique minimizer is accepted only when `σ²` vanishes at every
/// detected minimizer; the limit is then the point mass at zero whichever
/// minimizer is used.
fn require_unique(truth: &TrueValue) -> Result<()> {
    if truth.minimizers.iter().all(is_degenerate) {
        return Ok(());
    }
    if !truth.unique {
        return Err(Error::NonUniqueMinimizer(format!(
            "{} tied minimizer(s) of theta -> R(F_theta), or a flat minimum",
            truth.minimizers.len()
        )));
    }
    if !truth.inner_unique {
        let (a, b) = truth.minimizers[0].minimizer_interval;
        return Err(Error::NonUniqueMinimizer(format!("inner minimizer set [{a}, {b}] is not a point")));
    }
    Ok(())
}

/// Runs `R` replications of the SAA solver at sample size `n` and compares
/// `√n (v̂_n − v*)` with `Normal(0, σ²)`. Refuses when the true problem has
/// no unique minimizer `(θ*, x*)` and the limit is not degenerate.
pub fn run_clt(problem: &ProblemTemplate, cfg: &CltConfig) -> Result<CltReport> {
    let truth = true_value(problem, &cfg.truth)?;
    run_clt_with_truth(problem, cfg, &truth)
}

pub fn run_clt_with_truth(problem: &ProblemTemplate, cfg: &CltConfig, truth: &TrueValue) -> Result<CltReport> {
    if cfg.replications < 100 {
        return Err(Error::invalid("replications", cfg.replications as f64, "must be >= 100"));
    }
    if cfg.n == 0 {
        return Err(Error::invalid("n", 0.0, "must be >= 1"));
    }
    cfg.grid.validate()?;
    require_unique(truth)?;
    let root_n = (cfg.n as f64).sqrt();
    let best = &truth.minimizers[0];
    let errors = replicate(cfg.replications, |r| {
        let mut rng = stream_rng(cfg.master_seed, r as u64);
        let z = problem.z_dist.sample(cfg.n, &mut rng);
        let v = solve_saa(&problem.with_sample(z)?, &cfg.grid)?.value;
        Ok(root_n * (v - truth.v_star))
    })?;
    let degenerate = is_degenerate(best);
    let ks_stat = if degenerate {
        None
    } else if cfg.estimated_variance {
        stats::ks_normal_estimated(&errors)
    } else {
        stats::ks_normal(&errors, 0.0, truth.sigma2)
    };
    Ok(CltReport {
        n: cfg.n,
        replications: cfg.replications,
        master_seed: cfg.master_seed,
        rng: RNG_ID.into(),
        v_star: truth.v_star,
        theta_star: truth.theta_star.clone(),
        x_star: truth.x_star,
        sigma2_theory: truth.sigma2,
        second_moment_theory: best.second_moment,
        conj_mean_theory: best.conj_mean,
        ks_pvalue: ks_stat.filter(|_| !cfg.estimated_variance).map(|d| stats::ks_pvalue(d, errors.len())),
        ks_stat,
        estimated_variance: cfg.estimated_variance,
        degenerate,
        mean_err: stats::mean(&errors),
        var_err: stats::sample_variance(&errors),
        errors,
    })
}

/// Evaluates `f(0..count)` in parallel; the first error in index order wins.
fn replicate<F: Fn(usize) -> Result<f64> + Sync + Send>(count: usize, f: F) -> Result<Vec<f64>> {
    let out: Vec<Result<f64>> = (0..count).into_par_iter().map(f).collect();
    out.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationConfig {
    pub eps: f64,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub truth: TrueValueConfig,
    /// When given, the report includes the bound curve for `D`, `V`, `η`.
    #[serde(default)]
    pub constants: Option<BoundConstants>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub epsilon: f64,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub rng: String,
    pub v_star: f64,
    pub exceedances: Vec<usize>,
    pub p_hat: Vec<f64>,
    /// Wilson 95% interval.
    pub wilson_lo: Vec<f64>,
    pub wilson_hi: Vec<f64>,
    /// Half-width of the Wilson interval.
    pub radius: Vec<f64>,
    /// Least-squares slope of `ln p̂` against `n` over entries with
    /// `p̂ > 5/R`; `-inf` when fewer than two qualify.
    #[serde(with = "extended_f64")]
    pub fitted_slope: f64,
    /// Each `p̂` stays below the previous Wilson upper edge.
    pub nonincreasing_within_noise: bool,
    pub bound_curve: Option<Vec<f64>>,
    /// Bound with the supplied `D` is at least every lower Wilson edge.
    pub dominates: Option<bool>,
    /// Smallest `D` for which the bound dominates every lower Wilson edge.
    pub d_min: Option<f64>,
    pub bound_curve_d_min: Option<Vec<f64>>,
}

/// Estimates `P(|v̂_n − v*| ≥ ε)` on a grid of sample sizes.
pub fn run_deviation(problem: &ProblemTemplate, cfg: &DeviationConfig) -> Result<DeviationReport> {
    let truth = true_value(problem, &cfg.truth)?;
    run_deviation_with_truth(problem, cfg, truth.v_star)
}

pub fn run_deviation_with_truth(problem: &ProblemTemplate, cfg: &DeviationConfig, v_star: f64) -> Result<DeviationReport> {
    if !(cfg.eps > 0.0) {
        return Err(Error::invalid("eps", cfg.eps, "must be > 0"));
    }
    if cfg.replications == 0 || cfg.n_grid.is_empty() || cfg.n_grid.contains(&0) {
        return Err(Error::invalid("replications", cfg.replications as f64, "need R >= 1 and a nonempty grid of n >= 1"));
    }
    cfg.grid.validate()?;
    let rr = cfg.replications;
    let mut exceedances = Vec::with_capacity(cfg.n_grid.len());
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let devs = replicate(rr, |r| {
            let mut rng = stream_rng(cfg.master_seed, grid_stream(i, r));
            let z = problem.z_dist.sample(n, &mut rng);
            let v = solve_saa(&problem.with_sample(z)?, &cfg.grid)?.value;
            Ok((v - v_star).abs())
        })?;
        exceedances.push(devs.iter().filter(|&&d| d >= cfg.eps).count());
    }
    let p_hat: Vec<f64> = exceedances.iter().map(|&k| k as f64 / rr as f64).collect();
    let (wilson_lo, wilson_hi): (Vec<f64>, Vec<f64>) =
        exceedances.iter().map(|&k| stats::wilson(k, rr, stats::Z_95)).unzip();
    let radius = wilson_lo.iter().zip(&wilson_hi).map(|(l, h)| 0.5 * (h - l)).collect();
    let fitted_slope = stats::log_slope(&cfg.n_grid, &p_hat, 5.0 / rr as f64);
    let nonincreasing_within_noise = (1..p_hat.len()).all(|i| p_hat[i] <= wilson_hi[i - 1]);

    let (mut bound_curve, mut dominates, mut d_min, mut bound_curve_d_min) = (None, None, None, None);
    if let Some(c) = &cfg.constants {
        let curve = cfg
            .n_grid
            .iter()
            .map(|&n| bound_bounded(n, cfg.eps, c))
            .collect::<Result<Vec<f64>>>()?;
        dominates = Some(curve.iter().zip(&wilson_lo).all(|(b, lo)| b >= lo));
        bound_curve = Some(curve);
        let dm = minimal_d(&cfg.n_grid, &wilson_lo, cfg.eps, c.v, c.eta);
        if dm > 0.0 {
            let cm = BoundConstants { d: dm, ..*c };
            bound_curve_d_min = Some(
                cfg.n_grid
                    .iter()
                    .map(|&n| bound_bounded(n, cfg.eps, &cm))
                    .collect::<Result<Vec<f64>>>()?,
            );
        }
        d_min = Some(dm);
    }
    Ok(DeviationReport {
        epsilon: cfg.eps,
        n_grid: cfg.n_grid.clone(),
        replications: rr,
        master_seed: cfg.master_seed,
        rng: RNG_ID.into(),
        v_star,
        exceedances,
        p_hat,
        wilson_lo,
        wilson_hi,
        radius,
        fitted_slope,
        nonincreasing_within_noise,
        bound_curve,
        dominates,
        d_min,
        bound_curve_d_min,
    })
}

/// Smallest `D` with `min((D√n ε/(√V η))^V e^{−2nε²/η²}, D^V e^{−nε²/η²}) ≥ p`
/// for every `(n, p)`. Both expressions must reach `p`, so each `n`
/// contributes the larger of the two requirements.
pub fn minimal_d(n_grid: &[usize], p: &[f64], eps: f64, v: f64, eta: f64) -> f64 {
    n_grid
        .iter()
        .zip(p)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&n, &p)| {
            let nf = n as f64;
            let root = p.powf(1.0 / v);
            let d_first = root * (2.0 * nf * eps * eps / (v * eta * eta)).exp() * v.sqrt() * eta / (nf.sqrt() * eps);
            let d_second = root * (nf * eps * eps / (v * eta * eta)).exp();
            d_first.max(d_second)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::AnalyticDistribution;
    use crate::goalfn::{GoalFunction, HolderPreset};
    use approx::assert_abs_diff_eq;

    #[test]
    fn xbar_and_eta_examples() {
        let avar = DivergencePair::avar(0.5).unwrap();
        assert_eq!(xbar_constant(&avar, 1.0, 2.0), 7.0);
        assert_eq!(eta_bounded(&avar, 1.0).unwrap(), 16.0);

        let ent = DivergencePair::entropic(1.0).unwrap();
        let xb = xbar_constant(&ent, 0.0, 0.0);
        assert_abs_diff_eq!(xb, 2.0 * 2f64.ln() + 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eta_bounded(&ent, 0.0).unwrap(), 1.0 + xb.exp_m1(), epsilon = 1e-12);

        let poly = DivergencePair::polynomial(2.0).unwrap();
        assert_eq!(xbar_constant(&poly, 0.0, 0.0), 5.0);
        assert_eq!(eta_bounded(&poly, 0.0).unwrap(), 12.5);
    }

    fn bounded_constants() -> BoundConstants {
        BoundConstants {
            v: 2.0,
            d: 1.0,
            eta: 16.0,
            ..Default::default()
        }
    }

    #[test]
    fn bounded_bound_examples() {
        assert_eq!(bound_bounded(10, 0.0, &bounded_constants()).unwrap(), 1.0);
        let b = bound_bounded(1024, 1.0, &bounded_constants()).unwrap();
        assert_abs_diff_eq!(b, 2.0 * (-8.0f64).exp(), epsilon = 1e-15);
        // nonincreasing beyond V η² / (2ε²)
        let start = (2.0 * 256.0 / 2.0) as usize;
        let mut prev = f64::INFINITY;
        for n in (start..start + 5000).step_by(37) {
            let b = bound_bounded(n, 1.0, &bounded_constants()).unwrap();
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn unbounded_bound_examples() {
        let c = BoundConstants {
            v: 2.0,
            d: 1.0,
            eta_bar: 4.0,
            ..Default::default()
        };
        assert!(matches!(
            bound_unbounded(100, 0.0, &c, None),
            Err(Error::BoundDomain { .. })
        ));
        let b = bound_unbounded(100, 1.0, &c, Some((1.0, 1.0, 1.0))).unwrap();
        let main = (1.0 / (2f64.sqrt() * 4.0)).powi(2) / 100.0 * (-1.0f64 / 1600.0).exp();
        assert_abs_diff_eq!(b, main + 0.3, epsilon = 1e-15);
        let zero = bound_unbounded(100, 1.0, &c, Some((0.0, 0.0, 0.0))).unwrap();
        assert_abs_diff_eq!(zero, main, epsilon = 1e-15);
        assert_eq!(bound_unbounded(100, 1.0, &c, None).unwrap(), 1.0);
    }

    #[test]
    fn delta_bar_vanishes_for_large_eta_bar() {
        let avar = DivergencePair::avar(0.5).unwrap();
        let d = delta_bar(&avar, &[1.0, 2.0], &[0.5, 0.5], 7.0, 100.0, 3).unwrap();
        assert_eq!(d, 0.0);
        // Φ*(9) − 1·η̄ = 18 − 10
        let d = delta_bar(&avar, &[2.0], &[1.0], 7.0, 10.0, 1).unwrap();
        assert_eq!(d, 8.0);
    }

    #[test]
    fn bracketing_examples() {
        let b = bracketing_constant(1.0, &ParameterBox::interval(0.0, 1.0).unwrap(), 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(b.diameter, 5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.k_k, 3.0 * (4.0 * 5f64.sqrt() + 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(b.bound(1.0), b.k_k * b.k_k, epsilon = 1e-9);
        assert_eq!(b.bound(b.k_k), 1.0);
        assert_eq!(b.bound(2.0 * b.k_k), 1.0);
        assert_abs_diff_eq!(b.bound(0.2) / b.bound(0.4), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn bracket_construction_small() {
        let unit = ParameterBox::interval(0.0, 1.0).unwrap();
        let g = HolderGoal::preset(&HolderPreset::Product, &unit, 1, 1.0).unwrap();
        let avar = DivergencePair::avar(0.5).unwrap();
        let z = ProductDistribution::new(vec![AnalyticDistribution::uniform(0.0, 1.0).unwrap()]).unwrap();
        let c = bracket_construction(&g, &avar, &unit, 1.0, &z, 0.5, 256, 2000, 5).unwrap();
        assert_abs_diff_eq!(c.ck_l2_norm, (28.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert!(c.within_bound && c.brackets_valid, "{c:?}");
        assert!(c.l2_width <= 0.5 * (1.0 + 1e-12));
    }

    #[test]
    fn minimal_d_makes_bound_dominate() {
        let n = [50, 100, 200];
        let p = [0.3, 0.1, 0.01];
        let (eps, v, eta) = (0.2, 2.0, 3.0);
        let d = minimal_d(&n, &p, eps, v, eta);
        let c = BoundConstants { v, d, eta, ..Default::default() };
        for (n, p) in n.iter().zip(p) {
            assert!(bound_bounded(*n, eps, &c).unwrap() >= p * (1.0 - 1e-12));
        }
        let smaller = BoundConstants { d: 0.99 * d, ..c };
        assert!(n.iter().zip(p).any(|(n, p)| bound_bounded(*n, eps, &smaller).unwrap() < p));
    }

    fn constant_template() -> ProblemTemplate {
        ProblemTemplate::new(
            GoalFunction::Constant { value: 1.0, m: 1, d: 1 },
            ParameterBox::interval(0.0, 1.0).unwrap(),
            DivergencePair::entropic(1.0).unwrap(),
            ProductDistribution::new(vec![AnalyticDistribution::uniform(0.0, 1.0).unwrap()]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn clt_constant_goal_is_degenerate() {
        let cfg = CltConfig {
            n: 20,
            replications: 100,
            master_seed: 1,
            grid: GridConfig {
                coarse_per_dim: 3,
                refine_rounds: 0,
                shrink: 0.5,
            },
            truth: TrueValueConfig {
                quad_nodes: 16,
                theta_grid: 5,
            },
            estimated_variance: false,
        };
        let r = run_clt(&constant_template(), &cfg).unwrap();
        assert!(r.degenerate && r.ks_stat.is_none());
        assert!(r.errors.iter().all(|e| e.abs() < 1e-12));
        assert!(run_clt(&constant_template(), &CltConfig { replications: 99, ..cfg }).is_err());
    }

    #[test]
    fn clt_plateau_is_degenerate_and_double_well_is_refused() {
        use crate::goalfn::{instances, PlGoal};
        let small = CltConfig {
            n: 10,
            replications: 100,
            master_seed: 2,
            grid: GridConfig {
                coarse_per_dim: 5,
                refine_rounds: 1,
                shrink: 0.5,
            },
            truth: TrueValueConfig {
                quad_nodes: 64,
                theta_grid: 21,
            },
            estimated_variance: false,
        };
        // step goal with Z ~ U(0,1): G = 1 a.s. for every θ
        let flat = ProblemTemplate::new(
            GoalFunction::Pl(instances::step()),
            ParameterBox::interval(0.0, 1.0).unwrap(),
            DivergencePair::entropic(1.0).unwrap(),
            ProductDistribution::new(vec![AnalyticDistribution::uniform(0.0, 1.0).unwrap()]).unwrap(),
        )
        .unwrap();
        let truth = true_value(&flat, &small.truth).unwrap();
        assert!(!truth.unique);
        let r = run_clt_with_truth(&flat, &small, &truth).unwrap();
        assert!(r.degenerate && r.errors.iter().all(|e| *e == 0.0));

        // G = −|θ − z|, Z symmetric: tied minima at θ = ±1
        let mut well: PlGoal = instances::abs_difference();
        for r in &mut well.regions {
            r.lambda[0] = -r.lambda[0];
        }
        let t = ProblemTemplate::new(
            GoalFunction::Pl(well),
            ParameterBox::interval(-1.0, 1.0).unwrap(),
            DivergencePair::entropic(1.0).unwrap(),
            ProductDistribution::new(vec![AnalyticDistribution::uniform(-0.1, 0.1).unwrap()]).unwrap(),
        )
        .unwrap();
        let truth = true_value(&t, &small.truth).unwrap();
        assert_eq!(truth.minimizers.len(), 2);
        assert!(matches!(run_clt_with_truth(&t, &small, &truth), Err(Error::NonUniqueMinimizer(_))));
    }

    #[test]
    fn deviation_constant_goal_never_exceeds() {
        let cfg = DeviationConfig {
            eps: 1e-6,
            n_grid: vec![5, 10],
            replications: 50,
            master_seed: 3,
            grid: GridConfig {
                coarse_per_dim: 3,
                refine_rounds: 0,
                shrink: 0.5,
            },
            truth: TrueValueConfig {
                quad_nodes: 16,
                theta_grid: 5,
            },
            constants: None,
        };
        let r = run_deviation(&constant_template(), &cfg).unwrap();
        assert_eq!(r.p_hat, vec![0.0, 0.0]);
        assert_eq!(r.fitted_slope, f64::NEG_INFINITY);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains(r#""fitted_slope":"-inf""#));
        let back: DeviationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
