//! Sample average approximation
//!
//! ```text
//! inf_θ inf_x ( (1/n) Σ Φ*(G(θ, Z_i) + x) − x )
//! ```
//!
//! solved by a global grid search over `θ` with box refinement; the inner
//! `x` problem is convex and solved per grid point. Also computes the true
//! optimal value for analytic `Z` laws by tensor quadrature.
//!
//! The `θ` search is heuristic-global: exact only in the limit of grid
//! density. It makes no smoothness assumption on `G(·, z)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{ProductDistribution, ZSample};
use crate::divergence::DivergencePair;
use crate::error::{Error, Result};
use crate::goalfn::{Envelope, GoalFunction, ParameterBox};
use crate::optim::golden_section_min;
use crate::risk::{InnerMethod, InnerObjective, RiskValue};

/// An interval `[x_l, x_u]` that contains every inner minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationBounds {
    pub x_l: f64,
    pub x_u: f64,
}

impl LocalizationBounds {
    pub fn contains(&self, x: f64) -> bool {
        self.x_l <= x && x <= self.x_u
    }
}

/// Population localization from the envelope moments `E ξ1`, `E ξ2`:
///
/// ```text
/// x_l = −Φ(0) − 1 − E ξ2
/// x_u = (Φ(x0) + 1 + x0 + E ξ2 + x0·E ξ1) / (x0 − 1)
/// ```
pub fn population_x_bounds(pair: &DivergencePair, e_xi1: f64, e_xi2: f64) -> Result<LocalizationBounds> {
    if !e_xi1.is_finite() {
        return Err(Error::invalid("e_xi1", e_xi1, "must be finite"));
    }
    if !e_xi2.is_finite() {
        return Err(Error::invalid("e_xi2", e_xi2, "must be finite"));
    }
    let x0 = pair.x0();
    Ok(LocalizationBounds {
        x_l: -pair.phi_at_0() - 1.0 - e_xi2,
        x_u: (pair.phi_at_x0() + 1.0 + x0 + e_xi2 + x0 * e_xi1) / (x0 - 1.0),
    })
}

/// An SAA instance: goal, parameter box, divergence and the sample.
#[derive(Debug, Clone)]
pub struct SaaProblem {
    pub goal: GoalFunction,
    pub theta_box: ParameterBox,
    pub pair: DivergencePair,
    pub z: ZSample,
}

impl SaaProblem {
    pub fn new(goal: GoalFunction, theta_box: ParameterBox, pair: DivergencePair, z: ZSample) -> Result<Self> {
        if goal.m() != theta_box.dim() {
            return Err(Error::Dimension(format!(
                "goal expects m = {}, box has {}",
                goal.m(),
                theta_box.dim()
            )));
        }
        if goal.d() != z.dim() {
            return Err(Error::Dimension(format!(
                "goal expects d = {}, sample rows have {}",
                goal.d(),
                z.dim()
            )));
        }
        Ok(SaaProblem {
            goal,
            theta_box,
            pair,
            z,
        })
    }
}

/// Empirical localization `[a_n, b_n]` from the sample means of `ξ1` and
/// `ξ2 = Φ*(ξ1)`:
///
/// ```text
/// a_n = −Φ(0) − mean ξ2
/// b_n = (Φ(x0) + mean ξ2 + x0·mean ξ1) / (x0 − 1)
/// ```
pub fn empirical_x_bounds(problem: &SaaProblem) -> Result<LocalizationBounds> {
    let env = problem.goal.envelope(&problem.theta_box)?;
    envelope_bounds(&env, &problem.pair, &problem.z)
}

fn envelope_bounds(env: &Envelope, pair: &DivergencePair, z: &ZSample) -> Result<LocalizationBounds> {
    let n = z.len() as f64;
    let (mut s1, mut s2) = (0.0, 0.0);
    for row in z.rows() {
        let xi1 = env.xi1(row);
        let xi2 = pair.conj(xi1);
        if !xi2.is_finite() {
            return Err(Error::Range { y: xi1 });
        }
        s1 += xi1;
        s2 += xi2;
    }
    let (m1, m2) = (s1 / n, s2 / n);
    let x0 = pair.x0();
    Ok(LocalizationBounds {
        x_l: -pair.phi_at_0() - m2,
        x_u: (pair.phi_at_x0() + m2 + x0 * m1) / (x0 - 1.0),
    })
}

/// Grid search settings: `coarse_per_dim` points per side on the full box,
/// then `refine_rounds` regrids of the box `best ± shrink·width/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub coarse_per_dim: usize,
    pub refine_rounds: usize,
    pub shrink: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            coarse_per_dim: 33,
            refine_rounds: 4,
            shrink: 0.25,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_per_dim < 3 {
            return Err(Error::invalid("coarse_per_dim", self.coarse_per_dim as f64, "must be >= 3"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::invalid("shrink", self.shrink, "must lie in (0,1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridStats {
    pub coarse_points: usize,
    pub refinement_rounds: usize,
    pub theta_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaaResult {
    pub value: f64,
    pub theta_star: Vec<f64>,
    pub x_star: f64,
    /// Inner minimizer set at `theta_star`.
    pub minimizer_interval: (f64, f64),
    /// Inner search interval used at `theta_star`.
    pub x_interval_used: (f64, f64),
    /// `[a_n, b_n]`; every inner minimizer found was checked against it.
    pub localization: LocalizationBounds,
    pub grid_stats: GridStats,
    /// Inner solver iterations summed over all grid points.
    pub objective_evals: usize,
}

#[derive(Debug, Clone)]
struct Candidate {
    theta: Vec<f64>,
    risk: RiskValue,
}

/// Total order used to pick the best candidate: value, then `θ`
/// lexicographically, then `x`.
fn better(a: &Candidate, b: &Candidate) -> bool {
    use std::cmp::Ordering::*;
    match a.risk.value.total_cmp(&b.risk.value) {
        Less => true,
        Greater => false,
        Equal => {
            for (x, y) in a.theta.iter().zip(&b.theta) {
                match x.total_cmp(y) {
                    Less => return true,
                    Greater => return false,
                    Equal => {}
                }
            }
            a.risk.x_star < b.risk.x_star
        }
    }
}

/// Evaluates `G(θ, ·)` on every row.
pub(crate) fn goal_values(goal: &GoalFunction, theta: &[f64], rows: impl Iterator<Item = impl AsRef<[f64]>>) -> Result<Vec<f64>> {
    rows.map(|z| goal.eval(theta, z.as_ref()))
        .collect::<Result<Vec<f64>>>()
        .map_err(|e| e.at_theta(theta))
}

fn solve_at(problem: &SaaProblem, theta: &[f64], loc: &LocalizationBounds) -> Result<Candidate> {
    let ys = goal_values(&problem.goal, theta, problem.z.rows())?;
    let obj = InnerObjective::new(&ys, &problem.pair);
    let bounds = obj.localization().map_err(|e| e.at_theta(theta))?;
    let risk = obj
        .minimize(bounds, InnerMethod::default())
        .map_err(|e| e.at_theta(theta))?;
    let slack = 1e-12 * 1f64.max(loc.x_l.abs()).max(loc.x_u.abs());
    let (lo, hi) = risk.minimizer_interval;
    for x in [lo, hi] {
        if !(x >= loc.x_l - slack && x <= loc.x_u + slack) {
            return Err(Error::LocalizationViolated {
                x,
                lo: loc.x_l,
                hi: loc.x_u,
            }
            .at_theta(theta));
        }
    }
    Ok(Candidate {
        theta: theta.to_vec(),
        risk,
    })
}

/// Solves the SAA problem by grid search over `θ`.
///
/// Each `θ` is solved on its data-driven interval, which lies inside
/// `[a_n, b_n]` whenever `ξ1` really dominates `|G|`; the found minimizer
/// set is asserted to lie in `[a_n, b_n]`. Grid points are evaluated in
/// parallel and reduced in a fixed order, so the result does not depend on
/// the thread count.
pub fn solve_saa(problem: &SaaProblem, grid: &GridConfig) -> Result<SaaResult> {
    grid.validate()?;
    let loc = empirical_x_bounds(problem)?;
    let full = &problem.theta_box;
    let mut current = full.clone();
    let mut best: Option<Candidate> = None;
    let mut evaluations = 0;
    let mut iterations = 0;
    for _ in 0..=grid.refine_rounds {
        let thetas = current.grid(grid.coarse_per_dim);
        let results: Vec<Result<Candidate>> = thetas
            .par_iter()
            .map(|t| solve_at(problem, t, &loc))
            .collect();
        for r in results {
            let c = r?;
            evaluations += 1;
            iterations += c.risk.iterations;
            if best.as_ref().is_none_or(|b| better(&c, b)) {
                best = Some(c);
            }
        }
        let b = best.as_ref().expect("grid is nonempty");
        let half: Vec<f64> = current
            .lo()
            .iter()
            .zip(current.hi())
            .map(|(l, h)| grid.shrink * (h - l) / 2.0)
            .collect();
        current = full.around(&b.theta, &half);
    }
    let b = best.expect("grid is nonempty");
    Ok(SaaResult {
        value: b.risk.value,
        theta_star: b.theta,
        x_star: b.risk.x_star,
        minimizer_interval: b.risk.minimizer_interval,
        x_interval_used: b.risk.search_interval,
        localization: loc,
        grid_stats: GridStats {
            coarse_points: full.grid(grid.coarse_per_dim).len(),
            refinement_rounds: grid.refine_rounds,
            theta_evaluations: evaluations,
        },
        objective_evals: iterations,
    })
}

/// Objective `R(F̂_{n,θ})` at a fixed `θ` (no grid search).
pub fn saa_objective(problem: &SaaProblem, theta: &[f64]) -> Result<RiskValue> {
    if !problem.theta_box.contains(theta) {
        return Err(Error::Dimension(format!("theta {theta:?} outside the parameter box")));
    }
    let loc = empirical_x_bounds(problem)?;
    solve_at(problem, theta, &loc).map(|c| c.risk)
}

/// Goal, box and divergence with an analytic law for `Z`; the template for
/// Monte Carlo experiments and for [`true_value`].
#[derive(Debug, Clone)]
pub struct ProblemTemplate {
    pub goal: GoalFunction,
    pub theta_box: ParameterBox,
    pub pair: DivergencePair,
    pub z_dist: ProductDistribution,
}

impl ProblemTemplate {
    pub fn new(
        goal: GoalFunction,
        theta_box: ParameterBox,
        pair: DivergencePair,
        z_dist: ProductDistribution,
    ) -> Result<Self> {
        if goal.m() != theta_box.dim() || goal.d() != z_dist.dim() {
            return Err(Error::Dimension(format!(
                "goal (m = {}, d = {}) does not match box (m = {}) and law (d = {})",
                goal.m(),
                goal.d(),
                theta_box.dim(),
                z_dist.dim()
            )));
        }
        Ok(ProblemTemplate {
            goal,
            theta_box,
            pair,
            z_dist,
        })
    }

    pub fn with_sample(&self, z: ZSample) -> Result<SaaProblem> {
        SaaProblem::new(self.goal.clone(), self.theta_box.clone(), self.pair.clone(), z)
    }
}

/// Settings for [`true_value`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrueValueConfig {
    /// Quadrature nodes per continuous marginal of `Z`.
    pub quad_nodes: usize,
    /// Scan points per side of `Θ`.
    pub theta_grid: usize,
}

impl Default for TrueValueConfig {
    fn default() -> Self {
        TrueValueConfig {
            quad_nodes: 4096,
            theta_grid: 201,
        }
    }
}

/// A local minimizer of `θ ↦ R(F_θ)` found by [`true_value`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueMinimizer {
    pub theta: Vec<f64>,
    pub value: f64,
    pub x_star: f64,
    pub minimizer_interval: (f64, f64),
    /// `Var[Φ*(G(θ,Z) + x*)]`.
    pub sigma2: f64,
    /// `E[Φ*(G(θ,Z) + x*)]`.
    pub conj_mean: f64,
    /// `E[Φ*(G(θ,Z) + x*)²]`.
    pub second_moment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueValue {
    pub v_star: f64,
    pub theta_star: Vec<f64>,
    pub x_star: f64,
    pub sigma2: f64,
    /// False when separated grid minima tie within `1e-9`, or when the
    /// tied grid points of one minimizer span more than a single grid cell
    /// (a plateau).
    pub unique: bool,
    /// False when the inner minimizer set at `theta_star` is an interval.
    pub inner_unique: bool,
    /// Every detected global minimizer (one unless `unique` is false).
    pub minimizers: Vec<TrueMinimizer>,
    pub quad_points: usize,
}

struct Quad {
    rows: Vec<f64>,
    weights: Vec<f64>,
    d: usize,
}

fn quad_risk(t: &ProblemTemplate, q: &Quad, theta: &[f64]) -> Result<(RiskValue, Vec<f64>)> {
    let ys = goal_values(&t.goal, theta, q.rows.chunks_exact(q.d))?;
    let obj = InnerObjective::weighted(&ys, &q.weights, &t.pair);
    let bounds = obj.localization().map_err(|e| e.at_theta(theta))?;
    let r = obj
        .minimize(bounds, InnerMethod::default())
        .map_err(|e| e.at_theta(theta))?;
    Ok((r, ys))
}

/// `inf_θ R(F_θ)` by a dense `θ` scan with quadrature over the law of `Z`,
/// followed by local refinement of every cluster of near-minimal grid
/// points. Reports `σ² = Var[Φ*(G(θ*,Z) + x*)]` at each minimizer.
pub fn true_value(t: &ProblemTemplate, cfg: &TrueValueConfig) -> Result<TrueValue> {
    if cfg.theta_grid < 3 {
        return Err(Error::invalid("theta_grid", cfg.theta_grid as f64, "must be >= 3"));
    }
    if cfg.quad_nodes < 16 {
        return Err(Error::invalid("quad_nodes", cfg.quad_nodes as f64, "must be >= 16"));
    }
    let zq = t.z_dist.quadrature(cfg.quad_nodes);
    let q = Quad {
        d: zq.d,
        rows: zq.points,
        weights: zq.weights,
    };
    let m = t.theta_box.dim();
    let axes: Vec<usize> = t
        .theta_box
        .lo()
        .iter()
        .zip(t.theta_box.hi())
        .map(|(l, h)| if l == h { 1 } else { cfg.theta_grid })
        .collect();
    let thetas = t.theta_box.grid(cfg.theta_grid);
    let values: Vec<f64> = thetas
        .par_iter()
        .map(|th| quad_risk(t, &q, th).map(|(r, _)| r.value))
        .collect::<Result<Vec<_>>>()?;

    let vmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tie = 1e-9 * vmin.abs().max(1.0);
    let near: Vec<usize> = (0..values.len()).filter(|&i| values[i] <= vmin + tie).collect();
    let clusters = cluster_grid_indices(&near, &axes);
    let plateau = clusters.iter().any(|c| c.len() > 1 << m);

    let steps: Vec<f64> = t
        .theta_box
        .lo()
        .iter()
        .zip(t.theta_box.hi())
        .map(|(l, h)| (h - l) / (cfg.theta_grid - 1) as f64)
        .collect();
    let mut refined = Vec::with_capacity(clusters.len());
    for cluster in &clusters {
        let start = *cluster
            .iter()
            .min_by(|&&a, &&b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
            .expect("cluster is nonempty");
        let theta = refine_local(t, &q, &thetas[start], values[start], &steps, m)?;
        refined.push(minimizer_at(t, &q, &theta)?);
    }
    let best_v = refined.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    let tie = 1e-9 * best_v.abs().max(1.0);
    refined.retain(|r| r.value <= best_v + tie);
    refined.sort_by(|a, b| a.value.total_cmp(&b.value));
    let first = refined[0].clone();
    let (lo, hi) = first.minimizer_interval;
    Ok(TrueValue {
        v_star: first.value,
        theta_star: first.theta.clone(),
        x_star: first.x_star,
        sigma2: first.sigma2,
        unique: refined.len() == 1 && !plateau,
        inner_unique: hi - lo <= 1e-6 * first.x_star.abs().max(1.0),
        minimizers: refined,
        quad_points: q.weights.len(),
    })
}

fn minimizer_at(t: &ProblemTemplate, q: &Quad, theta: &[f64]) -> Result<TrueMinimizer> {
    let (r, ys) = quad_risk(t, q, theta)?;
    let mut mean = 0.0;
    let mut second = 0.0;
    for (y, w) in ys.iter().zip(&q.weights) {
        let v = t.pair.conj(y + r.x_star);
        mean += w * v;
        second += w * v * v;
    }
    let sigma2: f64 = ys
        .iter()
        .zip(&q.weights)
        .map(|(y, w)| w * (t.pair.conj(y + r.x_star) - mean).powi(2))
        .sum();
    Ok(TrueMinimizer {
        theta: theta.to_vec(),
        value: r.value,
        x_star: r.x_star,
        minimizer_interval: r.minimizer_interval,
        sigma2,
        conj_mean: mean,
        second_moment: second,
    })
}

/// Improves a grid minimizer within one grid step: golden section for
/// `m = 1`, repeated shrinking `5^m` grids otherwise.
fn refine_local(
    t: &ProblemTemplate,
    q: &Quad,
    start: &[f64],
    start_value: f64,
    steps: &[f64],
    m: usize,
) -> Result<Vec<f64>> {
    let value = |th: &[f64]| quad_risk(t, q, th).map(|(r, _)| r.value);
    if m == 1 {
        let lo = (start[0] - steps[0]).max(t.theta_box.lo()[0]);
        let hi = (start[0] + steps[0]).min(t.theta_box.hi()[0]);
        if lo == hi {
            return Ok(start.to_vec());
        }
        let err = std::cell::RefCell::new(None);
        let r = golden_section_min(
            |x| match value(&[x]) {
                Ok(v) => v,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            lo,
            hi,
            1e-10 * 1f64.max(lo.abs()).max(hi.abs()),
            500,
        );
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        return Ok(if r.fx < start_value { vec![r.x] } else { start.to_vec() });
    }
    let mut best = (start.to_vec(), start_value);
    let mut half: Vec<f64> = steps.to_vec();
    for _ in 0..40 {
        let sub = t.theta_box.around(&best.0, &half);
        for th in sub.grid(5) {
            let v = value(&th)?;
            if v < best.1 {
                best = (th, v);
            }
        }
        half.iter_mut().for_each(|h| *h *= 0.5);
    }
    Ok(best.0)
}

/// Groups flat grid indices into clusters of lattice neighbours
/// (Chebyshev distance 1 in the multi-index).
fn cluster_grid_indices(indices: &[usize], axes: &[usize]) -> Vec<Vec<usize>> {
    let unravel = |mut i: usize| -> Vec<usize> {
        let mut out = vec![0; axes.len()];
        for k in (0..axes.len()).rev() {
            out[k] = i % axes[k];
            i /= axes[k];
        }
        out
    };
    let multi: Vec<Vec<usize>> = indices.iter().map(|&i| unravel(i)).collect();
    let mut parent: Vec<usize> = (0..indices.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for a in 0..indices.len() {
        for b in a + 1..indices.len() {
            let adjacent = multi[a].iter().zip(&multi[b]).all(|(x, y)| x.abs_diff(*y) <= 1);
            if adjacent {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[rb] = ra;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; indices.len()];
    for a in 0..indices.len() {
        let r = find(&mut parent, a);
        match root_of[r] {
            Some(g) => groups[g].push(indices[a]),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![indices[a]]);
            }
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::AnalyticDistribution;
    use crate::goalfn::{instances, HolderGoal, HolderPreset};
    use approx::assert_abs_diff_eq;

    fn unit() -> ParameterBox {
        ParameterBox::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn population_bounds_examples() {
        let ent = DivergencePair::entropic(1.0).unwrap();
        let b = population_x_bounds(&ent, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(b.x_l, -4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.x_u, 6.0 + 2.0 * 2f64.ln(), epsilon = 1e-14);

        let avar = DivergencePair::avar(0.5).unwrap();
        let b = population_x_bounds(&avar, 1.0, 2.0).unwrap();
        assert_eq!((b.x_l, b.x_u), (-3.0, 7.0));

        let poly = DivergencePair::polynomial(3.0).unwrap();
        let b = population_x_bounds(&poly, 0.0, 0.0).unwrap();
        assert_eq!(b.x_l, -1.0);
        assert_abs_diff_eq!(b.x_u, 8.0 / 3.0 + 3.0, epsilon = 1e-14);
    }

    fn constant_problem(c: f64, pair: DivergencePair, n: usize) -> SaaProblem {
        let z = ZSample::scalar(&vec![0.25; n]).unwrap();
        SaaProblem::new(GoalFunction::Constant { value: c, m: 1, d: 1 }, unit(), pair, z).unwrap()
    }

    #[test]
    fn empirical_bounds_examples() {
        let avar = DivergencePair::avar(0.5).unwrap();
        let b = empirical_x_bounds(&constant_problem(1.0, avar.clone(), 3)).unwrap();
        assert_eq!((b.x_l, b.x_u), (-2.0, 4.0));

        let b = empirical_x_bounds(&constant_problem(0.0, avar, 3)).unwrap();
        assert_eq!((b.x_l, b.x_u), (0.0, 0.0));

        let ent = DivergencePair::entropic(1.0).unwrap();
        let e = std::f64::consts::E;
        let b = empirical_x_bounds(&constant_problem(1.0, ent, 2)).unwrap();
        assert_abs_diff_eq!(b.x_l, -e, epsilon = 1e-14);
        assert_abs_diff_eq!(b.x_u, 2.0 * 2f64.ln() + e, epsilon = 1e-14);
    }

    #[test]
    fn constant_goal_solves_to_constant_law() {
        for (pair, phi1) in [
            (DivergencePair::avar(0.5).unwrap(), 0.0),
            (DivergencePair::entropic(1.0).unwrap(), 0.0),
            (DivergencePair::polynomial(2.0).unwrap(), 0.5),
        ] {
            let r = solve_saa(&constant_problem(1.5, pair, 5), &GridConfig::default()).unwrap();
            assert_abs_diff_eq!(r.value, 1.5 - phi1, epsilon = 1e-10);
            assert_eq!(r.theta_star, vec![0.0]);
        }
    }

    #[test]
    fn avar_abs_distance_two_points() {
        let avar = DivergencePair::avar(0.5).unwrap();
        let goal = GoalFunction::Pl(instances::abs_difference());
        let z = ZSample::scalar(&[0.0, 1.0]).unwrap();
        let p = SaaProblem::new(goal, unit(), avar, z).unwrap();
        let r = solve_saa(&p, &GridConfig::default()).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.theta_star[0], 0.5, epsilon = 1e-12);
        // brute-force scan
        for i in 0..=10_000 {
            let th = i as f64 / 10_000.0;
            let v = saa_objective(&p, &[th]).unwrap().value;
            assert!(r.value <= v + 1e-9);
        }
    }

    #[test]
    fn step_goal_picks_zero_region() {
        let z = ZSample::scalar(&[-0.5]).unwrap();
        for (pair, phi1) in [
            (DivergencePair::avar(0.5).unwrap(), 0.0),
            (DivergencePair::polynomial(2.0).unwrap(), 0.5),
        ] {
            let p = SaaProblem::new(GoalFunction::Pl(instances::step()), unit(), pair, z.clone()).unwrap();
            let r = solve_saa(&p, &GridConfig::default()).unwrap();
            assert_abs_diff_eq!(r.value, -phi1, epsilon = 1e-10);
            assert!(r.theta_star[0] <= 0.5);
        }
    }

    #[test]
    fn solve_errors_name_theta() {
        let mut g = instances::step();
        g.regions[1].conditions[0].closed = false;
        let z = ZSample::scalar(&[-0.5]).unwrap();
        let p = SaaProblem::new(GoalFunction::Pl(g), unit(), DivergencePair::avar(0.5).unwrap(), z).unwrap();
        match solve_saa(&p, &GridConfig::default()) {
            Err(Error::AtTheta { theta, .. }) => assert_eq!(theta, vec![0.5]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_grid_rejected() {
        let p = constant_problem(0.0, DivergencePair::avar(0.5).unwrap(), 1);
        let bad = GridConfig {
            coarse_per_dim: 2,
            ..GridConfig::default()
        };
        assert!(solve_saa(&p, &bad).is_err());
    }

    #[test]
    fn true_value_examples() {
        let u = ProductDistribution::new(vec![AnalyticDistribution::uniform(0.0, 1.0).unwrap()]).unwrap();
        let cfg = TrueValueConfig {
            quad_nodes: 1024,
            theta_grid: 101,
        };

        let c = ProblemTemplate::new(
            GoalFunction::Constant { value: 2.0, m: 1, d: 1 },
            unit(),
            DivergencePair::polynomial(2.0).unwrap(),
            u.clone(),
        )
        .unwrap();
        let tv = true_value(&c, &cfg).unwrap();
        assert_abs_diff_eq!(tv.v_star, 1.5, epsilon = 1e-10);
        assert!(tv.sigma2.abs() < 1e-20);
        // every θ is optimal
        assert!(!tv.unique);

        let avar = ProblemTemplate::new(
            GoalFunction::Pl(instances::abs_difference()),
            unit(),
            DivergencePair::avar(0.5).unwrap(),
            u.clone(),
        )
        .unwrap();
        let tv = true_value(&avar, &cfg).unwrap();
        assert_abs_diff_eq!(tv.v_star, 0.375, epsilon = 1e-6);
        assert_abs_diff_eq!(tv.theta_star[0], 0.5, epsilon = 1e-4);
        assert!(tv.unique);

        let ent = ProblemTemplate::new(
            GoalFunction::Holder(HolderGoal::preset(&HolderPreset::SquaredDistance, &unit(), 1, 1.0).unwrap()),
            unit(),
            DivergencePair::entropic(1.0).unwrap(),
            u,
        )
        .unwrap();
        let tv = true_value(&ent, &cfg).unwrap();
        assert_abs_diff_eq!(tv.theta_star[0], 0.5, epsilon = 1e-6);
        assert!(tv.unique && tv.inner_unique);
        // E[exp(G + x*)] = 1 at the optimum, so Φ*(G + x*) has mean zero
        assert_abs_diff_eq!(tv.minimizers[0].conj_mean, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn true_value_flags_symmetric_minimizers() {
        // G = -(θ - z)² with z ≡ 0 on [-1, 1]: minima at both ends
        let z = ProductDistribution::new(vec![AnalyticDistribution::discrete(vec![(0.0, 1.0)]).unwrap()]).unwrap();
        let b = ParameterBox::interval(-1.0, 1.0).unwrap();
        let goal = HolderGoal {
            eval: std::sync::Arc::new(|t: &[f64], z: &[f64]| -(t[0] - z[0]).powi(2)),
            ..HolderGoal::preset(&HolderPreset::SquaredDistance, &b, 1, 1.0).unwrap()
        };
        let t = ProblemTemplate::new(GoalFunction::Holder(goal), b, DivergencePair::entropic(1.0).unwrap(), z).unwrap();
        let tv = true_value(
            &t,
            &TrueValueConfig {
                quad_nodes: 16,
                theta_grid: 41,
            },
        )
        .unwrap();
        assert!(!tv.unique);
        assert_eq!(tv.minimizers.len(), 2);
    }

    #[test]
    fn cluster_indices_groups_neighbours() {
        assert_eq!(cluster_grid_indices(&[0, 1, 2, 7, 8], &[10]), vec![vec![0, 1, 2], vec![7, 8]]);
        // 3x3 grid: the diagonal chain (0,0), (1,1), (2,2) is connected
        assert_eq!(cluster_grid_indices(&[0, 4, 8], &[3, 3]).len(), 1);
        assert_eq!(cluster_grid_indices(&[0, 8], &[3, 3]).len(), 2);
    }
}
