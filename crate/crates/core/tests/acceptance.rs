//! Acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! `cargo test --release -p risk-saa-core --test acceptance -- 5 7` runs a
//! subset.

use std::time::{Duration, Instant};

use rand::Rng;
use statrs::distribution::{Binomial, Discrete};

use risk_saa_core::asymptotics::{
    bound_bounded, bracket_construction, bracketing_constant, eta_bounded, run_clt_with_truth,
    run_deviation_with_truth, xbar_constant, BoundConstants, CltConfig, DeviationConfig,
};
use risk_saa_core::divergence::conjugate_numeric;
use risk_saa_core::goalfn::{check_null_boundary, instances, HolderPreset};
use risk_saa_core::risk::{oce_empirical, oce_values};
use risk_saa_core::rng::stream_rng;
use risk_saa_core::saa::{empirical_x_bounds, population_x_bounds, solve_saa, true_value, TrueValueConfig};
use risk_saa_core::{
    AnalyticDistribution, DivergencePair, EmpiricalSample, GoalFunction, GridConfig, HolderGoal, InnerMethod,
    ParameterBox, PlGoal, ProblemTemplate, ProductDistribution, SaaProblem, ZSample,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion = (u32, &'static str, Option<u64>, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "conjugate correctness", Some(1), c1_conjugates),
        (2, "OCE oracles", Some(10), c2_oce_oracles),
        (3, "risk-measure axioms", Some(10), c3_axioms),
        (4, "localization", None, c4_localization),
        (5, "consistency", Some(300), c5_consistency),
        (6, "CLT", Some(900), c6_clt),
        (7, "deviation rates", Some(600), c7_deviation),
        (8, "constants", None, c8_constants),
        (9, "bracketing bound", Some(60), c9_bracketing),
        (10, "PL integrity", None, c10_pl),
        (11, "reproducibility", None, c11_reproducibility),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let res = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let in_budget = budget.is_none_or(|b| took <= Duration::from_secs(b));
        let pass = res.pass && in_budget;
        if !pass {
            failed += 1;
        }
        let budget_note = match budget {
            Some(b) if !in_budget => format!(", over the {b}s budget"),
            _ => String::new(),
        };
        println!(
            "criterion {id:>2} [{name}]: {} ({}; {:.1}s{budget_note})",
            if pass { "PASS" } else { "FAIL" },
            res.detail,
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

// Closed forms, written out independently of the library.
fn avar_conj(alpha: f64, y: f64) -> f64 {
    y.max(0.0) / (1.0 - alpha)
}

fn entropic_conj(gamma: f64, y: f64) -> f64 {
    (gamma * y).exp_m1() / gamma
}

fn poly_conj(p: f64, y: f64) -> f64 {
    (p - 1.0) / p * y.max(0.0).powf(p / (p - 1.0))
}

fn families() -> Vec<(&'static str, DivergencePair)> {
    vec![
        ("avar(0.5)", DivergencePair::avar(0.5).unwrap()),
        ("avar(0.9)", DivergencePair::avar(0.9).unwrap()),
        ("entropic(1)", DivergencePair::entropic(1.0).unwrap()),
        ("entropic(0.3)", DivergencePair::entropic(0.3).unwrap()),
        ("polynomial(2)", DivergencePair::polynomial(2.0).unwrap()),
        ("polynomial(3)", DivergencePair::polynomial(3.0).unwrap()),
    ]
}

fn c1_conjugates() -> Outcome {
    let ys = [-10.0, -1.0, 0.0, 0.5, 1.0, 5.0, 10.0];
    let avar_phi = |x: f64| if x <= 2.0 { 0.0 } else { f64::INFINITY };
    let ent_phi = |x: f64| if x == 0.0 { 1.0 } else { x * x.ln() - x + 1.0 };
    let poly_phi = |x: f64| 0.5 * x * x;
    let cases: [(&str, &dyn Fn(f64) -> f64, &dyn Fn(f64) -> f64); 3] = [
        ("avar", &avar_phi, &|y| avar_conj(0.5, y)),
        ("entropic", &ent_phi, &|y| entropic_conj(1.0, y)),
        ("polynomial", &poly_phi, &|y| poly_conj(2.0, y)),
    ];
    let mut worst = 0.0f64;
    for (name, phi, exact) in cases {
        for y in ys {
            match conjugate_numeric(phi, 2.0, y, 1e-10) {
                Ok(v) => worst = worst.max((v - exact(y)).abs()),
                Err(e) => return outcome(false, format!("{name} at y = {y}: {e}")),
            }
        }
    }
    outcome(worst <= 1e-6, format!("max |error| = {worst:.2e}"))
}

/// `(1/(1−α)) ∫_α^1 F^←(u) du` for the empirical law, integrating the step
/// function `F^←(u) = y_(i)` on `((i−1)/n, i/n]`.
fn avar_by_quantile_integration(values: &[f64], alpha: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut total = 0.0;
    for (i, y) in v.iter().enumerate() {
        let (lo, hi) = (i as f64 / n, (i + 1) as f64 / n);
        let overlap = (hi - lo.max(alpha)).max(0.0);
        total += y * overlap;
    }
    total / (1.0 - alpha)
}

fn random_sample(rng: &mut impl Rng, max_len: usize) -> Vec<f64> {
    let n = rng.random_range(1..=max_len);
    let scale = rng.random_range(0.1..5.0);
    (0..n).map(|_| scale * (rng.random::<f64>() * 2.0 - 1.0)).collect()
}

fn c2_oce_oracles() -> Outcome {
    let mut rng = stream_rng(2, 0);
    let (mut avar_err, mut ent_err, mut x_err, mut poly_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let values = random_sample(&mut rng, 1000);
        for alpha in [0.1, 0.5, 0.95] {
            let pair = DivergencePair::avar(alpha).unwrap();
            let v = oce_values(&values, &pair, InnerMethod::default()).unwrap().value;
            avar_err = avar_err.max((v - avar_by_quantile_integration(&values, alpha)).abs());
        }
        for gamma in [0.5, 1.0, 2.0] {
            let pair = DivergencePair::entropic(gamma).unwrap();
            let r = oce_values(&values, &pair, InnerMethod::default()).unwrap();
            let mean_exp = values.iter().map(|y| (gamma * y).exp()).sum::<f64>() / values.len() as f64;
            ent_err = ent_err.max((r.value - mean_exp.ln() / gamma).abs());
            x_err = x_err.max((r.x_star + mean_exp.ln() / gamma).abs());
        }
        let c = values[0];
        for p in [1.5, 2.0, 4.0] {
            let pair = DivergencePair::polynomial(p).unwrap();
            let v = oce_values(&vec![c; values.len()], &pair, InnerMethod::default()).unwrap().value;
            poly_err = poly_err.max((v - (c - 1.0 / p)).abs());
        }
    }
    outcome(
        avar_err <= 1e-8 && ent_err <= 1e-8 && x_err <= 1e-6 && poly_err <= 1e-8,
        format!("avar {avar_err:.1e}, entropic {ent_err:.1e}, entropic x* {x_err:.1e}, polynomial const {poly_err:.1e}"),
    )
}

fn c3_axioms() -> Outcome {
    let mut rng = stream_rng(3, 0);
    let (mut cash, mut mono_violation, mut constant) = (0.0f64, 0.0f64, 0.0f64);
    for (_, pair) in families() {
        let phi1 = pair.phi(1.0);
        for _ in 0..100 {
            let values = random_sample(&mut rng, 300);
            let s = EmpiricalSample::new(values.clone()).unwrap();
            let base = oce_empirical(&s, &pair).unwrap().value;
            for c in [-3.0, 0.7, 12.0] {
                let shifted = oce_empirical(&s.shifted(c), &pair).unwrap().value;
                cash = cash.max((shifted - base - c).abs());
            }
            let bumped: Vec<f64> = values.iter().map(|v| v + rng.random::<f64>()).collect();
            let up = oce_values(&bumped, &pair, InnerMethod::default()).unwrap().value;
            mono_violation = mono_violation.max(base - up);
            let c = values[0];
            let v = oce_values(&[c, c, c], &pair, InnerMethod::default()).unwrap().value;
            constant = constant.max((v - (c - phi1)).abs());
        }
    }
    outcome(
        cash <= 1e-8 && mono_violation <= 1e-8 && constant <= 1e-8,
        format!("cash {cash:.1e}, monotonicity {mono_violation:.1e}, constant law {constant:.1e}"),
    )
}

fn unit() -> ParameterBox {
    ParameterBox::interval(0.0, 1.0).unwrap()
}

fn uniform(a: f64, b: f64) -> AnalyticDistribution {
    AnalyticDistribution::uniform(a, b).unwrap()
}

fn product(marginals: Vec<AnalyticDistribution>) -> ProductDistribution {
    ProductDistribution::new(marginals).unwrap()
}

/// Goals with a matching law for `Z`.
fn corpus_goals() -> Vec<(String, GoalFunction, ParameterBox, ProductDistribution)> {
    let mut out = Vec::new();
    let presets = [
        ("abs_distance", HolderPreset::AbsDistance),
        ("squared_distance", HolderPreset::SquaredDistance),
        ("product", HolderPreset::Product),
        ("sum", HolderPreset::Sum),
        ("newsvendor", HolderPreset::Newsvendor { price: 3.0, cost: 1.0 }),
    ];
    for (name, p) in presets {
        let g = HolderGoal::preset(&p, &unit(), 1, 1.0).unwrap();
        out.push((name.to_string(), GoalFunction::Holder(g), unit(), product(vec![uniform(0.0, 1.0)])));
    }
    let square = ParameterBox::new(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap();
    let g = HolderGoal::preset(&HolderPreset::SquaredDistance, &square, 2, 1.0).unwrap();
    out.push((
        "squared_distance_2d".into(),
        GoalFunction::Holder(g),
        square,
        product(vec![uniform(-1.0, 1.0), AnalyticDistribution::discrete(vec![(0.0, 0.3), (2.0, 0.7)]).unwrap()]),
    ));
    for (name, pl) in instances::all() {
        let z = if pl.d == 2 {
            product(vec![uniform(0.0, 1.0), AnalyticDistribution::discrete(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap()])
        } else {
            product(vec![uniform(-1.0, 1.0)])
        };
        out.push((format!("pl_{name}"), GoalFunction::Pl(pl), unit(), z));
    }
    out.push(("constant".into(), GoalFunction::Constant { value: 2.5, m: 1, d: 1 }, unit(), product(vec![uniform(0.0, 1.0)])));
    out
}

fn c4_localization() -> Outcome {
    let grid = GridConfig {
        coarse_per_dim: 9,
        refine_rounds: 2,
        shrink: 0.25,
    };
    let (mut solves, mut violations) = (0usize, Vec::new());
    let mut rng = stream_rng(4, 0);
    for (gname, goal, theta_box, z_dist) in corpus_goals() {
        for (fname, pair) in families() {
            for n in [1usize, 7, 60, 400] {
                let z = z_dist.sample(n, &mut rng);
                let problem = SaaProblem::new(goal.clone(), theta_box.clone(), pair.clone(), z).unwrap();
                let loc = empirical_x_bounds(&problem).unwrap();
                solves += 1;
                match solve_saa(&problem, &grid) {
                    Ok(r) => {
                        let (lo, hi) = r.minimizer_interval;
                        let slack = 1e-12 * 1f64.max(loc.x_l.abs()).max(loc.x_u.abs());
                        if lo < loc.x_l - slack || hi > loc.x_u + slack {
                            violations.push(format!("{gname}/{fname}/n={n}: [{lo}, {hi}]"));
                        }
                    }
                    Err(e) => violations.push(format!("{gname}/{fname}/n={n}: {e}")),
                }
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!("{solves} solves, {} violations{}", violations.len(), violations.first().map(|v| format!(", first {v}")).unwrap_or_default()),
    )
}

/// `G(θ,z) = (θ − z)²`, `Z ~ U(0,1)`, `Θ = [0,1]`.
fn reference_template(pair: DivergencePair) -> ProblemTemplate {
    let g = HolderGoal::preset(&HolderPreset::SquaredDistance, &unit(), 1, 1.0).unwrap();
    ProblemTemplate::new(GoalFunction::Holder(g), unit(), pair, product(vec![uniform(0.0, 1.0)])).unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn c5_consistency() -> Outcome {
    let t = reference_template(DivergencePair::entropic(1.0).unwrap());
    let truth = true_value(
        &t,
        &TrueValueConfig {
            quad_nodes: 100_000,
            theta_grid: 201,
        },
    )
    .unwrap();
    let grid = GridConfig::default();
    let mut medians = Vec::new();
    for (i, n) in [100usize, 1_000, 10_000, 100_000].into_iter().enumerate() {
        let errs: Vec<f64> = (0..20u64)
            .map(|s| {
                let mut rng = stream_rng(5, ((i as u64) << 32) | s);
                let p = t.with_sample(t.z_dist.sample(n, &mut rng)).unwrap();
                (solve_saa(&p, &grid).unwrap().value - truth.v_star).abs()
            })
            .collect();
        medians.push(median(errs));
    }
    let nonincreasing = medians.windows(2).all(|w| w[1] <= w[0]);
    let last = *medians.last().unwrap();
    outcome(
        nonincreasing && last < 0.01,
        format!("v* = {:.10}, medians {:?}", truth.v_star, medians.iter().map(|m| format!("{m:.2e}")).collect::<Vec<_>>()),
    )
}

fn c6_clt() -> Outcome {
    let truth_cfg = TrueValueConfig {
        quad_nodes: 4096,
        theta_grid: 201,
    };
    let t = reference_template(DivergencePair::entropic(1.0).unwrap());
    let truth = true_value(&t, &truth_cfg).unwrap();
    let cfg = CltConfig {
        n: 5000,
        replications: 2000,
        master_seed: 6,
        grid: GridConfig::default(),
        truth: truth_cfg,
        estimated_variance: false,
    };
    let r = run_clt_with_truth(&t, &cfg, &truth).unwrap();
    let ks = r.ks_stat.unwrap_or(f64::NAN);
    let ratio = r.variance_ratio().unwrap_or(f64::NAN);
    let in_band = |x: f64| (0.8..=1.2).contains(&x);

    // Polynomial run: E Φ*(G + x*) is far from zero, so the uncentered
    // second moment must miss the band while the variance stays inside.
    let tp = reference_template(DivergencePair::polynomial(2.0).unwrap());
    let truth_p = true_value(&tp, &truth_cfg).unwrap();
    let rp = run_clt_with_truth(
        &tp,
        &CltConfig {
            n: 2000,
            replications: 1000,
            master_seed: 61,
            ..cfg.clone()
        },
        &truth_p,
    )
    .unwrap();
    let ratio_p = rp.variance_ratio().unwrap_or(f64::NAN);
    let unc_p = rp.uncentered_variance_ratio().unwrap_or(f64::NAN);
    let entropic_mean_zero = r.conj_mean_theory.abs() < 1e-9;
    let pass = ks < 0.05 && in_band(ratio) && in_band(ratio_p) && !in_band(unc_p) && entropic_mean_zero;
    outcome(
        pass,
        format!(
            "entropic: KS {ks:.4} (p {:.3}), var ratio {ratio:.3}, sigma2 {:.4e}, mean of conjugate {:.1e}; polynomial: var ratio {ratio_p:.3}, uncentered ratio {unc_p:.3e}",
            r.ks_pvalue.unwrap_or(f64::NAN),
            r.sigma2_theory,
            r.conj_mean_theory
        ),
    )
}

fn c7_deviation() -> Outcome {
    // G = 1{θ + z > 0}, Z ~ U(−1,1), Θ = [0,1], entropic(1): θ̂ = θ* = 0 and
    // v̂_n = ln(1 − q + q e) with q the share of positive z, q ~ Bin(n, 1/2)/n.
    let pair = DivergencePair::entropic(1.0).unwrap();
    let t = ProblemTemplate::new(GoalFunction::Pl(instances::step()), unit(), pair.clone(), product(vec![uniform(-1.0, 1.0)])).unwrap();
    let f = |q: f64| (1.0 - q + q * std::f64::consts::E).ln();
    let v_star = f(0.5);
    let n0 = 50u64;
    let bin = Binomial::new(0.5, n0).unwrap();
    let mut levels: Vec<f64> = (0..=n0).map(|k| (f(k as f64 / n0 as f64) - v_star).abs()).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let tail = |eps: f64| -> f64 {
        (0..=n0)
            .filter(|&k| (f(k as f64 / n0 as f64) - v_star).abs() >= eps)
            .map(|k| bin.pmf(k))
            .sum()
    };
    // ε halfway between lattice levels, with exact p(50) closest to 0.3
    let eps = levels
        .windows(2)
        .map(|w| 0.5 * (w[0] + w[1]))
        .min_by(|a, b| (tail(*a) - 0.3).abs().total_cmp(&(tail(*b) - 0.3).abs()))
        .unwrap();

    let eta = eta_bounded(&pair, 1.0).unwrap();
    let constants = BoundConstants {
        eta,
        v: 2.0,
        d: 1.0,
        ..Default::default()
    };
    let cfg = DeviationConfig {
        eps,
        n_grid: vec![50, 100, 200, 400, 800],
        replications: 5000,
        master_seed: 7,
        grid: GridConfig::default(),
        truth: TrueValueConfig::default(),
        constants: Some(constants),
    };
    let truth = true_value(&t, &cfg.truth).unwrap();
    if (truth.v_star - v_star).abs() > 1e-9 {
        return outcome(false, format!("quadrature v* {} disagrees with ln((1+e)/2) = {v_star}", truth.v_star));
    }
    let r = run_deviation_with_truth(&t, &cfg, v_star).unwrap();
    let d_min = r.d_min.unwrap_or(f64::NAN);
    let curve = r.bound_curve_d_min.clone().unwrap_or_default();
    let dominates = curve.len() == r.wilson_lo.len() && curve.iter().zip(&r.wilson_lo).all(|(b, lo)| *b >= lo * (1.0 - 1e-12));
    // a slightly smaller D must break dominance somewhere
    let tighter = BoundConstants { d: 0.999 * d_min, ..constants };
    let minimal = r.n_grid.iter().zip(&r.wilson_lo).any(|(n, lo)| bound_bounded(*n, eps, &tighter).unwrap() < *lo);
    let pass = r.fitted_slope < 0.0 && r.nonincreasing_within_noise && dominates && minimal;
    outcome(
        pass,
        format!(
            "eps {eps:.5} (exact p(50) = {:.3}), p_hat {:?}, slope {:.3e}, D_min {d_min:.4e} (eta {eta:.3})",
            tail(eps),
            r.p_hat,
            r.fitted_slope
        ),
    )
}

fn c8_constants() -> Outcome {
    let avar = DivergencePair::avar(0.5).unwrap();
    // hand oracle: Φ(2) = 0, Φ*(1) = 2, Φ*(8) = 16
    let xbar = xbar_constant(&avar, 1.0, avar_conj(0.5, 1.0));
    let eta = eta_bounded(&avar, 1.0).unwrap();
    let loc = population_x_bounds(&avar, 1.0, 2.0).unwrap();
    let k = bracketing_constant(1.0, &unit(), 1.0, 1.0).unwrap().k_k;
    let k_oracle = (2.0 * 1.0 + 1.0) * (4.0 * (1.0f64 + 4.0).sqrt() + 1.0);
    let errs = [
        (xbar - 7.0).abs(),
        (eta - 16.0).abs(),
        (loc.x_l + 3.0).abs(),
        (loc.x_u - 7.0).abs(),
        (k - k_oracle).abs(),
    ];
    outcome(
        errs.iter().all(|e| *e <= 1e-9) && (k - 29.833).abs() < 1e-3,
        format!("x_bar {xbar}, eta {eta}, x_l {}, x_u {}, K_k {k:.6}", loc.x_l, loc.x_u),
    )
}

fn c9_bracketing() -> Outcome {
    let g = HolderGoal::preset(&HolderPreset::Product, &unit(), 1, 1.0).unwrap();
    let avar = DivergencePair::avar(0.5).unwrap();
    let z = product(vec![uniform(0.0, 1.0)]);
    let mut pass = true;
    let mut parts = Vec::new();
    for eps in [0.5, 0.2, 0.1] {
        let c = bracket_construction(&g, &avar, &unit(), 1.0, &z, eps, 256, 20_000, 9).unwrap();
        pass &= c.within_bound && c.brackets_valid && c.l2_width <= eps * (1.0 + 1e-12);
        parts.push(format!("eps {eps}: {} <= {:.0}", c.count, c.bound));
    }
    outcome(pass, parts.join(", "))
}

fn c10_pl() -> Outcome {
    let mut rng = stream_rng(10, 0);
    let mut problems = Vec::new();
    let mut dominated = true;
    for (name, pl) in instances::all() {
        let theta_box = unit();
        let env = pl.envelope(&theta_box).unwrap();
        for i in 0..100_000 {
            let theta = theta_box.sample(&mut rng);
            let mut z: Vec<f64> = (0..pl.d).map(|_| rng.random_range(-3.0..3.0)).collect();
            // every tenth draw sits on the boundary of the first condition
            if i % 10 == 0 {
                put_on_boundary(&pl, &theta, &mut z);
            }
            let active = pl.active_regions(&theta, &z).len();
            if active != 1 {
                problems.push(format!("{name}: {active} regions at theta {theta:?}, z {z:?}"));
                break;
            }
            if i < 10_000 && pl.eval(&theta, &z).unwrap().abs() > env.xi1(&z) {
                dominated = false;
            }
        }
    }
    let step = instances::step();
    let continuous = ZSample::scalar(&(0..1000).map(|_| rng.random::<f64>()).collect::<Vec<_>>()).unwrap();
    let atom = ZSample::scalar(&[0.3, -0.5, 0.7]).unwrap();
    let null_cont = check_null_boundary(&step, &unit(), &continuous).unwrap();
    let null_atom = check_null_boundary(&step, &unit(), &atom).unwrap();
    outcome(
        problems.is_empty() && dominated && null_cont && !null_atom,
        format!(
            "partition issues {}, envelope dominates {dominated}, null boundary continuous {null_cont}, boundary atom {null_atom}{}",
            problems.len(),
            problems.first().map(|p| format!(", first {p}")).unwrap_or_default()
        ),
    )
}

/// Moves `z` so the first condition of the first region holds with equality.
fn put_on_boundary(pl: &PlGoal, theta: &[f64], z: &mut [f64]) {
    let c = &pl.regions[0].conditions[0];
    let w = pl.shifted(theta, z);
    let lw: f64 = c.l.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + c.a;
    if let Some(j) = c.l.iter().position(|v| *v != 0.0) {
        z[j] -= lw / c.l[j];
    }
}

fn c11_reproducibility() -> Outcome {
    let truth_cfg = TrueValueConfig {
        quad_nodes: 256,
        theta_grid: 41,
    };
    let t = reference_template(DivergencePair::avar(0.7).unwrap());
    let truth = true_value(&t, &truth_cfg).unwrap();
    let clt = CltConfig {
        n: 200,
        replications: 100,
        master_seed: 11,
        grid: GridConfig::default(),
        truth: truth_cfg,
        estimated_variance: false,
    };
    let dev = DeviationConfig {
        eps: 0.01,
        n_grid: vec![20, 80],
        replications: 100,
        master_seed: 11,
        grid: GridConfig::default(),
        truth: truth_cfg,
        constants: None,
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let a = serde_json::to_string(&run_clt_with_truth(&t, &clt, &truth).unwrap()).unwrap();
            let b = serde_json::to_string(&run_deviation_with_truth(&t, &dev, truth.v_star).unwrap()).unwrap();
            (a, b)
        })
    };
    let first = run(1);
    let second = run(1);
    let threaded = run(4);
    let other_seed = serde_json::to_string(&run_clt_with_truth(&t, &CltConfig { master_seed: 12, ..clt.clone() }, &truth).unwrap()).unwrap();
    outcome(
        first == second && first == threaded && other_seed != first.0,
        format!(
            "repeat identical {}, 1 vs 4 threads identical {}, other seed differs {}",
            first == second,
            first == threaded,
            other_seed != first.0
        ),
    )
}
