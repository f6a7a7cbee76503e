use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use risk_saa_core::asymptotics::{
    bound_bounded, bound_unbounded, bracket_construction, eta_bounded, run_clt, run_deviation, xbar_constant,
};
use risk_saa_core::risk::{oce_analytic, oce_values};
use risk_saa_core::saa::{empirical_x_bounds, solve_saa, true_value};
use risk_saa_core::{BoundConstants, CltConfig, DeviationConfig, GoalFunction, GridConfig, InnerMethod, TrueValueConfig};

use crate::config::{Command, ResolvedConfig};
use crate::CliError;

/// A CSV file written next to `report.json`.
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Output {
    pub result: Value,
    pub tables: Vec<Table>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OceParams {
    method: InnerMethod,
    /// Starting node count when the law comes from `z_dist`.
    quad_nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SolveParams {
    grid: GridConfig,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct TrueValueParams {
    truth: TrueValueConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CltParams {
    n: usize,
    replications: usize,
    #[serde(default)]
    grid: GridConfig,
    #[serde(default)]
    truth: TrueValueConfig,
    #[serde(default)]
    estimated_variance: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviationParams {
    eps: f64,
    n_grid: Vec<usize>,
    replications: usize,
    #[serde(default)]
    grid: GridConfig,
    #[serde(default)]
    truth: TrueValueConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constants: Option<BoundConstants>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum BoundKind {
    /// Goals with `|G| ≤ L`.
    #[default]
    Bounded,
    /// Goals with an integrable envelope.
    Unbounded,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsParams {
    #[serde(default)]
    kind: BoundKind,
    constants: BoundConstants,
    n: OneOrMany<usize>,
    eps: OneOrMany<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    var_terms: Option<(f64, f64, f64)>,
    /// Bound on `|G|`; with a divergence in the problem, `x_bar` and `eta`
    /// are computed from it.
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    l: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BracketParams {
    #[serde(default = "one")]
    k: f64,
    eps: OneOrMany<f64>,
    #[serde(default = "default_quad")]
    quad_nodes: usize,
    #[serde(default = "default_checks")]
    checks: usize,
}

fn one() -> f64 {
    1.0
}

fn default_quad() -> usize {
    256
}

fn default_checks() -> usize {
    10_000
}

fn parse<T: DeserializeOwned>(params: &Value) -> Result<T, CliError> {
    serde_json::from_value(params.clone()).map_err(|e| CliError::Config(format!("params: {e}")))
}

fn roundtrip<T: DeserializeOwned + Serialize>(params: Value) -> Result<Value, CliError> {
    let typed: T = parse(&params)?;
    Ok(serde_json::to_value(typed).expect("params serialize"))
}

/// Validates `params` for `command` and fills in defaults.
pub fn normalize_params(command: Command, params: Value) -> Result<Value, CliError> {
    match command {
        Command::Oce => roundtrip::<OceParams>(params),
        Command::Solve => roundtrip::<SolveParams>(params),
        Command::TrueValue => roundtrip::<TrueValueParams>(params),
        Command::Clt => roundtrip::<CltParams>(params),
        Command::Deviation => roundtrip::<DeviationParams>(params),
        Command::Bounds => roundtrip::<BoundsParams>(params),
        Command::BracketCheck => roundtrip::<BracketParams>(params),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn seed(cfg: &ResolvedConfig) -> Result<u64, CliError> {
    cfg.master_seed
        .ok_or_else(|| CliError::Config(format!("{:?} needs a master_seed", cfg.command)))
}

pub fn run(cfg: &ResolvedConfig) -> Result<Output, CliError> {
    let base = std::path::Path::new(".");
    match cfg.command {
        Command::Oce => {
            let p: OceParams = parse(&cfg.params)?;
            let problem = cfg.problem()?;
            let pair = problem.pair()?;
            let r = if problem.sample.is_some() {
                let z = problem.sample(base)?;
                if z.dim() != 1 {
                    return Err(CliError::Config("oce needs scalar observations".into()));
                }
                let values: Vec<f64> = z.rows().map(|r| r[0]).collect();
                oce_values(&values, &pair, p.method)?
            } else {
                let dist = problem.z_dist()?;
                if dist.dim() != 1 {
                    return Err(CliError::Config("oce needs a one-dimensional law".into()));
                }
                oce_analytic(&dist.marginals[0], &pair, p.quad_nodes.unwrap_or(64))?
            };
            Ok(Output {
                result: to_value(&r),
                tables: vec![],
            })
        }
        Command::Solve => {
            let p: SolveParams = parse(&cfg.params)?;
            let problem = cfg.problem()?.saa_problem(base)?;
            let r = solve_saa(&problem, &p.grid)?;
            let loc = empirical_x_bounds(&problem)?;
            Ok(Output {
                result: json!({ "solution": r, "empirical_x_bounds": loc }),
                tables: vec![],
            })
        }
        Command::TrueValue => {
            let p: TrueValueParams = parse(&cfg.params)?;
            let t = true_value(&cfg.problem()?.template()?, &p.truth)?;
            let rows = t
                .minimizers
                .iter()
                .map(|m| {
                    vec![
                        join(&m.theta),
                        m.value.to_string(),
                        m.x_star.to_string(),
                        m.minimizer_interval.0.to_string(),
                        m.minimizer_interval.1.to_string(),
                        m.sigma2.to_string(),
                    ]
                })
                .collect();
            Ok(Output {
                result: to_value(&t),
                tables: vec![Table {
                    name: "minimizers.csv",
                    header: vec!["theta", "value", "x_star", "x_lo", "x_hi", "sigma2"],
                    rows,
                }],
            })
        }
        Command::Clt => {
            let p: CltParams = parse(&cfg.params)?;
            let master_seed = seed(cfg)?;
            let report = run_clt(
                &cfg.problem()?.template()?,
                &CltConfig {
                    n: p.n,
                    replications: p.replications,
                    master_seed,
                    grid: p.grid,
                    truth: p.truth,
                    estimated_variance: p.estimated_variance,
                },
            )?;
            let rows = report
                .errors
                .iter()
                .enumerate()
                .map(|(r, e)| vec![r.to_string(), e.to_string()])
                .collect();
            let mut result = to_value(&report);
            result["variance_ratio"] = to_value(&report.variance_ratio());
            result["uncentered_variance_ratio"] = to_value(&report.uncentered_variance_ratio());
            Ok(Output {
                result,
                tables: vec![Table {
                    name: "errors.csv",
                    header: vec!["replication", "error"],
                    rows,
                }],
            })
        }
        Command::Deviation => {
            let p: DeviationParams = parse(&cfg.params)?;
            let master_seed = seed(cfg)?;
            let r = run_deviation(
                &cfg.problem()?.template()?,
                &DeviationConfig {
                    eps: p.eps,
                    n_grid: p.n_grid,
                    replications: p.replications,
                    master_seed,
                    grid: p.grid,
                    truth: p.truth,
                    constants: p.constants,
                },
            )?;
            let opt = |v: &Option<Vec<f64>>, i: usize| v.as_ref().map(|v| v[i].to_string()).unwrap_or_default();
            let rows = (0..r.n_grid.len())
                .map(|i| {
                    vec![
                        r.n_grid[i].to_string(),
                        r.exceedances[i].to_string(),
                        r.p_hat[i].to_string(),
                        r.wilson_lo[i].to_string(),
                        r.wilson_hi[i].to_string(),
                        opt(&r.bound_curve, i),
                        opt(&r.bound_curve_d_min, i),
                    ]
                })
                .collect();
            Ok(Output {
                result: to_value(&r),
                tables: vec![Table {
                    name: "deviation.csv",
                    header: vec!["n", "exceedances", "p_hat", "wilson_lo", "wilson_hi", "bound", "bound_d_min"],
                    rows,
                }],
            })
        }
        Command::Bounds => {
            let p: BoundsParams = parse(&cfg.params)?;
            let mut c = p.constants;
            if let Some(problem) = cfg.problem.as_ref().filter(|p| p.divergence.is_some()) {
                let pair = problem.pair()?;
                c.phi_at_0 = pair.phi_at_0();
                if let Some(l) = p.l {
                    c.x_bar = xbar_constant(&pair, l, pair.conj(l));
                    c.eta = eta_bounded(&pair, l)?;
                }
            } else if p.l.is_some() {
                return Err(CliError::Config("L needs a divergence in the problem".into()));
            }
            let mut rows = Vec::new();
            let mut points = Vec::new();
            for &n in &p.n.to_vec() {
                for &eps in &p.eps.to_vec() {
                    let b = match p.kind {
                        BoundKind::Bounded => bound_bounded(n, eps, &c)?,
                        BoundKind::Unbounded => bound_unbounded(n, eps, &c, p.var_terms)?,
                    };
                    rows.push(vec![n.to_string(), eps.to_string(), b.to_string()]);
                    points.push(json!({ "n": n, "eps": eps, "bound": b }));
                }
            }
            Ok(Output {
                result: json!({ "kind": p.kind, "constants": c, "bounds": points }),
                tables: vec![Table {
                    name: "bounds.csv",
                    header: vec!["n", "eps", "bound"],
                    rows,
                }],
            })
        }
        Command::BracketCheck => {
            let p: BracketParams = parse(&cfg.params)?;
            let master_seed = seed(cfg)?;
            let t = cfg.problem()?.template()?;
            let GoalFunction::Holder(goal) = &t.goal else {
                return Err(CliError::Config("bracket-check needs a holder goal".into()));
            };
            let mut checks = Vec::new();
            for eps in p.eps.to_vec() {
                checks.push(bracket_construction(
                    goal,
                    &t.pair,
                    &t.theta_box,
                    p.k,
                    &t.z_dist,
                    eps,
                    p.quad_nodes,
                    p.checks,
                    master_seed,
                )?);
            }
            let rows = checks
                .iter()
                .map(|c| {
                    vec![
                        c.eps.to_string(),
                        c.count.to_string(),
                        c.bound.to_string(),
                        c.max_violation.to_string(),
                        c.within_bound.to_string(),
                        c.brackets_valid.to_string(),
                    ]
                })
                .collect();
            Ok(Output {
                result: json!({ "checks": checks }),
                tables: vec![Table {
                    name: "brackets.csv",
                    header: vec!["eps", "count", "bound", "max_violation", "within_bound", "brackets_valid"],
                    rows,
                }],
            })
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}
