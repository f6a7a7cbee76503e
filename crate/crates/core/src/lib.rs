//! Risk-averse stochastic programs `inf_θ R(F_θ)` for divergence risk
//! measures, solved by sample average approximation.

pub mod asymptotics;
pub mod distribution;
pub mod divergence;
pub mod error;
pub mod goalfn;
pub mod io;
mod optim;
pub mod risk;
pub mod rng;
pub mod saa;
pub mod stats;

pub use asymptotics::{BoundConstants, Bracketing, CltConfig, CltReport, DeviationConfig, DeviationReport};
pub use distribution::{AnalyticDistribution, ProductDistribution, ZQuadrature, ZSample};
pub use divergence::{CustomDivergence, DivergencePair, DivergenceSpec};
pub use error::{Error, ErrorKind, Result};
pub use io::{ProblemFile, SampleSource};
pub use goalfn::{GoalFunction, GoalSpec, HolderGoal, ParameterBox, PlGoal};
pub use risk::{EmpiricalSample, InnerMethod, RiskValue};
pub use saa::{GridConfig, LocalizationBounds, ProblemTemplate, SaaProblem, SaaResult, TrueValue, TrueValueConfig};
