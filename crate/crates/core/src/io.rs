//! Problem files: JSON bundles of divergence, goal, parameter box and data.
//!
//! ```json
//! {
//!   "divergence": {"kind": "avar", "alpha": 0.5},
//!   "goal": {"type": "holder", "preset": "squared_distance"},
//!   "theta_box": {"lo": [0], "hi": [1]},
//!   "sample": {"csv": "z.csv"},
//!   "z_dist": [{"kind": "uniform", "a": 0, "b": 1}]
//! }
//! ```
//!
//! `sample` is a flat list (scalar observations), a list of rows, or
//! `{"csv": path}` with one observation per row and an optional header line.
//! Every field is optional here; commands check for what they need.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distribution::{AnalyticDistribution, ProductDistribution, ZSample};
use crate::divergence::{DivergencePair, DivergenceSpec};
use crate::error::{Error, Result};
use crate::goalfn::{GoalSpec, ParameterBox};
use crate::saa::{ProblemTemplate, SaaProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleSource {
    Scalar(Vec<f64>),
    Rows(Vec<Vec<f64>>),
    Csv { csv: PathBuf },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence: Option<DivergenceSpec>,
    /// Overrides the default `x0` of the divergence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<GoalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_box: Option<ParameterBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSource>,
    /// Independent marginals of `Z`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_dist: Option<Vec<AnalyticDistribution>>,
}

fn missing(field: &str) -> Error {
    Error::Parse(format!("problem file lacks `{field}`"))
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Replaces a CSV sample reference by its rows so the problem no longer
    /// depends on files. Relative paths resolve against `base_dir`.
    pub fn inline_sample(&mut self, base_dir: &Path) -> Result<()> {
        if let Some(SampleSource::Csv { csv }) = &self.sample {
            let z = read_sample_csv(&base_dir.join(csv))?;
            self.sample = Some(SampleSource::Rows(z.rows().map(<[f64]>::to_vec).collect()));
        }
        Ok(())
    }

    pub fn pair(&self) -> Result<DivergencePair> {
        let spec = self.divergence.clone().ok_or_else(|| missing("divergence"))?;
        let pair = DivergencePair::new(spec)?;
        match self.x0 {
            Some(x0) => pair.with_x0(x0),
            None => Ok(pair),
        }
    }

    pub fn theta_box(&self) -> Result<ParameterBox> {
        self.theta_box.clone().ok_or_else(|| missing("theta_box"))
    }

    pub fn z_dist(&self) -> Result<ProductDistribution> {
        ProductDistribution::new(self.z_dist.clone().ok_or_else(|| missing("z_dist"))?)
    }

    pub fn sample(&self, base_dir: &Path) -> Result<ZSample> {
        match self.sample.as_ref().ok_or_else(|| missing("sample"))? {
            SampleSource::Scalar(v) => ZSample::scalar(v),
            SampleSource::Rows(r) => ZSample::from_rows(r),
            SampleSource::Csv { csv } => read_sample_csv(&base_dir.join(csv)),
        }
    }

    pub fn saa_problem(&self, base_dir: &Path) -> Result<SaaProblem> {
        let theta_box = self.theta_box()?;
        let goal = self.goal.as_ref().ok_or_else(|| missing("goal"))?.build(&theta_box)?;
        SaaProblem::new(goal, theta_box, self.pair()?, self.sample(base_dir)?)
    }

    pub fn template(&self) -> Result<ProblemTemplate> {
        let theta_box = self.theta_box()?;
        let goal = self.goal.as_ref().ok_or_else(|| missing("goal"))?.build(&theta_box)?;
        ProblemTemplate::new(goal, theta_box, self.pair()?, self.z_dist()?)
    }
}

/// Reads one observation per row. A first row that does not parse as
/// numbers is taken as a header.
pub fn read_sample_csv(path: &Path) -> Result<ZSample> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("{} line {}: {e}", path.display(), i + 1))),
        }
    }
    ZSample::from_rows(&rows)
}
