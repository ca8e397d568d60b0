//! Dataset files, time discretization and analysis configuration.
//!
//! A dataset is a CSV file with a header. The first two columns are the raw
//! event or censoring time (positive) and the status (`0` censored, `1..=k`
//! the cause); any further columns are numeric covariates.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::posterior::{validate_observation, CensoredObservation};
use crate::regression::centering::CenteringFamily;
use crate::regression::concentration::DEFAULT_PRIOR_DRAWS;
use crate::regression::mcmc::McmcSettings;
use crate::regression::prior::PriorConfig;
use crate::sim::SimulationConfig;

/// How raw times are mapped to bins `(τ_{t−1}, τ_t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Discretization {
    /// Uniform bin width.
    pub width: f64,
    /// Number of bins; when absent, just enough to cover the largest time.
    pub bins: Option<usize>,
    /// Explicit edges `τ_1 < … < τ_T`; overrides `width` and `bins`.
    pub edges: Option<Vec<f64>>,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            width: 1.0,
            bins: None,
            edges: None,
        }
    }
}

impl Discretization {
    /// The grid for data whose largest raw time is `max_time`.
    pub fn grid(&self, max_time: f64) -> Result<TimeGrid> {
        if let Some(edges) = &self.edges {
            return TimeGrid::with_edges(edges.clone());
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::Config(format!("bin width must be positive, got {}", self.width)));
        }
        let bins = match self.bins {
            Some(b) => b,
            None => ((max_time / self.width).ceil() as usize).max(1),
        };
        TimeGrid::uniform(bins, self.width)
    }
}

/// A binned dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub covariate_names: Vec<String>,
    pub observations: Vec<CensoredObservation>,
    /// Covariates per observation, without the intercept.
    pub covariates: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

struct RawRow {
    time: f64,
    status: usize,
    covariates: Vec<f64>,
}

fn parse_cell(record: &csv::StringRecord, i: usize, row: usize, name: &str) -> Result<f64> {
    let cell = record.get(i).map(str::trim).unwrap_or("");
    if cell.is_empty() {
        return Err(Error::Schema {
            row,
            message: format!("missing value in column `{name}`"),
        });
    }
    cell.parse::<f64>().map_err(|_| Error::Schema {
        row,
        message: format!("`{cell}` in column `{name}` is not a number"),
    })
}

/// Reads the file, checks the schema and bins the times.
///
/// `covariates` selects columns by name in the given order; `None` keeps
/// every column after the status. Row numbers in errors count the header
/// as row 1.
pub fn ingest(path: &Path, k: usize, rule: &Discretization, covariates: Option<&[String]>) -> Result<(Dataset, TimeGrid)> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::Schema {
            row: 1,
            message: "expected at least the columns time and status".into(),
        });
    }
    let header_names: Vec<String> = headers.iter().map(str::to_string).collect();
    let selected: Vec<usize> = match covariates {
        None => (2..headers.len()).collect(),
        Some(names) => names
            .iter()
            .map(|name| {
                header_names[2..]
                    .iter()
                    .position(|h| h == name)
                    .map(|i| i + 2)
                    .ok_or_else(|| Error::Config(format!("covariate column `{name}` is not in the dataset")))
            })
            .collect::<Result<_>>()?,
    };

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Schema {
                row,
                message: format!("expected {} cells, found {}", headers.len(), record.len()),
            });
        }
        let time = parse_cell(&record, 0, row, &header_names[0])?;
        if !(time.is_finite() && time > 0.0) {
            return Err(Error::Schema {
                row,
                message: format!("time must be positive, got {time}"),
            });
        }
        let status = parse_cell(&record, 1, row, &header_names[1])?;
        if status.fract() != 0.0 || status < 0.0 || status > k as f64 {
            return Err(Error::Schema {
                row,
                message: format!("status must be an integer in 0..={k}, got {status}"),
            });
        }
        let covariates = selected
            .iter()
            .map(|&j| parse_cell(&record, j, row, &header_names[j]))
            .collect::<Result<Vec<_>>>()?;
        rows.push(RawRow {
            time,
            status: status as usize,
            covariates,
        });
    }

    let max_time = rows.iter().map(|r| r.time).fold(0.0, f64::max);
    let grid = rule.grid(max_time)?;
    let mut observations = Vec::with_capacity(rows.len());
    let mut covariates = Vec::with_capacity(rows.len());
    for (i, r) in rows.into_iter().enumerate() {
        let t = grid.bin_of(r.time).ok_or_else(|| Error::Schema {
            row: i + 2,
            message: format!("time {} lies beyond the last bin edge {}", r.time, grid.edge(grid.horizon())),
        })?;
        let obs = CensoredObservation::new(t, r.status);
        validate_observation(&obs, grid.horizon(), k)?;
        observations.push(obs);
        covariates.push(r.covariates);
    }
    Ok((
        Dataset {
            covariate_names: selected.iter().map(|&j| header_names[j].clone()).collect(),
            observations,
            covariates,
        },
        grid,
    ))
}

/// Writes a binned dataset with each time at its bin's right edge, so that
/// ingesting the file on the same grid gives the dataset back.
pub fn export(dataset: &Dataset, grid: &TimeGrid, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["time".to_string(), "status".to_string()];
    header.extend(dataset.covariate_names.iter().cloned());
    writer.write_record(&header)?;
    for (obs, cov) in dataset.observations.iter().zip(&dataset.covariates) {
        let mut record = vec![grid.edge(obs.time).to_string(), obs.cause.to_string()];
        record.extend(cov.iter().map(f64::to_string));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonparametricSettings {
    /// Constant prior parameter `α_{t,d}` of the SBS prior.
    pub alpha: f64,
    /// Posterior draws behind the pointwise bands.
    pub band_draws: usize,
}

impl Default for NonparametricSettings {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            band_draws: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UrnDemoSettings {
    pub bins: usize,
    /// Constant initial ball mass; the last survival urn is left empty so
    /// every walk ends within the horizon.
    pub alpha: f64,
    pub blocks: usize,
}

impl Default for UrnDemoSettings {
    fn default() -> Self {
        Self {
            bins: 5,
            alpha: 1.0,
            blocks: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationSettings {
    pub bins: usize,
    pub width: f64,
    pub masses: Vec<f64>,
    pub draws: usize,
    /// Profile including the intercept.
    pub profile: Vec<f64>,
}

impl Default for ConcentrationSettings {
    fn default() -> Self {
        Self {
            bins: 70,
            width: 100.0,
            masses: vec![1.0, 10.0, 100.0, 1e3, 1e4, 1e5],
            draws: DEFAULT_PRIOR_DRAWS,
            profile: vec![1.0, 0.0],
        }
    }
}

/// Everything an analysis run needs besides the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub k: usize,
    pub grid: Discretization,
    /// Covariate columns to use; all columns after the status when absent.
    pub covariates: Option<Vec<String>>,
    pub model: CenteringFamily,
    /// Fit the centering model alone instead of the SBS regression.
    pub parametric: bool,
    pub m: f64,
    /// Defaults to the standard priors of the chosen model.
    pub prior: Option<PriorConfig>,
    pub mcmc: McmcSettings,
    /// Profiles (intercept included) to report predictive curves for;
    /// the observed profiles when absent.
    pub profiles: Option<Vec<Vec<f64>>>,
    pub nonparametric: NonparametricSettings,
    pub urn: UrnDemoSettings,
    pub concentration: ConcentrationSettings,
    pub simulation: SimulationConfig,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            k: 2,
            grid: Discretization::default(),
            covariates: None,
            model: CenteringFamily::Weibull,
            parametric: false,
            m: 1.0,
            prior: None,
            mcmc: McmcSettings::default(),
            profiles: None,
            nonparametric: NonparametricSettings::default(),
            urn: UrnDemoSettings::default(),
            concentration: ConcentrationSettings::default(),
            simulation: SimulationConfig::default(),
            seed: 1,
            out: None,
        }
    }
}

impl AnalysisConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Fills in the model-dependent prior.
    pub fn resolve(mut self) -> Result<Self> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(Error::Config(format!("m must be positive, got {}", self.m)));
        }
        let prior = self.prior.unwrap_or_else(|| PriorConfig::default_for(self.model));
        prior.validate()?;
        self.prior = Some(prior);
        self.mcmc.validate()?;
        Ok(self)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}
