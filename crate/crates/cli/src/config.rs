//! Run configuration, read from TOML.
//!
//! Every key is optional; missing keys take the defaults below. Unknown
//! keys are rejected so that typos do not silently fall back to defaults.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use num_complex::Complex64;
use ptlz::model::{Drive, ModelParams, SweepParams};
use ptlz::oracle::{TOL_MAX, TOL_MIN};
use ptlz::specfun::Regime;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Which computations a run performs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeSelection {
    /// Oracle trajectory and spectrum only.
    Oracle,
    Airy,
    QuarticBessel,
    Generic,
    /// Every series regime.
    All,
}

impl RegimeSelection {
    pub fn regimes(self) -> Vec<Regime> {
        match self {
            Self::Oracle => vec![],
            Self::Airy => vec![Regime::Airy],
            Self::QuarticBessel => vec![Regime::QuarticBessel],
            Self::Generic => vec![Regime::GenericSeries],
            Self::All => vec![Regime::Airy, Regime::QuarticBessel, Regime::GenericSeries],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// Mean cavity frequency.
    pub omega_bar: f64,
    pub kappa: f64,
    pub eta: f64,
    pub gamma0: f64,
    pub gamma: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            omega_bar: 1.0,
            kappa: 0.05,
            eta: 1.0,
            gamma0: 0.1,
            gamma: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { alpha: 0.5, beta: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub start: f64,
    pub end: f64,
    /// Points of the trajectory grid, endpoints included.
    pub samples: usize,
    /// Points of the spectrum grid.
    pub spectrum_samples: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            start: -3.0,
            end: 3.0,
            samples: 121,
            spectrum_samples: 121,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesSection {
    pub regime: RegimeSelection,
    /// Highest order in κ.
    pub order: usize,
    /// Highest power kept in the coefficient tables.
    pub max_power: usize,
    /// Number of κ values in the comparison table: κ, κ/2, κ/4, ...
    pub kappa_steps: usize,
    /// `[d1, d2, e1, e2]` as `[re, im]` pairs.
    pub combination: [[f64; 2]; 4],
}

impl Default for SeriesSection {
    fn default() -> Self {
        Self {
            regime: RegimeSelection::Oracle,
            order: 2,
            max_power: 40,
            kappa_steps: 3,
            combination: [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub tol: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { tol: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    /// `a₁..a₄` at `time.start` as `[re, im]` pairs.
    pub a: [[f64; 2]; 4],
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            a: [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("ptlz-out"),
        }
    }
}

/// Values to sweep; an absent key keeps the single value from its section.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub alpha: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub kappa: Option<Vec<f64>>,
    pub eta: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Replaces the built-in golden values.
    pub goldens: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub sweep: SweepSection,
    pub time: TimeSection,
    pub series: SeriesSection,
    pub oracle: OracleSection,
    pub initial: InitialSection,
    pub output: OutputSection,
    pub grid: GridSection,
    pub verify: VerifySection,
}

/// One point of a sweep grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub eta: f64,
}

fn pairs<const N: usize>(v: &[[f64; 2]; N]) -> [Complex64; N] {
    std::array::from_fn(|i| Complex64::new(v[i][0], v[i][1]))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let tol = self.oracle.tol;
        if !(TOL_MIN..=TOL_MAX).contains(&tol) {
            return bad(format!("oracle.tol = {tol:e} outside [{TOL_MIN:e}, {TOL_MAX:e}]"));
        }
        if !(self.time.start < self.time.end) {
            return bad(format!("time.start = {} must be below time.end = {}", self.time.start, self.time.end));
        }
        if self.time.samples < 2 || self.time.spectrum_samples < 2 {
            return bad("time.samples and time.spectrum_samples must be at least 2".into());
        }
        if self.series.order > 8 {
            return bad(format!("series.order = {} exceeds 8", self.series.order));
        }
        if !(8..=200).contains(&self.series.max_power) {
            return bad(format!("series.max_power = {} outside [8, 200]", self.series.max_power));
        }
        if !(1..=10).contains(&self.series.kappa_steps) {
            return bad(format!("series.kappa_steps = {} outside [1, 10]", self.series.kappa_steps));
        }
        for (name, g) in [
            ("alpha", &self.grid.alpha),
            ("beta", &self.grid.beta),
            ("kappa", &self.grid.kappa),
            ("eta", &self.grid.eta),
        ] {
            if g.as_ref().is_some_and(|v| v.is_empty()) {
                return bad(format!("grid.{name} is empty"));
            }
        }
        for p in self.points() {
            self.point_params(&p).map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Grid points in a fixed order: α outermost, then β, κ, η.
    pub fn points(&self) -> Vec<GridPoint> {
        let or = |g: &Option<Vec<f64>>, v: f64| g.clone().unwrap_or_else(|| vec![v]);
        let mut out = Vec::new();
        for &alpha in &or(&self.grid.alpha, self.sweep.alpha) {
            for &beta in &or(&self.grid.beta, self.sweep.beta) {
                for &kappa in &or(&self.grid.kappa, self.model.kappa) {
                    for &eta in &or(&self.grid.eta, self.model.eta) {
                        out.push(GridPoint { alpha, beta, kappa, eta });
                    }
                }
            }
        }
        out
    }

    pub fn is_sweep(&self) -> bool {
        self.points().len() > 1
    }

    pub fn point_params(&self, p: &GridPoint) -> Result<(ModelParams, Drive), ptlz::model::ModelError> {
        let m = &self.model;
        let params = ModelParams::new(m.omega_bar, m.omega_bar, p.kappa, p.eta, m.gamma0, m.gamma)?;
        Ok((params, Drive::Parabolic(SweepParams::new(p.alpha, p.beta)?)))
    }

    /// The configuration with the sweep collapsed onto one point.
    pub fn at_point(&self, p: &GridPoint) -> Self {
        let mut c = self.clone();
        c.sweep.alpha = p.alpha;
        c.sweep.beta = p.beta;
        c.model.kappa = p.kappa;
        c.model.eta = p.eta;
        c.grid = GridSection::default();
        c
    }

    pub fn initial_a(&self) -> [Complex64; 4] {
        pairs(&self.initial.a)
    }

    pub fn combination(&self) -> [Complex64; 4] {
        pairs(&self.series.combination)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain data")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        c.validate().unwrap();
        assert_eq!(c.points().len(), 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = RunConfig::from_toml("[model]\nkappa = 0.1\neta = \"x\"\n").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = RunConfig::from_toml("[modle]\n").unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = RunConfig::default();
        c.oracle.tol = 1e-3;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.grid.kappa = Some(vec![]);
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.grid.beta = Some(vec![1.0, 0.0]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn grid_order_and_round_trip() {
        let c = RunConfig::from_toml("[grid]\nkappa = [0.1, 0.2]\neta = [1.0, 2.0, 3.0]\n").unwrap();
        let p = c.points();
        assert_eq!(p.len(), 6);
        assert_eq!((p[1].kappa, p[1].eta), (0.1, 2.0));
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert!(!c.at_point(&p[0]).is_sweep());
    }
}
