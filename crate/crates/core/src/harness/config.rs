//! TOML experiment configuration.
//!
//! ```toml
//! [model]
//! kind = "sturm_liouville"      # or "synthetic"
//! k = 1.0
//!
//! [cutoff]
//! a = 0.55
//! a0 = 0.7
//! b0 = 1.3
//! b = 1.45
//!
//! [sweep]
//! kappa = [0.05, 0.1, 0.2]
//!
//! [output]
//! precision = 17
//! ```
//!
//! A synthetic model gives the background measure directly:
//!
//! ```toml
//! [model]
//! kind = "synthetic"
//! lambda0 = 1.0
//! overlap = 0.8
//! window = [0.5, 1.5]
//! measure = { density = { kind = "constant", value = 0.4, lo = -1.0, hi = 3.0 } }
//! ```

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::measures::MeasureSpec;
use crate::quasi_lorentzian::CutoffFunction;
use crate::rank_one::RankOneModel;
use crate::sturm_liouville::{build_rank_one_model, AssembledModel, SlModel};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SyntheticModel {
    pub lambda0: f64,
    pub overlap: f64,
    pub window: [f64; 2],
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub measure: MeasureSpec,
}

fn default_alpha() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    SturmLiouville(SlModel),
    Synthetic(SyntheticModel),
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CutoffSpec {
    pub a: f64,
    pub a0: f64,
    pub b0: f64,
    pub b: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec {
            a: 0.55,
            a0: 0.7,
            b0: 1.3,
            b: 1.45,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kappa: Vec<f64>,
    /// Last time of the decay tables; five lifetimes per coupling when absent.
    #[serde(default)]
    pub t_max: Option<f64>,
    /// Number of equispaced times in each decay table.
    #[serde(default = "default_t_points")]
    pub t_points: usize,
    /// Rescaled times of the concentration experiment.
    #[serde(default = "default_concentration_t")]
    pub concentration_t: Vec<f64>,
    /// Energy grid `[lo, hi]` and point count of the spectrum check.
    #[serde(default = "default_spectrum_grid")]
    pub spectrum_grid: (f64, f64, usize),
}

fn default_t_points() -> usize {
    201
}
fn default_concentration_t() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_spectrum_grid() -> (f64, f64, usize) {
    (0.8, 1.2, 41)
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    /// Significant digits of every number written.
    #[serde(default = "default_precision")]
    pub precision: usize,
}

fn default_precision() -> usize {
    17
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            directory: None,
            precision: default_precision(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub cutoff: CutoffSpec,
    pub sweep: SweepSpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
    /// SHA-256 of the source text, hex encoded.
    #[serde(skip)]
    pub hash: String,
}

/// Assembled model plus the golden-rule width where it is known.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    pub rank_one: RankOneModel,
    pub assembled: Option<AssembledModel>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        config.base_dir = base_dir.to_path_buf();
        config.hash = hex::encode(Sha256::digest(text.as_bytes()));
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn lambda0(&self) -> f64 {
        match &self.model {
            ModelSpec::SturmLiouville(_) => 1.0,
            ModelSpec::Synthetic(s) => s.lambda0,
        }
    }

    pub fn window(&self) -> (f64, f64) {
        match &self.model {
            ModelSpec::SturmLiouville(m) => (m.window_lo, m.window_hi),
            ModelSpec::Synthetic(s) => (s.window[0], s.window[1]),
        }
    }

    pub fn cutoff(&self) -> Result<CutoffFunction> {
        let c = self.cutoff;
        CutoffFunction::new(c.a, c.a0, c.b0, c.b).map_err(|e| Error::Config(e.to_string()))
    }

    /// Replaces the coupling list and re-validates.
    pub fn with_kappas(mut self, kappas: Vec<f64>) -> Result<Self> {
        self.sweep.kappa = kappas;
        self.validate()?;
        Ok(self)
    }

    pub fn with_t_max(mut self, t_max: f64) -> Result<Self> {
        self.sweep.t_max = Some(t_max);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let c = self.cutoff;
        let lambda0 = self.lambda0();
        if !(c.a < c.a0 && c.a0 < lambda0 && lambda0 < c.b0 && c.b0 < c.b) {
            return bad(format!(
                "cutoff needs a < a0 < lambda0 < b0 < b, got a={} a0={} lambda0={lambda0} b0={} b={}",
                c.a, c.a0, c.b0, c.b
            ));
        }
        let (lo, hi) = self.window();
        if !(lo <= c.a && c.b <= hi) {
            return bad(format!("cutoff support ({}, {}) leaves the model window [{lo}, {hi}]", c.a, c.b));
        }
        let k = &self.sweep.kappa;
        if k.is_empty() || k.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return bad("sweep.kappa must be a non-empty list of positive values".into());
        }
        if k.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("sweep.kappa must be strictly increasing".into());
        }
        if let Some(t) = self.sweep.t_max {
            if !(t > 0.0) || !t.is_finite() {
                return bad(format!("sweep.t_max must be positive, got {t}"));
            }
        }
        if self.sweep.t_points < 2 {
            return bad("sweep.t_points must be at least 2".into());
        }
        let (glo, ghi, gn) = self.sweep.spectrum_grid;
        if !(lo <= glo && glo < ghi && ghi <= hi) || gn < 2 {
            return bad(format!("spectrum_grid ({glo}, {ghi}, {gn}) must be an increasing grid inside the window"));
        }
        if !(1..=17).contains(&self.output.precision) {
            return bad(format!("output.precision must be in 1..=17, got {}", self.output.precision));
        }
        if let ModelSpec::SturmLiouville(m) = &self.model {
            m.validated().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Builds the rank-one model described by the `[model]` section.
    pub fn prepare(&self) -> Result<PreparedModel> {
        match &self.model {
            ModelSpec::SturmLiouville(m) => {
                let assembled = build_rank_one_model(m)?;
                Ok(PreparedModel {
                    rank_one: assembled.rank_one.clone(),
                    assembled: Some(assembled),
                })
            }
            ModelSpec::Synthetic(s) => {
                let measure = s.measure.build(&self.base_dir)?;
                let rank_one = RankOneModel::new(
                    s.lambda0,
                    Complex64::new(s.overlap, 0.0),
                    measure,
                    (s.window[0], s.window[1]),
                    s.alpha,
                )
                .map_err(|e| match e {
                    Error::Value(m) => Error::Config(m),
                    other => other,
                })?;
                Ok(PreparedModel {
                    rank_one,
                    assembled: None,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SL: &str = r#"
[model]
kind = "sturm_liouville"
k = 1.0

[sweep]
kappa = [0.05, 0.1]
"#;

    #[test]
    fn parses_sturm_liouville_with_defaults() {
        let c = ExperimentConfig::from_toml(SL, Path::new(".")).unwrap();
        assert_eq!(c.cutoff, CutoffSpec::default());
        assert_eq!(c.output.precision, 17);
        assert_eq!(c.window(), (0.5, 1.5));
        assert_eq!(c.hash.len(), 64);
        match c.model {
            ModelSpec::SturmLiouville(m) => assert_eq!(m.lambda_max, 1e4),
            _ => panic!("wrong model kind"),
        }
    }

    #[test]
    fn parses_synthetic() {
        let text = r#"
[model]
kind = "synthetic"
lambda0 = 1.0
overlap = 0.8
window = [0.5, 1.5]
measure = { density = { kind = "constant", value = 0.0, lo = -1.0, hi = 3.0 } }

[sweep]
kappa = [0.1]
"#;
        let c = ExperimentConfig::from_toml(text, Path::new(".")).unwrap();
        assert!(c.prepare().is_ok());
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            SL.replace("kappa = [0.05, 0.1]", "kappa = [0.1, 0.05]"),
            SL.replace("kappa = [0.05, 0.1]", "kappa = [-0.1]"),
            SL.replace("k = 1.0", "k = 1.0\nbogus = 2"),
            SL.replace("[sweep]", "[cutoff]\na = 0.55\na0 = 1.1\nb0 = 1.3\nb = 1.45\n\n[sweep]"),
            SL.replace("[sweep]", "[cutoff]\na = 0.3\na0 = 0.7\nb0 = 1.3\nb = 1.45\n\n[sweep]"),
            "[model]\nkind = \"nope\"\n[sweep]\nkappa = [0.1]".to_string(),
        ] {
            let r = ExperimentConfig::from_toml(&bad, Path::new("."));
            assert!(matches!(r, Err(Error::Config(_))), "{bad}: {r:?}");
        }
    }
}
