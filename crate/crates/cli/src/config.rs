//! Run configuration: a single JSON document, overridable from flags.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use quench_core::bounds::BoundsOptions;
use quench_core::dynamics::TimeConfig;
use quench_core::steady::ContinuationOptions;
use quench_core::{build_mesh, Geometry, Mesh, Profile};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant { c: f64 },
    Power { exponent: f64 },
    SlabSinPiecewise,
    Tabulated { nodes: Vec<f64>, values: Vec<f64> },
    /// Two-column `coordinate, value` file.
    Csv { path: PathBuf },
}

impl ProfileSpec {
    /// Parses `--profile` values: `slab_sin_piecewise`, `constant[:c]`,
    /// `power:<exponent>` or `csv:<path>`.
    pub fn from_flag(name: &str) -> Result<Self, Failure> {
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let number = |a: Option<&str>, default: Option<f64>| -> Result<f64, Failure> {
            match a {
                Some(a) => a
                    .parse()
                    .map_err(|_| Failure::Config(format!("profile {name:?}: {a:?} is not a number"))),
                None => default.ok_or_else(|| Failure::Config(format!("profile {name:?} needs a parameter"))),
            }
        };
        Ok(match head {
            "slab_sin_piecewise" => ProfileSpec::SlabSinPiecewise,
            "constant" => ProfileSpec::Constant { c: number(arg, Some(1.0))? },
            "power" => ProfileSpec::Power { exponent: number(arg, None)? },
            "csv" => ProfileSpec::Csv {
                path: PathBuf::from(arg.ok_or_else(|| Failure::Config("profile csv needs a path".into()))?),
            },
            _ => return Err(Failure::Config(format!("unknown profile {name:?}"))),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RescaleOptions {
    /// Output directory of an earlier `simulate` run.
    pub run_dir: Option<PathBuf>,
    /// Defaults to the first point of the run's quench set.
    pub center: Option<f64>,
    /// Defaults to the run's extrapolated quenching time.
    pub quench_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub node_count: usize,
    pub profile: ProfileSpec,
    /// Overrides the profile's declared Hölder exponent.
    pub holder_exponent: Option<f64>,
    pub lambda: Option<f64>,
    pub lambda_grid: Vec<f64>,
    /// Grid points given as multiples of the computed `λ*`.
    pub lambda_ratios: Vec<f64>,
    pub time: TimeConfig,
    pub continuation: ContinuationOptions,
    pub bounds: BoundsOptions,
    pub output_dir: PathBuf,
    pub rescale: RescaleOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry::Slab { x_left: -0.5, x_right: 0.5 },
            node_count: 2001,
            profile: ProfileSpec::SlabSinPiecewise,
            holder_exponent: None,
            lambda: None,
            lambda_grid: Vec::new(),
            lambda_ratios: Vec::new(),
            time: TimeConfig::default(),
            continuation: ContinuationOptions::default(),
            bounds: BoundsOptions::default(),
            output_dir: PathBuf::from("out"),
            rescale: RescaleOptions::default(),
        }
    }
}

/// Flag values that replace individual configuration keys.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub lambda: Option<f64>,
    pub node_count: Option<usize>,
    pub profile: Option<String>,
    pub quench_eps: Option<f64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, Failure> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::Missing(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(dir) = &overrides.output_dir {
            cfg.output_dir = dir.clone();
        }
        if let Some(l) = overrides.lambda {
            cfg.lambda = Some(l);
        }
        if let Some(n) = overrides.node_count {
            cfg.node_count = n;
        }
        if let Some(name) = &overrides.profile {
            cfg.profile = ProfileSpec::from_flag(name)?;
        }
        if let Some(eps) = overrides.quench_eps {
            cfg.time.quench_eps = eps;
        }
        Ok(cfg)
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<(), Failure> {
        self.geometry.validate().map_err(config)?;
        if self.node_count < 3 {
            return Err(Failure::Config(format!("node_count must be >= 3, got {}", self.node_count)));
        }
        self.time.validate().map_err(config)?;
        if let Some(l) = self.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Failure::Config(format!("lambda must be finite and >= 0, got {l}")));
            }
        }
        for &l in self.lambda_grid.iter().chain(&self.lambda_ratios) {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Failure::Config(format!("grid values must be finite and positive, got {l}")));
            }
        }
        let profile = self.profile()?;
        profile.check_geometry(&self.geometry).map_err(config)?;
        Ok(())
    }

    pub fn profile(&self) -> Result<Profile, Failure> {
        let profile = match &self.profile {
            ProfileSpec::Constant { c } => Profile::constant(*c),
            ProfileSpec::Power { exponent } => Profile::power(*exponent),
            ProfileSpec::SlabSinPiecewise => Ok(Profile::slab_sin_piecewise()),
            ProfileSpec::Tabulated { nodes, values } => Profile::tabulated(nodes.clone(), values.clone()),
            ProfileSpec::Csv { path } => {
                if !path.exists() {
                    return Err(Failure::Missing(format!("profile file {} not found", path.display())));
                }
                Profile::from_csv(path)
            }
        }
        .map_err(config)?;
        match self.holder_exponent {
            Some(alpha) => profile.with_holder_exponent(alpha).map_err(config),
            None => Ok(profile),
        }
    }

    pub fn mesh(&self) -> Result<Arc<Mesh>, Failure> {
        build_mesh(self.geometry, self.node_count).map_err(config)
    }

    /// Keys a given subcommand cannot run without.
    pub fn validate_for(&self, command: &str) -> Result<(), Failure> {
        match command {
            "simulate" | "bounds" => self.require_lambda().map(|_| ()),
            "sweep" if self.lambda_grid.is_empty() && self.lambda_ratios.is_empty() => {
                Err(Failure::Config("sweep needs a nonempty lambda_grid or lambda_ratios".into()))
            }
            "rescale" if self.rescale.run_dir.is_none() => Err(Failure::Config("rescale needs rescale.run_dir".into())),
            _ => Ok(()),
        }
    }

    pub fn require_lambda(&self) -> Result<f64, Failure> {
        self.lambda
            .ok_or_else(|| Failure::Config("this command needs lambda (config key or --lambda)".into()))
    }
}

fn config(e: quench_core::Error) -> Failure {
    Failure::Config(e.to_string())
}
