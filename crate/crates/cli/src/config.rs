//! Experiment configuration: a TOML file with nested sections plus
//! command-line flag overrides (flags win).

use std::path::Path;

use serde::Deserialize;

use holderlab::certify::CertifyOptions;
use holderlab::holder::AnisotropyProfile;
use holderlab::{Error, Grid, Result};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub profile: ProfileSection,
    #[serde(default)]
    pub symbol: SymbolSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub certify: CertifySection,
    #[serde(default)]
    pub problem: ProblemSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub extents: Vec<f64>,
    pub points: Vec<usize>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { extents: vec![12.0, 8.0], points: vec![64, 128] }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub gamma: f64,
    /// `(axis, alpha)` pairs, 0-based axes.
    pub smooth: Vec<(usize, f64)>,
    /// `(axis, beta)` pairs.
    pub gained: Vec<(usize, f64)>,
}

impl Default for ProfileSection {
    fn default() -> Self {
        ProfileSection { gamma: 0.5, smooth: vec![(0, 1.0)], gained: vec![(1, 1.0)] }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSection {
    /// Registry string, e.g. `riesz{k=2,l=1}`.
    pub spec: String,
}

impl Default for SymbolSection {
    fn default() -> Self {
        SymbolSection { spec: "riesz{k=2,l=1}".into() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub size: usize,
    pub seed: u64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection { size: 20, seed: 7 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySection {
    pub p: f64,
    pub s: usize,
    pub drift_bound: f64,
    pub annulus_points: usize,
}

impl Default for CertifySection {
    fn default() -> Self {
        CertifySection { p: 2.0, s: 3, drift_bound: 0.05, annulus_points: 20 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub a: f64,
    pub levels: usize,
}

impl Default for ProblemSection {
    fn default() -> Self {
        ProblemSection { a: 1.0, levels: 9 }
    }
}

/// Flag overrides shared by the subcommands; `None` keeps the config value.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// Symbol registry string, e.g. "heat_time_derivative{a=1.0}".
    #[arg(long)]
    pub symbol: Option<String>,
    /// Base Holder exponent gamma in (0, 1).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Boundary-condition coefficient a > 0.
    #[arg(long)]
    pub a: Option<f64>,
    /// Integrability exponent p in (1, 2].
    #[arg(long)]
    pub p: Option<f64>,
    /// Derivative order cap s.
    #[arg(long)]
    pub s: Option<usize>,
    /// Ensemble size.
    #[arg(long)]
    pub ensemble: Option<usize>,
    /// Base random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid points per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub points: Option<Vec<usize>>,
    /// Grid half-extents per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub extents: Option<Vec<f64>>,
}

/// Fully resolved configuration for one run.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub file: FileConfig,
}

pub fn load(path: Option<&Path>, flags: &Overrides) -> Result<Resolved> {
    let mut file = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str::<FileConfig>(&text)
                .map_err(|e| Error::Format(format!("config {}: {e}", p.display())))?
        }
        None => FileConfig::default(),
    };
    if let Some(symbol) = &flags.symbol {
        file.symbol.spec = symbol.clone();
    }
    if let Some(gamma) = flags.gamma {
        file.profile.gamma = gamma;
    }
    if let Some(a) = flags.a {
        file.problem.a = a;
    }
    if let Some(p) = flags.p {
        file.certify.p = p;
    }
    if let Some(s) = flags.s {
        file.certify.s = s;
    }
    if let Some(size) = flags.ensemble {
        file.ensemble.size = size;
    }
    if let Some(seed) = flags.seed {
        file.ensemble.seed = seed;
    }
    if let Some(points) = &flags.points {
        file.grid.points = points.clone();
    }
    if let Some(extents) = &flags.extents {
        file.grid.extents = extents.clone();
    }
    let resolved = Resolved { file };
    resolved.grid()?; // validate early: no artifacts on config errors
    resolved.profile_checked()?;
    Ok(resolved)
}

impl Resolved {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(&self.file.grid.extents, &self.file.grid.points)
    }

    /// The profile, validated against itself (not necessarily the grid:
    /// some subcommands use boundary grids of a different dimension).
    pub fn profile_checked(&self) -> Result<AnisotropyProfile> {
        AnisotropyProfile::new(
            self.file.profile.gamma,
            &self.file.profile.smooth,
            &self.file.profile.gained,
        )
    }

    pub fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            annulus_points: self.file.certify.annulus_points,
            drift_bound: self.file.certify.drift_bound,
            ..CertifyOptions::default()
        }
    }

    /// A plan summary for --dry-run, with sorted keys.
    pub fn plan(&self, subcommand: &str) -> serde_json::Value {
        serde_json::json!({
            "subcommand": subcommand,
            "grid": {
                "extents": self.file.grid.extents,
                "points": self.file.grid.points,
            },
            "profile": {
                "gamma": self.file.profile.gamma,
                "smooth": self.file.profile.smooth,
                "gained": self.file.profile.gained,
            },
            "symbol": self.file.symbol.spec,
            "ensemble": { "size": self.file.ensemble.size, "seed": self.file.ensemble.seed },
            "certify": {
                "p": self.file.certify.p,
                "s": self.file.certify.s,
                "drift_bound": self.file.certify.drift_bound,
                "annulus_points": self.file.certify.annulus_points,
            },
            "problem": { "a": self.file.problem.a, "levels": self.file.problem.levels },
        })
    }
}
