//! Run configuration: an optional JSON file, overridden flag by flag.
//!
//! ```json
//! {
//!   "profile": {"family": "compact_polynomial", "params": {"amplitude": 1, "e_max": 1, "order": 4}},
//!   "data": {"spatial": {"kind": "gaussian", "width": 1}, "amplitude": 1, "zero_average": false},
//!   "k": {"min": 0.1, "max": 0.9, "num": 9},
//!   "t": {"max": 50, "num": 501},
//!   "tol": 1e-4,
//!   "out": "run.csv",
//!   "tolerances": {"green.oracle": 1e-4}
//! }
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use vpspec::equilibria::{survival_threshold, validate_profile, EquilibriumProfile};
use vpspec::field::{InitialData, SpatialProfile};

use crate::error::{CliError, CliResult};

/// Equilibrium declaration, `{"family": ..., "params": {...}}`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Gaussian { amplitude: f64, beta: f64 },
    CompactPolynomial { amplitude: f64, e_max: f64, order: i32 },
    PowerLaw { amplitude: f64, order: i32 },
}

impl ProfileSpec {
    pub fn build(self) -> EquilibriumProfile {
        match self {
            ProfileSpec::Gaussian { amplitude, beta } => EquilibriumProfile::gaussian(amplitude, beta),
            ProfileSpec::CompactPolynomial { amplitude, e_max, order } => EquilibriumProfile::compact(amplitude, e_max, order),
            ProfileSpec::PowerLaw { amplitude, order } => EquilibriumProfile::power_law(amplitude, order),
        }
    }
}

/// Built-in profiles selectable with `--profile`.
pub const BUILTIN_PROFILES: [&str; 3] = ["compact", "maxwellian", "power-law"];

pub fn builtin_profile(name: &str) -> CliResult<EquilibriumProfile> {
    match name {
        "compact" => Ok(EquilibriumProfile::compact_default()),
        "maxwellian" => Ok(EquilibriumProfile::maxwellian()),
        "power-law" => Ok(EquilibriumProfile::power_law(1.0, 6)),
        _ => Err(CliError::Usage(format!(
            "unknown profile `{name}` (expected one of {})",
            BUILTIN_PROFILES.join(", ")
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpatialSpec {
    Gaussian { width: f64 },
    CompactBump { radius: f64, order: u32 },
}

fn one() -> f64 {
    1.0
}

/// Initial perturbation; `velocity` defaults to the equilibrium itself.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub spatial: SpatialSpec,
    #[serde(default)]
    pub velocity: Option<ProfileSpec>,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub zero_average: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGridSpec {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub num: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGridSpec {
    pub max: Option<f64>,
    pub num: Option<usize>,
}

/// Contents of a `--config` file; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub profile: Option<ProfileSpec>,
    pub data: Option<DataSpec>,
    #[serde(default)]
    pub k: KGridSpec,
    #[serde(default)]
    pub t: TGridSpec,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed config {}: {e}", path.display())))
    }
}

/// Flags shared by every subcommand; each one overrides the file value.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON configuration file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output path (stdout when absent)
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Built-in profile: compact, maxwellian or power-law
    #[arg(long, global = true, value_name = "NAME")]
    pub profile: Option<String>,
    #[arg(long, global = true)]
    pub kmin: Option<f64>,
    #[arg(long, global = true)]
    pub kmax: Option<f64>,
    #[arg(long, global = true)]
    pub knum: Option<usize>,
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    #[arg(long, global = true)]
    pub tnum: Option<usize>,
    /// Tolerance used to flag rows; for `verify`, replaces every tolerance
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,
}

/// Merged and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub profile: EquilibriumProfile,
    pub data: InitialData,
    pub k: KGridSpec,
    pub t: TGridSpec,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub tolerances: BTreeMap<String, f64>,
}

/// `num` points from `min` to `max`, inclusive.
pub fn linspace(min: f64, max: f64, num: usize) -> Vec<f64> {
    if num == 1 {
        return vec![min];
    }
    (0..num).map(|i| min + (max - min) * i as f64 / (num - 1) as f64).collect()
}

impl RunConfig {
    pub fn resolve(flags: &Overrides) -> CliResult<Self> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let profile = match (&flags.profile, file.profile) {
            (Some(name), _) => builtin_profile(name)?,
            (None, Some(spec)) => spec.build(),
            (None, None) => EquilibriumProfile::compact_default(),
        };
        let data = match file.data {
            Some(d) => {
                let spatial = match d.spatial {
                    SpatialSpec::Gaussian { width } => SpatialProfile::Gaussian { width },
                    SpatialSpec::CompactBump { radius, order } => SpatialProfile::CompactBump { radius, order },
                };
                if !(spatial.scale() > 0.0) || !d.amplitude.is_finite() {
                    return Err(CliError::Validation("data needs a positive spatial scale and a finite amplitude".into()));
                }
                let velocity = d.velocity.map(ProfileSpec::build).unwrap_or(profile);
                let mut data = InitialData::new(spatial, velocity).with_amplitude(d.amplitude);
                if d.zero_average {
                    data = data.with_zero_average();
                }
                data
            }
            None => InitialData::new(SpatialProfile::Gaussian { width: 1.0 }, profile),
        };
        let k = KGridSpec {
            min: flags.kmin.or(file.k.min),
            max: flags.kmax.or(file.k.max),
            num: flags.knum.or(file.k.num),
        };
        let t = TGridSpec { max: flags.tmax.or(file.t.max), num: flags.tnum.or(file.t.num) };
        let tol = flags.tol.or(file.tol);
        if let Some(x) = tol {
            if !(x > 0.0 && x.is_finite()) {
                return Err(CliError::Validation(format!("tolerance must be positive, got {x}")));
            }
        }
        for (name, x) in &file.tolerances {
            if !(*x > 0.0 && x.is_finite()) {
                return Err(CliError::Validation(format!("tolerance `{name}` must be positive, got {x}")));
            }
        }
        Ok(RunConfig { profile, data, k, t, tol, out: flags.out.clone().or(file.out), tolerances: file.tolerances })
    }

    /// Rejects profiles that break the standing assumptions.
    pub fn checked_profile(&self) -> CliResult<EquilibriumProfile> {
        let report = validate_profile(&self.profile);
        if report.passed() {
            Ok(self.profile)
        } else {
            let list: Vec<&str> = report.violations.iter().map(|v| v.message()).collect();
            Err(CliError::Validation(format!("profile rejected: {}", list.join("; "))))
        }
    }

    pub fn kappa0(&self) -> f64 {
        survival_threshold(&self.profile)
    }

    /// The k-grid with per-command defaults filled in.
    pub fn k_grid(&self, min: f64, max: f64, num: usize) -> CliResult<Vec<f64>> {
        let min = self.k.min.unwrap_or(min);
        let max = self.k.max.unwrap_or(max);
        let num = self.k.num.unwrap_or(num);
        if num == 0 {
            return Err(CliError::Usage("empty k-grid (knum = 0)".into()));
        }
        if !(min.is_finite() && max.is_finite()) || min <= 0.0 {
            return Err(CliError::Usage(format!("k-grid needs finite kmin > 0, got [{min}, {max}]")));
        }
        if num > 1 && !(max > min) {
            return Err(CliError::Usage(format!("empty k-grid: kmax = {max} is not above kmin = {min}")));
        }
        Ok(linspace(min, max, num))
    }

    /// `(t_max, points)` with defaults filled in.
    pub fn t_grid(&self, t_max: f64, num: usize) -> CliResult<(f64, usize)> {
        let t_max = self.t.max.unwrap_or(t_max);
        let num = self.t.num.unwrap_or(num);
        if num < 2 || !(t_max > 0.0 && t_max.is_finite()) {
            return Err(CliError::Usage(format!("t-grid needs tmax > 0 and tnum ≥ 2, got tmax = {t_max}, tnum = {num}")));
        }
        Ok((t_max, num))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_schema() {
        let text = r#"{
            "profile": {"family": "compact_polynomial", "params": {"amplitude": 1, "e_max": 1, "order": 4}},
            "data": {"spatial": {"kind": "compact_bump", "radius": 2, "order": 4}},
            "k": {"min": 0.1, "max": 0.9, "num": 9},
            "t": {"max": 50, "num": 501},
            "tolerances": {"green.oracle": 1e-4}
        }"#;
        let cfg: FileConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.profile.unwrap().build(), EquilibriumProfile::compact_default());
        assert_eq!(cfg.data.unwrap().amplitude, 1.0);
        assert_eq!(cfg.k.num, Some(9));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"kgrid": {}}"#).is_err());
    }

    #[test]
    fn flags_override_file() {
        let flags = Overrides { kmin: Some(0.3), profile: Some("maxwellian".into()), ..Default::default() };
        let cfg = RunConfig::resolve(&flags).unwrap();
        assert_eq!(cfg.profile, EquilibriumProfile::maxwellian());
        assert_eq!(cfg.k_grid(0.1, 0.5, 3).unwrap(), vec![0.3, 0.4, 0.5]);
    }

    #[test]
    fn grid_validation() {
        let cfg = RunConfig::resolve(&Overrides::default()).unwrap();
        assert!(matches!(cfg.k_grid(0.5, 0.1, 3), Err(CliError::Usage(_))));
        assert!(matches!(cfg.k_grid(0.1, 0.5, 0), Err(CliError::Usage(_))));
        assert_eq!(cfg.k_grid(0.2, 0.2, 1).unwrap(), vec![0.2]);
        assert!(cfg.t_grid(10.0, 1).is_err());
    }
}
