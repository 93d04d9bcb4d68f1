//! Problem description files.
//!
//! ```toml
//! rho = "Re(w) + abs2(z1) + abs2(z2)^2"
//! dim = 3
//!
//! [region]
//! bounds = [-0.2, 0.2]          # one interval for every real axis, or a list of 2N
//! resolution = 3                # or a list of 2N
//! seed = 11
//!
//! [tolerances]                  # any subset
//! stratum_tol = 1e-6
//!
//! [strata]
//! q = 1
//! radius = 0.1                  # optional; center = [[re, im], ...] also optional
//!
//! [system]                      # defining system for `submanifold`
//! functions = ["Re(z1)", "Im(z1)", "Im(w)"]
//! k = 1
//!
//! [parametrization]             # candidate embedding for `submanifold`
//! q = 1
//! components = ["0", "u", "0"]
//! params = [[[0.1, 0.0]], [[0.2, -0.1]]]   # or a [parametrization.grid] table
//!
//! [generators]                  # candidate generators of S_q for `submanifold`
//! functions = ["Re(z1)", "Im(z1)", "Im(w)"]
//! q = 1
//! ```

use std::path::Path;

use serde::Deserialize;
use toml::{Table, Value};

use levi_core::strata::Region;
use levi_core::{Complex64, ToleranceConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub rho: String,
    pub dim: usize,
    pub region: RegionConfig,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    #[serde(default)]
    pub strata: StrataConfig,
    pub system: Option<SystemConfig>,
    pub parametrization: Option<ParametrizationConfig>,
    pub generators: Option<GeneratorsConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec<T> {
    Uniform(T),
    PerAxis(Vec<T>),
}

impl<T: Clone> AxisSpec<T> {
    fn expand(&self, axes: usize, what: &str) -> Result<Vec<T>, CliError> {
        match self {
            AxisSpec::Uniform(v) => Ok(vec![v.clone(); axes]),
            AxisSpec::PerAxis(vs) if vs.len() == axes => Ok(vs.clone()),
            AxisSpec::PerAxis(vs) => Err(CliError::Config(format!(
                "{what} lists {} axes, expected {axes}",
                vs.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub bounds: AxisSpec<[f64; 2]>,
    pub resolution: AxisSpec<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl RegionConfig {
    /// Region over `complex_dim` complex coordinates.
    pub fn build(&self, complex_dim: usize) -> Result<Region, CliError> {
        let axes = 2 * complex_dim;
        let bounds = self
            .bounds
            .expand(axes, "region.bounds")?
            .into_iter()
            .map(|[lo, hi]| (lo, hi))
            .collect();
        let resolution = self.resolution.expand(axes, "region.resolution")?;
        Region::new(bounds, resolution, self.seed).map_err(|e| CliError::Config(format!("region: {e}")))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub eig_zero_tol: Option<f64>,
    pub rank_tol: Option<f64>,
    pub newton_tol: Option<f64>,
    pub newton_max_iter: Option<usize>,
    pub grad_min: Option<f64>,
    pub stratum_tol: Option<f64>,
}

impl ToleranceOverrides {
    pub fn resolve(&self) -> ToleranceConfig {
        let d = ToleranceConfig::default();
        ToleranceConfig {
            eig_zero_tol: self.eig_zero_tol.unwrap_or(d.eig_zero_tol),
            rank_tol: self.rank_tol.unwrap_or(d.rank_tol),
            newton_tol: self.newton_tol.unwrap_or(d.newton_tol),
            newton_max_iter: self.newton_max_iter.unwrap_or(d.newton_max_iter),
            grad_min: self.grad_min.unwrap_or(d.grad_min),
            stratum_tol: self.stratum_tol.unwrap_or(d.stratum_tol),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrataConfig {
    pub q: Option<usize>,
    pub center: Option<Vec<[f64; 2]>>,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub functions: Vec<String>,
    pub k: Option<usize>,
    /// Target complex dimension for the wedge test; defaults to `n − k`.
    pub q: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametrizationConfig {
    pub q: usize,
    pub components: Vec<String>,
    pub params: Option<Vec<Vec<[f64; 2]>>>,
    pub grid: Option<RegionConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorsConfig {
    pub functions: Vec<String>,
    pub q: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Option<Format>,
}

pub fn complex_point(coords: &[[f64; 2]]) -> levi_core::CVector {
    levi_core::CVector::from_iterator(coords.len(), coords.iter().map(|[re, im]| Complex64::new(*re, *im)))
}

/// Applies `key.path=value` overrides; values are read as TOML literals, falling
/// back to a bare string.
pub fn apply_overrides(table: &mut Table, overrides: &[String]) -> Result<(), CliError> {
    for entry in overrides {
        let (path, raw) = entry
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{entry}` is not of the form key=value")))?;
        let value = parse_value(raw.trim());
        let keys: Vec<&str> = path.trim().split('.').collect();
        if keys.iter().any(|k| k.is_empty()) {
            return Err(CliError::Config(format!("override `{entry}` has an empty key")));
        }
        let (last, parents) = keys.split_last().expect("split yields at least one key");
        let mut node = &mut *table;
        for key in parents {
            let child = node
                .entry(key.to_string())
                .or_insert_with(|| Value::Table(Table::new()));
            node = child
                .as_table_mut()
                .ok_or_else(|| CliError::Config(format!("override `{entry}`: `{key}` is not a table")))?;
        }
        node.insert(last.to_string(), value);
    }
    Ok(())
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

pub fn load(path: &Path, overrides: &[String]) -> Result<ProblemConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, overrides)
}

pub fn parse_config(text: &str, overrides: &[String]) -> Result<ProblemConfig, CliError> {
    let mut table: Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
    apply_overrides(&mut table, overrides)?;
    Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        rho = "abs2(z1) + abs2(z2) - 1"
        dim = 2
        [region]
        bounds = [-1.0, 1.0]
        resolution = 3
    "#;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = parse_config(MINIMAL, &[]).unwrap();
        assert_eq!(cfg.dim, 2);
        assert_eq!(cfg.tolerances.resolve(), ToleranceConfig::default());
        let region = cfg.region.build(2).unwrap();
        assert_eq!(region.bounds().len(), 4);
        assert_eq!(region.seed(), 0);
    }

    #[test]
    fn overrides_replace_and_create_keys() {
        let cfg = parse_config(
            MINIMAL,
            &[
                "region.seed=9".into(),
                "tolerances.rank_tol=1e-9".into(),
                "strata.q = 1".into(),
                "rho=abs2(z1) - 1".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.region.seed, 9);
        assert_eq!(cfg.tolerances.rank_tol, Some(1e-9));
        assert_eq!(cfg.strata.q, Some(1));
        assert_eq!(cfg.rho, "abs2(z1) - 1");
    }

    #[test]
    fn per_axis_lists_must_match_dimension() {
        let cfg = parse_config(MINIMAL, &["region.resolution=[2, 3]".into()]).unwrap();
        assert!(matches!(cfg.region.build(2), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_keys_and_bad_overrides_are_rejected() {
        assert!(parse_config(MINIMAL, &["colour=1".into()]).is_err());
        assert!(parse_config(MINIMAL, &["noequals".into()]).is_err());
        assert!(parse_config(MINIMAL, &["rho.x=1".into()]).is_err());
    }
}
