//! The versioned device catalog file.
//!
//! The catalog is a TOML document; the schema is documented at the top of
//! `data/catalog.toml`, which is also compiled in as [`Catalog::builtin`].

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::device::DeviceSpec;
use crate::types::Mhz;
use crate::CoreError;

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default catalog path.
pub const CATALOG_ENV: &str = "DVFS_CATALOG";

const BUILTIN: &str = include_str!("../data/catalog.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub schema_version: u32,
    #[serde(rename = "device", default)]
    pub devices: Vec<DeviceSpec>,
}

impl Catalog {
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN).expect("bundled catalog is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CoreError> {
        let catalog: Catalog = toml::from_str(text).map_err(|e| CoreError::Catalog(e.to_string()))?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn load(path: &Path) -> Result<Self, CoreError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CoreError::Catalog(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("catalog serializes")
    }

    fn validate(&self) -> Result<(), CoreError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CoreError::Catalog(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let mut keys = HashSet::new();
        for d in &self.devices {
            d.validate()?;
            if !keys.insert(d.key.to_ascii_lowercase()) {
                return Err(CoreError::Catalog(format!("duplicate device key {:?}", d.key)));
            }
        }
        Ok(())
    }

    /// Looks a device up by key or display name, ignoring case.
    pub fn device(&self, name: &str) -> Result<&DeviceSpec, CoreError> {
        self.devices
            .iter()
            .find(|d| d.key.eq_ignore_ascii_case(name) || d.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| CoreError::UnknownDevice(name.to_string()))
    }

    /// Grid generation outcome for every device, in catalog order.
    pub fn grid_report(&self) -> Vec<(&DeviceSpec, Result<Vec<Mhz>, CoreError>)> {
        self.devices.iter().map(|d| (d, d.allowed_frequencies())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Precision;

    #[test]
    fn builtin_catalog_loads() {
        let c = Catalog::builtin();
        assert_eq!(c.devices.len(), 5);
        let v100 = c.device("tesla v100").unwrap();
        assert_eq!(v100.mean_optimal.get(Precision::Fp32), Some(Mhz(945.0)));
        assert_eq!(c.device("jetson-nano").unwrap().mean_optimal.get(Precision::Fp16), Some(Mhz(460.8)));
        assert!(c.device("jetson-nano").unwrap().high_error);
        assert!(c.device("p4").unwrap().mean_optimal.get(Precision::Fp16).is_none());
        assert!(matches!(c.device("h100"), Err(CoreError::UnknownDevice(_))));
    }

    #[test]
    fn grid_outcomes_per_device() {
        let c = Catalog::builtin();
        for (d, grid) in c.grid_report() {
            match d.key.as_str() {
                "v100" | "titan-v" | "jetson-nano" => {
                    let g = grid.unwrap();
                    assert!(g[0].same_as(d.f_max) && g.last().unwrap().same_as(d.f_min));
                }
                "p4" | "titan-xp" => assert!(matches!(grid, Err(CoreError::GridMismatch { .. }))),
                other => panic!("unexpected device {other}"),
            }
        }
    }

    #[test]
    fn catalogued_mean_optima_lie_on_generated_grids() {
        let c = Catalog::builtin();
        for key in ["v100", "titan-v", "jetson-nano"] {
            let d = c.device(key).unwrap();
            for p in [Precision::Fp16, Precision::Fp32, Precision::Fp64] {
                if let Some(f) = d.mean_optimal.get(p) {
                    assert!(d.is_on_grid(f).unwrap(), "{key} {p} {f}");
                }
            }
        }
    }

    #[test]
    fn toml_round_trip() {
        let c = Catalog::builtin();
        assert_eq!(Catalog::from_toml_str(&c.to_toml_string()).unwrap(), c);
    }

    #[test]
    fn rejects_wrong_schema_and_duplicates() {
        let text = "schema_version = 2\n";
        assert!(Catalog::from_toml_str(text).is_err());
        let dup = r#"
schema_version = 1
[[device]]
key = "a"
name = "A"
f_max_mhz = 10
f_min_mhz = 5
step_pattern_mhz = [5]
boost_clock_mhz = 10
mem_bytes = 1
[[device]]
key = "A"
name = "A2"
f_max_mhz = 10
f_min_mhz = 5
step_pattern_mhz = [5]
boost_clock_mhz = 10
mem_bytes = 1
"#;
        assert!(Catalog::from_toml_str(dup).is_err());
    }
}
