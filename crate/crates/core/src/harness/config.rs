use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::GaParams;
use crate::network::{NetworkParams, SfdnmNetwork};
use crate::orbit::{walker_star, Constellation, PhysicalConstants};
use crate::scheduler::SchedulerParams;
use crate::traffic::TrafficParams;
use crate::zone::ZoneGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstellationConfig {
    pub altitudes_km: Vec<f64>,
    pub satellites_per_orbit: Vec<usize>,
    pub inclination_deg: f64,
    /// RAAN spread across all orbits; 180° for a Walker-star layout.
    pub raan_spread_deg: f64,
    pub inter_plane_phase_deg: f64,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        Self {
            altitudes_km: vec![200.0, 300.0, 400.0, 500.0, 600.0, 200.0, 300.0, 400.0, 500.0, 600.0],
            satellites_per_orbit: vec![10, 12, 10, 12, 10, 12, 10, 12, 10, 12],
            inclination_deg: 90.0,
            raan_spread_deg: 180.0,
            inter_plane_phase_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub lon_divisions: u32,
    pub lat_divisions: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lon_divisions: 20,
            lat_divisions: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub duration_s: f64,
    pub seed: u64,
    /// Number of seeds per sweep point, starting at `seed`.
    pub seeds: usize,
    /// Subtasks created before this fraction of the run are not measured.
    pub warmup_fraction: f64,
    /// Association is indexed up to `duration_s + index_margin_s`.
    pub index_margin_s: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            duration_s: 600.0,
            seed: 1,
            seeds: 5,
            warmup_fraction: 0.1,
            index_margin_s: 900.0,
        }
    }
}

/// Everything one scenario needs. Defaults reproduce the reference setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub constants: PhysicalConstants,
    pub constellation: ConstellationConfig,
    pub grid: GridConfig,
    pub network: NetworkParams,
    pub traffic: TrafficParams,
    pub scheduler: SchedulerParams,
    pub ga: GaParams,
    pub run: RunConfig,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::config("<file>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config { field, message } => Error::Config {
                field: format!("{}: {field}", path.display()),
                message,
            },
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<serialize>", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        let c = &self.constellation;
        if c.altitudes_km.is_empty() || c.altitudes_km.len() != c.satellites_per_orbit.len() {
            return Err(Error::config(
                "constellation",
                "altitudes_km and satellites_per_orbit must be non-empty and equally long",
            ));
        }
        if c.altitudes_km.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::config("constellation.altitudes_km", "altitudes must be > 0"));
        }
        if c.satellites_per_orbit.contains(&0) {
            return Err(Error::config("constellation.satellites_per_orbit", "counts must be >= 1"));
        }
        if self.grid.lon_divisions == 0 || self.grid.lat_divisions == 0 {
            return Err(Error::config("grid", "divisions must be >= 1"));
        }
        self.network.validate()?;
        if !(self.traffic.lambda_per_vn > 0.0 && self.traffic.lambda_per_vn.is_finite()) {
            return Err(Error::config("traffic.lambda_per_vn", "must be > 0"));
        }
        self.scheduler.validate()?;
        self.ga.validate()?;
        let r = &self.run;
        if !(r.duration_s >= 0.0 && r.duration_s.is_finite()) {
            return Err(Error::config("run.duration_s", "must be finite and >= 0"));
        }
        if !(0.0..1.0).contains(&r.warmup_fraction) {
            return Err(Error::config("run.warmup_fraction", "must be in [0, 1)"));
        }
        if r.seeds == 0 {
            return Err(Error::config("run.seeds", "must be >= 1"));
        }
        if !(r.index_margin_s > 0.0 && r.index_margin_s.is_finite()) {
            return Err(Error::config("run.index_margin_s", "must be finite and > 0"));
        }
        Ok(())
    }

    /// Sets one field addressed by a dotted path, e.g. `network.compute_gflops`
    /// or `traffic.volume_gb.mean`.
    pub fn set(&mut self, path: &str, value: f64) -> Result<()> {
        let mut root = toml::Value::try_from(&*self).map_err(|e| Error::config(path, e.to_string()))?;
        let unknown = || Error::config(path, "unknown parameter path");
        let parts: Vec<&str> = path.split('.').collect();
        let (leaf, parents) = parts.split_last().ok_or_else(unknown)?;
        let mut node = &mut root;
        for part in parents {
            node = node.as_table_mut().and_then(|t| t.get_mut(*part)).ok_or_else(unknown)?;
        }
        let slot = node.as_table_mut().and_then(|t| t.get_mut(*leaf)).ok_or_else(unknown)?;
        *slot = match slot {
            toml::Value::Integer(_) if value.fract() == 0.0 => toml::Value::Integer(value as i64),
            toml::Value::Integer(_) => return Err(Error::config(path, "expects an integer")),
            toml::Value::Float(_) => toml::Value::Float(value),
            _ => return Err(Error::config(path, "not a numeric field")),
        };
        let updated: ScenarioConfig = root.try_into().map_err(|e: toml::de::Error| Error::config(path, e.to_string()))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }

    pub fn constellation(&self) -> Result<Constellation> {
        let c = &self.constellation;
        let altitudes: Vec<f64> = c.altitudes_km.iter().map(|a| a * 1e3).collect();
        let orbits = walker_star(
            &altitudes,
            &c.satellites_per_orbit,
            c.inclination_deg.to_radians(),
            c.raan_spread_deg.to_radians(),
            c.inter_plane_phase_deg.to_radians(),
        )?;
        Constellation::new(orbits, self.constants)
    }

    pub fn grid(&self) -> Result<ZoneGrid> {
        ZoneGrid::new(self.grid.lon_divisions, self.grid.lat_divisions)
    }

    pub fn network(&self) -> Result<SfdnmNetwork> {
        SfdnmNetwork::new(
            self.constellation()?,
            self.grid()?,
            self.network.clone(),
            self.run.duration_s + self.run.index_margin_s,
        )
    }
}
