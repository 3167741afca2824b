//! Scenario configuration: a TOML file mirroring the simulation knobs.
//! Unknown keys are rejected; omitted keys fall back to the documented
//! defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::clustering::ClusterInit;
use crate::energy::EnergyParams;
use crate::environment::{CityParams, Region};
use crate::error::{Error, Result};
use crate::mobility::MobilityParams;
use crate::sim::Algorithm;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegionConfig {
    pub width_m: f64,
    pub height_m: f64,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            width_m: 300.0,
            height_m: 300.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlotConfig {
    /// Slots per macro slot (N).
    pub per_macro: usize,
    /// Slot duration delta_t, seconds.
    pub duration_s: f64,
    /// Number of macro slots to simulate.
    pub macro_slots: usize,
    /// Handover penalty epsilon, seconds.
    pub handover_s: f64,
    /// Relocation deadline t, seconds.
    pub relocation_deadline_s: f64,
}

impl Default for SlotConfig {
    fn default() -> Self {
        Self {
            per_macro: 10,
            duration_s: 1.0,
            macro_slots: 10,
            handover_s: 0.1,
            relocation_deadline_s: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UserConfig {
    pub count: usize,
    pub altitude_m: f64,
    pub max_speed_mps: f64,
    /// Uniform range for the per-user deadline t_k, seconds.
    pub deadline_range_s: [f64; 2],
}

impl Default for UserConfig {
    fn default() -> Self {
        Self {
            count: 400,
            altitude_m: 1.5,
            max_speed_mps: 3.0,
            deadline_range_s: [2.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UavConfig {
    pub count: usize,
    /// Users served at once per UAV (orthogonal frequencies n_m).
    pub capacity: usize,
    /// Uniform range for the fixed per-UAV flight altitude, meters.
    pub altitude_range_m: [f64; 2],
    pub cruise_speed_mps: f64,
}

impl Default for UavConfig {
    fn default() -> Self {
        Self {
            count: 6,
            capacity: 62,
            altitude_range_m: [22.0, 150.0],
            cruise_speed_mps: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusteringConfig {
    /// Centroid convergence tolerance, meters.
    pub tol_m: f64,
    pub max_iterations: usize,
    /// Whether serving a user resets its priority wait.
    pub reset_wait_on_service: bool,
    /// Centroid initialization: fresh random placements (`random`) or a warm
    /// start from the fleet's current positions (`fleet`).
    pub init: ClusterInit,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self {
            tol_m: 0.1,
            max_iterations: 50,
            reset_wait_on_service: true,
            init: ClusterInit::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CityConfig {
    pub cell_size_m: f64,
    pub density: f64,
    pub height_range_m: [f64; 2],
    /// Load the building grid from this file instead of generating it.
    pub file: Option<PathBuf>,
}

impl Default for CityConfig {
    fn default() -> Self {
        let p = CityParams::default();
        Self {
            cell_size_m: p.cell_size_m,
            density: p.density,
            height_range_m: p.height_range_m,
            file: None,
        }
    }
}

impl CityConfig {
    pub fn params(&self) -> CityParams {
        CityParams {
            cell_size_m: self.cell_size_m,
            density: self.density,
            height_range_m: self.height_range_m,
        }
    }
}

/// Full experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub seed: u64,
    pub algorithm: Algorithm,
    /// Sample per-slot fading for realized throughput instead of using the
    /// mean channel gain. Assignment decisions always use the mean gain.
    pub sample_fading: bool,
    pub region: RegionConfig,
    pub slots: SlotConfig,
    pub users: UserConfig,
    pub uavs: UavConfig,
    pub channel: ChannelParams,
    pub energy: EnergyParams,
    pub mobility: MobilityParams,
    pub city: CityConfig,
    pub clustering: ClusteringConfig,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let scenario: Scenario =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", path.display()))
        })?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn region(&self) -> Region {
        Region::new(self.region.width_m, self.region.height_m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.users.count == 0 || self.uavs.count == 0 {
            return Err(Error::Config("user and UAV counts must be positive".into()));
        }
        if self.uavs.capacity == 0 {
            return Err(Error::Config("UAV capacity must be positive".into()));
        }
        if self.slots.per_macro == 0 || self.slots.macro_slots == 0 {
            return Err(Error::Config("slot counts must be positive".into()));
        }
        if !(self.slots.duration_s > self.slots.handover_s && self.slots.handover_s >= 0.0) {
            return Err(Error::Config(
                "slot duration must exceed the handover time, which must be >= 0".into(),
            ));
        }
        if !(self.slots.relocation_deadline_s > 0.0) {
            return Err(Error::Config("relocation deadline must be positive".into()));
        }
        if !(self.region.width_m > 0.0 && self.region.height_m > 0.0) {
            return Err(Error::Config("region dimensions must be positive".into()));
        }
        let [lo, hi] = self.uavs.altitude_range_m;
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::Config("UAV altitude range is invalid".into()));
        }
        let [dlo, dhi] = self.users.deadline_range_s;
        if !(dlo > 0.0 && dhi >= dlo) {
            return Err(Error::Config("user deadline range is invalid".into()));
        }
        if !(self.users.max_speed_mps >= 0.0) {
            return Err(Error::Config("max user speed must be >= 0".into()));
        }
        if !(self.uavs.cruise_speed_mps > 0.0) {
            return Err(Error::Config("UAV cruise speed must be positive".into()));
        }
        if !(self.mobility.step_m > 0.0) {
            return Err(Error::Config("mobility step must be positive".into()));
        }
        if !(self.clustering.tol_m > 0.0) || self.clustering.max_iterations == 0 {
            return Err(Error::Config("clustering controls are invalid".into()));
        }
        self.channel
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.energy
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(0.0..=1.0).contains(&self.city.density) {
            return Err(Error::Config("city density must be in [0, 1]".into()));
        }
        if !(self.city.cell_size_m > 0.0) {
            return Err(Error::Config("city cell size must be positive".into()));
        }
        Ok(())
    }
}

/// Parse a scenario after substituting one dotted config key with a new
/// value, e.g. `apply_override(text, "city.density", "0.4")`. Intermediate
/// tables are created as needed; a path that names no scenario field fails
/// the final (unknown-key-rejecting) parse.
pub fn apply_override(text: &str, param: &str, value: &str) -> Result<Scenario> {
    let mut doc: toml::Value =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let parsed: toml::Value = match value.parse::<toml::Value>() {
        Ok(v) => v,
        Err(_) => toml::Value::String(value.to_string()),
    };

    let mut node = &mut doc;
    let parts: Vec<&str> = param.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("invalid parameter path `{param}`")));
    }
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{part}` in `{param}` is not a table")))?;
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| Error::Config(format!("`{param}` does not address a table entry")))?;
    table.insert(parts[parts.len() - 1].to_string(), parsed);

    let rendered = toml::to_string(&doc).map_err(|e| Error::Config(e.to_string()))?;
    Scenario::from_toml(&rendered)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        Scenario::default().validate().unwrap();
    }

    #[test]
    fn override_sets_nested_and_top_level_keys() {
        let s = apply_override("seed = 1", "users.count", "33").unwrap();
        assert_eq!(s.users.count, 33);
        assert_eq!(s.seed, 1);
        let s = apply_override("", "seed", "9").unwrap();
        assert_eq!(s.seed, 9);
        let s = apply_override("", "city.density", "0.4").unwrap();
        assert_eq!(s.city.density, 0.4);
    }

    #[test]
    fn override_rejects_unknown_paths() {
        assert!(apply_override("", "users.bogus", "1").is_err());
        assert!(apply_override("", "nope", "1").is_err());
    }

    #[test]
    fn partial_toml_fills_defaults() {
        let s = Scenario::from_toml(
            r#"
seed = 7

[users]
count = 40

[uavs]
count = 2
capacity = 25
"#,
        )
        .unwrap();
        assert_eq!(s.seed, 7);
        assert_eq!(s.users.count, 40);
        assert_eq!(s.uavs.count, 2);
        assert_eq!(s.slots.per_macro, 10);
        assert_eq!(s.channel.alpha_db, 69.8);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = Scenario::from_toml("unknown_knob = 3").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = Scenario::from_toml("[users]\nnot_a_field = 1").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(Scenario::from_toml("[slots]\nduration_s = 0.05\nhandover_s = 0.1").is_err());
        assert!(Scenario::from_toml("[users]\ncount = 0").is_err());
        assert!(Scenario::from_toml("[city]\ndensity = 1.5").is_err());
    }

    #[test]
    fn toml_roundtrip() {
        let s = Scenario::default();
        let back = Scenario::from_toml(&s.to_toml()).unwrap();
        assert_eq!(s.seed, back.seed);
        assert_eq!(s.users.count, back.users.count);
        assert_eq!(s.channel, back.channel);
    }
}
