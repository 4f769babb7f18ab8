//! Flat TOML run configuration.
//!
//! Every key is optional; missing keys take the standard scenario values
//! (7 cells, 4 users, 500 drops, 10 dB SNRs, ...). Command-line flags are
//! applied by overwriting fields of a parsed [`RunConfig`] before calling
//! [`RunConfig::resolve`]. [`RunConfig::filled`] produces the fully
//! explicit form written to run manifests, so a manifest reproduces its run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assignment::PaMethod;
use crate::error::{Error, Result};
use crate::harness::{CampaignConfig, PowerControlPlan, TargetPolicy};
use crate::link::{db_to_linear, linear_to_db, ScenarioConfig};
use crate::power::{PcMode, Targets};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub users: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antennas: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drops: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pa: Option<Vec<String>>,
    /// `off`, `gradual` or `tracking`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_control: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_sinr_dl_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_sinr_ul_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_rate_dl_bps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_rate_ul_bps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pc_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ccdf_grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell_radius_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclusion_radius_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_distance_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherence_symbols: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_ul: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_dl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pathloss_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shadow_sigma_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_pilot_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_ul_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_dl_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_power: Option<f64>,
}

/// Reads a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, path)
}

/// Parses config text; `path` is only used in error messages.
pub fn parse_config_str(text: &str, path: &Path) -> Result<RunConfig> {
    toml::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.message().to_string(),
    })
}

fn parse_mode(s: &str) -> Result<Option<PcMode>> {
    match s.to_ascii_lowercase().as_str() {
        "off" | "none" => Ok(None),
        "gradual" => Ok(Some(PcMode::GradualRemoval)),
        "tracking" => Ok(Some(PcMode::TargetTracking)),
        _ => Err(Error::config(
            "power_control",
            format!("expected off, gradual or tracking, got `{s}`"),
        )),
    }
}

impl RunConfig {
    /// Copy with every defaulted key made explicit. Target keys stay unset
    /// when not given, since their absence selects the preset targets.
    pub fn filled(&self) -> Self {
        let s = ScenarioConfig::default();
        let c = CampaignConfig::default();
        Self {
            num_cells: self.num_cells.or(Some(s.num_cells)),
            users: self.users.or(Some(s.users)),
            antennas: self.antennas.clone().or(Some(c.antennas)),
            drops: self.drops.or(Some(c.drops)),
            pa: self
                .pa
                .clone()
                .or_else(|| Some(c.methods.iter().map(|m| m.name().to_string()).collect())),
            power_control: self.power_control.clone().or_else(|| Some("off".into())),
            target_sinr_dl_db: self.target_sinr_dl_db,
            target_sinr_ul_db: self.target_sinr_ul_db,
            target_rate_dl_bps: self.target_rate_dl_bps,
            target_rate_ul_bps: self.target_rate_ul_bps,
            pc_iterations: self.pc_iterations.or(Some(crate::power::DEFAULT_ITERATIONS)),
            rounds: self.rounds.or(Some(c.rounds)),
            seed: self.seed.or(Some(c.master_seed)),
            workers: self.workers.or(Some(c.workers)),
            ccdf_grid: self.ccdf_grid.or(Some(c.ccdf_grid)),
            cell_radius_m: self.cell_radius_m.or(Some(s.cell_radius_m)),
            exclusion_radius_m: self.exclusion_radius_m.or(Some(s.exclusion_radius_m)),
            reference_distance_m: self.reference_distance_m.or(Some(s.reference_distance_m)),
            bandwidth_hz: self.bandwidth_hz.or(Some(s.bandwidth_hz)),
            coherence_symbols: self.coherence_symbols.or(Some(s.coherence_symbols)),
            xi_ul: self.xi_ul.or(Some(s.xi_ul)),
            xi_dl: self.xi_dl.or(Some(s.xi_dl)),
            pathloss_exponent: self.pathloss_exponent.or(Some(s.pathloss_exponent)),
            shadow_sigma_db: self.shadow_sigma_db.or(Some(s.shadow_sigma_db)),
            snr_pilot_db: self.snr_pilot_db.or(Some(linear_to_db(s.pilot_power))),
            snr_ul_db: self.snr_ul_db.or(Some(linear_to_db(s.ul_power))),
            snr_dl_db: self.snr_dl_db.or(Some(linear_to_db(s.dl_power))),
            noise_power: self.noise_power.or(Some(s.noise_power)),
        }
    }

    fn targets(&self) -> Result<Option<Targets>> {
        let sinr = (self.target_sinr_dl_db, self.target_sinr_ul_db);
        let rate = (self.target_rate_dl_bps, self.target_rate_ul_bps);
        let any_sinr = sinr.0.is_some() || sinr.1.is_some();
        let any_rate = rate.0.is_some() || rate.1.is_some();
        if any_sinr && any_rate {
            return Err(Error::config(
                "target_rate_dl_bps",
                "give either SINR targets or rate targets, not both",
            ));
        }
        if any_sinr {
            return match sinr {
                (Some(dl), Some(ul)) => Ok(Some(Targets::sinr_db(dl, ul))),
                (None, _) => Err(Error::config("target_sinr_dl_db", "missing; both links need a target")),
                (_, None) => Err(Error::config("target_sinr_ul_db", "missing; both links need a target")),
            };
        }
        if any_rate {
            return match rate {
                (Some(dl), Some(ul)) => Ok(Some(Targets::Rate { dl, ul })),
                (None, _) => Err(Error::config("target_rate_dl_bps", "missing; both links need a target")),
                (_, None) => Err(Error::config("target_rate_ul_bps", "missing; both links need a target")),
            };
        }
        Ok(None)
    }

    /// Validated campaign described by this config.
    pub fn resolve(&self) -> Result<CampaignConfig> {
        let f = self.filled();
        // `filled` sets every key used below
        let scenario = ScenarioConfig {
            num_cells: f.num_cells.unwrap(),
            users: f.users.unwrap(),
            antennas: f.antennas.as_ref().unwrap().first().copied().unwrap_or(1),
            coherence_symbols: f.coherence_symbols.unwrap(),
            xi_ul: f.xi_ul.unwrap(),
            xi_dl: f.xi_dl.unwrap(),
            bandwidth_hz: f.bandwidth_hz.unwrap(),
            noise_power: f.noise_power.unwrap(),
            pilot_power: db_to_linear(f.snr_pilot_db.unwrap()),
            ul_power: db_to_linear(f.snr_ul_db.unwrap()),
            dl_power: db_to_linear(f.snr_dl_db.unwrap()),
            pathloss_exponent: f.pathloss_exponent.unwrap(),
            shadow_sigma_db: f.shadow_sigma_db.unwrap(),
            cell_radius_m: f.cell_radius_m.unwrap(),
            exclusion_radius_m: f.exclusion_radius_m.unwrap(),
            reference_distance_m: f.reference_distance_m.unwrap(),
        };
        let methods = f
            .pa
            .as_ref()
            .unwrap()
            .iter()
            .map(|s| s.parse::<PaMethod>())
            .collect::<Result<Vec<_>>>()?;
        let targets = f.targets()?;
        let power_control = parse_mode(f.power_control.as_deref().unwrap())?.map(|mode| {
            PowerControlPlan {
                mode,
                iterations: f.pc_iterations.unwrap(),
                targets: targets.map_or(TargetPolicy::Preset, TargetPolicy::Fixed),
            }
        });
        if power_control.is_some_and(|p| p.iterations == 0) {
            return Err(Error::config("pc_iterations", "must be at least 1"));
        }
        let campaign = CampaignConfig {
            scenario,
            antennas: f.antennas.unwrap(),
            methods,
            power_control,
            drops: f.drops.unwrap(),
            master_seed: f.seed.unwrap(),
            rounds: f.rounds.unwrap(),
            workers: f.workers.unwrap(),
            ccdf_grid: f.ccdf_grid.unwrap(),
        };
        campaign.validate()?;
        Ok(campaign)
    }

    /// TOML text of this config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }
}
