//! Experiment configuration.
//!
//! A config file is a JSON object whose keys are the [`ScenarioConfig`] field
//! names. Every key is optional; missing keys take the defaults of the
//! experiment being run. Unknown keys are rejected. Angles are given in
//! degrees in the file and held in radians in memory.

use serde::{Deserialize, Serialize};

use crate::asymptotics::Aperture;
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::powerctl::UtilityKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    BeamPattern,
    SeLossMap,
    WidthSweep,
    UserDrops,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::BeamPattern => "beam_pattern",
            Experiment::SeLossMap => "se_loss_map",
            Experiment::WidthSweep => "width_sweep",
            Experiment::UserDrops => "user_drops",
        }
    }
}

/// A user direction as written in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionDeg {
    pub azimuth_deg: f64,
    #[serde(default)]
    pub elevation_deg: f64,
}

impl DirectionDeg {
    pub fn to_direction(&self) -> Result<Direction> {
        Direction::from_degrees(self.azimuth_deg, self.elevation_deg)
            .map_err(|e| Error::Config(e.to_string()))
    }
}

/// Either a user count (random or implied directions) or explicit directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UsersSpec {
    Count(usize),
    Directions(Vec<DirectionDeg>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    pub aperture: Aperture,
    /// Element pitches in wavelengths; `0` selects the dense-surface limit.
    pub spacings: Vec<f64>,
    /// Interference-free SNR per squared wavelength, in dB.
    pub reference_snr_db: f64,
    pub users: UsersSpec,
    /// `None` runs all three named utilities.
    pub utility: Option<UtilityKind>,
    pub drops: usize,
    pub seed: u64,
    /// Number of grid points per swept axis.
    pub angle_grid: usize,
}

impl PartialEq for ScenarioConfig {
    fn eq(&self, other: &Self) -> bool {
        let same_utility = match (&self.utility, &other.utility) {
            (None, None) => true,
            (Some(a), Some(b)) => a.name() == b.name() && !matches!(a, UtilityKind::Custom(_)),
            _ => false,
        };
        self.experiment == other.experiment
            && self.aperture == other.aperture
            && self.spacings == other.spacings
            && self.reference_snr_db == other.reference_snr_db
            && self.users == other.users
            && same_utility
            && self.drops == other.drops
            && self.seed == other.seed
            && self.angle_grid == other.angle_grid
    }
}

pub const DEFAULT_SEED: u64 = 0x4c49_535f_5345_4544;

/// Partial config as read from a file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: Option<Experiment>,
    aperture: Option<Aperture>,
    spacings: Option<Vec<f64>>,
    reference_snr_db: Option<f64>,
    users: Option<UsersSpec>,
    utility: Option<UtilityKind>,
    drops: Option<usize>,
    seed: Option<u64>,
    angle_grid: Option<usize>,
}

impl ScenarioConfig {
    /// Settings of the published experiments.
    pub fn defaults(experiment: Experiment) -> Self {
        let square = |side| Aperture { width: side, height: side };
        let base = ScenarioConfig {
            experiment,
            aperture: square(10.0),
            spacings: vec![0.0],
            reference_snr_db: 20.0,
            users: UsersSpec::Count(2),
            utility: None,
            drops: 1,
            seed: DEFAULT_SEED,
            angle_grid: 2001,
        };
        match experiment {
            Experiment::BeamPattern => ScenarioConfig {
                spacings: vec![0.25, 0.5, 0.75, 0.0],
                ..base
            },
            Experiment::SeLossMap => ScenarioConfig {
                aperture: square(50.0),
                angle_grid: 181,
                ..base
            },
            Experiment::WidthSweep => ScenarioConfig {
                aperture: Aperture { width: 1e4, height: 1.0 },
                users: UsersSpec::Directions(vec![
                    DirectionDeg { azimuth_deg: 0.0, elevation_deg: 0.0 },
                    DirectionDeg { azimuth_deg: 15.0, elevation_deg: 0.0 },
                ]),
                angle_grid: 1001,
                ..base
            },
            Experiment::UserDrops => ScenarioConfig {
                spacings: vec![0.25],
                reference_snr_db: 0.0,
                users: UsersSpec::Count(5),
                drops: 2000,
                ..base
            },
        }
    }

    /// Parses a config file for `experiment`, filling absent keys with the
    /// experiment defaults.
    pub fn from_json(text: &str, experiment: Experiment) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(found) = file.experiment {
            if found != experiment {
                return Err(Error::Config(format!(
                    "config is for {} but {} was requested",
                    found.name(),
                    experiment.name()
                )));
            }
        }
        let d = Self::defaults(experiment);
        let cfg = ScenarioConfig {
            experiment,
            aperture: file.aperture.unwrap_or(d.aperture),
            spacings: file.spacings.unwrap_or(d.spacings),
            reference_snr_db: file.reference_snr_db.unwrap_or(d.reference_snr_db),
            users: file.users.unwrap_or(d.users),
            utility: file.utility.or(d.utility),
            drops: file.drops.unwrap_or(d.drops),
            seed: file.seed.unwrap_or(d.seed),
            angle_grid: file.angle_grid.unwrap_or(d.angle_grid),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        self.aperture.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.spacings.is_empty() {
            return fail("spacings must not be empty".into());
        }
        if let Some(d) = self.spacings.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return fail(format!("spacing {d} must be finite and >= 0"));
        }
        if !self.reference_snr_db.is_finite() {
            return fail("reference_snr_db must be finite".into());
        }
        if self.angle_grid < 2 {
            return fail(format!("angle_grid must be at least 2, got {}", self.angle_grid));
        }
        if matches!(self.utility, Some(UtilityKind::Custom(_))) {
            return fail("custom utilities cannot be configured from a file".into());
        }
        if let UsersSpec::Directions(dirs) = &self.users {
            for d in dirs {
                d.to_direction()?;
            }
        }
        match self.experiment {
            Experiment::UserDrops => {
                if self.drops < 1 {
                    return fail("drops must be at least 1".into());
                }
                match self.users {
                    UsersSpec::Count(k) if k >= 1 => {}
                    _ => return fail("user_drops needs a positive user count".into()),
                }
            }
            Experiment::WidthSweep => {
                if !matches!(&self.users, UsersSpec::Directions(d) if d.len() == 2) {
                    return fail("width_sweep needs exactly two user directions".into());
                }
                if self.aperture.width <= 1.0 {
                    return fail("width_sweep sweeps widths from 1 wavelength up to the aperture width".into());
                }
            }
            Experiment::BeamPattern | Experiment::SeLossMap => {}
        }
        Ok(())
    }

    /// Reference SNR as a linear density per squared wavelength.
    pub fn reference_density(&self) -> f64 {
        10f64.powf(self.reference_snr_db / 10.0)
    }

    pub fn directions(&self) -> Result<Vec<Direction>> {
        match &self.users {
            UsersSpec::Directions(d) => d.iter().map(DirectionDeg::to_direction).collect(),
            UsersSpec::Count(_) => Err(Error::Config("users are given as a count".into())),
        }
    }

    pub fn utilities(&self) -> Vec<UtilityKind> {
        match &self.utility {
            Some(u) => vec![u.clone()],
            None => UtilityKind::NAMED.to_vec(),
        }
    }
}
