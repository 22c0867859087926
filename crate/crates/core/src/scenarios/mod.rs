//! Reproducible experiment runners that turn a [`ScenarioConfig`] into a
//! [`ResultTable`].

mod config;
mod rng;
mod table;

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde_json::{Map, Value};

pub use config::{DirectionDeg, Experiment, ScenarioConfig, UsersSpec, DEFAULT_SEED};
pub use rng::DropRng;
pub use table::{emit_table, format_float, sidecar_path, Column, ResultTable, TableFormat};

use crate::asymptotics::{limiting_interference, limiting_zf_gains, link_density, sampled_interference, Aperture, UserLink};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Direction};
use crate::powerctl::{closed_form_allocation, solve_allocation, AllocationProblem};
use crate::precoding::{angle_offsets, mr_sinr_two_user, zf_gains, zf_sinr_two_user, AngleOffsets};

/// Floor applied to squared gains before conversion to dB.
pub const GAIN_FLOOR_DB: f64 = -300.0;

/// Range at which a user's transmit SNR equals its SNR per squared wavelength
/// received on a broadside surface: `4 pi r^2 = 1 m^2`.
pub const REFERENCE_DISTANCE: f64 = 0.282_094_791_773_878_14;

const CALIBRATION_NOTE: &str = "reference_snr_db is the SNR per squared wavelength for a broadside user; \
a surface of area L*H then sees SNR = 10^(reference_snr_db/10) * L * H, scaled by cos(azimuth) cos(elevation) \
for other directions; wavelength = 1 m, total power budget = 1";

/// Largest share of drops that may be redrawn for degenerate user directions.
pub const MAX_RESAMPLED_SHARE: f64 = 0.01;

/// Squared interference gain between `off`-separated users for a surface of
/// pitch `spacing` (`0` = dense limit).
pub fn interference_power(ap: &Aperture, spacing: f64, off: &AngleOffsets) -> f64 {
    if spacing == 0.0 {
        limiting_interference(ap, off)
    } else {
        sampled_interference(ap, spacing, off)
    }
}

pub fn to_db(power: f64) -> f64 {
    (10.0 * power.log10()).max(GAIN_FLOOR_DB)
}

/// Interference gain in dB seen by a broadside user from `dir`.
pub fn beam_gain_db(ap: &Aperture, spacing: f64, dir: &Direction) -> f64 {
    to_db(interference_power(ap, spacing, &angle_offsets(&Direction::broadside(), dir)))
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + step * i as f64).exp(),
        })
        .collect()
}

fn metadata(cfg: &ScenarioConfig) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("experiment".into(), Value::from(cfg.experiment.name()));
    m.insert("config".into(), cfg.to_json());
    m.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
    m.insert("seed".into(), Value::from(cfg.seed));
    m.insert("snr_calibration".into(), Value::from(CALIBRATION_NOTE));
    m
}

fn angle_axis(cfg: &ScenarioConfig) -> Vec<f64> {
    linear_grid(-FRAC_PI_2, FRAC_PI_2, cfg.angle_grid)
}

/// Interference gain of a broadside user versus the other user's azimuth,
/// one row per (spacing, azimuth).
pub fn run_beampattern(cfg: &ScenarioConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let axis = angle_axis(cfg);
    let (mut spacing, mut azimuth, mut gain) = (Vec::new(), Vec::new(), Vec::new());
    for &d in &cfg.spacings {
        for &phi in &axis {
            spacing.push(d);
            azimuth.push(phi);
            gain.push(beam_gain_db(&cfg.aperture, d, &Direction::azimuthal(phi)?));
        }
    }
    let mut t = ResultTable::new()
        .with_column("spacing", Column::Float(spacing))?
        .with_column("azimuth", Column::Float(azimuth))?
        .with_column("gain_db", Column::Float(gain))?;
    t.metadata = metadata(cfg);
    Ok(t)
}

/// Relative SE loss of a broadside user under MR and ZF over a grid of
/// interferer directions.
pub fn run_se_loss_map(cfg: &ScenarioConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let axis = angle_axis(cfg);
    let snr = cfg.reference_density() * cfg.aperture.area();
    let ideal = (1.0 + snr).log2();
    let broadside = Direction::broadside();
    let mut cols: [Vec<f64>; 6] = Default::default();
    for &d in &cfg.spacings {
        for &phi in &axis {
            for &theta in &axis {
                let off = angle_offsets(&broadside, &Direction::new(phi, theta)?);
                let i2 = interference_power(&cfg.aperture, d, &off);
                let i = i2.sqrt();
                let mr = (1.0 + mr_sinr_two_user(snr, snr, i)).log2();
                let zf = (1.0 + zf_sinr_two_user(snr, i)).log2();
                for (col, v) in cols.iter_mut().zip([d, phi, theta, to_db(i2), 1.0 - mr / ideal, 1.0 - zf / ideal]) {
                    col.push(v);
                }
            }
        }
    }
    let names = ["spacing", "azimuth", "elevation", "interference_db", "se_loss_mr", "se_loss_zf"];
    let mut t = ResultTable::new();
    for (name, col) in names.into_iter().zip(cols) {
        t.push_column(name, Column::Float(col))?;
    }
    t.metadata = metadata(cfg);
    t.metadata.insert("snr".into(), Value::from(snr));
    Ok(t)
}

/// SE of the first user under MR and ZF as the surface widens, on a log grid
/// of widths from one wavelength to the configured width.
pub fn run_width_sweep(cfg: &ScenarioConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let dirs = cfg.directions()?;
    let off = angle_offsets(&dirs[0], &dirs[1]);
    let p = cfg.reference_density();
    let widths = log_grid(1.0, cfg.aperture.width, cfg.angle_grid);
    let mut cols: [Vec<f64>; 6] = Default::default();
    for &d in &cfg.spacings {
        for &w in &widths {
            let ap = Aperture { width: w, height: cfg.aperture.height };
            let snr = p * ap.area();
            let i = interference_power(&ap, d, &off).sqrt();
            let mr = (1.0 + mr_sinr_two_user(snr, snr, i)).log2();
            let zf = (1.0 + zf_sinr_two_user(snr, i)).log2();
            for (col, v) in cols.iter_mut().zip([d, w, mr, zf, (1.0 + snr).log2(), zf - mr]) {
                col.push(v);
            }
        }
    }
    let names = ["spacing", "width", "se_mr", "se_zf", "se_interference_free", "se_gap"];
    let mut t = ResultTable::new();
    for (name, col) in names.into_iter().zip(cols) {
        t.push_column(name, Column::Float(col))?;
    }
    t.metadata = metadata(cfg);
    Ok(t)
}

/// One realization of the random-drop experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct UserDrop {
    pub directions: Vec<Direction>,
    pub gains: Vec<f64>,
    pub costs: Vec<f64>,
    /// Number of direction draws rejected as degenerate before this one.
    pub resampled: usize,
}

/// Power cost of a user in area units: the inverse of its received SNR per
/// squared wavelength per unit of budget.
pub fn area_cost(reference_density: f64, dir: &Direction) -> Result<f64> {
    let link = UserLink::new(*dir, REFERENCE_DISTANCE, reference_density, 1.0)?;
    Ok(1.0 / link_density(&link)?)
}

fn drop_gains(cfg: &ScenarioConfig, geom: Option<&ArrayGeometry>, dirs: &[Direction]) -> Result<Vec<f64>> {
    match geom {
        Some(g) => zf_gains(g, dirs).map(|b| b.0),
        None => limiting_zf_gains(&cfg.aperture, dirs).map(|b| b.0),
    }
}

/// Draws drop `index`: azimuths uniform on `(-pi/2, pi/2)`, zero elevation,
/// redrawn while the ZF gains are degenerate.
pub fn draw_drop(cfg: &ScenarioConfig, geom: Option<&ArrayGeometry>, index: u64) -> Result<UserDrop> {
    let users = match cfg.users {
        UsersSpec::Count(k) => k,
        UsersSpec::Directions(_) => return Err(Error::Config("user_drops needs a user count".into())),
    };
    let mut rng = DropRng::for_drop(cfg.seed, index);
    let mut resampled = 0;
    loop {
        let directions = (0..users)
            .map(|_| Direction::azimuthal(rng.next_azimuth()))
            .collect::<Result<Vec<_>>>()?;
        match drop_gains(cfg, geom, &directions) {
            Ok(gains) => {
                let costs = directions
                    .iter()
                    .map(|d| area_cost(cfg.reference_density(), d))
                    .collect::<Result<_>>()?;
                return Ok(UserDrop { directions, gains, costs, resampled });
            }
            Err(Error::DegenerateAngles { .. }) if resampled < cfg.drops => resampled += 1,
            Err(e) => return Err(e),
        }
    }
}

/// Surface for the first configured spacing; `None` for the dense limit.
pub fn drop_geometry(cfg: &ScenarioConfig) -> Result<Option<ArrayGeometry>> {
    let d = cfg.spacings[0];
    if d == 0.0 {
        return Ok(None);
    }
    ArrayGeometry::tiling(cfg.aperture.width, cfg.aperture.height, d, 1.0)
        .map(Some)
        .map_err(|e| Error::Config(e.to_string()))
}

/// Random user drops with ZF precoding and the configured power allocation.
///
/// The first configured spacing is used. Each drop draws `K` azimuths; every
/// utility is solved on the same drop. Rows are ordered by drop, utility,
/// user. The budget is 1 and SINRs are `rho_k b_k L H`; utilities are applied
/// to these SINRs, so the solver sees the gains `b_k L H`.
pub fn run_user_drops(cfg: &ScenarioConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let geom = drop_geometry(cfg)?;
    let utilities = cfg.utilities();
    let area = cfg.aperture.area();

    let drops: Vec<UserDrop> = (0..cfg.drops as u64)
        .into_par_iter()
        .map(|i| draw_drop(cfg, geom.as_ref(), i))
        .collect::<Result<_>>()?;
    let resampled: usize = drops.iter().map(|d| d.resampled).sum();
    if resampled as f64 > MAX_RESAMPLED_SHARE * cfg.drops as f64 {
        return Err(Error::DegenerateDropLimit { resampled, drops: cfg.drops });
    }

    let mut drop_idx = Vec::new();
    let mut user_idx = Vec::new();
    let mut utility_col = Vec::new();
    let mut floats: [Vec<f64>; 6] = Default::default();
    for (i, drop) in drops.iter().enumerate() {
        let scaled: Vec<f64> = drop.gains.iter().map(|b| b * area).collect();
        let problem = AllocationProblem::new(scaled, drop.costs.clone(), 1.0)?;
        for utility in &utilities {
            let alloc = match closed_form_allocation(&problem, utility) {
                Some(a) => a,
                None => solve_allocation(&problem, utility)?,
            };
            let physical = alloc.physical_powers(&problem);
            for (k, (&sinr, &power)) in alloc.sinrs.iter().zip(&physical).enumerate() {
                drop_idx.push(i as i64);
                user_idx.push(k as i64);
                utility_col.push(utility.name().to_owned());
                let row = [drop.directions[k].azimuth(), drop.gains[k], drop.costs[k], power, sinr, (1.0 + sinr).log2()];
                for (col, v) in floats.iter_mut().zip(row) {
                    col.push(v);
                }
            }
        }
    }
    let mut t = ResultTable::new()
        .with_column("drop", Column::Int(drop_idx))?
        .with_column("utility", Column::Text(utility_col))?
        .with_column("user", Column::Int(user_idx))?;
    for (name, col) in ["azimuth", "gain", "cost", "power", "sinr", "se"].into_iter().zip(floats) {
        t.push_column(name, Column::Float(col))?;
    }
    t.metadata = metadata(cfg);
    t.metadata.insert("resampled_drops".into(), Value::from(resampled));
    Ok(t)
}

pub fn run_experiment(cfg: &ScenarioConfig) -> Result<ResultTable> {
    match cfg.experiment {
        Experiment::BeamPattern => run_beampattern(cfg),
        Experiment::SeLossMap => run_se_loss_map(cfg),
        Experiment::WidthSweep => run_width_sweep(cfg),
        Experiment::UserDrops => run_user_drops(cfg),
    }
}

/// Uniform azimuth CDF on `(-pi/2, pi/2)`.
pub fn azimuth_cdf(phi: f64) -> f64 {
    ((phi + FRAC_PI_2) / PI).clamp(0.0, 1.0)
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::powerctl::UtilityKind;
    use approx::assert_relative_eq;

    fn small_drops(utility: Option<UtilityKind>) -> ScenarioConfig {
        ScenarioConfig {
            drops: 40,
            aperture: Aperture { width: 4.0, height: 4.0 },
            utility,
            ..ScenarioConfig::defaults(Experiment::UserDrops)
        }
    }

    #[test]
    fn grids() {
        let g = linear_grid(-1.0, 1.0, 5);
        assert_eq!(g, [-1.0, -0.5, 0.0, 0.5, 1.0]);
        let g = log_grid(1.0, 1e4, 5);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[4], 1e4);
        assert_relative_eq!(g[2], 100.0, max_relative = 1e-14);
    }

    #[test]
    fn reference_distance_has_unit_sphere_area() {
        assert_relative_eq!(4.0 * PI * REFERENCE_DISTANCE * REFERENCE_DISTANCE, 1.0, max_relative = 1e-15);
        assert_relative_eq!(area_cost(100.0, &Direction::broadside()).unwrap(), 0.01, max_relative = 1e-14);
    }

    #[test]
    fn beampattern_shape() {
        let cfg = ScenarioConfig { angle_grid: 11, ..ScenarioConfig::defaults(Experiment::BeamPattern) };
        let t = run_beampattern(&cfg).unwrap();
        assert_eq!(t.rows(), 44);
        let gain = t.floats("gain_db").unwrap();
        assert_eq!(gain[5], 0.0);
        assert!(gain.iter().all(|g| *g <= 1e-12 && *g >= GAIN_FLOOR_DB));
        assert_eq!(t.metadata["experiment"], "beam_pattern");
    }

    #[test]
    fn se_loss_map_limits() {
        let cfg = ScenarioConfig { angle_grid: 21, ..ScenarioConfig::defaults(Experiment::SeLossMap) };
        let t = run_se_loss_map(&cfg).unwrap();
        assert_eq!(t.rows(), 441);
        let mr = t.floats("se_loss_mr").unwrap();
        let zf = t.floats("se_loss_zf").unwrap();
        // coincident users: ZF has nothing left, MR keeps about half the rate
        let centre = 10 * 21 + 10;
        assert_relative_eq!(zf[centre], 1.0);
        assert!(mr[centre] > 0.9);
        assert!(mr.iter().zip(zf).all(|(m, z)| (0.0..=1.0).contains(m) && (0.0..=1.0).contains(z)));
    }

    #[test]
    fn width_sweep_sorted() {
        let cfg = ScenarioConfig { angle_grid: 50, ..ScenarioConfig::defaults(Experiment::WidthSweep) };
        let t = run_width_sweep(&cfg).unwrap();
        let w = t.floats("width").unwrap();
        assert!(w.windows(2).all(|p| p[0] < p[1]));
        let zf = t.floats("se_zf").unwrap();
        let free = t.floats("se_interference_free").unwrap();
        assert!(zf.iter().zip(free).all(|(z, f)| z <= f));
    }

    #[test]
    fn drops_are_deterministic_across_thread_counts() {
        let cfg = small_drops(None);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_user_drops(&cfg)).unwrap();
        let b = four.install(|| run_user_drops(&cfg)).unwrap();
        assert_eq!(a.to_bytes(TableFormat::Csv).unwrap(), b.to_bytes(TableFormat::Csv).unwrap());
        assert_eq!(a.to_bytes(TableFormat::Json).unwrap(), b.to_bytes(TableFormat::Json).unwrap());
        assert_eq!(a.rows(), 40 * 3 * 5);
    }

    #[test]
    fn drops_spend_the_budget() {
        let cfg = small_drops(None);
        let t = run_user_drops(&cfg).unwrap();
        let power = t.floats("power").unwrap();
        for chunk in power.chunks(5) {
            assert_relative_eq!(chunk.iter().sum::<f64>(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn single_user_gets_the_whole_surface() {
        let cfg = ScenarioConfig { users: UsersSpec::Count(1), ..small_drops(Some(UtilityKind::SumSe)) };
        let t = run_user_drops(&cfg).unwrap();
        let az = t.floats("azimuth").unwrap();
        let se = t.floats("se").unwrap();
        let gain = t.floats("gain").unwrap();
        for ((phi, se), b) in az.iter().zip(se).zip(gain) {
            assert_relative_eq!(*b, 1.0, max_relative = 1e-12);
            let snr = cfg.reference_density() * cfg.aperture.area() * phi.cos();
            assert_relative_eq!(*se, (1.0 + snr).log2(), max_relative = 1e-12);
        }
    }

    #[test]
    fn dense_limit_drops() {
        let cfg = ScenarioConfig { spacings: vec![0.0], ..small_drops(Some(UtilityKind::ProportionalFairness)) };
        let t = run_user_drops(&cfg).unwrap();
        assert!(t.floats("se").unwrap().iter().all(|x| x.is_finite() && *x > 0.0));
    }

    #[test]
    fn non_tiling_spacing_is_a_config_error() {
        let cfg = ScenarioConfig { spacings: vec![0.3], ..small_drops(None) };
        assert!(matches!(run_user_drops(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn too_many_users_for_the_surface() {
        let cfg = ScenarioConfig {
            users: UsersSpec::Count(17),
            spacings: vec![1.0],
            ..small_drops(None)
        };
        assert!(matches!(run_user_drops(&cfg), Err(Error::TooManyUsers { .. })));
    }

    #[test]
    fn ks_statistic_of_exact_quantiles() {
        let n = 1000;
        let samples: Vec<f64> = (0..n).map(|i| -FRAC_PI_2 + PI * (i as f64 + 0.5) / n as f64).collect();
        assert!(ks_statistic(&samples, azimuth_cdf) <= 0.5 / n as f64 + 1e-12);
        assert_relative_eq!(ks_statistic(&[0.0], azimuth_cdf), 0.5);
    }
}
