//! Dense-array and wide-surface limits.
//!
//! With the aperture `L x H` held fixed and the element pitch `d -> 0`, the
//! Dirichlet kernels of the interference gain become sinc functions and the
//! received SNR depends only on the aperture area. This module evaluates those
//! limits, the beam-pattern landmarks of the `theta = 0` cut, the
//! effective-area link budget, and the MR/ZF spectral-efficiency gap of a
//! very wide surface.
//!
//! Apertures are in wavelengths. SNR densities `p` are per squared
//! wavelength, so `p * L * H` is a received SNR.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sin_cos_pi_product, ArrayGeometry, Direction};
use crate::precoding::{angle_offsets, AngleOffsets, ZfGains, RANK_TOLERANCE};

/// Physical surface size in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aperture {
    pub width: f64,
    pub height: f64,
}

impl Aperture {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        let ap = Self { width, height };
        ap.validate()?;
        Ok(ap)
    }

    pub fn square(side: f64) -> Result<Self> {
        Self::new(side, side)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(self.width) && ok(self.height)) {
            return Err(Error::InvalidGeometry(format!(
                "aperture must be positive, got {} x {}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// Free-space link from the surface to one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserLink {
    pub direction: Direction,
    /// meters
    pub distance: f64,
    /// watts
    pub tx_power: f64,
    /// watts
    pub noise_power: f64,
}

impl UserLink {
    pub fn new(direction: Direction, distance: f64, tx_power: f64, noise_power: f64) -> Result<Self> {
        let link = Self { direction, distance, tx_power, noise_power };
        link.validate()?;
        Ok(link)
    }

    fn validate(&self) -> Result<()> {
        if !(self.distance.is_finite() && self.distance > 0.0) {
            return Err(Error::InvalidGeometry(format!("distance must be positive, got {}", self.distance)));
        }
        if !(self.tx_power.is_finite() && self.tx_power >= 0.0) {
            return Err(Error::InvalidGeometry(format!("transmit power must be >= 0, got {}", self.tx_power)));
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(Error::InvalidGeometry(format!("noise power must be positive, got {}", self.noise_power)));
        }
        Ok(())
    }

    /// `cos(phi) cos(theta)`; zero at grazing incidence, where the effective
    /// element area vanishes.
    fn projection(&self) -> Result<f64> {
        self.validate()?;
        let phi = self.direction.azimuth();
        let theta = self.direction.elevation();
        if phi.abs() >= FRAC_PI_2 || theta.abs() >= FRAC_PI_2 {
            return Err(Error::InvalidGeometry(format!(
                "user at azimuth {phi} rad, elevation {theta} rad sees zero effective area"
            )));
        }
        Ok(phi.cos() * theta.cos())
    }
}

/// SNR per unit of array area, `(q / sigma^2) cos(phi) cos(theta) / (4 pi r^2)`,
/// in inverse square meters.
pub fn link_density(link: &UserLink) -> Result<f64> {
    let projection = link.projection()?;
    Ok(link.tx_power / link.noise_power * projection / (4.0 * PI * link.distance * link.distance))
}

/// Power cost per unit of normalized transmit power,
/// `4 pi r^2 sigma^2 / (d^2 cos(theta) cos(phi))`, with `d` in meters.
pub fn link_cost(link: &UserLink, geom: &ArrayGeometry) -> Result<f64> {
    let projection = link.projection()?;
    let d = geom.spacing_m();
    Ok(4.0 * PI * link.distance * link.distance * link.noise_power / (d * d * projection))
}

/// Interference-free SNR `p L H` of a dense surface.
pub fn dense_snr(p: f64, ap: &Aperture) -> f64 {
    p * ap.area()
}

/// `sin(pi x) / (pi x)` for `x = scale * arg`, with `sinc(0) = 1`.
///
/// The product is formed exactly before the argument reduction, so nulls at
/// integer `x` come out at rounding level instead of ~1e-13.
pub fn sinc_of_product(scale: f64, arg: f64) -> f64 {
    let x = scale * arg;
    if x.abs() < 1e-6 {
        let px = PI * x;
        return 1.0 - px * px / 6.0;
    }
    let (s, _) = sin_cos_pi_product(scale, arg);
    s / (PI * x)
}

pub fn sinc(x: f64) -> f64 {
    sinc_of_product(1.0, x)
}

/// Squared interference gain of the continuous surface,
/// `sinc^2(H omega) sinc^2(L psi)`.
pub fn limiting_interference(ap: &Aperture, off: &AngleOffsets) -> f64 {
    let v = sinc_of_product(ap.height, off.omega);
    let h = sinc_of_product(ap.width, off.psi);
    v * v * h * h
}

/// One Dirichlet factor `|sin(pi e x) / ((e / s) sin(pi s x))|` for an
/// aperture extent `e` sampled at pitch `s`. `e / s` need not be an integer.
fn sampled_factor(extent: f64, spacing: f64, x: f64) -> f64 {
    let offset = spacing * x - (spacing * x).round();
    let den = (PI * offset).sin();
    if den == 0.0 {
        // grating direction: limit of the ratio as the denominator vanishes
        let (_, c) = sin_cos_pi_product(extent, x);
        return c.abs();
    }
    let (num, _) = sin_cos_pi_product(extent, x);
    (num * spacing / (extent * den)).abs()
}

/// Squared interference gain of a surface of fixed aperture sampled at pitch
/// `spacing`:
/// `(d/H)^2 sin^2(pi H omega) / sin^2(pi d omega) * (d/L)^2 sin^2(pi L psi) / sin^2(pi d psi)`.
///
/// Agrees with the squared Dirichlet-kernel gain of the tiled array when the
/// aperture holds a whole number of elements, and extends it continuously to
/// pitches that do not tile the aperture.
pub fn sampled_interference(ap: &Aperture, spacing: f64, off: &AngleOffsets) -> f64 {
    let v = sampled_factor(ap.height, spacing, off.omega);
    let h = sampled_factor(ap.width, spacing, off.psi);
    v * v * h * h
}

/// MR SINR of user 1 on a dense surface.
pub fn limiting_sinr_mr(p1: f64, p2: f64, ap: &Aperture, off: &AngleOffsets) -> f64 {
    let area = ap.area();
    p1 * area / (p2 * area * limiting_interference(ap, off) + 1.0)
}

/// ZF SINR of user 1 on a dense surface.
pub fn limiting_sinr_zf(p1: f64, ap: &Aperture, off: &AngleOffsets) -> f64 {
    p1 * ap.area() * (1.0 - limiting_interference(ap, off))
}

/// `log2(1 + SINR_zf) - log2(1 + SINR_mr)` on a dense surface.
///
/// Positive whenever `p1 L H (1 - I^2) >= 1` for equal densities; at very low
/// SNR and nearly coincident users MR can come out ahead, and the difference
/// is returned as is.
pub fn se_gap_mr_zf(p1: f64, p2: f64, ap: &Aperture, off: &AngleOffsets) -> f64 {
    (1.0 + limiting_sinr_zf(p1, ap, off)).log2() - (1.0 + limiting_sinr_mr(p1, p2, ap, off)).log2()
}

/// Upper bound on `sinc^2(L psi)` that decays as `1 / L^2`, valid for `psi != 0`.
pub fn wide_surface_interference_bound(width: f64, psi: f64) -> f64 {
    1.0 / (PI * PI * width * width * psi * psi)
}

/// Upper bound on [`se_gap_mr_zf`] from replacing the interference with
/// [`wide_surface_interference_bound`]; tends to zero as the width grows.
pub fn se_gap_bound(p1: f64, p2: f64, ap: &Aperture, psi: f64) -> f64 {
    let area = ap.area();
    let bound = wide_surface_interference_bound(ap.width, psi).min(1.0);
    (1.0 + p1 * area).log2() - (1.0 + p1 * area / (p2 * area * bound + 1.0)).log2()
}

/// Landmarks of the `theta = 0` interference pattern seen by a broadside user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamPatternReport {
    /// `±asin(n / L)` for `n = 1..=lobes`, ascending.
    pub null_angles: Vec<f64>,
    /// `±(2n + 1) / (2L)` for `n = 1..=lobes`, ascending.
    pub sidelobe_angles: Vec<f64>,
    /// `(2 / ((2n + 1) pi))^2`, aligned with `sidelobe_angles`.
    pub sidelobe_levels: Vec<f64>,
    /// Angle between the first two nulls, `2 asin(1 / L)`.
    pub beamwidth: f64,
    /// Small-angle beamwidth `2 / L`.
    pub beamwidth_small_angle: f64,
    /// Per `n`: whether `n / L` is within 1% of `asin(n / L)`.
    pub small_angle_valid: Vec<bool>,
}

pub fn beam_pattern(width: f64, lobes: usize) -> Result<BeamPatternReport> {
    if !(width.is_finite() && width > lobes as f64) || lobes == 0 {
        return Err(Error::ApertureTooSmall { width, lobes });
    }
    let mirror = |positive: Vec<f64>| -> Vec<f64> {
        positive.iter().rev().map(|x| -x).chain(positive.iter().copied()).collect()
    };
    let nulls: Vec<f64> = (1..=lobes).map(|n| (n as f64 / width).asin()).collect();
    let peaks: Vec<f64> = (1..=lobes).map(|n| (2 * n + 1) as f64 / (2.0 * width)).collect();
    let levels: Vec<f64> = (1..=lobes)
        .map(|n| {
            let a = 2.0 / ((2 * n + 1) as f64 * PI);
            a * a
        })
        .collect();
    let small_angle_valid = nulls
        .iter()
        .enumerate()
        .map(|(i, exact)| ((i + 1) as f64 / width - exact).abs() <= 0.01 * exact)
        .collect();
    Ok(BeamPatternReport {
        null_angles: mirror(nulls.clone()),
        sidelobe_angles: mirror(peaks),
        sidelobe_levels: levels.iter().rev().chain(levels.iter()).copied().collect(),
        beamwidth: 2.0 * nulls[0],
        beamwidth_small_angle: 2.0 / width,
        small_angle_valid,
    })
}

/// Whether `sin(x) ≈ x` holds to 10% at `x = pi d |angle|`, i.e.
/// `pi d |angle| <= pi^2 / 8`. Any pitch up to half a wavelength passes for
/// angles within `±pi/4`.
pub fn undersampling_error_bound(d_over_lambda: f64, angle: f64) -> bool {
    // same inequality divided by pi; both sides stay exact at the d = 1/2, pi/4 corner
    d_over_lambda * angle.abs() <= FRAC_PI_8
}

/// Zero-forcing gains on a dense surface, from the normalized Gram matrix
/// `R_ij = sinc(H omega_ij) sinc(L psi_ij) exp(i pi (H omega_ij + L psi_ij))`
/// as `b_k = 1 / [R^-1]_kk`.
pub fn limiting_zf_gains(ap: &Aperture, dirs: &[Direction]) -> Result<ZfGains> {
    let k = dirs.len();
    let gram = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            return Complex64::new(1.0, 0.0);
        }
        let off = angle_offsets(&dirs[i], &dirs[j]);
        let magnitude = sinc_of_product(ap.height, off.omega) * sinc_of_product(ap.width, off.psi);
        let phase = PI * (ap.height * off.omega + ap.width * off.psi);
        Complex64::from_polar(magnitude, phase)
    });
    let eig = gram.symmetric_eigen();
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < RANK_TOLERANCE {
        return Err(Error::DegenerateAngles { min_eigenvalue, tolerance: RANK_TOLERANCE });
    }
    let gains = (0..k)
        .map(|user| {
            let inv_diag: f64 = eig
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(j, lambda)| eig.eigenvectors[(user, j)].norm_sqr() / lambda)
                .sum();
            1.0 / inv_diag
        })
        .collect();
    Ok(ZfGains(gains))
}
