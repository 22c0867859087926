//! Planar array geometry and far-field channel vectors.
//!
//! The array has `rows` horizontal rows of `cols` elements each, placed on a
//! square grid with pitch `spacing` (in wavelengths). Element `(n, m)` sits at
//! `((m - 1) d, (n - 1) d)`, so the first entry of every steering vector
//! belongs to the element at the origin and entries run row by row.
//!
//! All lengths except the wavelength itself are expressed in wavelengths.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the `[-pi/2, pi/2]` angle range so that angles produced
/// by degree conversion or `asin` are not rejected over one ulp.
const ANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    rows: usize,
    cols: usize,
    spacing: f64,
    wavelength: f64,
}

impl ArrayGeometry {
    /// `spacing` is the element pitch `d / lambda`; `wavelength` is in meters.
    pub fn new(rows: usize, cols: usize, spacing: f64, wavelength: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidGeometry(format!(
                "array needs at least one row and one column, got {rows}x{cols}"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGeometry(format!("spacing must be positive, got {spacing}")));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        Ok(Self { rows, cols, spacing, wavelength })
    }

    /// Geometry normalized to a one-meter wavelength.
    pub fn normalized(rows: usize, cols: usize, spacing: f64) -> Result<Self> {
        Self::new(rows, cols, spacing, 1.0)
    }

    /// Builds the array that tiles an aperture of `width x height` wavelengths
    /// with elements of pitch `spacing`. The aperture must be an integer
    /// multiple of the pitch in both directions (to within 1e-9 elements).
    pub fn tiling(width: f64, height: f64, spacing: f64, wavelength: f64) -> Result<Self> {
        let count = |extent: f64, what: &str| -> Result<usize> {
            let exact = extent / spacing;
            let rounded = exact.round();
            if !(rounded >= 1.0 && (exact - rounded).abs() <= 1e-9 * rounded.max(1.0)) {
                return Err(Error::InvalidGeometry(format!(
                    "{what} {extent} is not a whole number of elements of pitch {spacing}"
                )));
            }
            Ok(rounded as usize)
        };
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGeometry(format!("spacing must be positive, got {spacing}")));
        }
        let cols = count(width, "width")?;
        let rows = count(height, "height")?;
        Self::new(rows, cols, spacing, wavelength)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Element pitch in wavelengths.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Wavelength in meters.
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn elements(&self) -> usize {
        self.rows * self.cols
    }

    /// Horizontal aperture `M d` in wavelengths.
    pub fn width(&self) -> f64 {
        self.cols as f64 * self.spacing
    }

    /// Vertical aperture `N d` in wavelengths.
    pub fn height(&self) -> f64 {
        self.rows as f64 * self.spacing
    }

    /// Element pitch in meters.
    pub fn spacing_m(&self) -> f64 {
        self.spacing * self.wavelength
    }
}

/// Far-field direction of a user as seen from the array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    azimuth: f64,
    elevation: f64,
}

impl Direction {
    /// Angles in radians, each within `[-pi/2, pi/2]`.
    pub fn new(azimuth: f64, elevation: f64) -> Result<Self> {
        let in_range = |a: f64| a.is_finite() && a.abs() <= FRAC_PI_2 + ANGLE_SLACK;
        if !(in_range(azimuth) && in_range(elevation)) {
            return Err(Error::InvalidDirection { azimuth, elevation });
        }
        Ok(Self {
            azimuth: azimuth.clamp(-FRAC_PI_2, FRAC_PI_2),
            elevation: elevation.clamp(-FRAC_PI_2, FRAC_PI_2),
        })
    }

    pub fn from_degrees(azimuth: f64, elevation: f64) -> Result<Self> {
        Self::new(azimuth.to_radians(), elevation.to_radians())
    }

    /// Azimuth-only direction in the horizontal plane.
    pub fn azimuthal(azimuth: f64) -> Result<Self> {
        Self::new(azimuth, 0.0)
    }

    pub const fn broadside() -> Self {
        Self { azimuth: 0.0, elevation: 0.0 }
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn elevation(&self) -> f64 {
        self.elevation
    }

    /// Phase slope along a row, `cos(theta) sin(phi)`.
    pub fn horizontal_cosine(&self) -> f64 {
        self.elevation.cos() * self.azimuth.sin()
    }

    /// Phase slope along a column, `sin(theta)`.
    pub fn vertical_cosine(&self) -> f64 {
        self.elevation.sin()
    }
}

/// Array response `a(phi, theta)`: one unit-modulus entry per element,
/// ordered row by row starting at the origin element.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(Vec<Complex64>);

impl SteeringVector {
    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Hermitian inner product `self^H other`.
    pub fn inner(&self, other: &SteeringVector) -> Complex64 {
        hermitian_dot(&self.0, &other.0)
    }
}

pub(crate) fn hermitian_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn steering_vector(geom: &ArrayGeometry, dir: &Direction) -> SteeringVector {
    let k = 2.0 * PI * geom.spacing();
    let horizontal = dir.horizontal_cosine();
    let vertical = dir.vertical_cosine();
    let mut entries = Vec::with_capacity(geom.elements());
    for n in 0..geom.rows() {
        for m in 0..geom.cols() {
            let phase = k * (m as f64 * horizontal + n as f64 * vertical);
            entries.push(Complex64::from_polar(1.0, phase));
        }
    }
    SteeringVector(entries)
}

/// `sin(pi k x)` and `cos(pi k x)` with the product `k x` carried exactly and
/// reduced modulo 2 before scaling by pi. Keeps the phase accurate when `k x`
/// is large, where a plain `(PI * k * x).sin()` loses digits to rounding.
pub(crate) fn sin_cos_pi_product(k: f64, x: f64) -> (f64, f64) {
    let p = k * x;
    let err = k.mul_add(x, -p);
    let reduced = p - 2.0 * (0.5 * p).round();
    (PI * (reduced + err)).sin_cos()
}

/// Geometric phasor sum `sum_{n=1..count} exp(i 2 pi (n - 1) arg)`.
///
/// Evaluated through `sin(pi N A) / sin(pi A) * exp(i pi (N - 1) A)`, with `A`
/// first reduced to its offset from the nearest integer (the sum has period
/// one in `A`). Exact integers take the `N` branch.
pub fn dirichlet_sum(count: usize, arg: f64) -> Complex64 {
    assert!(count >= 1, "dirichlet_sum needs at least one term");
    let n = count as f64;
    let offset = arg - arg.round();
    let (den, _) = (PI * offset).sin_cos();
    if den == 0.0 {
        return Complex64::new(n, 0.0);
    }
    let (num, _) = sin_cos_pi_product(n, offset);
    let (phase_sin, phase_cos) = sin_cos_pi_product(n - 1.0, offset);
    let magnitude = num / den;
    Complex64::new(magnitude * phase_cos, magnitude * phase_sin)
}

/// Modulus of [`dirichlet_sum`] normalized by the term count, in `[0, 1]`.
pub fn dirichlet_gain(count: usize, arg: f64) -> f64 {
    let n = count as f64;
    let offset = arg - arg.round();
    let den = (PI * offset).sin();
    if den == 0.0 {
        return 1.0;
    }
    let (num, _) = sin_cos_pi_product(n, offset);
    (num / (n * den)).abs().min(1.0)
}

/// Minimum range for the plane-wave model, `2 d^2 max(M, N)^2 / lambda`, in meters.
pub fn fraunhofer_distance(geom: &ArrayGeometry) -> f64 {
    let largest = geom.rows().max(geom.cols()) as f64;
    let d = geom.spacing_m();
    2.0 * d * d * largest * largest / geom.wavelength()
}

/// True when `distance` (meters) lies strictly beyond the Fraunhofer distance.
pub fn validate_far_field(geom: &ArrayGeometry, distance: f64) -> bool {
    distance > fraunhofer_distance(geom)
}
