//! Maximum-ratio and zero-forcing precoders, interference gains and SINRs.
//!
//! Zero forcing uses the orthogonal-projection form: the precoder of user `k`
//! is its own steering vector projected onto the orthogonal complement of the
//! other users' steering vectors. The projector is built from a Householder
//! QR factorization of those vectors rather than an explicit Gram inverse.
//!
//! Noise power is normalized to one throughout; `powers` are SNRs per unit
//! channel gain.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    dirichlet_gain, hermitian_dot, steering_vector, ArrayGeometry, Direction, SteeringVector,
};

/// Relative eigenvalue floor of the steering-vector Gram matrix below which a
/// user set is treated as linearly dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Differences of the direction cosines between two users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleOffsets {
    /// `sin(theta2) - sin(theta1)`
    pub omega: f64,
    /// `cos(theta2) sin(phi2) - cos(theta1) sin(phi1)`
    pub psi: f64,
}

pub fn angle_offsets(dir1: &Direction, dir2: &Direction) -> AngleOffsets {
    AngleOffsets {
        omega: dir2.vertical_cosine() - dir1.vertical_cosine(),
        psi: dir2.horizontal_cosine() - dir1.horizontal_cosine(),
    }
}

/// Normalized interference gain `|a1^H a2| / NM`, through the product of two
/// Dirichlet kernels (rows see `omega`, columns see `psi`). Costs O(1)
/// regardless of the array size.
pub fn interference_gain(geom: &ArrayGeometry, dir1: &Direction, dir2: &Direction) -> f64 {
    let off = angle_offsets(dir1, dir2);
    let d = geom.spacing();
    dirichlet_gain(geom.rows(), d * off.omega) * dirichlet_gain(geom.cols(), d * off.psi)
}

/// Same quantity as [`interference_gain`] from the explicit `NM`-term inner
/// product. O(NM); kept as a reference.
pub fn interference_gain_direct(geom: &ArrayGeometry, dir1: &Direction, dir2: &Direction) -> f64 {
    let a1 = steering_vector(geom, dir1);
    let a2 = steering_vector(geom, dir2);
    a1.inner(&a2).norm() / geom.elements() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrecoderKind {
    Mr,
    Zf,
}

/// Unit-norm precoding vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub vector: Vec<Complex64>,
    pub kind: PrecoderKind,
}

impl Precoder {
    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `channel^H v`
    pub fn response(&self, channel: &SteeringVector) -> Complex64 {
        hermitian_dot(channel.as_slice(), &self.vector)
    }
}

pub fn mr_precoder(geom: &ArrayGeometry, dir: &Direction) -> Precoder {
    let scale = 1.0 / (geom.elements() as f64).sqrt();
    let vector = steering_vector(geom, dir).into_inner().into_iter().map(|z| z * scale).collect();
    Precoder { vector, kind: PrecoderKind::Mr }
}

/// Per-user zero-forcing gains `b_k`: the fraction of a user's channel energy
/// left after projecting out every other user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZfGains(pub Vec<f64>);

impl ZfGains {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Steering vectors of a user set, validated for zero forcing.
struct ChannelSet {
    channels: Vec<SteeringVector>,
    stacked: DMatrix<Complex64>,
}

impl ChannelSet {
    fn new(geom: &ArrayGeometry, dirs: &[Direction]) -> Result<Self> {
        let elements = geom.elements();
        if dirs.len() > elements {
            return Err(Error::TooManyUsers { users: dirs.len(), elements });
        }
        let channels: Vec<_> = dirs.iter().map(|d| steering_vector(geom, d)).collect();
        let stacked = DMatrix::from_fn(elements, dirs.len(), |row, col| {
            channels[col].as_slice()[row]
        });
        check_rank(&stacked, elements as f64)?;
        Ok(Self { channels, stacked })
    }

    /// Unnormalized zero-forcing direction `w_k` of user `k`.
    fn projected(&self, k: usize) -> Vec<Complex64> {
        let own = self.channels[k].as_slice();
        let mut w = own.to_vec();
        if self.channels.len() == 1 {
            return w;
        }
        let others = self.stacked.clone().remove_column(k);
        let basis = others.qr().q();
        // two projection passes keep w orthogonal to the basis to working precision
        for _ in 0..2 {
            for col in basis.column_iter() {
                let coeff: Complex64 = col.iter().zip(&w).map(|(q, x)| q.conj() * x).sum();
                for (x, q) in w.iter_mut().zip(col.iter()) {
                    *x -= q * coeff;
                }
            }
        }
        w
    }
}

fn check_rank(stacked: &DMatrix<Complex64>, elements: f64) -> Result<()> {
    let gram = stacked.adjoint() * stacked;
    let min_eigenvalue = gram
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let tolerance = RANK_TOLERANCE * elements;
    if min_eigenvalue < tolerance {
        return Err(Error::DegenerateAngles { min_eigenvalue, tolerance });
    }
    Ok(())
}

fn check_index(k: usize, users: usize) -> Result<()> {
    if k >= users {
        return Err(Error::UserIndex { index: k, users });
    }
    Ok(())
}

pub fn zf_precoder(geom: &ArrayGeometry, dirs: &[Direction], k: usize) -> Result<Precoder> {
    check_index(k, dirs.len())?;
    let set = ChannelSet::new(geom, dirs)?;
    Ok(normalize(set.projected(k)))
}

/// Zero-forcing precoders for every user of `dirs`, in order.
pub fn zf_precoders(geom: &ArrayGeometry, dirs: &[Direction]) -> Result<Vec<Precoder>> {
    let set = ChannelSet::new(geom, dirs)?;
    Ok((0..dirs.len()).map(|k| normalize(set.projected(k))).collect())
}

fn normalize(w: Vec<Complex64>) -> Precoder {
    let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let vector = w.into_iter().map(|z| z / norm).collect();
    Precoder { vector, kind: PrecoderKind::Zf }
}

/// `b_k = ||w_k||^2 / NM`, which equals `1 - a_k^H P_k a_k / NM` for the
/// projector `P_k` onto the other users' channels.
pub fn zf_gains(geom: &ArrayGeometry, dirs: &[Direction]) -> Result<ZfGains> {
    let set = ChannelSet::new(geom, dirs)?;
    let nm = geom.elements() as f64;
    let gains = (0..dirs.len())
        .map(|k| set.projected(k).iter().map(|z| z.norm_sqr()).sum::<f64>() / nm)
        .collect();
    Ok(ZfGains(gains))
}

/// SINR of user `k` for arbitrary unit-norm precoders and powers, with unit
/// noise power.
pub fn sinr_general(
    geom: &ArrayGeometry,
    dirs: &[Direction],
    precoders: &[Precoder],
    powers: &[f64],
    k: usize,
) -> Result<f64> {
    if precoders.len() != dirs.len() || powers.len() != dirs.len() {
        return Err(Error::InvalidProblem(format!(
            "{} directions, {} precoders and {} powers",
            dirs.len(),
            precoders.len(),
            powers.len()
        )));
    }
    check_index(k, dirs.len())?;
    let channel = steering_vector(geom, &dirs[k]);
    Ok(sinr_for_channel(&channel, precoders, powers, k))
}

pub(crate) fn sinr_for_channel(
    channel: &SteeringVector,
    precoders: &[Precoder],
    powers: &[f64],
    k: usize,
) -> f64 {
    let mut interference = 1.0;
    let mut signal = 0.0;
    for (i, (v, &rho)) in precoders.iter().zip(powers).enumerate() {
        let gain = rho * v.response(channel).norm_sqr();
        if i == k {
            signal = gain;
        } else {
            interference += gain;
        }
    }
    signal / interference
}

/// Two-user MR SINR `snr1 / (snr2 i12^2 + 1)`.
pub fn mr_sinr_two_user(snr1: f64, snr2: f64, i12: f64) -> f64 {
    snr1 / (snr2 * i12 * i12 + 1.0)
}

/// Two-user ZF SINR `snr1 (1 - i12^2)`.
pub fn zf_sinr_two_user(snr1: f64, i12: f64) -> f64 {
    snr1 * (1.0 - i12 * i12)
}
