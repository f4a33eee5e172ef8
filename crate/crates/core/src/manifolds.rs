//! Synthetic point clouds with known topology, plus rigid and PCA rotations.
//!
//! All samplers are pure functions of their arguments and seed. Each one draws
//! from its own ChaCha stream (see [`crate::rng`]), so equal seeds give
//! bit-identical clouds.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Matrix3, SymmetricEigen, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::rng::{self, streams};

/// Euler angles in radians, composed as `Rx * Ry * Rz`: rotate about the body
/// x axis, then the new y axis, then the new z axis (equivalently: fixed z,
/// then fixed y, then fixed x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    pub angle_x: f64,
    pub angle_y: f64,
    pub angle_z: f64,
}

impl RotationSpec {
    pub fn new(angle_x: f64, angle_y: f64, angle_z: f64) -> Self {
        Self {
            angle_x,
            angle_y,
            angle_z,
        }
    }

    /// The same angle about every axis.
    pub fn uniform(angle: f64) -> Self {
        Self::new(angle, angle, angle)
    }

    pub fn identity() -> Self {
        Self::uniform(0.0)
    }

    /// `Rx * Ry * Rz`, acting on column vectors.
    pub fn matrix(&self) -> Matrix3<f64> {
        let (sx, cx) = self.angle_x.sin_cos();
        let (sy, cy) = self.angle_y.sin_cos();
        let (sz, cz) = self.angle_z.sin_cos();
        let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, cx, -sx, 0.0, sx, cx);
        let ry = Matrix3::new(cy, 0.0, sy, 0.0, 1.0, 0.0, -sy, 0.0, cy);
        let rz = Matrix3::new(cz, -sz, 0.0, sz, cz, 0.0, 0.0, 0.0, 1.0);
        rx * ry * rz
    }
}

#[derive(Debug, Clone)]
pub struct PcaResult {
    pub rotated: PointCloud,
    /// Fraction of total variance per principal axis, largest first.
    pub explained_variance_ratio: Vec<f64>,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    Ok(())
}

fn check_radius(name: &str, r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid(format!("{name} must be positive, got {r}")));
    }
    Ok(())
}

fn uniform_sym<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(-1.0..=1.0)
}

/// `n` copies of a uniform draw on `[-1, 1]`, placed on the diagonal `(a, a, a)`.
pub fn sample_line(n: usize, seed: u64) -> Result<PointCloud> {
    check_n(n)?;
    let mut rng = rng::stream(seed, streams::LINE);
    let mut data = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let a = uniform_sym(&mut rng);
        data.extend([a, a, a]);
    }
    PointCloud::new(data, n, 3)
}

/// Independent uniforms on `[-1, 1]` for the first two coordinates, third zero.
pub fn sample_plane(n: usize, seed: u64) -> Result<PointCloud> {
    check_n(n)?;
    let mut rng = rng::stream(seed, streams::PLANE);
    let mut data = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let a = uniform_sym(&mut rng);
        let b = uniform_sym(&mut rng);
        data.extend([a, b, 0.0]);
    }
    PointCloud::new(data, n, 3)
}

fn unit_direction<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        // a zero vector has probability zero but would divide by zero
        if norm > 1e-300 {
            return [v[0] / norm, v[1] / norm, v[2] / norm];
        }
    }
}

/// Uniform on the sphere of the given radius centred at the origin.
pub fn sample_sphere(n: usize, radius: f64, seed: u64) -> Result<PointCloud> {
    check_n(n)?;
    check_radius("radius", radius)?;
    let mut rng = rng::stream(seed, streams::SPHERE);
    let mut data = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let u = unit_direction(&mut rng);
        data.extend(u.iter().map(|c| c * radius));
    }
    PointCloud::new(data, n, 3)
}

/// Uniform in the volume of the ball of the given radius.
pub fn sample_ball(n: usize, radius: f64, seed: u64) -> Result<PointCloud> {
    check_n(n)?;
    check_radius("radius", radius)?;
    let mut rng = rng::stream(seed, streams::BALL);
    let mut data = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let u = unit_direction(&mut rng);
        let r = radius * rng.gen::<f64>().cbrt();
        data.extend(u.iter().map(|c| c * r));
    }
    PointCloud::new(data, n, 3)
}

/// Density used for points on a torus surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceMeasure {
    /// Uniform with respect to surface area.
    #[default]
    AreaUniform,
    /// Both torus angles uniform; oversamples the inner rim.
    AngleUniform,
}

/// Torus around the z axis with tube centre-line radius `major_r` and tube
/// radius `minor_r`.
///
/// `hollow` samples the surface with area-uniform density: angles are drawn
/// uniformly and accepted with probability `(R + r cos v) / (R + r)`.
/// Otherwise the solid tube is sampled uniformly by rejection from its
/// bounding box.
pub fn sample_torus(
    n: usize,
    major_r: f64,
    minor_r: f64,
    hollow: bool,
    seed: u64,
) -> Result<PointCloud> {
    sample_torus_with(n, major_r, minor_r, hollow, SurfaceMeasure::AreaUniform, seed)
}

/// [`sample_torus`] with an explicit surface measure (ignored for solid tori).
pub fn sample_torus_with(
    n: usize,
    major_r: f64,
    minor_r: f64,
    hollow: bool,
    measure: SurfaceMeasure,
    seed: u64,
) -> Result<PointCloud> {
    check_n(n)?;
    check_radius("minor radius", minor_r)?;
    check_radius("major radius", major_r)?;
    if minor_r >= major_r {
        return Err(Error::invalid(format!(
            "minor radius {minor_r} must be smaller than major radius {major_r}"
        )));
    }
    let mut data = Vec::with_capacity(3 * n);
    if hollow {
        let mut rng = rng::stream(seed, streams::TORUS_HOLLOW);
        while data.len() < 3 * n {
            let u = rng.gen::<f64>() * TAU;
            let v = rng.gen::<f64>() * TAU;
            let w = rng.gen::<f64>();
            let ring = major_r + minor_r * v.cos();
            if measure == SurfaceMeasure::AngleUniform || w * (major_r + minor_r) <= ring {
                data.extend([ring * u.cos(), ring * u.sin(), minor_r * v.sin()]);
            }
        }
    } else {
        let mut rng = rng::stream(seed, streams::TORUS_SOLID);
        let outer = major_r + minor_r;
        while data.len() < 3 * n {
            let x = rng.gen_range(-outer..=outer);
            let y = rng.gen_range(-outer..=outer);
            let z = rng.gen_range(-minor_r..=minor_r);
            let rho = (x * x + y * y).sqrt() - major_r;
            if rho * rho + z * z <= minor_r * minor_r {
                data.extend([x, y, z]);
            }
        }
    }
    PointCloud::new(data, n, 3)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Points on the `(p, q)` torus knot
/// `phi -> ((2 + cos q phi) cos p phi, (2 + cos q phi) sin p phi, sin q phi)`
/// with `phi` uniform on `[0, 2 pi)`. `(2, 3)` is the trefoil.
pub fn sample_torus_knot(n: usize, p: u32, q: u32, seed: u64) -> Result<PointCloud> {
    check_n(n)?;
    if p == 0 || q == 0 {
        return Err(Error::invalid("knot parameters p and q must be positive"));
    }
    if gcd(p as u64, q as u64) != 1 {
        return Err(Error::invalid(format!(
            "p = {p} and q = {q} are not coprime, the curve is not a knot"
        )));
    }
    let (p, q) = (p as f64, q as f64);
    let mut rng = rng::stream(seed, streams::TORUS_KNOT);
    let mut data = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let phi = rng.gen::<f64>() * TAU;
        let ring = 2.0 + (q * phi).cos();
        data.extend([ring * (p * phi).cos(), ring * (p * phi).sin(), (q * phi).sin()]);
    }
    PointCloud::new(data, n, 3)
}

/// Rigid rotation of a 3-column cloud.
pub fn rotate_euler(cloud: &PointCloud, spec: RotationSpec) -> Result<PointCloud> {
    if cloud.d() != 3 {
        return Err(Error::invalid(format!(
            "euler rotation needs 3 columns, cloud has {}",
            cloud.d()
        )));
    }
    if ![spec.angle_x, spec.angle_y, spec.angle_z]
        .iter()
        .all(|a| a.is_finite())
    {
        return Err(Error::invalid("rotation angles must be finite"));
    }
    let m = spec.matrix();
    cloud.map_rows(3, |src, dst| {
        let v = m * Vector3::new(src[0], src[1], src[2]);
        dst.copy_from_slice(v.as_slice());
    })
}

/// Rotates the centred cloud onto the eigenvectors of its sample covariance,
/// largest eigenvalue first.
///
/// Eigenvector signs are fixed so that each axis' largest-magnitude loading is
/// positive, which makes the output deterministic.
pub fn pca_rotate(cloud: &PointCloud) -> Result<PcaResult> {
    let (n, d) = (cloud.n(), cloud.d());
    if n < 2 {
        return Err(Error::invalid("PCA needs at least two samples"));
    }
    let means = cloud.column_means();
    let centred = DMatrix::from_fn(n, d, |t, j| cloud.get(t, j) - means[j]);
    let cov = (centred.transpose() * &centred) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("covariance eigenvalues are finite")
            .then(a.cmp(&b))
    });
    let mut basis = DMatrix::zeros(d, d);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).clone_owned();
        let lead = v
            .iter()
            .copied()
            .fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if lead < 0.0 {
            v.neg_mut();
        }
        basis.set_column(col, &v);
    }
    let projected = centred * basis;
    let mut data = Vec::with_capacity(n * d);
    for t in 0..n {
        data.extend((0..d).map(|j| projected[(t, j)]));
    }
    let rotated = PointCloud::new(data, n, d)?;

    let eigvals: Vec<f64> = order
        .iter()
        .map(|&i| eig.eigenvalues[i].max(0.0))
        .collect();
    let total: f64 = eigvals.iter().sum();
    let explained_variance_ratio = if total > 0.0 {
        eigvals.iter().map(|v| v / total).collect()
    } else {
        vec![0.0; d]
    };
    Ok(PcaResult {
        rotated,
        explained_variance_ratio,
    })
}

/// Quarter-turn rotation about every axis, applied to the torus and knot shapes.
pub fn quarter_turn() -> RotationSpec {
    RotationSpec::uniform(PI / 4.0)
}
