//! Scalar and dyadic free-space Green's functions.
//!
//! $G(\mathbf r,\mathbf s) = e^{-j\kappa_0 d}/(4\pi d)$ with $d = |\mathbf r - \mathbf s|$.
//! The dyadic entries are $G^{pq} = \eta(p,q)\,G$ with the closed coefficients
//!
//! $$\eta(p,p) = 1 - a_p^2 + \frac{j - 3j a_p^2}{\kappa_0 d} + \frac{3a_p^2 - 1}{\kappa_0^2 d^2},\qquad
//! \eta(p,q) = \Big(\frac{3}{\kappa_0^2 d^2} - \frac{3j}{\kappa_0 d} - 1\Big) a_p a_q,$$
//!
//! where $\mathbf a$ is the unit vector from `s` to `r`. These are the
//! coefficients as published; their $1/(\kappa_0 d)$ terms carry the sign that
//! $(\mathbf I + \nabla\nabla/\kappa_0^2)$ produces for an $e^{+j\kappa_0 d}$ phase.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point3, WaveParams};

/// Fraction of a wavelength below which two points count as coincident.
pub const SINGULARITY_GUARD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    X,
    Y,
    Z,
}

impl Polarization {
    pub fn index(self) -> usize {
        match self {
            Polarization::X => 0,
            Polarization::Y => 1,
            Polarization::Z => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicSample {
    pub g: [[Complex64; 3]; 3],
    pub source: Point3,
    pub receive: Point3,
    pub distance: f64,
    pub direction: [f64; 3],
}

impl DyadicSample {
    pub fn entry(&self, p: Polarization, q: Polarization) -> Complex64 {
        self.g[p.index()][q.index()]
    }
}

fn separation(r: &Point3, s: &Point3, w: &WaveParams) -> Result<(f64, [f64; 3])> {
    let v = [r.x - s.x, r.y - s.y, r.z - s.z];
    let d = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let guard = SINGULARITY_GUARD * w.wavelength;
    if !(d >= guard) {
        return Err(Error::Singularity { distance: d, guard });
    }
    Ok((d, v))
}

/// Scalar kernel from a precomputed distance; no guard.
#[inline]
pub fn scalar_kernel(distance: f64, wavenumber: f64) -> Complex64 {
    let (s, c) = (wavenumber * distance).sin_cos();
    Complex64::new(c, -s) / (4.0 * PI * distance)
}

/// Coefficient matrix $\eta(p,q)$ for unit direction `a` and phase $\kappa_0 d$; no guard.
#[inline]
pub fn eta_matrix(a: [f64; 3], kd: f64) -> [[Complex64; 3]; 3] {
    let inv = 1.0 / kd;
    let inv2 = inv * inv;
    let mut eta = [[Complex64::new(0.0, 0.0); 3]; 3];
    let off = Complex64::new(3.0 * inv2 - 1.0, -3.0 * inv);
    for p in 0..3 {
        for q in 0..3 {
            let aa = a[p] * a[q];
            eta[p][q] = if p == q {
                Complex64::new(1.0 - aa + (3.0 * aa - 1.0) * inv2, (1.0 - 3.0 * aa) * inv)
            } else {
                off * aa
            };
        }
    }
    eta
}

pub fn scalar_green(r: &Point3, s: &Point3, w: &WaveParams) -> Result<Complex64> {
    let (d, _) = separation(r, s, w)?;
    Ok(scalar_kernel(d, w.wavenumber))
}

pub fn dyadic_green(r: &Point3, s: &Point3, w: &WaveParams) -> Result<DyadicSample> {
    let (d, v) = separation(r, s, w)?;
    let a = [v[0] / d, v[1] / d, v[2] / d];
    let g0 = scalar_kernel(d, w.wavenumber);
    let mut g = eta_matrix(a, w.wavenumber * d);
    for row in g.iter_mut() {
        for e in row.iter_mut() {
            *e *= g0;
        }
    }
    Ok(DyadicSample {
        g,
        source: *s,
        receive: *r,
        distance: d,
        direction: a,
    })
}
