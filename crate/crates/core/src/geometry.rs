//! Transceiver layouts: dipole UPA/ULA, continuous planes and lines, patch arrays.
//!
//! Discrete positions follow the row-by-row convention
//! $\mathbf r_m = (-L_H/2 + i\Delta_H,\ -L_V/2 + j\Delta_V,\ z)$ with
//! $i = (m-1) \bmod M_H$, $j = \lfloor (m-1)/M_H \rfloor$, $\Delta = L/M$. The first
//! element sits at the corner, so the array spans $[-L/2, L/2-\Delta]$. Set
//! `centered` to shift by $\Delta/2$ for an array symmetric about the axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub frequency: f64,
    pub wavelength: f64,
    pub wavenumber: f64,
}

impl WaveParams {
    pub fn from_frequency(frequency: f64) -> Result<Self> {
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(Error::Argument(format!("frequency must be positive, got {frequency}")));
        }
        Ok(Self::build(frequency, SPEED_OF_LIGHT / frequency))
    }

    pub fn from_wavelength(wavelength: f64) -> Result<Self> {
        if !(wavelength > 0.0) || !wavelength.is_finite() {
            return Err(Error::Argument(format!("wavelength must be positive, got {wavelength}")));
        }
        Ok(Self::build(SPEED_OF_LIGHT / wavelength, wavelength))
    }

    fn build(frequency: f64, wavelength: f64) -> Self {
        Self {
            frequency,
            wavelength,
            wavenumber: 2.0 * std::f64::consts::PI / wavelength,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("{name} must be positive and finite, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpaGeometry {
    pub count_h: usize,
    pub count_v: usize,
    pub side_h: f64,
    pub side_v: f64,
    pub z: f64,
    pub centered: bool,
}

impl UpaGeometry {
    pub fn new(count_h: usize, count_v: usize, side_h: f64, side_v: f64, z: f64) -> Result<Self> {
        let g = Self {
            count_h,
            count_v,
            side_h,
            side_v,
            z,
            centered: false,
        };
        g.validate()?;
        Ok(g)
    }

    /// Square array: equal counts and equal sides on both axes.
    pub fn square(count: usize, side: f64, z: f64) -> Result<Self> {
        Self::new(count, count, side, side, z)
    }

    pub fn centered(mut self, on: bool) -> Self {
        self.centered = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.count_h == 0 || self.count_v == 0 {
            return Err(Error::Argument("UPA needs at least one antenna per axis".into()));
        }
        positive("UPA horizontal side", self.side_h)?;
        positive("UPA vertical side", self.side_v)?;
        if !self.z.is_finite() {
            return Err(Error::Argument("UPA plane offset must be finite".into()));
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count_h * self.count_v
    }

    pub fn spacing_h(&self) -> f64 {
        self.side_h / self.count_h as f64
    }

    pub fn spacing_v(&self) -> f64 {
        self.side_v / self.count_v as f64
    }

    pub fn diagonal_aperture(&self) -> f64 {
        self.side_h.hypot(self.side_v)
    }

    /// Row and column of the zero-based antenna index.
    pub fn grid_index(&self, m: usize) -> (usize, usize) {
        (m % self.count_h, m / self.count_h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlaGeometry {
    pub count: usize,
    pub length: f64,
    pub z: f64,
    pub centered: bool,
}

impl UlaGeometry {
    pub fn new(count: usize, length: f64, z: f64) -> Result<Self> {
        let g = Self {
            count,
            length,
            z,
            centered: false,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn centered(mut self, on: bool) -> Self {
        self.centered = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Argument("ULA needs at least one antenna".into()));
        }
        positive("ULA length", self.length)?;
        if !self.z.is_finite() {
            return Err(Error::Argument("ULA offset must be finite".into()));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.count as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapPlane {
    pub side_h: f64,
    pub side_v: f64,
    pub z: f64,
}

impl CapPlane {
    pub fn new(side_h: f64, side_v: f64, z: f64) -> Result<Self> {
        positive("plane horizontal side", side_h)?;
        positive("plane vertical side", side_v)?;
        Ok(Self { side_h, side_v, z })
    }

    pub fn square(side: f64, z: f64) -> Result<Self> {
        Self::new(side, side, z)
    }

    pub fn area(&self) -> f64 {
        self.side_h * self.side_v
    }
}

/// Segment along the y axis, centered on the z axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapLine {
    pub length: f64,
    pub z: f64,
}

impl CapLine {
    pub fn new(length: f64, z: f64) -> Result<Self> {
        positive("segment length", length)?;
        Ok(Self { length, z })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchUpaGeometry {
    pub upa: UpaGeometry,
    pub element_h: f64,
    pub element_v: f64,
}

impl PatchUpaGeometry {
    pub fn new(upa: UpaGeometry, element_h: f64, element_v: f64) -> Result<Self> {
        let g = Self {
            upa,
            element_h,
            element_v,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        self.upa.validate()?;
        positive("patch width", self.element_h)?;
        positive("patch height", self.element_v)?;
        let tol = 1e-12;
        if self.element_h > self.upa.spacing_h() * (1.0 + tol)
            || self.element_v > self.upa.spacing_v() * (1.0 + tol)
        {
            return Err(Error::Argument(format!(
                "patches {}x{} overlap: spacing is {}x{}",
                self.element_h,
                self.element_v,
                self.upa.spacing_h(),
                self.upa.spacing_v()
            )));
        }
        Ok(())
    }
}

/// Axis-aligned rectangle in a plane of constant z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub center: Point3,
    pub half_h: f64,
    pub half_v: f64,
}

impl Rect {
    pub fn area(&self) -> f64 {
        4.0 * self.half_h * self.half_v
    }
}

/// Any supported transceiver layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ArrayGeometry {
    Upa(UpaGeometry),
    Ula(UlaGeometry),
    CapPlane(CapPlane),
    CapLine(CapLine),
    PatchUpa(PatchUpaGeometry),
}

impl ArrayGeometry {
    pub fn z(&self) -> f64 {
        match self {
            ArrayGeometry::Upa(g) => g.z,
            ArrayGeometry::Ula(g) => g.z,
            ArrayGeometry::CapPlane(g) => g.z,
            ArrayGeometry::CapLine(g) => g.z,
            ArrayGeometry::PatchUpa(g) => g.upa.z,
        }
    }

    pub fn with_z(mut self, z: f64) -> Self {
        match &mut self {
            ArrayGeometry::Upa(g) => g.z = z,
            ArrayGeometry::Ula(g) => g.z = z,
            ArrayGeometry::CapPlane(g) => g.z = z,
            ArrayGeometry::CapLine(g) => g.z = z,
            ArrayGeometry::PatchUpa(g) => g.upa.z = z,
        }
        self
    }

    pub fn family(&self) -> &'static str {
        match self {
            ArrayGeometry::Upa(_) => "upa",
            ArrayGeometry::Ula(_) => "ula",
            ArrayGeometry::CapPlane(_) => "cap-plane",
            ArrayGeometry::CapLine(_) => "cap-line",
            ArrayGeometry::PatchUpa(_) => "patch-upa",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ArrayGeometry::Upa(g) => g.validate(),
            ArrayGeometry::Ula(g) => g.validate(),
            ArrayGeometry::CapPlane(g) => CapPlane::new(g.side_h, g.side_v, g.z).map(|_| ()),
            ArrayGeometry::CapLine(g) => CapLine::new(g.length, g.z).map(|_| ()),
            ArrayGeometry::PatchUpa(g) => g.validate(),
        }
    }

    /// Antenna positions for discrete layouts (patch centers for patch arrays).
    pub fn positions(&self) -> Result<Vec<Point3>> {
        match self {
            ArrayGeometry::Upa(g) => Ok(upa_positions(g)),
            ArrayGeometry::Ula(g) => Ok(ula_positions(g)),
            ArrayGeometry::PatchUpa(g) => Ok(upa_positions(&g.upa)),
            _ => Err(Error::Argument(format!(
                "{} is continuous and has no discrete positions",
                self.family()
            ))),
        }
    }

    /// Largest linear extent: the diagonal for planar layouts, the length for lines.
    pub fn aperture(&self) -> f64 {
        match self {
            ArrayGeometry::Upa(g) => g.diagonal_aperture(),
            ArrayGeometry::Ula(g) => g.length,
            ArrayGeometry::CapPlane(g) => g.side_h.hypot(g.side_v),
            ArrayGeometry::CapLine(g) => g.length,
            ArrayGeometry::PatchUpa(g) => g.upa.diagonal_aperture(),
        }
    }
}

fn axis_offset(count: usize, side: f64, centered: bool) -> impl Fn(usize) -> f64 {
    let delta = side / count as f64;
    let start = -side / 2.0 + if centered { delta / 2.0 } else { 0.0 };
    move |i| start + i as f64 * delta
}

pub fn upa_positions(g: &UpaGeometry) -> Vec<Point3> {
    let xh = axis_offset(g.count_h, g.side_h, g.centered);
    let yv = axis_offset(g.count_v, g.side_v, g.centered);
    (0..g.count())
        .map(|m| {
            let (i, j) = g.grid_index(m);
            Point3::new(xh(i), yv(j), g.z)
        })
        .collect()
}

pub fn ula_positions(g: &UlaGeometry) -> Vec<Point3> {
    let y = axis_offset(g.count, g.length, g.centered);
    (0..g.count).map(|m| Point3::new(0.0, y(m), g.z)).collect()
}

pub fn patch_regions(g: &PatchUpaGeometry) -> Result<Vec<Rect>> {
    g.validate()?;
    Ok(upa_positions(&g.upa)
        .into_iter()
        .map(|center| Rect {
            center,
            half_h: g.element_h / 2.0,
            half_v: g.element_v / 2.0,
        })
        .collect())
}

/// Conventional near/far boundary $2(a_t + a_r)^2/\lambda$.
pub fn rayleigh_distance(aperture_t: f64, aperture_r: f64, w: &WaveParams) -> Result<f64> {
    if !(aperture_t >= 0.0) || !(aperture_r >= 0.0) {
        return Err(Error::Argument("apertures must be non-negative".into()));
    }
    let a = aperture_t + aperture_r;
    Ok(2.0 * a * a / w.wavelength)
}
