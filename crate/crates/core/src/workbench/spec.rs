//! Sweep configuration: a TOML document mirroring [`SweepSpec`].
//!
//! ```toml
//! scenario = "cap2d"          # upa-dipole | upa-patch | ula | cap2d | cap1d
//! channel = "scalar"          # scalar | dyadic1 | dyadic2 | dyadic3
//! method = "closed"           # direct | closed | quadrature | grid | threshold
//! length_unit = "m"           # m | lambda
//! frequency_hz = 30e9
//! seed = 7
//! compare = "quadrature"      # optional second method on the same grid
//! budget_s = 60.0             # optional per-point time budget
//!
//! [sweep]
//! variable = "LtV"            # D | L | Lt | Lr | LtV | LrV | M | Ms
//! start = 0.5
//! stop = 3.0
//! steps = 6
//!
//! [fixed]
//! D = 8.0
//! LtH = 1.0
//! LrH = 1.0
//! LrV = 1.5
//!
//! [coupling]                  # optional; dipole arrays with method = "direct"
//! load_re = 50.0
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelKind, PolarizationSet};
use crate::closedform::{DEFAULT_REPLICATES, DEFAULT_SAMPLES};
use crate::coupling::CouplingParams;
use crate::edof::DEFAULT_THRESHOLD;
use crate::error::{Error, Result};
use crate::geometry::WaveParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    UpaDipole,
    UpaPatch,
    Ula,
    Cap2d,
    Cap1d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    Scalar,
    Dyadic1,
    Dyadic2,
    Dyadic3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Direct,
    Closed,
    Quadrature,
    Grid,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    D,
    /// Every side of both ends.
    L,
    /// Both sides of the transmitter.
    Lt,
    /// Both sides of the receiver.
    Lr,
    LtV,
    LrV,
    /// Antennas per side (UPA) or per array (ULA), both ends.
    M,
    /// Monte-Carlo samples per aperture, both ends.
    Ms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LengthUnit {
    #[serde(rename = "m")]
    Meter,
    #[serde(rename = "lambda")]
    Wavelength,
}

macro_rules! names {
    ($t:ty { $($v:ident => $s:literal),* $(,)? }) => {
        impl $t {
            pub fn name(&self) -> &'static str {
                match self { $(Self::$v => $s),* }
            }
        }
        impl std::str::FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok(Self::$v),)*
                    _ => Err(Error::Config(format!("unknown {} {s:?}", stringify!($t).to_lowercase()))),
                }
            }
        }
    };
}

names!(Scenario { UpaDipole => "upa-dipole", UpaPatch => "upa-patch", Ula => "ula", Cap2d => "cap2d", Cap1d => "cap1d" });
names!(Channel { Scalar => "scalar", Dyadic1 => "dyadic1", Dyadic2 => "dyadic2", Dyadic3 => "dyadic3" });
names!(Method { Direct => "direct", Closed => "closed", Quadrature => "quadrature", Grid => "grid", Threshold => "threshold" });
names!(SweepVariable { D => "D", L => "L", Lt => "Lt", Lr => "Lr", LtV => "LtV", LrV => "LrV", M => "M", Ms => "Ms" });

impl Channel {
    pub fn kind(&self) -> ChannelKind {
        match self {
            Channel::Scalar => ChannelKind::Scalar,
            Channel::Dyadic1 => ChannelKind::Dyadic(PolarizationSet::single()),
            Channel::Dyadic2 => ChannelKind::Dyadic(PolarizationSet::double()),
            Channel::Dyadic3 => ChannelKind::Dyadic(PolarizationSet::triple()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepRange {
    pub fn value(&self, index: usize) -> f64 {
        if self.steps <= 1 {
            self.start
        } else {
            self.start + (self.stop - self.start) * index as f64 / (self.steps - 1) as f64
        }
    }
}

/// Coupling model settings; lengths are in the spec's length unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingSpec {
    pub load_re: f64,
    pub load_im: f64,
    pub eta: f64,
    pub euler_gamma: f64,
    /// Defaults to 0.1 wavelength.
    pub dipole_length: Option<f64>,
    /// Defaults to 1e-5 wavelength.
    pub wire_radius: Option<f64>,
}

impl Default for CouplingSpec {
    fn default() -> Self {
        Self {
            load_re: 50.0,
            load_im: 0.0,
            eta: 120.0 * PI,
            euler_gamma: 0.577,
            dipole_length: None,
            wire_radius: None,
        }
    }
}

impl CouplingSpec {
    pub fn params(&self, wave: &WaveParams, unit: f64) -> CouplingParams {
        let base = CouplingParams::defaults(wave);
        CouplingParams {
            load: Complex64::new(self.load_re, self.load_im),
            eta: self.eta,
            euler_gamma: self.euler_gamma,
            dipole_length: self.dipole_length.map_or(base.dipole_length, |v| v * unit),
            wire_radius: self.wire_radius.map_or(base.wire_radius, |v| v * unit),
        }
    }
}

fn default_unit() -> LengthUnit {
    LengthUnit::Wavelength
}

fn default_frequency() -> f64 {
    30e9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub channel: Channel,
    pub method: Method,
    pub sweep: SweepRange,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    #[serde(default = "default_unit")]
    pub length_unit: LengthUnit,
    #[serde(default = "default_frequency")]
    pub frequency_hz: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_s: Option<f64>,
}

/// Keys accepted under `[fixed]`. Lengths are in the length unit.
pub const FIXED_KEYS: &[&str] = &[
    "D", "L", "Lt", "Lr", "LtH", "LtV", "LrH", "LrV", "M", "N", "MH", "MV", "NH", "NV", "A", "AH", "AV", "Ms", "Ns",
    "order", "density", "threshold", "replicates", "check_convergence",
];

/// Fully resolved parameters of one sweep point; lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub distance: f64,
    pub lt_h: f64,
    pub lt_v: f64,
    pub lr_h: f64,
    pub lr_v: f64,
    pub mh: usize,
    pub mv: usize,
    pub nh: usize,
    pub nv: usize,
    pub ah: f64,
    pub av: f64,
    pub ms: usize,
    pub ns: usize,
    pub order: Option<usize>,
    pub density: f64,
    pub threshold: f64,
    pub replicates: usize,
    pub check_convergence: bool,
}

fn count(name: &str, v: f64) -> Result<usize> {
    let r = v.round();
    if !(r >= 1.0) || (v - r).abs() > 1e-9 * r.max(1.0) || r > u32::MAX as f64 {
        return Err(Error::Config(format!("{name} must be a positive integer, got {v}")));
    }
    Ok(r as usize)
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SweepSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sweep specs always serialize")
    }

    pub fn wave(&self) -> Result<WaveParams> {
        WaveParams::from_frequency(self.frequency_hz).map_err(|e| Error::Config(e.to_string()))
    }

    /// Meters per configured length unit.
    pub fn unit(&self) -> Result<f64> {
        Ok(match self.length_unit {
            LengthUnit::Meter => 1.0,
            LengthUnit::Wavelength => self.wave()?.wavelength,
        })
    }

    /// Scenario/method/channel compatibility and key checks, independent of sweep values.
    pub fn validate(&self) -> Result<()> {
        use Method::*;
        use Scenario::*;
        self.wave()?;
        if self.sweep.steps == 0 {
            return Err(Error::Config("sweep.steps must be at least 1".into()));
        }
        if !self.sweep.start.is_finite() || !self.sweep.stop.is_finite() {
            return Err(Error::Config("sweep range must be finite".into()));
        }
        if let Some(k) = self.fixed.keys().find(|k| !FIXED_KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!(
                "unknown fixed parameter {k:?}; expected one of {}",
                FIXED_KEYS.join(", ")
            )));
        }
        if self.fixed.contains_key(self.sweep.variable.name()) {
            return Err(Error::Config(format!(
                "{} is both swept and fixed",
                self.sweep.variable.name()
            )));
        }
        let methods = [Some(self.method), self.compare];
        for m in methods.into_iter().flatten() {
            let ok = matches!(
                (self.scenario, m),
                (UpaDipole | Ula, Direct | Closed | Threshold) | (UpaPatch, Quadrature) | (Cap2d | Cap1d, Closed | Quadrature | Grid)
            );
            if !ok {
                return Err(Error::Config(format!(
                    "method {} is not available for scenario {}",
                    m.name(),
                    self.scenario.name()
                )));
            }
            if m == Closed && self.channel != Channel::Scalar {
                return Err(Error::Config("closed forms exist for the scalar channel only".into()));
            }
        }
        if self.coupling.is_some() && !(matches!(self.scenario, UpaDipole | Ula) && self.method == Direct && self.compare.is_none()) {
            return Err(Error::Config("coupling applies to dipole arrays with method direct and no comparison".into()));
        }
        if let Some(b) = self.budget_s {
            if !(b > 0.0) {
                return Err(Error::Config("budget_s must be positive".into()));
            }
        }
        Ok(())
    }

    /// Parameters of sweep point `index`: fixed values, then the swept value on top.
    pub fn point(&self, index: usize) -> Result<Point> {
        let unit = self.unit()?;
        let mut f = self.fixed.clone();
        f.insert(self.sweep.variable.name().to_string(), self.sweep.value(index));
        let get = |k: &str| f.get(k).copied();
        let first = |keys: &[&str]| keys.iter().find_map(|k| get(k));
        let length = |keys: &[&str]| -> Result<f64> {
            let v = first(keys).ok_or_else(|| Error::Config(format!("missing length {}", keys[0])))?;
            if !(v > 0.0) {
                return Err(Error::Config(format!("{} must be positive, got {v}", keys[0])));
            }
            Ok(v * unit)
        };
        let ula = self.scenario == Scenario::Ula;
        let cap = matches!(self.scenario, Scenario::Cap2d | Scenario::Cap1d);
        let line = matches!(self.scenario, Scenario::Ula | Scenario::Cap1d);
        let (lt_v, lr_v) = (length(&["LtV", "Lt", "L"])?, length(&["LrV", "Lr", "L"])?);
        let (lt_h, lr_h) = if line {
            (0.0, 0.0)
        } else {
            (length(&["LtH", "Lt", "L"])?, length(&["LrH", "Lr", "L"])?)
        };
        let counts = |keys: &[&str]| -> Result<usize> {
            match first(keys) {
                Some(v) => count(keys[0], v),
                None => Err(Error::Config(format!("missing antenna count {}", keys[0]))),
            }
        };
        let (mh, mv, nh, nv) = if cap {
            (0, 0, 0, 0)
        } else if ula {
            (1, counts(&["MV", "M"])?, 1, counts(&["NV", "N", "M"])?)
        } else {
            (
                counts(&["MH", "M"])?,
                counts(&["MV", "M"])?,
                counts(&["NH", "N", "M"])?,
                counts(&["NV", "N", "M"])?,
            )
        };
        let (ah, av) = if self.scenario == Scenario::UpaPatch {
            (length(&["AH", "A"])?, length(&["AV", "A"])?)
        } else {
            (0.0, 0.0)
        };
        let samples = |keys: &[&str]| first(keys).map_or(Ok(DEFAULT_SAMPLES), |v| count(keys[0], v));
        Ok(Point {
            distance: length(&["D"])?,
            lt_h,
            lt_v,
            lr_h,
            lr_v,
            mh,
            mv,
            nh,
            nv,
            ah,
            av,
            ms: samples(&["Ms"])?,
            ns: samples(&["Ns", "Ms"])?,
            order: get("order").map(|v| count("order", v)).transpose()?,
            density: get("density").unwrap_or(2.0),
            threshold: get("threshold").unwrap_or(DEFAULT_THRESHOLD),
            replicates: get("replicates").map_or(Ok(DEFAULT_REPLICATES), |v| count("replicates", v))?,
            check_convergence: get("check_convergence") != Some(0.0),
        })
    }
}
