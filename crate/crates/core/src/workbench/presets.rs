//! Sweep bundles that regenerate the data behind each evaluation figure.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::spec::{Channel, CouplingSpec, LengthUnit, Method, Scenario, SweepRange, SweepSpec, SweepVariable};

pub const PRESET_NAMES: [&str; 7] = ["fig1", "fig3", "fig4", "fig5", "fig8", "fig10", "fig11"];

/// One sweep of a preset bundle; `label` names its output file.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedSweep {
    pub label: String,
    pub spec: SweepSpec,
}

struct Builder {
    scenario: Scenario,
    channel: Channel,
    method: Method,
    unit: LengthUnit,
    sweep: SweepRange,
    fixed: BTreeMap<String, f64>,
}

fn build(scenario: Scenario, channel: Channel, method: Method, variable: SweepVariable, range: (f64, f64, usize)) -> Builder {
    Builder {
        scenario,
        channel,
        method,
        unit: LengthUnit::Wavelength,
        sweep: SweepRange {
            variable,
            start: range.0,
            stop: range.1,
            steps: range.2,
        },
        fixed: BTreeMap::new(),
    }
}

impl Builder {
    fn fix(mut self, key: &str, v: f64) -> Self {
        self.fixed.insert(key.into(), v);
        self
    }

    fn meters(mut self) -> Self {
        self.unit = LengthUnit::Meter;
        self
    }

    fn spec(self) -> SweepSpec {
        SweepSpec {
            scenario: self.scenario,
            channel: self.channel,
            method: self.method,
            sweep: self.sweep,
            fixed: self.fixed,
            length_unit: self.unit,
            frequency_hz: 30e9,
            seed: 1,
            coupling: None,
            compare: None,
            budget_s: None,
        }
    }

    fn named(self, label: impl Into<String>) -> NamedSweep {
        NamedSweep {
            label: label.into(),
            spec: self.spec(),
        }
    }
}

fn polarized(channel: Channel) -> &'static str {
    match channel {
        Channel::Scalar => "scalar",
        Channel::Dyadic1 => "single",
        Channel::Dyadic2 => "double",
        Channel::Dyadic3 => "dyadic",
    }
}

/// The sweep bundle for a named figure.
pub fn figure_preset(name: &str) -> Result<Vec<NamedSweep>> {
    use Channel::*;
    use Method::*;
    use Scenario::*;
    use SweepVariable as V;
    let both = [Scalar, Dyadic3];
    let out = match name {
        // dipole UPAs of growing density and the CAP limit, 10λ squares, over distance
        "fig1" => {
            let mut v = Vec::new();
            for ch in both {
                for m in [5.0, 10.0, 20.0] {
                    v.push(
                        build(UpaDipole, ch, Direct, V::D, (6.0, 50.0, 12))
                            .fix("L", 10.0)
                            .fix("M", m)
                            .named(format!("upa_m{m}_{}", polarized(ch))),
                    );
                }
                v.push(
                    build(Cap2d, ch, Grid, V::D, (6.0, 50.0, 12))
                        .fix("L", 10.0)
                        .fix("density", 2.0)
                        .named(format!("cap_{}", polarized(ch))),
                );
            }
            v
        }
        // square CAP planes over distance, closed form against quadrature
        "fig3" => [4.0, 10.0]
            .into_iter()
            .map(|l| {
                let mut s = build(Cap2d, Scalar, Closed, V::D, (10.0, 50.0, 9)).fix("L", l).spec();
                s.compare = Some(Quadrature);
                NamedSweep {
                    label: format!("cap_l{l}"),
                    spec: s,
                }
            })
            .collect(),
        // rectangles: transmit vertical side swept, 1 m × 1.5 m receiver at 8 m
        "fig4" => vec![build(Cap2d, Scalar, Closed, V::LtV, (0.5, 3.0, 6))
            .meters()
            .fix("D", 8.0)
            .fix("LtH", 1.0)
            .fix("LrH", 1.0)
            .fix("LrV", 1.5)
            .named("cap_rect")],
        // thin dipoles against λ/2 patches per antennas per side, 10λ squares at 10λ
        "fig5" => {
            let mut v = Vec::new();
            for ch in both {
                v.push(
                    build(UpaDipole, ch, Direct, V::M, (3.0, 19.0, 9))
                        .fix("L", 10.0)
                        .fix("D", 10.0)
                        .named(format!("dipole_{}", polarized(ch))),
                );
                v.push(
                    build(UpaPatch, ch, Quadrature, V::M, (3.0, 19.0, 9))
                        .fix("L", 10.0)
                        .fix("D", 10.0)
                        .fix("A", 0.5)
                        .fix("order", 2.0)
                        .fix("check_convergence", 0.0)
                        .named(format!("patch_{}", polarized(ch))),
                );
            }
            v
        }
        // plane against line at equal aperture (plane diagonal = line length), 20 m
        "fig8" => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            vec![
                build(Cap2d, Scalar, Closed, V::L, (s, 4.0 * s, 7)).meters().fix("D", 20.0).named("plane"),
                build(Cap1d, Scalar, Closed, V::L, (1.0, 4.0, 7)).meters().fix("D", 20.0).named("line"),
            ]
        }
        // one, two and three polarizations on square planes at 6λ
        "fig10" => [Scalar, Dyadic2, Dyadic3]
            .into_iter()
            .map(|ch| {
                build(Cap2d, ch, Quadrature, V::L, (2.0, 12.0, 6))
                    .fix("D", 6.0)
                    .fix("check_convergence", 0.0)
                    .named(format!("cap_{}", ["single", "double", "triple"][ch.kind().polarizations() - 1]))
            })
            .collect(),
        // mutual coupling: 2λ squares at 1λ, with and without coupling
        "fig11" => {
            let mut v = Vec::new();
            for ch in both {
                for coupled in [false, true] {
                    let mut s = build(UpaDipole, ch, Direct, V::M, (2.0, 19.0, 18))
                        .fix("L", 2.0)
                        .fix("D", 1.0)
                        .spec();
                    if coupled {
                        s.coupling = Some(CouplingSpec::default());
                    }
                    let tag = if coupled { "coupled" } else { "uncoupled" };
                    v.push(NamedSweep {
                        label: format!("{tag}_{}", polarized(ch)),
                        spec: s,
                    });
                }
            }
            v
        }
        other => {
            return Err(Error::Argument(format!(
                "unknown figure preset {other:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(out)
}
