//! Point evaluation and parallel sweep execution.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::capacity::{alpha_from, AlphaReading};
use crate::channel::{assemble, LinkConfig};
use crate::closedform::{
    cap1d_edof_closed, cap2d_edof_closed, ula_edof_closed, upa_edof_closed, Cap1dClosedParams, Cap2dClosedParams,
};
use crate::coupling::coupled_edof;
use crate::edof::{
    cap_edof_dense_grid_with, cap_edof_polarized, direct_edof, edof_threshold, patch_edof, recommended_order,
    EdofMethod, EdofResult, QuadOrders,
};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, CapLine, CapPlane, PatchUpaGeometry, UlaGeometry, UpaGeometry, WaveParams};
use crate::numerics::mix_seed;

use super::spec::{Method, Point, Scenario, SweepSpec};

/// Default per-element order for patch integrals.
pub const DEFAULT_PATCH_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub swept_value: f64,
    pub spec_seed: u64,
    pub scenario: Scenario,
    pub channel: super::spec::Channel,
    pub method: Method,
    pub point: Option<Point>,
    pub edof: Option<f64>,
    pub alpha: Option<f64>,
    pub runtime_s: f64,
    pub over_budget: bool,
    pub error: Option<String>,
    pub diagnostics: BTreeMap<String, f64>,
}

fn ends(scenario: Scenario, p: &Point) -> Result<(ArrayGeometry, ArrayGeometry)> {
    Ok(match scenario {
        Scenario::UpaDipole => (
            ArrayGeometry::Upa(UpaGeometry::new(p.mh, p.mv, p.lt_h, p.lt_v, 0.0)?),
            ArrayGeometry::Upa(UpaGeometry::new(p.nh, p.nv, p.lr_h, p.lr_v, 0.0)?),
        ),
        Scenario::UpaPatch => (
            ArrayGeometry::PatchUpa(PatchUpaGeometry::new(UpaGeometry::new(p.mh, p.mv, p.lt_h, p.lt_v, 0.0)?, p.ah, p.av)?),
            ArrayGeometry::PatchUpa(PatchUpaGeometry::new(UpaGeometry::new(p.nh, p.nv, p.lr_h, p.lr_v, 0.0)?, p.ah, p.av)?),
        ),
        Scenario::Ula => (
            ArrayGeometry::Ula(UlaGeometry::new(p.mv, p.lt_v, 0.0)?),
            ArrayGeometry::Ula(UlaGeometry::new(p.nv, p.lr_v, 0.0)?),
        ),
        Scenario::Cap2d => (
            ArrayGeometry::CapPlane(CapPlane::new(p.lt_h, p.lt_v, 0.0)?),
            ArrayGeometry::CapPlane(CapPlane::new(p.lr_h, p.lr_v, 0.0)?),
        ),
        Scenario::Cap1d => (
            ArrayGeometry::CapLine(CapLine::new(p.lt_v, 0.0)?),
            ArrayGeometry::CapLine(CapLine::new(p.lr_v, 0.0)?),
        ),
    })
}

/// Evaluate one resolved point with `method`; `seed` drives any sampling.
pub fn evaluate(spec: &SweepSpec, method: Method, p: &Point, seed: u64) -> Result<EdofResult> {
    let wave: WaveParams = spec.wave()?;
    let kind = spec.channel.kind();
    let (tx, rx) = ends(spec.scenario, p)?;
    let link = LinkConfig::new(tx, rx, p.distance, wave)?;
    match (spec.scenario, method) {
        (Scenario::UpaDipole | Scenario::Ula, Method::Direct) => match &spec.coupling {
            Some(c) => coupled_edof(&link, &kind, &c.params(&wave, spec.unit()?)),
            None => direct_edof(&link, &kind),
        },
        (Scenario::UpaDipole, Method::Closed) => upa_edof_closed(&link),
        (Scenario::Ula, Method::Closed) => ula_edof_closed(&link),
        (Scenario::UpaDipole | Scenario::Ula, Method::Threshold) => {
            let h = assemble(&link, &kind)?;
            let n = edof_threshold(&h.matrix, p.threshold)?;
            Ok(EdofResult::new(n as f64, EdofMethod::Threshold).with("threshold", p.threshold))
        }
        (Scenario::UpaPatch, Method::Quadrature) => {
            patch_edof(&link, &kind, p.order.unwrap_or(DEFAULT_PATCH_ORDER), p.check_convergence)
        }
        (Scenario::Cap2d | Scenario::Cap1d, Method::Quadrature) => {
            let orders = match p.order {
                Some(o) => QuadOrders::uniform(o),
                None => QuadOrders {
                    outer: recommended_order(p.lt_h.max(p.lt_v), wave.wavelength),
                    inner: recommended_order(p.lr_h.max(p.lr_v), wave.wavelength),
                    check_convergence: true,
                },
            };
            let orders = QuadOrders {
                check_convergence: p.check_convergence,
                ..orders
            };
            let pols = kind.polarization_set();
            cap_edof_polarized(&tx, &rx, p.distance, &wave, &pols, orders)
        }
        (Scenario::Cap2d | Scenario::Cap1d, Method::Grid) => {
            cap_edof_dense_grid_with(&tx, &rx, p.distance, &wave, p.density, &kind)
        }
        (Scenario::Cap2d, Method::Closed) => {
            let c = Cap2dClosedParams::new(p.lt_h, p.lt_v, p.lr_h, p.lr_v, p.distance, wave.wavenumber)?
                .with_samples(p.ms, p.ns)
                .with_seed(seed)
                .with_replicates(p.replicates);
            Ok(cap2d_edof_closed(&c)?.to_edof())
        }
        (Scenario::Cap1d, Method::Closed) => {
            let c = Cap1dClosedParams::new(p.lt_v, p.lr_v, p.distance, wave.wavenumber)?
                .with_samples(p.ms, p.ns)
                .with_seed(seed)
                .with_replicates(p.replicates);
            Ok(cap1d_edof_closed(&c)?.to_edof())
        }
        (s, m) => Err(Error::Config(format!(
            "method {} is not available for scenario {}",
            m.name(),
            s.name()
        ))),
    }
}

fn run_point(spec: &SweepSpec, method: Method, index: usize) -> SweepRow {
    let started = Instant::now();
    let point = spec.point(index);
    let outcome = match &point {
        Ok(p) => evaluate(spec, method, p, mix_seed(spec.seed, index as u64)),
        Err(e) => Err(Error::Config(e.to_string())),
    };
    let runtime_s = started.elapsed().as_secs_f64();
    let (edof, alpha, error, diagnostics) = match outcome {
        Ok(r) => {
            let alpha = alpha_from(&r, AlphaReading::default()).ok();
            (Some(r.value), alpha, None, r.diagnostics)
        }
        Err(e) => (None, None, Some(e.to_string()), BTreeMap::new()),
    };
    SweepRow {
        index,
        swept_value: spec.sweep.value(index),
        spec_seed: spec.seed,
        scenario: spec.scenario,
        channel: spec.channel,
        method,
        point: point.ok(),
        edof,
        alpha,
        runtime_s,
        over_budget: spec.budget_s.is_some_and(|b| runtime_s > b),
        error,
        diagnostics,
    }
}

fn run_method(spec: &SweepSpec, method: Method) -> Vec<SweepRow> {
    (0..spec.sweep.steps)
        .into_par_iter()
        .map(|i| run_point(spec, method, i))
        .collect()
}

/// Evaluate every point of the spec's grid; failures land in the row's error field.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(run_method(spec, spec.method))
}

/// [`run_sweep`] inside a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(spec: &SweepSpec, threads: usize) -> Result<Vec<SweepRow>> {
    pool(threads)?.install(|| run_sweep(spec))
}

pub(crate) fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Relative difference of two methods at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub index: usize,
    pub swept_value: f64,
    pub edof_a: Option<f64>,
    pub edof_b: Option<f64>,
    /// $|a - b| / |a|$ with `a` the primary method.
    pub rel_diff: Option<f64>,
}

pub fn compare_rows(a: &[SweepRow], b: &[SweepRow]) -> Vec<ComparisonRow> {
    a.iter()
        .zip(b)
        .map(|(x, y)| ComparisonRow {
            index: x.index,
            swept_value: x.swept_value,
            edof_a: x.edof,
            edof_b: y.edof,
            rel_diff: match (x.edof, y.edof) {
                (Some(p), Some(q)) if p != 0.0 => Some((p - q).abs() / p.abs()),
                _ => None,
            },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Rows of the `compare` method, if requested.
    pub compare_rows: Vec<SweepRow>,
    pub comparison: Vec<ComparisonRow>,
}

/// Run the primary method and, when `compare` is set, the second method on the same grid.
pub fn run_with_comparison(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let rows = run_method(spec, spec.method);
    let (compare_rows, comparison) = match spec.compare {
        Some(m) => {
            let other = run_method(spec, m);
            let cmp = compare_rows(&rows, &other);
            (other, cmp)
        }
        None => (Vec::new(), Vec::new()),
    };
    Ok(SweepOutcome {
        rows,
        compare_rows,
        comparison,
    })
}
