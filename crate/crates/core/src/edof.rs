//! EDoF estimators.
//!
//! Every estimator here reduces to the trace ratio
//! $\varepsilon = \mathrm{tr}^2(\mathbf R)/\|\mathbf R\|_F^2$ of some matrix. For
//! continuous apertures the matrix is the quadrature-weighted channel
//! $\mathbf B_{rt} = \sqrt{w_r w_t}\,G(\mathbf r,\mathbf t)$: then
//! $\|\mathbf B\|_F^2 = \iint|G|^2$ and $\|\mathbf B^H\mathbf B\|_F^2 = \iint|K|^2$,
//! with $K$ the receive-side autocorrelation kernel, both to quadrature accuracy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::{assemble, assemble_patch_scalar, assemble_weighted, gram, ChannelKind, LinkConfig, PolarizationSet};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Point3, WaveParams};
use crate::numerics::{gauss_legendre, hermitian_eigenvalues, ComplexMatrix, QuadratureRule};

pub const DEFAULT_THRESHOLD: f64 = 0.01;
pub const DEFAULT_ORDER: usize = 24;
/// Relative change under order refinement above which a result is flagged.
pub const CONVERGENCE_TOLERANCE: f64 = 0.02;
/// Largest matrix side used for the refinement check.
pub const REFINE_MAX_SIDE: usize = 2400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdofMethod {
    TraceRatio,
    Threshold,
    CapQuadrature,
    CapDenseGrid,
    PatchQuadrature,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdofResult {
    pub value: f64,
    pub method: EdofMethod,
    pub diagnostics: BTreeMap<String, f64>,
}

impl EdofResult {
    pub fn new(value: f64, method: EdofMethod) -> Self {
        Self {
            value,
            method,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.get(key).copied()
    }

    /// True when a refinement check ran and moved the value by more than 2%.
    pub fn flagged_unconverged(&self) -> bool {
        self.diagnostic("converged") == Some(0.0)
    }
}

/// `(tr R, ||R||_F^2)` for $\mathbf R$ the smaller Gram of `h`.
pub fn trace_ratio_terms(h: &ComplexMatrix) -> Result<(f64, f64)> {
    if !h.is_finite() {
        return Err(Error::Degenerate("channel has non-finite entries".into()));
    }
    let tr = h.frobenius_norm_sq();
    if !(tr > 0.0) {
        return Err(Error::Degenerate("channel matrix is zero".into()));
    }
    let fro = gram(h).matrix.frobenius_norm_sq();
    Ok((tr, fro))
}

/// $\mathrm{tr}^2(\mathbf R)/\|\mathbf R\|_F^2$; `trace` in the diagnostics is $\|\mathbf H\|_F^2$.
pub fn edof_trace_ratio(h: &ComplexMatrix) -> Result<EdofResult> {
    let (tr, fro) = trace_ratio_terms(h)?;
    Ok(EdofResult::new(tr * tr / fro, EdofMethod::TraceRatio)
        .with("trace", tr)
        .with("rows", h.rows() as f64)
        .with("cols", h.cols() as f64))
}

/// Number of squared singular values at or above `eps` times the largest.
pub fn edof_threshold(h: &ComplexMatrix, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Argument(format!("threshold must lie in (0, 1), got {eps}")));
    }
    if !(h.frobenius_norm_sq() > 0.0) {
        return Err(Error::Degenerate("channel matrix is zero".into()));
    }
    let ev = hermitian_eigenvalues(&gram(h).matrix)?;
    let top = ev[0];
    Ok(ev.iter().filter(|&&l| l >= eps * top).count())
}

/// Trace-ratio EDoF of a discrete dipole link.
pub fn direct_edof(link: &LinkConfig, kind: &ChannelKind) -> Result<EdofResult> {
    let h = assemble(link, kind)?;
    edof_trace_ratio(&h.matrix).map(|r| r.with("polarizations", kind.polarizations() as f64))
}

/// Quadrature orders per axis: `outer` on the transmit aperture, `inner` on the receive one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadOrders {
    pub outer: usize,
    pub inner: usize,
    /// Re-evaluate at a finer order and record the relative change.
    pub check_convergence: bool,
}

impl Default for QuadOrders {
    fn default() -> Self {
        Self {
            outer: DEFAULT_ORDER,
            inner: DEFAULT_ORDER,
            check_convergence: true,
        }
    }
}

impl QuadOrders {
    pub fn uniform(order: usize) -> Self {
        Self {
            outer: order,
            inner: order,
            check_convergence: true,
        }
    }

    pub fn unchecked(mut self) -> Self {
        self.check_convergence = false;
        self
    }
}

/// Per-axis order that keeps about three nodes per wavelength, never below the default.
pub fn recommended_order(extent: f64, wavelength: f64) -> usize {
    ((3.0 * extent / wavelength).ceil() as usize).clamp(DEFAULT_ORDER, crate::numerics::quadrature::MAX_ORDER)
}

fn aperture_nodes(g: &ArrayGeometry, rule: &QuadratureRule) -> Result<Vec<(Point3, f64)>> {
    match g {
        ArrayGeometry::CapPlane(p) => Ok(rule
            .tensor_2d(-p.side_h / 2.0, p.side_h / 2.0, -p.side_v / 2.0, p.side_v / 2.0)
            .into_iter()
            .map(|(x, y, w)| (Point3::new(x, y, p.z), w))
            .collect()),
        ArrayGeometry::CapLine(l) => Ok(rule
            .mapped(-l.length / 2.0, l.length / 2.0)
            .into_iter()
            .map(|(y, w)| (Point3::new(0.0, y, l.z), w))
            .collect()),
        other => Err(Error::Argument(format!(
            "aperture integrals need CAP planes or lines, got {}",
            other.family()
        ))),
    }
}

fn grid_nodes(g: &ArrayGeometry, density: f64, wavelength: f64) -> Result<Vec<(Point3, f64)>> {
    let count = |len: f64| ((density * len / wavelength).round() as usize).max(1);
    let mid = |len: f64, n: usize, i: usize| -len / 2.0 + (i as f64 + 0.5) * len / n as f64;
    match g {
        ArrayGeometry::CapPlane(p) => {
            let (nh, nv) = (count(p.side_h), count(p.side_v));
            let w = p.area() / (nh * nv) as f64;
            Ok((0..nh * nv)
                .map(|k| (Point3::new(mid(p.side_h, nh, k % nh), mid(p.side_v, nv, k / nh), p.z), w))
                .collect())
        }
        ArrayGeometry::CapLine(l) => {
            let n = count(l.length);
            let w = l.length / n as f64;
            Ok((0..n).map(|k| (Point3::new(0.0, mid(l.length, n, k), l.z), w)).collect())
        }
        other => Err(Error::Argument(format!(
            "dense grids need CAP planes or lines, got {}",
            other.family()
        ))),
    }
}

fn aperture_link(tx: &ArrayGeometry, rx: &ArrayGeometry, distance: f64, wave: &WaveParams) -> Result<LinkConfig> {
    match tx {
        ArrayGeometry::CapPlane(_) | ArrayGeometry::CapLine(_) => LinkConfig::new(*tx, *rx, distance, *wave),
        other => Err(Error::Argument(format!(
            "aperture estimators need CAP planes or lines, got {}",
            other.family()
        ))),
    }
}

fn axes(g: &ArrayGeometry) -> u32 {
    match g {
        ArrayGeometry::CapLine(_) => 1,
        _ => 2,
    }
}

fn weighted_ratio(link: &LinkConfig, kind: &ChannelKind, outer: usize, inner: usize) -> Result<(f64, f64)> {
    let tx = aperture_nodes(&link.tx, &gauss_legendre(outer)?)?;
    let rx = aperture_nodes(&link.rx, &gauss_legendre(inner)?)?;
    let b = assemble_weighted(&rx, &tx, kind, &link.wave)?;
    let (num, den) = trace_ratio_terms(&b)?;
    Ok((num * num / den, num))
}

fn quadrature_edof(link: &LinkConfig, kind: &ChannelKind, orders: QuadOrders) -> Result<EdofResult> {
    let (value, gain) = weighted_ratio(link, kind, orders.outer, orders.inner)?;
    let mut res = EdofResult::new(value, EdofMethod::CapQuadrature)
        .with("order_outer", orders.outer as f64)
        .with("order_inner", orders.inner as f64)
        .with("polarizations", kind.polarizations() as f64)
        .with("gain_integral", gain);
    if orders.check_convergence {
        let np = kind.polarizations();
        let dims = axes(&link.tx);
        let fit = |o: usize| np * o.pow(dims) <= REFINE_MAX_SIDE;
        let mut outer = 2 * orders.outer;
        while outer > orders.outer && !fit(outer) {
            outer -= 1;
        }
        let mut inner = 2 * orders.inner;
        while inner > orders.inner && !fit(inner) {
            inner -= 1;
        }
        if outer > orders.outer || inner > orders.inner {
            let (refined, _) = weighted_ratio(link, kind, outer, inner)?;
            let change = ((refined - value) / refined).abs();
            res = res
                .with("refined_order_outer", outer as f64)
                .with("refined_order_inner", inner as f64)
                .with("refined_value", refined)
                .with("convergence_change", change)
                .with("converged", if change <= CONVERGENCE_TOLERANCE { 1.0 } else { 0.0 });
        }
    }
    Ok(res)
}

/// Scalar-channel aperture EDoF $(\iint|G|^2)^2 / \iint\!\!\iint|K|^2$ by tensor Gauss-Legendre.
pub fn cap_edof_scalar_quadrature(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    distance: f64,
    wave: &WaveParams,
    orders: QuadOrders,
) -> Result<EdofResult> {
    let link = aperture_link(tx, rx, distance, wave)?;
    quadrature_edof(&link, &ChannelKind::Scalar, orders)
}

/// Polarized aperture EDoF; a single polarization is the scalar channel.
pub fn cap_edof_polarized(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    distance: f64,
    wave: &WaveParams,
    pols: &PolarizationSet,
    orders: QuadOrders,
) -> Result<EdofResult> {
    if pols.len() == 1 {
        return cap_edof_scalar_quadrature(tx, rx, distance, wave, orders);
    }
    let link = aperture_link(tx, rx, distance, wave)?;
    quadrature_edof(&link, &ChannelKind::Dyadic(pols.clone()), orders)
}

/// Trace ratio of a midpoint-sampled channel at `density` samples per wavelength.
pub fn cap_edof_dense_grid(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    distance: f64,
    wave: &WaveParams,
    density: f64,
) -> Result<EdofResult> {
    cap_edof_dense_grid_with(tx, rx, distance, wave, density, &ChannelKind::Scalar)
}

/// Dense-grid estimator for either channel kind.
pub fn cap_edof_dense_grid_with(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    distance: f64,
    wave: &WaveParams,
    density: f64,
    kind: &ChannelKind,
) -> Result<EdofResult> {
    if !(density >= 2.0) || !density.is_finite() {
        return Err(Error::Argument(format!("grid density must be at least 2 per wavelength, got {density}")));
    }
    let link = aperture_link(tx, rx, distance, wave)?;
    let t = grid_nodes(&link.tx, density, wave.wavelength)?;
    let r = grid_nodes(&link.rx, density, wave.wavelength)?;
    let b = assemble_weighted(&r, &t, kind, wave)?;
    let (num, den) = trace_ratio_terms(&b)?;
    Ok(EdofResult::new(num * num / den, EdofMethod::CapDenseGrid)
        .with("density", density)
        .with("tx_points", t.len() as f64)
        .with("rx_points", r.len() as f64)
        .with("polarizations", kind.polarizations() as f64)
        .with("gain_integral", num))
}

fn patch_ratio(link: &LinkConfig, kind: &ChannelKind, order: usize) -> Result<(f64, f64)> {
    let p = assemble_patch_scalar(link, &gauss_legendre(order)?)?;
    let b = p.weighted_matrix(kind)?;
    let (num, den) = trace_ratio_terms(&b)?;
    Ok((num * num / den, num))
}

/// Patch-array EDoF: element-region integrals of $|G|^2$ and of the kernel, per-element order `order`.
pub fn patch_edof(link: &LinkConfig, kind: &ChannelKind, order: usize, check_convergence: bool) -> Result<EdofResult> {
    let (value, gain) = patch_ratio(link, kind, order)?;
    let mut res = EdofResult::new(value, EdofMethod::PatchQuadrature)
        .with("order_element", order as f64)
        .with("polarizations", kind.polarizations() as f64)
        .with("gain_integral", gain);
    if check_convergence {
        let elements = match &link.tx {
            ArrayGeometry::PatchUpa(g) => g.upa.count().max(match &link.rx {
                ArrayGeometry::PatchUpa(r) => r.upa.count(),
                _ => 0,
            }),
            _ => 0,
        };
        let fit = |o: usize| kind.polarizations() * elements * o * o <= REFINE_MAX_SIDE;
        let mut refined_order = 2 * order;
        while refined_order > order && !fit(refined_order) {
            refined_order -= 1;
        }
        if refined_order > order {
            let (refined, _) = patch_ratio(link, kind, refined_order)?;
            let change = ((refined - value) / refined).abs();
            res = res
                .with("refined_order_element", refined_order as f64)
                .with("refined_value", refined)
                .with("convergence_change", change)
                .with("converged", if change <= CONVERGENCE_TOLERANCE { 1.0 } else { 0.0 });
        }
    }
    Ok(res)
}
