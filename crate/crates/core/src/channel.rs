//! Channel matrices between transceiver layouts.
//!
//! Dyadic matrices are laid out in polarization blocks: row `l*N + n`, column
//! `p*M + m` holds $G^{lp}$ between receive antenna `n` and transmit antenna `m`,
//! with `l`, `p` indexing the [`PolarizationSet`] in order.
//!
//! Weighted matrices carry quadrature weights as $\sqrt{w_r w_t}\,G$, so
//! $\|\mathbf B\|_F^2$ and $\|\mathbf B^H\mathbf B\|_F^2$ are exactly the quadrature
//! approximations of the aperture integrals $\iint|G|^2$ and $\iint|K|^2$.

use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{patch_regions, ArrayGeometry, Point3, WaveParams};
use crate::greens::{eta_matrix, scalar_kernel, Polarization, SINGULARITY_GUARD};
use crate::numerics::{ComplexMatrix, QuadratureRule};

/// Largest antenna (or node) count per side accepted before Gram formation.
pub const MAX_PER_SIDE: usize = 20_000;
/// Memory ceiling for one assembled matrix plus its Gram product.
pub const MAX_BYTES: u128 = 4 << 30;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolarizationSet(Vec<Polarization>);

impl PolarizationSet {
    pub fn single() -> Self {
        Self(vec![Polarization::X])
    }

    pub fn double() -> Self {
        Self(vec![Polarization::X, Polarization::Y])
    }

    pub fn triple() -> Self {
        Self(vec![Polarization::X, Polarization::Y, Polarization::Z])
    }

    pub fn with_count(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Self::single()),
            2 => Ok(Self::double()),
            3 => Ok(Self::triple()),
            _ => Err(Error::Argument(format!("polarization count must be 1, 2 or 3, got {n}"))),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Polarization] {
        &self.0
    }
}

/// Which Green's function builds the channel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    Scalar,
    Dyadic(PolarizationSet),
}

impl ChannelKind {
    pub fn polarizations(&self) -> usize {
        match self {
            ChannelKind::Scalar => 1,
            ChannelKind::Dyadic(p) => p.len(),
        }
    }

    /// Polarizations as a set; the scalar channel counts as a single one.
    pub fn polarization_set(&self) -> PolarizationSet {
        match self {
            ChannelKind::Scalar => PolarizationSet::single(),
            ChannelKind::Dyadic(p) => p.clone(),
        }
    }
}

/// A transmitter at z = 0 facing a receiver at z = D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub tx: ArrayGeometry,
    pub rx: ArrayGeometry,
    pub distance: f64,
    pub wave: WaveParams,
}

impl LinkConfig {
    pub fn new(tx: ArrayGeometry, rx: ArrayGeometry, distance: f64, wave: WaveParams) -> Result<Self> {
        if !(distance > 0.0) || !distance.is_finite() {
            return Err(Error::Argument(format!("link distance must be positive, got {distance}")));
        }
        if tx.family() != rx.family() {
            return Err(Error::Argument(format!(
                "transmitter is {} but receiver is {}",
                tx.family(),
                rx.family()
            )));
        }
        tx.validate()?;
        rx.validate()?;
        Ok(Self {
            tx: tx.with_z(0.0),
            rx: rx.with_z(distance),
            distance,
            wave,
        })
    }

    /// The same link seen from the other end.
    pub fn reversed(&self) -> Self {
        Self {
            tx: self.rx.with_z(0.0),
            rx: self.tx.with_z(self.distance),
            ..*self
        }
    }
}

/// A channel matrix with its block labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub matrix: ComplexMatrix,
    pub kind: ChannelKind,
    pub rx_count: usize,
    pub tx_count: usize,
}

impl ChannelMatrix {
    /// `(antenna, polarization)` for a row; polarization is `None` for scalar channels.
    pub fn row_label(&self, row: usize) -> (usize, Option<Polarization>) {
        label(row, self.rx_count, &self.kind)
    }

    pub fn col_label(&self, col: usize) -> (usize, Option<Polarization>) {
        label(col, self.tx_count, &self.kind)
    }
}

fn label(i: usize, count: usize, kind: &ChannelKind) -> (usize, Option<Polarization>) {
    match kind {
        ChannelKind::Scalar => (i, None),
        ChannelKind::Dyadic(p) => (i % count, Some(p.as_slice()[i / count])),
    }
}

/// Reject sizes beyond the per-side cap or the memory ceiling.
pub fn check_size(rx: usize, tx: usize, polarizations: usize) -> Result<()> {
    let rows = (rx * polarizations) as u128;
    let cols = (tx * polarizations) as u128;
    let small = rows.min(cols);
    let bytes = 16 * (2 * rows * cols + small * small);
    if rx > MAX_PER_SIDE || tx > MAX_PER_SIDE {
        return Err(Error::Resource {
            what: format!("{rx} x {tx} points exceeds the {MAX_PER_SIDE} per side cap"),
            bytes,
        });
    }
    if bytes > MAX_BYTES {
        return Err(Error::Resource {
            what: format!("{rows} x {cols} channel and its Gram exceed the memory ceiling {MAX_BYTES}"),
            bytes,
        });
    }
    Ok(())
}

/// Weighted channel $\sqrt{w_r w_t}\,G^{lp}(\mathbf r, \mathbf t)$ between two node sets.
pub fn assemble_weighted(
    rx: &[(Point3, f64)],
    tx: &[(Point3, f64)],
    kind: &ChannelKind,
    wave: &WaveParams,
) -> Result<ComplexMatrix> {
    let np = kind.polarizations();
    check_size(rx.len(), tx.len(), np)?;
    let (n, m) = (rx.len(), tx.len());
    let cols = np * m;
    let k = wave.wavenumber;
    let guard = SINGULARITY_GUARD * wave.wavelength;
    let sqrt_tx: Vec<f64> = tx.iter().map(|(_, w)| w.sqrt()).collect();
    let mut data = vec![Complex64::new(0.0, 0.0); np * n * cols];
    let pol_idx: Vec<usize> = match kind {
        ChannelKind::Scalar => vec![],
        ChannelKind::Dyadic(p) => p.as_slice().iter().map(|q| q.index()).collect(),
    };
    // one chunk per receive node, laid out [l][col]; reordered to blocks below
    let results: Vec<Result<()>> = data
        .par_chunks_mut(np * cols)
        .enumerate()
        .map(|(row, chunk)| -> Result<()> {
            let (r, wr) = rx[row];
            let swr = wr.sqrt();
            for (col, (t, _)) in tx.iter().enumerate() {
                let v = [r.x - t.x, r.y - t.y, r.z - t.z];
                let d = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if !(d >= guard) {
                    return Err(Error::Singularity { distance: d, guard });
                }
                let g = scalar_kernel(d, k) * (swr * sqrt_tx[col]);
                if np == 1 && pol_idx.is_empty() {
                    chunk[col] = g;
                    continue;
                }
                let a = [v[0] / d, v[1] / d, v[2] / d];
                let eta = eta_matrix(a, k * d);
                for (l, &pl) in pol_idx.iter().enumerate() {
                    for (p, &pp) in pol_idx.iter().enumerate() {
                        chunk[l * cols + p * m + col] = eta[pl][pp] * g;
                    }
                }
            }
            Ok(())
        })
        .collect();
    results.into_iter().collect::<Result<()>>()?;
    if np == 1 {
        return ComplexMatrix::from_vec(n, cols, data);
    }
    // reorder from [row][l][col] to [l][row][col]
    let mut out = ComplexMatrix::zeros(np * n, cols);
    for row in 0..n {
        for l in 0..np {
            let src = &data[(row * np + l) * cols..(row * np + l + 1) * cols];
            let dst = (l * n + row) * cols;
            out.as_mut_slice()[dst..dst + cols].copy_from_slice(src);
        }
    }
    Ok(out)
}

fn unit_nodes(points: Vec<Point3>) -> Vec<(Point3, f64)> {
    points.into_iter().map(|p| (p, 1.0)).collect()
}

fn discrete_nodes(link: &LinkConfig) -> Result<(Vec<(Point3, f64)>, Vec<(Point3, f64)>)> {
    match (&link.tx, &link.rx) {
        (ArrayGeometry::Upa(_), ArrayGeometry::Upa(_)) | (ArrayGeometry::Ula(_), ArrayGeometry::Ula(_)) => {
            Ok((unit_nodes(link.rx.positions()?), unit_nodes(link.tx.positions()?)))
        }
        _ => Err(Error::Argument(format!(
            "matrix assembly needs dipole UPA or ULA links, got {}",
            link.tx.family()
        ))),
    }
}

/// Scalar channel $[\mathbf H_S]_{nm} = G(\mathbf r_{r,n}, \mathbf r_{t,m})$, N x M.
pub fn assemble_scalar(link: &LinkConfig) -> Result<ChannelMatrix> {
    let (rx, tx) = discrete_nodes(link)?;
    Ok(ChannelMatrix {
        matrix: assemble_weighted(&rx, &tx, &ChannelKind::Scalar, &link.wave)?,
        kind: ChannelKind::Scalar,
        rx_count: rx.len(),
        tx_count: tx.len(),
    })
}

/// Dyadic channel with one N x M block per polarization pair.
pub fn assemble_dyadic(link: &LinkConfig, pols: &PolarizationSet) -> Result<ChannelMatrix> {
    let (rx, tx) = discrete_nodes(link)?;
    let kind = ChannelKind::Dyadic(pols.clone());
    Ok(ChannelMatrix {
        matrix: assemble_weighted(&rx, &tx, &kind, &link.wave)?,
        kind,
        rx_count: rx.len(),
        tx_count: tx.len(),
    })
}

/// Either channel kind for a discrete link.
pub fn assemble(link: &LinkConfig, kind: &ChannelKind) -> Result<ChannelMatrix> {
    match kind {
        ChannelKind::Scalar => assemble_scalar(link),
        ChannelKind::Dyadic(p) => assemble_dyadic(link, p),
    }
}

/// Per-element quadrature nodes of a patch link and the integrals built from them.
#[derive(Debug, Clone)]
pub struct PatchIntegrals {
    /// `rx_nodes[n]` lists `(point, weight)` on receive patch `n`.
    pub rx_nodes: Vec<Vec<(Point3, f64)>>,
    pub tx_nodes: Vec<Vec<(Point3, f64)>>,
    pub wave: WaveParams,
}

impl PatchIntegrals {
    fn flat(nodes: &[Vec<(Point3, f64)>]) -> Vec<(Point3, f64)> {
        nodes.iter().flatten().copied().collect()
    }

    /// $\int_{V_{T,m}}\int_{V_{R,n}} |G|^2$.
    pub fn pair_gain(&self, n: usize, m: usize) -> Result<f64> {
        let mut s = 0.0;
        for (r, wr) in &self.rx_nodes[n] {
            for (t, wt) in &self.tx_nodes[m] {
                let d = r.distance(t);
                let guard = SINGULARITY_GUARD * self.wave.wavelength;
                if !(d >= guard) {
                    return Err(Error::Singularity { distance: d, guard });
                }
                s += wr * wt * scalar_kernel(d, self.wave.wavenumber).norm_sqr();
            }
        }
        Ok(s)
    }

    /// Kernel $\sum_n\int_{V_{R,n}} G^*(\mathbf r, \mathbf t)\,G(\mathbf r, \mathbf t')\,d\mathbf r$.
    pub fn kernel(&self, t: &Point3, t2: &Point3) -> Complex64 {
        let k = self.wave.wavenumber;
        self.rx_nodes
            .iter()
            .flatten()
            .map(|(r, w)| scalar_kernel(r.distance(t), k).conj() * scalar_kernel(r.distance(t2), k) * w)
            .sum()
    }

    /// Weighted channel over all element nodes, for the trace-ratio form of the patch EDoF.
    pub fn weighted_matrix(&self, kind: &ChannelKind) -> Result<ComplexMatrix> {
        assemble_weighted(&Self::flat(&self.rx_nodes), &Self::flat(&self.tx_nodes), kind, &self.wave)
    }

    pub fn nodes_per_element(&self) -> usize {
        self.tx_nodes.first().map_or(0, Vec::len)
    }
}

/// Tensor Gauss-Legendre nodes on every patch of a patch-array link.
pub fn assemble_patch_scalar(link: &LinkConfig, rule: &QuadratureRule) -> Result<PatchIntegrals> {
    if rule.order() < 1 {
        return Err(Error::Argument("per-element quadrature order must be at least 1".into()));
    }
    let nodes = |g: &ArrayGeometry| -> Result<Vec<Vec<(Point3, f64)>>> {
        let ArrayGeometry::PatchUpa(p) = g else {
            return Err(Error::Argument(format!("patch integrals need patch arrays, got {}", g.family())));
        };
        Ok(patch_regions(p)?
            .iter()
            .map(|reg| {
                let c = reg.center;
                rule.tensor_2d(c.x - reg.half_h, c.x + reg.half_h, c.y - reg.half_v, c.y + reg.half_v)
                    .into_iter()
                    .map(|(x, y, w)| (Point3::new(x, y, c.z), w))
                    .collect()
            })
            .collect())
    };
    let tx_nodes = nodes(&link.tx)?;
    let rx_nodes = nodes(&link.rx)?;
    let per = rule.order() * rule.order();
    check_size(rx_nodes.len() * per, tx_nodes.len() * per, 1)?;
    Ok(PatchIntegrals {
        rx_nodes,
        tx_nodes,
        wave: link.wave,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramSide {
    /// $\mathbf H^H\mathbf H$, used when columns are the smaller side.
    AdjointFirst,
    /// $\mathbf H\mathbf H^H$.
    AdjointLast,
}

#[derive(Debug, Clone)]
pub struct Gram {
    pub matrix: ComplexMatrix,
    pub side: GramSide,
}

/// The smaller of $\mathbf H^H\mathbf H$ and $\mathbf H\mathbf H^H$; both share the nonzero spectrum.
pub fn gram(h: &ComplexMatrix) -> Gram {
    if h.cols() <= h.rows() {
        Gram {
            matrix: h.adjoint_times_self(),
            side: GramSide::AdjointFirst,
        }
    } else {
        Gram {
            matrix: h.self_times_adjoint(),
            side: GramSide::AdjointLast,
        }
    }
}

const DUMP_MAGIC: &[u8; 4] = b"NFCM";
const DUMP_VERSION: u32 = 1;

/// Binary dump: "NFCM", version u32, rows u32, cols u32, then row-major little-endian f64 re/im pairs.
pub fn write_matrix_dump(h: &ComplexMatrix, mut out: impl Write) -> std::io::Result<()> {
    out.write_all(DUMP_MAGIC)?;
    out.write_all(&DUMP_VERSION.to_le_bytes())?;
    out.write_all(&(h.rows() as u32).to_le_bytes())?;
    out.write_all(&(h.cols() as u32).to_le_bytes())?;
    for z in h.as_slice() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix_dump(mut input: impl Read) -> Result<ComplexMatrix> {
    let bad = |m: &str| Error::Argument(format!("malformed channel dump: {m}"));
    let mut head = [0u8; 16];
    input.read_exact(&mut head).map_err(|_| bad("short header"))?;
    if &head[0..4] != DUMP_MAGIC {
        return Err(bad("bad magic"));
    }
    let word = |i: usize| u32::from_le_bytes(head[i..i + 4].try_into().unwrap());
    if word(4) != DUMP_VERSION {
        return Err(bad("unsupported version"));
    }
    let (rows, cols) = (word(8) as usize, word(12) as usize);
    let mut buf = vec![0u8; rows * cols * 16];
    input.read_exact(&mut buf).map_err(|_| bad("truncated payload"))?;
    let data = buf
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    ComplexMatrix::from_vec(rows, cols, data)
}
