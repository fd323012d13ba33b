//! Mutual coupling between closely spaced dipoles.
//!
//! The coupled channel is $\tilde{\mathbf H} = \mathbf Z_r\mathbf H\mathbf Z_t$ with
//! $\mathbf Z = (Z_A + Z_L)(\mathbf Z_C + Z_L\mathbf I)^{-1}$. The self impedance
//! $Z_A$ is referred to the feed terminals. Mutual impedances use the
//! induced-EMF closed forms for side-by-side, collinear and parallel-in-echelon
//! dipoles; dipoles are taken along the y axis, so array rows are side by side
//! and columns are collinear. A ULA on the y axis is therefore fully collinear.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{assemble, ChannelKind, LinkConfig};
use crate::edof::{edof_trace_ratio, EdofResult};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, WaveParams};
use crate::numerics::matrix::refined_inverse;
use crate::numerics::{cosine_integral as ci_raw, sine_integral as si, ComplexMatrix};

/// Condition number of $\mathbf Z_C + Z_L\mathbf I$ above which inversion is refused.
pub const MAX_CONDITION: f64 = 1e12;
const MAX_RADIUS_RATIO: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    pub load: Complex64,
    pub eta: f64,
    pub euler_gamma: f64,
    pub dipole_length: f64,
    pub wire_radius: f64,
}

impl CouplingParams {
    /// $Z_L = 50\,\Omega$, $\eta = 120\pi$, $\gamma_0 = 0.577$, $d_l = 0.1\lambda$, $a = 10^{-5}\lambda$.
    pub fn defaults(wave: &WaveParams) -> Self {
        Self {
            load: Complex64::new(50.0, 0.0),
            eta: 120.0 * PI,
            euler_gamma: 0.577,
            dipole_length: 0.1 * wave.wavelength,
            wire_radius: 1e-5 * wave.wavelength,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dipole_length > 0.0) || !(self.wire_radius > 0.0) || !(self.eta > 0.0) {
            return Err(Error::Argument("dipole length, wire radius and eta must be positive".into()));
        }
        if self.wire_radius > MAX_RADIUS_RATIO * self.dipole_length {
            return Err(Error::Argument(format!(
                "thin-wire model needs radius <= {MAX_RADIUS_RATIO} x length, got {} / {}",
                self.wire_radius, self.dipole_length
            )));
        }
        if !self.load.re.is_finite() || !self.load.im.is_finite() {
            return Err(Error::Argument("load impedance must be finite".into()));
        }
        Ok(())
    }
}

fn ci(x: f64) -> Result<f64> {
    ci_raw(x)
}

/// Terminal-referred self impedance $Z_A = R_{Z_A} + jX_{Z_A}$ of a thin dipole.
pub fn self_impedance(p: &CouplingParams, wavenumber: f64) -> Result<Complex64> {
    p.validate()?;
    let kl = wavenumber * p.dipole_length;
    let (s, c) = kl.sin_cos();
    let s2 = (kl / 2.0).sin().powi(2);
    let g0 = p.euler_gamma;
    let r = p.eta / (2.0 * PI * s2)
        * (g0 + kl.ln() - ci(kl)?
            + s / 2.0 * (si(2.0 * kl) - 2.0 * si(kl))
            + c / 2.0 * (g0 + (kl / 2.0).ln() + ci(2.0 * kl)? - 2.0 * ci(kl)?));
    let x = p.eta / (4.0 * PI * s2)
        * (2.0 * si(kl) + c * (2.0 * si(kl) - si(2.0 * kl))
            - s * (2.0 * ci(kl)? - ci(2.0 * kl)? - ci(2.0 * wavenumber * p.wire_radius.powi(2) / p.dipole_length)?));
    Ok(Complex64::new(r, x))
}

/// Relative placement of two parallel dipoles of length `l` along y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    /// Horizontal separation `d`, no offset along the axis.
    SideBySide { d: f64 },
    /// Offset `h` along the axis, centers aligned.
    Collinear { h: f64 },
    /// Horizontal separation `d` and axial offset `h`.
    Echelon { d: f64, h: f64 },
}

/// Mutual impedance for a placement, referred to the current maxima.
pub fn mutual_impedance(placement: Placement, l: f64, wavenumber: f64, eta: f64) -> Result<Complex64> {
    let k = wavenumber;
    match placement {
        Placement::SideBySide { d } => {
            if !(d > 0.0) {
                return Err(Error::Argument("side-by-side separation must be positive".into()));
            }
            let root = (d * d + l * l).sqrt();
            let (u0, u1, u2) = (k * d, k * (root + l), k * d * d / (root + l));
            let r = eta / (4.0 * PI) * (2.0 * ci(u0)? - ci(u1)? - ci(u2)?);
            let x = -eta / (4.0 * PI) * (2.0 * si(u0) - si(u1) - si(u2));
            Ok(Complex64::new(r, x))
        }
        Placement::Collinear { h } => {
            if !(h > l) {
                return Err(Error::Argument(format!(
                    "collinear dipoles of length {l} overlap at center offset {h}"
                )));
            }
            let v0 = k * h;
            let v1 = 2.0 * k * (h + l);
            let v2 = 2.0 * k * (h - l);
            let v3 = (h * h - l * l) / (h * h);
            let (s0, c0) = v0.sin_cos();
            let e = eta / (8.0 * PI);
            let r = -e * c0 * (-2.0 * ci(2.0 * v0)? + ci(v2)? + ci(v1)? - v3.ln())
                + e * s0 * (2.0 * si(2.0 * v0) - si(v2) - si(v1));
            let x = -e * c0 * (2.0 * si(2.0 * v0) - si(v2) - si(v1))
                + e * s0 * (2.0 * ci(2.0 * v0)? - ci(v2)? - ci(v1)? - v3.ln());
            Ok(Complex64::new(r, x))
        }
        Placement::Echelon { d, h } => {
            if !(d > 0.0) || !(h > 0.0) {
                return Err(Error::Argument("echelon offsets must both be positive".into()));
            }
            // sqrt(d^2 + s^2) -/+ s without cancellation
            let pair = |s: f64| {
                let root = (d * d + s * s).sqrt();
                if s >= 0.0 {
                    (k * (root + s), k * d * d / (root + s))
                } else {
                    (k * d * d / (root - s), k * (root - s))
                }
            };
            let (a0, a0p) = pair(h);
            let (a1, a1p) = pair(h - l);
            let (a2, a2p) = pair(h + l);
            let (s0, c0) = (k * h).sin_cos();
            let e = eta / (8.0 * PI);
            let r = -e * c0 * (-2.0 * ci(a0)? - 2.0 * ci(a0p)? + ci(a1)? + ci(a1p)? + ci(a2)? + ci(a2p)?)
                + e * s0 * (2.0 * si(a0) - 2.0 * si(a0p) - si(a1) + si(a1p) - si(a2) + si(a2p));
            let x = -e * c0 * (2.0 * si(a0) + 2.0 * si(a0p) - si(a1) - si(a1p) - si(a2) - si(a2p))
                + e * s0 * (2.0 * ci(a0)? - 2.0 * ci(a0p)? - ci(a1)? + ci(a1p)? - ci(a2)? + ci(a2p)?);
            Ok(Complex64::new(r, x))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Computed,
    Loaded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceMatrix {
    pub matrix: ComplexMatrix,
    pub provenance: Provenance,
}

impl ImpedanceMatrix {
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    /// Diagonal entry, the self impedance.
    pub fn self_impedance(&self) -> Complex64 {
        self.matrix[(0, 0)]
    }

    fn check(matrix: &ComplexMatrix) -> Result<()> {
        let n = matrix.rows();
        if n == 0 || matrix.cols() != n {
            return Err(Error::Argument("impedance matrix must be square and non-empty".into()));
        }
        let norm = matrix.frobenius_norm_sq().sqrt();
        let skew = matrix.sub(&matrix.transpose()).frobenius_norm_sq().sqrt();
        if skew > 1e-9 * norm {
            return Err(Error::Argument(format!("impedance matrix is not symmetric (relative {:.2e})", skew / norm)));
        }
        let z0 = matrix[(0, 0)];
        if (0..n).any(|i| (matrix[(i, i)] - z0).norm() > 1e-9 * z0.norm()) {
            return Err(Error::Argument("impedance matrix diagonal must be constant".into()));
        }
        Ok(())
    }

    /// Wrap a user matrix after checking reciprocity and a constant diagonal.
    pub fn loaded(matrix: ComplexMatrix) -> Result<Self> {
        Self::check(&matrix)?;
        Ok(Self {
            matrix,
            provenance: Provenance::Loaded,
        })
    }
}

/// Grid layout `(columns, rows, spacing_h, spacing_v)` of a dipole array; a ULA is one column.
fn grid_of(g: &ArrayGeometry) -> Result<(usize, usize, f64, f64)> {
    match g {
        ArrayGeometry::Upa(u) => Ok((u.count_h, u.count_v, u.spacing_h(), u.spacing_v())),
        ArrayGeometry::Ula(u) => Ok((1, u.count, 0.0, u.spacing())),
        other => Err(Error::Argument(format!(
            "mutual impedances need a dipole UPA or ULA, got {}",
            other.family()
        ))),
    }
}

/// Full mutual impedance matrix of a dipole array, one entry per antenna pair.
pub fn mutual_impedance_matrix(g: &ArrayGeometry, p: &CouplingParams, wavenumber: f64) -> Result<ImpedanceMatrix> {
    p.validate()?;
    let (nh, nv, dh, dv) = grid_of(g)?;
    let n = nh * nv;
    let za = self_impedance(p, wavenumber)?;
    let mut cache: HashMap<(usize, usize), Complex64> = HashMap::new();
    let mut z = ComplexMatrix::zeros(n, n);
    for a in 0..n {
        z[(a, a)] = za;
        for b in a + 1..n {
            let di = (a % nh).abs_diff(b % nh);
            let dj = (a / nh).abs_diff(b / nh);
            let v = match cache.get(&(di, dj)) {
                Some(v) => *v,
                None => {
                    let (d, h) = (di as f64 * dh, dj as f64 * dv);
                    let placement = match (di, dj) {
                        (_, 0) => Placement::SideBySide { d },
                        (0, _) => Placement::Collinear { h },
                        _ => Placement::Echelon { d, h },
                    };
                    let v = mutual_impedance(placement, p.dipole_length, wavenumber, p.eta)?;
                    cache.insert((di, dj), v);
                    v
                }
            };
            z[(a, b)] = v;
            z[(b, a)] = v;
        }
    }
    Ok(ImpedanceMatrix {
        matrix: z,
        provenance: Provenance::Computed,
    })
}

/// $\mathbf Z = (Z_A + Z_L)(\mathbf Z_C + Z_L\mathbf I)^{-1}$.
pub fn coupling_matrix(zc: &ImpedanceMatrix, za: Complex64, zl: Complex64) -> Result<ComplexMatrix> {
    let n = zc.size();
    let mut a = zc.matrix.clone();
    for i in 0..n {
        a[(i, i)] += zl;
    }
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] == Complex64::new(0.0, 0.0)));
    if diagonal {
        let mags: Vec<f64> = (0..n).map(|i| a[(i, i)].norm()).collect();
        let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = mags.iter().copied().fold(0.0, f64::max);
        let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(cond < MAX_CONDITION) {
            return Err(Error::Numerical {
                message: "Z_C + Z_L I is singular or ill-conditioned".into(),
                condition: cond,
            });
        }
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = (za + zl) / a[(i, i)];
        }
        return Ok(out);
    }
    let (inv, cond) = match refined_inverse(&a) {
        Ok(v) => v,
        Err(Error::Numerical { condition, .. }) => {
            return Err(Error::Numerical {
                message: "Z_C + Z_L I is singular".into(),
                condition,
            })
        }
        Err(e) => return Err(e),
    };
    if !(cond < MAX_CONDITION) {
        return Err(Error::Numerical {
            message: "Z_C + Z_L I is ill-conditioned".into(),
            condition: cond,
        });
    }
    Ok(inv.scaled(za + zl))
}

/// `I_np ⊗ z`: the same coupling for every polarization block.
fn block_diagonal(z: &ComplexMatrix, blocks: usize) -> ComplexMatrix {
    let n = z.rows();
    let mut out = ComplexMatrix::zeros(n * blocks, n * blocks);
    for b in 0..blocks {
        for i in 0..n {
            for j in 0..n {
                out[(b * n + i, b * n + j)] = z[(i, j)];
            }
        }
    }
    out
}

/// Coupled trace-ratio EDoF with explicit receive and transmit coupling matrices.
pub fn coupled_edof_with(link: &LinkConfig, kind: &ChannelKind, zr: &ComplexMatrix, zt: &ComplexMatrix) -> Result<EdofResult> {
    let h = assemble(link, kind)?;
    if zr.rows() != h.rx_count || zt.rows() != h.tx_count {
        return Err(Error::Argument(format!(
            "coupling sizes {} and {} do not match {} receive and {} transmit antennas",
            zr.rows(),
            zt.rows(),
            h.rx_count,
            h.tx_count
        )));
    }
    let np = kind.polarizations();
    let coupled = block_diagonal(zr, np).matmul(&h.matrix)?.matmul(&block_diagonal(zt, np))?;
    edof_trace_ratio(&coupled).map(|r| r.with("polarizations", np as f64).with("coupled", 1.0))
}

/// Coupled EDoF with impedances computed from the link geometry.
pub fn coupled_edof(link: &LinkConfig, kind: &ChannelKind, p: &CouplingParams) -> Result<EdofResult> {
    let k = link.wave.wavenumber;
    let zr_c = mutual_impedance_matrix(&link.rx, p, k)?;
    let zt_c = mutual_impedance_matrix(&link.tx, p, k)?;
    let za = zr_c.self_impedance();
    let zr = coupling_matrix(&zr_c, za, p.load)?;
    let zt = coupling_matrix(&zt_c, za, p.load)?;
    coupled_edof_with(link, kind, &zr, &zt)
}

/// Impedance file: `NFZC v1 <n>`, then `n*n` lines `<row> <col> <re> <im>` with zero-based indices.
pub fn write_impedance_file(z: &ImpedanceMatrix, mut out: impl Write) -> std::io::Result<()> {
    let n = z.size();
    writeln!(out, "NFZC v1 {n}")?;
    for i in 0..n {
        for j in 0..n {
            let v = z.matrix[(i, j)];
            writeln!(out, "{i} {j} {:e} {:e}", v.re, v.im)?;
        }
    }
    Ok(())
}

pub fn read_impedance_file(input: impl BufRead) -> Result<ImpedanceMatrix> {
    let bad = |m: String| Error::Config(format!("impedance file: {m}"));
    let mut lines = input.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let (_, header) = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let header = header.map_err(|e| bad(e.to_string()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "NFZC" || fields[1] != "v1" {
        return Err(bad(format!("bad header {header:?}")));
    }
    let n: usize = fields[2].parse().map_err(|_| bad(format!("bad size {:?}", fields[2])))?;
    if n == 0 {
        return Err(bad("size must be positive".into()));
    }
    let mut seen = vec![false; n * n];
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for (lineno, line) in lines {
        let line = line.map_err(|e| bad(e.to_string()))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        let parse_err = || bad(format!("line {lineno}: expected '<row> <col> <re> <im>'"));
        if f.len() != 4 {
            return Err(parse_err());
        }
        let i: usize = f[0].parse().map_err(|_| parse_err())?;
        let j: usize = f[1].parse().map_err(|_| parse_err())?;
        let re: f64 = f[2].parse().map_err(|_| parse_err())?;
        let im: f64 = f[3].parse().map_err(|_| parse_err())?;
        if i >= n || j >= n {
            return Err(bad(format!("line {lineno}: index out of range")));
        }
        if std::mem::replace(&mut seen[i * n + j], true) {
            return Err(bad(format!("line {lineno}: duplicate entry ({i}, {j})")));
        }
        data[i * n + j] = Complex64::new(re, im);
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(bad(format!("missing entry ({}, {})", k / n, k % n)));
    }
    ImpedanceMatrix::loaded(ComplexMatrix::from_vec(n, n, data)?)
}
