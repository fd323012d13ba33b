//! Closed-form EDoF approximations.
//!
//! Discrete arrays use the Fresnel-expanded trace ratio
//! $$\varepsilon_S \approx \frac{D^4\big|\sum_{m,n} 1/(D^2 + \Delta x_{mn}^2 + \Delta y_{mn}^2)\big|^2}
//! {\sum_{m_1,m_2}\big|\sum_n e^{-j\frac{\kappa_0}{D}[(x_{m_1}-x_{m_2})x_n + (y_{m_1}-y_{m_2})y_n]}\big|^2}.$$
//!
//! Continuous planes use $\Psi = \gamma^2/\xi$, where $\gamma$ is the exact
//! channel-gain integral assembled from $T$ and $Q$ at the breakpoints
//! $|L_{t,H}-L_{r,H}|/2$ and $(L_{t,H}+L_{r,H})/2$, and $\xi$ is a four-term
//! closed form scaled by the sampled phase coefficient $\varphi$.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::LinkConfig;
use crate::edof::{EdofMethod, EdofResult};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Point3};
use crate::numerics::summation::{pairwise_sum, pairwise_sum_complex};
use crate::numerics::{ComplexMatrix, SeededSampler};

pub const DEFAULT_SAMPLES: usize = 64;
pub const DEFAULT_REPLICATES: usize = 8;
/// Remark-4 inputs below this transmit/receive size ratio are flagged.
pub const LARGE_TX_RATIO: f64 = 5.0;

const MU0: f64 = 1.0 / (16.0 * PI * PI);

fn fresnel_sums(tx: &[Point3], rx: &[Point3], distance: f64, wavenumber: f64) -> (f64, f64) {
    let d2 = distance * distance;
    let inv: Vec<f64> = tx
        .iter()
        .flat_map(|t| {
            rx.iter().map(move |r| {
                let (dx, dy) = (r.x - t.x, r.y - t.y);
                1.0 / (d2 + dx * dx + dy * dy)
            })
        })
        .collect();
    let gain = pairwise_sum(&inv);
    let scale = wavenumber / distance;
    // phasors[m][n] = exp(-j k/D (x_m x_n + y_m y_n)); conj products give the difference phases
    let phasors: Vec<Vec<Complex64>> = tx
        .iter()
        .map(|t| {
            rx.iter()
                .map(|r| Complex64::from_polar(1.0, -scale * (t.x * r.x + t.y * r.y)))
                .collect()
        })
        .collect();
    let rows: Vec<f64> = phasors
        .par_iter()
        .map(|p1| {
            let per: Vec<f64> = phasors
                .iter()
                .map(|p2| {
                    let terms: Vec<Complex64> = p1.iter().zip(p2).map(|(a, b)| a * b.conj()).collect();
                    pairwise_sum_complex(&terms).norm_sqr()
                })
                .collect();
            pairwise_sum(&per)
        })
        .collect();
    let phase = pairwise_sum(&rows);
    (d2 * gain, phase)
}

fn fresnel_result(link: &LinkConfig) -> Result<EdofResult> {
    let tx = link.tx.positions()?;
    let rx = link.rx.positions()?;
    let (sqrt_num, den) = fresnel_sums(&tx, &rx, link.distance, link.wave.wavenumber);
    Ok(EdofResult::new(sqrt_num * sqrt_num / den, EdofMethod::ClosedForm).with("numerator_sqrt", sqrt_num))
}

/// Fresnel closed form for a dipole UPA link.
pub fn upa_edof_closed(link: &LinkConfig) -> Result<EdofResult> {
    match (&link.tx, &link.rx) {
        (ArrayGeometry::Upa(_), ArrayGeometry::Upa(_)) => fresnel_result(link),
        _ => Err(Error::Argument("the planar closed form needs a UPA link".into())),
    }
}

/// Fresnel closed form for a ULA link along the y axis.
pub fn ula_edof_closed(link: &LinkConfig) -> Result<EdofResult> {
    match (&link.tx, &link.rx) {
        (ArrayGeometry::Ula(_), ArrayGeometry::Ula(_)) => fresnel_result(link),
        _ => Err(Error::Argument("the linear closed form needs a ULA link".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiSampling {
    /// Independent uniform-random points: two transmit sets and one receive set.
    Random,
    /// Midpoint grids; both transmit sets coincide.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cap2dClosedParams {
    pub lt_h: f64,
    pub lt_v: f64,
    pub lr_h: f64,
    pub lr_v: f64,
    pub distance: f64,
    pub wavenumber: f64,
    pub ms: usize,
    pub ns: usize,
    pub seed: u64,
    pub replicates: usize,
    pub sampling: PhiSampling,
}

impl Cap2dClosedParams {
    pub fn new(lt_h: f64, lt_v: f64, lr_h: f64, lr_v: f64, distance: f64, wavenumber: f64) -> Result<Self> {
        let p = Self {
            lt_h,
            lt_v,
            lr_h,
            lr_v,
            distance,
            wavenumber,
            ms: DEFAULT_SAMPLES,
            ns: DEFAULT_SAMPLES,
            seed: 0,
            replicates: DEFAULT_REPLICATES,
            sampling: PhiSampling::Random,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn square(lt: f64, lr: f64, distance: f64, wavenumber: f64) -> Result<Self> {
        Self::new(lt, lt, lr, lr, distance, wavenumber)
    }

    pub fn with_samples(mut self, ms: usize, ns: usize) -> Self {
        self.ms = ms;
        self.ns = ns;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_sampling(mut self, sampling: PhiSampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.lt_h, self.lt_v, self.lr_h, self.lr_v, self.distance, self.wavenumber];
        if all.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Argument("plane sides, distance and wavenumber must be positive".into()));
        }
        if self.ms == 0 || self.ns == 0 || self.replicates == 0 {
            return Err(Error::Argument("sample counts and replicates must be at least 1".into()));
        }
        Ok(())
    }

    fn mu1(&self) -> f64 {
        (self.lt_v - self.lr_v).powi(2) + 4.0 * self.distance * self.distance
    }

    fn mu2(&self) -> f64 {
        (self.lt_v + self.lr_v).powi(2) + 4.0 * self.distance * self.distance
    }
}

/// Density of $|x_t - x_r|$ for uniform horizontal coordinates on the two planes.
pub fn pdf_f(x: f64, p: &Cap2dClosedParams) -> f64 {
    difference_pdf(x, p.lt_h, p.lr_h)
}

/// Density of $|y_t - y_r|$ for uniform vertical coordinates.
pub fn pdf_g(y: f64, p: &Cap2dClosedParams) -> f64 {
    difference_pdf(y, p.lt_v, p.lr_v)
}

fn difference_pdf(x: f64, lt: f64, lr: f64) -> f64 {
    let a = (lt - lr).abs() / 2.0;
    let b = (lt + lr) / 2.0;
    if !(0.0..=b).contains(&x) {
        0.0
    } else if x <= a {
        2.0 / lt.max(lr)
    } else {
        (lt + lr - 2.0 * x) / (lt * lr)
    }
}

/// $\gamma_1(x) = 2L_{t,V}L_{r,V}/(D^2+x^2) + \ln\frac{\mu_1+4x^2}{\mu_2+4x^2}$.
pub fn gamma1(x: f64, p: &Cap2dClosedParams) -> f64 {
    let d2 = p.distance * p.distance;
    let x4 = 4.0 * x * x;
    2.0 * p.lt_v * p.lr_v / (d2 + x * x) + ((p.mu1() + x4) / (p.mu2() + x4)).ln()
}

/// Antiderivative of [`gamma1`] with $T(0) = 0$.
pub fn t_function(x: f64, p: &Cap2dClosedParams) -> f64 {
    let d = p.distance;
    let (mu1, mu2) = (p.mu1(), p.mu2());
    let (s1, s2) = (mu1.sqrt(), mu2.sqrt());
    let x4 = 4.0 * x * x;
    2.0 * p.lt_v * p.lr_v / d * (x / d).atan() + x * ((mu1 + x4) / (mu2 + x4)).ln()
        + s1 * (2.0 * x / s1).atan()
        - s2 * (2.0 * x / s2).atan()
}

/// Antiderivative of $x\,\gamma_1(x)$.
pub fn q_function(x: f64, p: &Cap2dClosedParams) -> f64 {
    let (mu1, mu2) = (p.mu1(), p.mu2());
    let x4 = 4.0 * x * x;
    p.lt_v * p.lr_v * (p.distance * p.distance + x * x).ln() + (x4 + mu1) / 8.0 * (mu1 + x4).ln()
        - (x4 + mu2) / 8.0 * (mu2 + x4).ln()
}

/// Channel gain $\gamma \approx \iint |G|^2$ over the two planes.
///
/// The vertical integral is taken with $\arctan(L/c) \approx L/c$, so $\gamma$
/// overestimates the gain once the sides approach $D$ (about 9% for 10-wavelength
/// squares at 26 wavelengths).
pub fn gamma_numerator(p: &Cap2dClosedParams) -> f64 {
    let a = (p.lt_h - p.lr_h).abs() / 2.0;
    let b = (p.lt_h + p.lr_h) / 2.0;
    let lmax = p.lt_h.max(p.lr_h);
    let (ta, tb) = (t_function(a, p), t_function(b, p));
    MU0 * (2.0 * p.lt_h * p.lr_h / lmax * ta + (p.lt_h + p.lr_h) * (tb - ta)
        - 2.0 * (q_function(b, p) - q_function(a, p)))
}

/// Bracketed geometric factor of $\xi$ without $\mu_3\varphi$.
fn xi_shape(p: &Cap2dClosedParams) -> f64 {
    let d = p.distance;
    let d2 = d * d;
    let (lh, lv) = (p.lt_h, p.lt_v);
    let lv2 = lv * lv;
    let den = 4.0 * d2 + lh * lh;
    4.0 * lh * lh * lv2 / (d2 * den) + 2.0 * lh * lv2 / (d2 * d) * (lh / (2.0 * d)).atan() + 16.0 * lv2 / den
        - 4.0 * lv2 / d2
}

/// $\xi = \varphi\mu_3[\dots]$ with $\mu_3 = (\mu_0 L_{r,V} L_{r,H})^2$.
pub fn xi_denominator(p: &Cap2dClosedParams, phi: f64) -> f64 {
    let mu3 = (MU0 * p.lr_v * p.lr_h).powi(2);
    phi * mu3 * xi_shape(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiEstimate {
    /// Mean over replicates.
    pub value: f64,
    pub std_error: f64,
    pub replicates: usize,
    pub samples_tx: usize,
    pub samples_rx: usize,
}

/// Sample regions for $\varphi$: `(h, v)` sides, zero `h` meaning a segment on the y axis.
#[derive(Debug, Clone, Copy)]
struct Region {
    h: f64,
    v: f64,
    z: f64,
}

impl Region {
    fn random(&self, n: usize, sampler: SeededSampler) -> Vec<Point3> {
        let u = sampler.uniform(2 * n, -0.5, 0.5);
        (0..n)
            .map(|i| Point3::new(u[2 * i] * self.h, u[2 * i + 1] * self.v, self.z))
            .collect()
    }

    fn grid(&self, n: usize) -> Vec<Point3> {
        let mid = |len: f64, k: usize, i: usize| len * ((i as f64 + 0.5) / k as f64 - 0.5);
        if self.h == 0.0 {
            return (0..n).map(|i| Point3::new(0.0, mid(self.v, n, i), self.z)).collect();
        }
        let k = (n as f64).sqrt().ceil() as usize;
        (0..k * k)
            .map(|i| Point3::new(mid(self.h, k, i % k), mid(self.v, k, i / k), self.z))
            .collect()
    }
}

fn phi_once(t1: &[Point3], t2: &[Point3], r: &[Point3], wavenumber: f64) -> Result<f64> {
    let phases = |t: &[Point3]| {
        ComplexMatrix::from_fn(r.len(), t.len(), |k, o| Complex64::from_polar(1.0, wavenumber * r[k].distance(&t[o])))
    };
    let a = phases(t1);
    let b = phases(t2);
    // S[u][o] = sum_k conj(b_ku) a_ko, so |S|^2 matches the printed double sum
    let s = b.adjoint().matmul(&a)?;
    let (ms1, ms2, ns) = (t1.len() as f64, t2.len() as f64, r.len() as f64);
    Ok(s.frobenius_norm_sq() / (ns * ns * ms1 * ms2))
}

fn phi_estimate(
    tx: Region,
    rx: Region,
    ms: usize,
    ns: usize,
    seed: u64,
    replicates: usize,
    sampling: PhiSampling,
    wavenumber: f64,
) -> Result<PhiEstimate> {
    if ms == 0 || ns == 0 || replicates == 0 {
        return Err(Error::Argument("sample counts and replicates must be at least 1".into()));
    }
    if sampling == PhiSampling::Grid {
        let t = tx.grid(ms);
        let r = rx.grid(ns);
        let value = phi_once(&t, &t, &r, wavenumber)?;
        return Ok(PhiEstimate {
            value,
            std_error: 0.0,
            replicates: 1,
            samples_tx: t.len(),
            samples_rx: r.len(),
        });
    }
    let values: Vec<f64> = (0..replicates as u64)
        .map(|rep| {
            let t1 = tx.random(ms, SeededSampler::new(seed, 3 * rep));
            let t2 = tx.random(ms, SeededSampler::new(seed, 3 * rep + 1));
            let r = rx.random(ns, SeededSampler::new(seed, 3 * rep + 2));
            phi_once(&t1, &t2, &r, wavenumber)
        })
        .collect::<Result<_>>()?;
    let n = values.len() as f64;
    let mean = pairwise_sum(&values) / n;
    let std_error = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(PhiEstimate {
        value: mean,
        std_error,
        replicates: values.len(),
        samples_tx: ms,
        samples_rx: ns,
    })
}

/// Phase coefficient $\varphi$ for two planes.
pub fn phi_coefficient(p: &Cap2dClosedParams) -> Result<PhiEstimate> {
    p.validate()?;
    phi_estimate(
        Region {
            h: p.lt_h,
            v: p.lt_v,
            z: 0.0,
        },
        Region {
            h: p.lr_h,
            v: p.lr_v,
            z: p.distance,
        },
        p.ms,
        p.ns,
        p.seed,
        p.replicates,
        p.sampling,
        p.wavenumber,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormResult {
    pub value: f64,
    /// Square root of the numerator: the channel-gain term.
    pub numerator_sqrt: f64,
    pub denominator: f64,
    pub phi: PhiEstimate,
    /// Set when an approximation is used outside its intended regime.
    pub regime_flag: bool,
}

impl ClosedFormResult {
    pub fn to_edof(&self) -> EdofResult {
        EdofResult::new(self.value, EdofMethod::ClosedForm)
            .with("numerator_sqrt", self.numerator_sqrt)
            .with("denominator", self.denominator)
            .with("phi", self.phi.value)
            .with("phi_std_error", self.phi.std_error)
            .with("phi_replicates", self.phi.replicates as f64)
            .with("regime_flag", if self.regime_flag { 1.0 } else { 0.0 })
    }
}

/// Plane-to-plane closed form $\Psi = \gamma^2/\xi$.
pub fn cap2d_edof_closed(p: &Cap2dClosedParams) -> Result<ClosedFormResult> {
    let phi = phi_coefficient(p)?;
    let gamma = gamma_numerator(p);
    if !(gamma > 0.0) {
        return Err(Error::Numerical {
            message: format!("channel-gain term is not positive ({gamma:e})"),
            condition: f64::NAN,
        });
    }
    let xi = xi_denominator(p, phi.value);
    Ok(ClosedFormResult {
        value: gamma * gamma / xi,
        numerator_sqrt: gamma,
        denominator: xi,
        phi,
        regime_flag: false,
    })
}

/// Large-transmitter simplification with $\gamma \approx 2L_{r,H}\mu_0 T(L_{t,H}/2)$.
pub fn cap2d_edof_approx_large_tx(p: &Cap2dClosedParams) -> Result<ClosedFormResult> {
    let phi = phi_coefficient(p)?;
    let t = t_function(p.lt_h / 2.0, p);
    let d = p.distance;
    let d2 = d * d;
    let (lh, lv, rv) = (p.lt_h, p.lt_v, p.lr_v);
    let c = phi.value * lv * lv * rv * rv;
    let den = 4.0 * d2 + lh * lh;
    let denominator = c * lh * lh / (d2 * den) + c * lh / (2.0 * d2 * d) * (lh / (2.0 * d)).atan() + 4.0 * c / den
        - c / d2;
    let ratio = (p.lt_h / p.lr_h).min(p.lt_v / p.lr_v);
    Ok(ClosedFormResult {
        value: t * t / denominator,
        numerator_sqrt: 2.0 * p.lr_h * MU0 * t,
        denominator,
        phi,
        regime_flag: ratio < LARGE_TX_RATIO,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cap1dClosedParams {
    pub lt: f64,
    pub lr: f64,
    pub distance: f64,
    pub wavenumber: f64,
    pub ms: usize,
    pub ns: usize,
    pub seed: u64,
    pub replicates: usize,
    pub sampling: PhiSampling,
}

impl Cap1dClosedParams {
    pub fn new(lt: f64, lr: f64, distance: f64, wavenumber: f64) -> Result<Self> {
        for v in [lt, lr, distance, wavenumber] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Argument("segment lengths, distance and wavenumber must be positive".into()));
            }
        }
        Ok(Self {
            lt,
            lr,
            distance,
            wavenumber,
            ms: DEFAULT_SAMPLES,
            ns: DEFAULT_SAMPLES,
            seed: 0,
            replicates: DEFAULT_REPLICATES,
            sampling: PhiSampling::Random,
        })
    }

    pub fn with_samples(mut self, ms: usize, ns: usize) -> Self {
        self.ms = ms;
        self.ns = ns;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_sampling(mut self, sampling: PhiSampling) -> Self {
        self.sampling = sampling;
        self
    }
}

/// Phase coefficient for two segments on the y axis.
pub fn phi_coefficient_1d(p: &Cap1dClosedParams) -> Result<PhiEstimate> {
    phi_estimate(
        Region {
            h: 0.0,
            v: p.lt,
            z: 0.0,
        },
        Region {
            h: 0.0,
            v: p.lr,
            z: p.distance,
        },
        p.ms,
        p.ns,
        p.seed,
        p.replicates,
        p.sampling,
        p.wavenumber,
    )
}

/// Segment-to-segment closed form
/// $\{2L_tL_r - D^2\ln[((L_t+L_r)^2+4D^2)/((L_t-L_r)^2+4D^2)]\}^2 / (\varphi (L_tL_r)^2)$.
pub fn cap1d_edof_closed(p: &Cap1dClosedParams) -> Result<ClosedFormResult> {
    let phi = phi_coefficient_1d(p)?;
    let d2 = p.distance * p.distance;
    let prod = p.lt * p.lr;
    let log_ratio = (4.0 * prod / ((p.lt - p.lr).powi(2) + 4.0 * d2)).ln_1p();
    let num = 2.0 * prod - d2 * log_ratio;
    let denominator = phi.value * prod * prod;
    Ok(ClosedFormResult {
        value: num * num / denominator,
        numerator_sqrt: num,
        denominator,
        phi,
        regime_flag: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edof::{cap_edof_scalar_quadrature, direct_edof, QuadOrders};
    use crate::channel::ChannelKind;
    use crate::geometry::{CapPlane, UlaGeometry, UpaGeometry, WaveParams};
    use crate::numerics::gauss_legendre;

    fn unit() -> WaveParams {
        WaveParams::from_wavelength(1.0).unwrap()
    }

    fn upa_link(m: usize, side: f64, d: f64) -> LinkConfig {
        let g = ArrayGeometry::Upa(UpaGeometry::square(m, side, 0.0).unwrap());
        LinkConfig::new(g, g, d, unit()).unwrap()
    }

    fn ula_link(m: usize, len: f64, d: f64, w: WaveParams) -> LinkConfig {
        let g = ArrayGeometry::Ula(UlaGeometry::new(m, len, 0.0).unwrap());
        LinkConfig::new(g, g, d, w).unwrap()
    }

    #[test]
    fn discrete_trivial_limits() {
        let one = upa_link(1, 1e-3, 10.0);
        assert!((upa_edof_closed(&one).unwrap().value - 1.0).abs() < 1e-12);
        let far = upa_link(4, 2.0, 1e6);
        assert!((upa_edof_closed(&far).unwrap().value - 1.0).abs() < 1e-3);
        let ula_one = ula_link(1, 1e-3, 5.0, unit());
        assert!((ula_edof_closed(&ula_one).unwrap().value - 1.0).abs() < 1e-12);
        let ula_far = ula_link(8, 4.0, 1e6, unit());
        assert!((ula_edof_closed(&ula_far).unwrap().value - 1.0).abs() < 1e-3);
        assert!(ula_edof_closed(&far).is_err());
    }

    #[test]
    fn upa_closed_tracks_direct() {
        let link = upa_link(4, 4.0, 10.0);
        let c = upa_edof_closed(&link).unwrap().value;
        let d = direct_edof(&link, &ChannelKind::Scalar).unwrap().value;
        assert!(((c - d) / d).abs() < 0.05, "{c} vs {d}");
    }

    #[test]
    fn ula_closed_tracks_direct() {
        let w = WaveParams::from_frequency(30e9).unwrap();
        let link = ula_link(64, 1.0, 10.0, w);
        let c = ula_edof_closed(&link).unwrap().value;
        let d = direct_edof(&link, &ChannelKind::Scalar).unwrap().value;
        assert!(((c - d) / d).abs() < 0.05, "{c} vs {d}");
    }

    fn params(lt_h: f64, lt_v: f64, lr_h: f64, lr_v: f64, d: f64) -> Cap2dClosedParams {
        Cap2dClosedParams::new(lt_h, lt_v, lr_h, lr_v, d, 2.0 * PI).unwrap()
    }

    #[test]
    fn pdf_examples_and_normalization() {
        let p = params(2.0, 1.0, 1.0, 1.0, 1.0);
        assert!((pdf_f(0.4, &p) - 1.0).abs() < 1e-15);
        assert_eq!(pdf_f(-0.1, &p), 0.0);
        assert_eq!(pdf_f(1.6, &p), 0.0);
        let q = params(1.5, 1.5, 1.5, 1.5, 1.0);
        assert!((pdf_g(0.0, &q) - 2.0 / 1.5).abs() < 1e-15);
        let rule = gauss_legendre(40).unwrap();
        for (lt, lr) in [(2.0, 1.0), (1.0, 1.0), (0.3, 2.7)] {
            let p = params(lt, lt, lr, lr, 1.0);
            let a = (lt - lr).abs() / 2.0;
            let b = (lt + lr) / 2.0;
            // piecewise integration keeps the rule exact on each linear branch
            let total = rule.integrate(0.0, a, |x| pdf_f(x, &p)) + rule.integrate(a, b, |x| pdf_f(x, &p));
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gamma1_examples() {
        let p = params(1.0, 1.0, 1.0, 1.0, 1.0);
        assert!((gamma1(0.0, &p) - (2.0 - 2f64.ln())).abs() < 1e-14);
        assert!(gamma1(1e8, &p).abs() < 1e-10);
    }

    #[test]
    fn t_and_q_at_zero() {
        let p = params(1.3, 0.7, 2.0, 1.1, 3.0);
        assert_eq!(t_function(0.0, &p), 0.0);
        let q0 = p.lt_v * p.lr_v * (p.distance * p.distance).ln() + p.mu1() / 8.0 * p.mu1().ln()
            - p.mu2() / 8.0 * p.mu2().ln();
        assert!((q_function(0.0, &p) - q0).abs() < 1e-12);
    }

    #[test]
    fn derivatives_match_gamma1() {
        let p = params(1.0, 1.5, 2.0, 0.8, 2.0);
        for i in 0..20 {
            let x = 1.5 * i as f64 / 19.0 + 0.01;
            let h = 1e-5 * x.max(1.0);
            let dt = (t_function(x + h, &p) - t_function(x - h, &p)) / (2.0 * h);
            let dq = (q_function(x + h, &p) - q_function(x - h, &p)) / (2.0 * h);
            let g = gamma1(x, &p);
            assert!(((dt - g) / g).abs() < 1e-5);
            assert!(((dq - x * g) / (x * g)).abs() < 1e-5);
        }
    }

    #[test]
    fn gamma_matches_gain_quadrature() {
        let w = unit();
        // the closed gain replaces atan(L/c) by L/c, so it is tight only for L << D
        for (side, d) in [(2.0, 20.0), (1.0, 30.0), (3.0, 40.0)] {
            let p = Cap2dClosedParams::square(side, side, d, w.wavenumber).unwrap();
            let pl = ArrayGeometry::CapPlane(CapPlane::square(side, 0.0).unwrap());
            let q = cap_edof_scalar_quadrature(&pl, &pl, d, &w, QuadOrders::uniform(24).unchecked()).unwrap();
            let gain = q.diagnostic("gain_integral").unwrap();
            let g = gamma_numerator(&p);
            assert!(g > 0.0);
            assert!(((g - gain) / gain).abs() < 0.01, "side {side} D {d}: {g} vs {gain}");
        }
    }

    #[test]
    fn phi_examples() {
        let p = params(3.0, 3.0, 3.0, 3.0, 3.0).with_samples(1, 1);
        assert!((phi_coefficient(&p).unwrap().value - 1.0).abs() < 1e-15);
        let tiny = Cap2dClosedParams::new(1e-300, 1e-300, 2.0, 2.0, 3.0, 2.0 * PI).unwrap();
        assert!((phi_coefficient(&tiny).unwrap().value - 1.0).abs() < 1e-12);
        for seed in [1, 11, 12345] {
            let p = params(10.0, 10.0, 10.0, 10.0, 10.0).with_seed(seed);
            let e = phi_coefficient(&p).unwrap();
            assert!(e.value > 0.0 && e.value <= 1.0);
            // standard error of the reported replicate mean
            assert!(e.std_error / e.value <= 0.05, "seed {seed}: {}", e.std_error / e.value);
            assert_eq!(phi_coefficient(&p).unwrap(), e);
        }
    }

    #[test]
    fn closed_forms_far_field() {
        let w = unit();
        let p = Cap2dClosedParams::square(2.0, 2.0, 2000.0, w.wavenumber).unwrap();
        assert!((cap2d_edof_closed(&p).unwrap().value - 1.0).abs() < 0.05);
        let q = Cap1dClosedParams::new(2.0, 2.0, 1e5, w.wavenumber).unwrap();
        assert!((cap1d_edof_closed(&q).unwrap().value - 1.0).abs() < 0.01);
    }

    #[test]
    fn line_closed_numerator() {
        let q = Cap1dClosedParams::new(1.0, 1.0, 1.0, 1e4).unwrap();
        let r = cap1d_edof_closed(&q).unwrap();
        let num = 2.0 - 2f64.ln();
        assert!((r.numerator_sqrt - num).abs() < 1e-14);
        assert!((r.value - num * num / r.phi.value).abs() < 1e-12 * r.value);
    }

    #[test]
    fn large_tx_flags_and_agreement() {
        let w = WaveParams::from_frequency(30e9).unwrap();
        let eq = Cap2dClosedParams::square(1.0, 1.0, 50.0, w.wavenumber).unwrap();
        assert!(cap2d_edof_approx_large_tx(&eq).unwrap().regime_flag);
        let big = Cap2dClosedParams::square(10.0, 0.1, 50.0, w.wavenumber).unwrap();
        let a = cap2d_edof_approx_large_tx(&big).unwrap();
        let f = cap2d_edof_closed(&big).unwrap();
        assert!(!a.regime_flag);
        assert!(((a.value - f.value) / f.value).abs() < 0.05, "{} vs {}", a.value, f.value);
    }
}
