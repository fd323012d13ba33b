//! Sine and cosine integrals.
//!
//! Power series for $x \le 6$. Above that the auxiliary functions come from the
//! continued fraction of $E_1(ix)$, which converges for every $x > 0$ and keeps
//! the absolute error near machine precision where the divergent asymptotic
//! series would stall around $10^{-8}$ at the split point.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SPLIT: f64 = 6.0;

fn si_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x; // x^(2k+1)/(2k+1)!
    let mut sum = x;
    for k in 1..200 {
        let kf = k as f64;
        term *= -x2 / ((2.0 * kf) * (2.0 * kf + 1.0));
        let add = term / (2.0 * kf + 1.0);
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn cin_series(x: f64) -> f64 {
    // sum_{k>=1} (-1)^k x^(2k) / (2k (2k)!)
    let x2 = x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -x2 / ((2.0 * kf - 1.0) * (2.0 * kf));
        let add = term / (2.0 * kf);
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// $E_1(ix)\,e^{ix}$ by modified Lentz on the continued fraction.
fn e1_imag_scaled(x: f64) -> Complex64 {
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 2..10_000 {
        let a = -((i - 1) as f64).powi(2);
        b += 2.0;
        d = Complex64::new(1.0, 0.0) / (d * a + b);
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h
}

/// $\mathrm{Si}(x) = \int_0^x \sin t / t\,dt$; odd in `x`.
pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x <= SPLIT {
        return si_series(x);
    }
    let h = e1_imag_scaled(x) * Complex64::new(x.cos(), -x.sin());
    std::f64::consts::FRAC_PI_2 + h.im
}

/// $\mathrm{Ci}(x) = \gamma_0 + \ln x + \int_0^x (\cos t - 1)/t\,dt$ for `x > 0`.
pub fn cosine_integral(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "cosine integral needs a finite positive argument, got {x}"
        )));
    }
    if x <= SPLIT {
        return Ok(EULER_GAMMA + x.ln() + cin_series(x));
    }
    let h = e1_imag_scaled(x) * Complex64::new(x.cos(), -x.sin());
    Ok(-h.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Gauss-Legendre oracle for Si on many short panels.
    fn si_oracle(x: f64) -> f64 {
        let rule = crate::numerics::gauss_legendre(20).unwrap();
        let panels = ((x.abs() / 0.5).ceil() as usize).max(1);
        let step = x / panels as f64;
        (0..panels)
            .map(|p| {
                let a = p as f64 * step;
                rule.integrate(a, a + step, |t| if t == 0.0 { 1.0 } else { t.sin() / t })
            })
            .sum()
    }

    /// Ci(x) = Ci(1) + \int_1^x cos t / t dt, anchored on the series at 1.
    fn ci_oracle(x: f64) -> f64 {
        let rule = crate::numerics::gauss_legendre(20).unwrap();
        let ci1 = EULER_GAMMA + cin_series(1.0);
        let panels = (((x - 1.0).abs() / 0.25).ceil() as usize).max(1);
        let step = (x - 1.0) / panels as f64;
        ci1 + (0..panels)
            .map(|p| {
                let a = 1.0 + p as f64 * step;
                rule.integrate(a, a + step, |t| t.cos() / t)
            })
            .sum::<f64>()
    }

    #[test]
    fn reference_values() {
        assert_eq!(sine_integral(0.0), 0.0);
        assert!((sine_integral(std::f64::consts::PI) - 1.851_937_051_982_466).abs() < 1e-12);
        assert!((cosine_integral(1.0).unwrap() - 0.337_403_922_900_968_1).abs() < 1e-12);
    }

    #[test]
    fn cosine_integral_domain() {
        assert!(cosine_integral(0.0).is_err());
        assert!(cosine_integral(-1.0).is_err());
        assert!(cosine_integral(f64::NAN).is_err());
    }

    #[test]
    fn sine_integral_is_odd() {
        for &x in &[0.1, 1.0, 5.9, 6.1, 17.0, 80.0] {
            assert!((sine_integral(-x) + sine_integral(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_quadrature_oracle_on_range() {
        let mut x = 0.05;
        while x <= 100.0 {
            let si = sine_integral(x);
            assert!((si - si_oracle(x)).abs() < 1e-10, "Si({x})");
            let ci = cosine_integral(x).unwrap();
            assert!((ci - ci_oracle(x)).abs() < 1e-10, "Ci({x})");
            x += 0.37;
        }
    }

    #[test]
    fn continuous_across_split() {
        let lo = SPLIT - 1e-12;
        let hi = SPLIT + 1e-12;
        assert!((sine_integral(lo) - sine_integral(hi)).abs() < 1e-10);
        assert!((cosine_integral(lo).unwrap() - cosine_integral(hi).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn large_argument_limits() {
        assert!((sine_integral(1e4) - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
        assert!(cosine_integral(1e4).unwrap().abs() < 1e-3);
    }
}
