//! Capacity from EDoF and overall channel gain, $C = \mathrm{EDoF}\log_2(1 + \alpha P/(\mathrm{EDoF}^2 N_0))$.

use crate::edof::EdofResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityInputs {
    pub edof: f64,
    /// Overall channel gain.
    pub alpha: f64,
    /// Transmit power in watts.
    pub power: f64,
    /// Noise power in watts.
    pub noise: f64,
}

impl CapacityInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("edof", self.edof), ("alpha", self.alpha), ("power", self.power), ("noise", self.noise)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Argument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Capacity in bits/s/Hz.
pub fn capacity(inputs: &CapacityInputs) -> Result<f64> {
    inputs.validate()?;
    let snr = inputs.alpha * inputs.power / (inputs.edof * inputs.edof * inputs.noise);
    Ok(inputs.edof * snr.ln_1p() / std::f64::consts::LN_2)
}

/// How the channel gain is read off an EDoF expression written as numerator/denominator.
///
/// The numerator of every EDoF expression is already a square, so "the square root
/// of the numerator" is the un-squared gain and "the numerator" is its square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaReading {
    #[default]
    SqrtOfNumerator,
    Numerator,
}

/// Gain α for an EDoF result carrying a `numerator_sqrt` diagnostic.
///
/// Closed forms record their un-squared numerator (γ for the planar CAP form);
/// trace-ratio results fall back to `trace`, i.e. ‖H‖²_F, and CAP integrals to
/// their integrated gain.
pub fn alpha_from(result: &EdofResult, reading: AlphaReading) -> Result<f64> {
    let root = result
        .diagnostic("numerator_sqrt")
        .or_else(|| result.diagnostic("trace"))
        .or_else(|| result.diagnostic("gain_integral"))
        .ok_or_else(|| Error::Argument(format!("{:?} result carries no channel gain", result.method)))?;
    Ok(match reading {
        AlphaReading::SqrtOfNumerator => root,
        AlphaReading::Numerator => root * root,
    })
}
