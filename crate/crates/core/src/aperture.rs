//! Barrier transparency protocols chi(tau), all valued in [0, 1]:
//! 0 is total absorption, 1 is full transparency.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A time-dependent transparency protocol.
///
/// The exponential-rate protocols are parametrized by the rate `gamma` (1/s)
/// and, where applicable, the classical barrier-crossing time `t0` (s). The
/// clamped variants saturate at full transparency away from the crossing
/// window, which raises the overall transmission without changing the shape
/// of the transmitted packet.
#[derive(Debug, Clone, PartialEq)]
pub enum ApertureProtocol {
    /// chi = 1: no barrier.
    Free,
    /// chi = chi0 exp(gamma tau). Evaluation exceeding 1 is an error; the
    /// caller picks chi0 small enough for the window it integrates over.
    Exponential { chi0: f64, gamma: f64 },
    /// chi = min(exp(gamma (tau - t1)), 1) with t1 = 3 t0/2 for gamma > 0 and
    /// t1 = t0/2 otherwise. Shifts the transmitted packet by -gamma sigma^2/v0.
    ShiftClamped { gamma: f64, t0: f64 },
    /// chi = min(cosh(gamma (tau - t0))/cosh(gamma t0/2), 1): an equally
    /// weighted rising and decaying exponential around t0. Splits the packet
    /// at large gamma.
    SplitCosh { gamma: f64, t0: f64 },
    /// chi = exp(-gamma |tau - t0|), gamma >= 0: opens until t0, then closes.
    /// Squeezes the packet in position and cools the thermal mixture.
    SqueezeExp { gamma: f64, t0: f64 },
    /// Piecewise-linear interpolation of tabulated (tau, chi) samples.
    Tabulated(TabulatedAperture),
}

/// Strictly increasing (tau, chi) samples with chi in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedAperture {
    samples: Vec<(f64, f64)>,
}

impl TabulatedAperture {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::ApertureTable(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        for (k, &(tau, chi)) in samples.iter().enumerate() {
            if !tau.is_finite() || !chi.is_finite() {
                return Err(Error::ApertureTable(format!(
                    "non-finite sample #{k}: ({tau}, {chi})"
                )));
            }
            if !(0.0..=1.0).contains(&chi) {
                return Err(Error::ApertureTable(format!(
                    "chi = {chi} at sample #{k} is outside [0, 1]"
                )));
            }
            if k > 0 && tau <= samples[k - 1].0 {
                return Err(Error::ApertureTable(format!(
                    "tau values must be strictly increasing (sample #{k})"
                )));
            }
        }
        Ok(Self { samples })
    }

    /// Parses a two-column CSV (tau seconds, chi dimensionless). A header
    /// line is allowed and skipped when its first field is not a number.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split(',').map(str::trim);
            let (a, b) = match (fields.next(), fields.next()) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::ApertureTable(format!(
                        "line {}: expected two comma-separated columns",
                        lineno + 1
                    )))
                }
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(tau), Ok(chi)) => samples.push((tau, chi)),
                _ if lineno == 0 => continue, // header
                _ => {
                    return Err(Error::ApertureTable(format!(
                        "line {}: cannot parse '{a}', '{b}' as numbers",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(samples)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::ApertureTable(format!("{}: {e}", path.display())))?;
        Self::from_csv_str(&text)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    fn evaluate(&self, tau: f64) -> Result<f64> {
        let first = self.samples[0].0;
        let last = self.samples[self.samples.len() - 1].0;
        if tau < first || tau > last {
            return Err(Error::TabulatedRange {
                tau,
                lo: first,
                hi: last,
            });
        }
        let idx = self
            .samples
            .partition_point(|&(t, _)| t <= tau)
            .clamp(1, self.samples.len() - 1);
        let (t0, c0) = self.samples[idx - 1];
        let (t1, c1) = self.samples[idx];
        let frac = (tau - t0) / (t1 - t0);
        Ok(c0 + frac * (c1 - c0))
    }
}

impl ApertureProtocol {
    /// Transparency at time `tau`. Always in [0, 1] on success.
    pub fn evaluate(&self, tau: f64) -> Result<f64> {
        match *self {
            ApertureProtocol::Free => Ok(1.0),
            ApertureProtocol::Exponential { chi0, gamma } => {
                if !(chi0 > 0.0 && chi0 <= 1.0) {
                    return Err(Error::InvalidInput {
                        field: "chi0",
                        reason: format!("must lie in (0, 1], got {chi0}"),
                    });
                }
                let chi = chi0 * (gamma * tau).exp();
                if chi > 1.0 {
                    return Err(Error::TransparencyBound { tau, chi });
                }
                Ok(chi)
            }
            ApertureProtocol::ShiftClamped { gamma, t0 } => {
                let t1 = if gamma > 0.0 { 1.5 * t0 } else { 0.5 * t0 };
                Ok((gamma * (tau - t1)).exp().min(1.0))
            }
            ApertureProtocol::SplitCosh { gamma, t0 } => {
                Ok(((gamma * (tau - t0)).cosh() / (gamma * t0 / 2.0).cosh()).min(1.0))
            }
            ApertureProtocol::SqueezeExp { gamma, t0 } => {
                if gamma < 0.0 {
                    return Err(Error::InvalidInput {
                        field: "gamma",
                        reason: format!("squeeze protocol requires gamma >= 0, got {gamma}"),
                    });
                }
                Ok((-gamma * (tau - t0).abs()).exp())
            }
            ApertureProtocol::Tabulated(ref table) => table.evaluate(tau),
        }
    }

    /// The exponential rate gamma for the protocols that carry one.
    pub fn gamma(&self) -> Option<f64> {
        match *self {
            ApertureProtocol::Free => Some(0.0),
            ApertureProtocol::Exponential { gamma, .. }
            | ApertureProtocol::ShiftClamped { gamma, .. }
            | ApertureProtocol::SplitCosh { gamma, .. }
            | ApertureProtocol::SqueezeExp { gamma, .. } => Some(gamma),
            ApertureProtocol::Tabulated(_) => None,
        }
    }
}
