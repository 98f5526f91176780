//! Steepest-descent approximation of the pure-state Husimi distribution for
//! exponential-rate apertures, and the spatial-shift prediction derived from
//! it. Serves as the independent analytic cross-check of the numerical
//! pipeline in the frozen-Gaussian regime.

use crate::aperture::ApertureProtocol;
use crate::error::{Error, Result};
use crate::phys::{PhaseSpacePoint, SimulationWindow, WavePacketSpec, HBAR};
use crate::transmission::ProbeSpec;

/// Coefficients of the Gaussian saddle form
/// exp(-U (tau^2 + tau'^2) - (V_R -+ i V_I) tau(') - W).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleCoefficients {
    /// alpha0 (v_tilde^2 + v0^2), 1/s^2.
    pub u: f64,
    /// 2 alpha0 [(x_tilde - v_tilde t) v_tilde + x0 v0], 1/s.
    pub v_r: f64,
    /// m (v_tilde^2 - v0^2)/(2 hbar), 1/s.
    pub v_i: f64,
    /// 2 alpha0 [(x_tilde - v_tilde t)^2 + x0^2], dimensionless.
    pub w: f64,
}

pub fn saddle_coefficients(spec: &WavePacketSpec, probe: &ProbeSpec, t: f64) -> SaddleCoefficients {
    let alpha0 = spec.alpha0();
    let back_propagated = probe.x_tilde() - probe.v_tilde() * t;
    SaddleCoefficients {
        u: alpha0 * (probe.v_tilde() * probe.v_tilde() + spec.v0() * spec.v0()),
        v_r: 2.0 * alpha0 * (back_propagated * probe.v_tilde() + spec.x0() * spec.v0()),
        v_i: spec.mass() * (probe.v_tilde() * probe.v_tilde() - spec.v0() * spec.v0())
            / (2.0 * HBAR),
        w: 2.0 * alpha0 * (back_propagated * back_propagated + spec.x0() * spec.x0()),
    }
}

/// Log-Husimi exponent of the saddle approximation,
/// ((V_R - gamma)^2 - V_I^2)/(2U) - W.
pub fn xi_exponent(spec: &WavePacketSpec, probe: &ProbeSpec, t: f64, gamma: f64) -> f64 {
    let c = saddle_coefficients(spec, probe, t);
    let shifted = c.v_r - gamma;
    (shifted * shifted - c.v_i * c.v_i) / (2.0 * c.u) - c.w
}

/// Saddle-point Husimi value for the aperture chi0 exp(gamma tau).
///
/// The default keeps the (v_tilde + v0)^2 prefactor of the stationary-phase
/// result, which is uniformly more accurate; `simplified_prefactor` collapses
/// it to 1 (valid right at the peak), for comparison against the reduced
/// form.
pub fn semiclassical_husimi(
    spec: &WavePacketSpec,
    probe: &ProbeSpec,
    t: f64,
    chi0: f64,
    gamma: f64,
    simplified_prefactor: bool,
) -> f64 {
    let c = saddle_coefficients(spec, probe, t);
    let prefactor = if simplified_prefactor {
        1.0
    } else {
        let vsum = probe.v_tilde() + spec.v0();
        spec.alpha0() * vsum * vsum / (2.0 * c.u)
    };
    chi0 * chi0 * prefactor * xi_exponent(spec, probe, t, gamma).exp()
}

/// Predicted displacement of the transmitted packet relative to free flight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftPrediction {
    /// -gamma sigma^2 / v0, m.
    pub delta_x: f64,
    /// (x0 + v0 t + delta_x, v0); the mean velocity is untouched.
    pub peak: PhaseSpacePoint,
    /// Squared transparency at the crossing time, chi(t0)^2.
    pub transmission_estimate: f64,
    /// Whether |gamma| << 2 |x0| v0 / sigma^2 holds (factor-5 threshold).
    pub gamma_within_bound: bool,
}

/// Shift prediction for an exponential-rate protocol. The protocols without
/// a single exponential rate around the crossing time (split, squeeze,
/// tabulated) are rejected: the saddle analysis does not describe them.
pub fn predicted_shift(
    spec: &WavePacketSpec,
    window: &SimulationWindow,
    protocol: &ApertureProtocol,
) -> Result<ShiftPrediction> {
    let gamma = match *protocol {
        ApertureProtocol::Free => 0.0,
        ApertureProtocol::Exponential { gamma, .. }
        | ApertureProtocol::ShiftClamped { gamma, .. } => gamma,
        _ => {
            return Err(Error::InvalidInput {
                field: "protocol",
                reason: "shift prediction applies to exponential-rate apertures only".into(),
            })
        }
    };
    let sigma = spec.sigma();
    let delta_x = -gamma * sigma * sigma / spec.v0();
    let t0 = spec.barrier_crossing_time();
    let chi_t0 = protocol.evaluate(t0)?;
    let gamma_bound = 2.0 * spec.x0().abs() * spec.v0() / (sigma * sigma);
    Ok(ShiftPrediction {
        delta_x,
        peak: PhaseSpacePoint {
            x: spec.x0() + spec.v0() * window.t() + delta_x,
            v: spec.v0(),
        },
        transmission_estimate: chi_t0 * chi_t0,
        gamma_within_bound: gamma.abs() <= gamma_bound / 5.0,
    })
}
