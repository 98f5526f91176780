//! Closed-form free-Gaussian quantities: the complex width parameter, the
//! classical trajectory, the global phase, the free-particle propagator, and
//! the freely evolved wave function evaluated at the barrier.
//!
//! All expressions accept negative time arguments; probe amplitudes are
//! evolved backwards through the same closed forms with signed tau.
//!
//! Branch conventions, fixed once and verified by quadrature tests:
//! sqrt(1/i) = exp(-i pi/4) for tau > 0 (conjugated for tau < 0), and complex
//! quarter powers use the principal branch. The width parameter never crosses
//! the negative real axis for real tau, so the principal branch is continuous.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::phys::{WavePacketSpec, HBAR};

/// Complex Gaussian width parameter alpha at some (possibly negative) time,
/// in 1/m^2. Its real part is strictly positive for all real times and its
/// modulus never exceeds alpha0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexWidth {
    pub value: Complex64,
}

/// Complex amplitude of a wave function at the barrier, m^(-1/2).
pub type BarrierAmplitude = Complex64;

/// alpha0 / (1 + 2 i hbar alpha0 tau / m) for arbitrary real tau.
pub(crate) fn alpha_of(alpha0: f64, mass: f64, tau: f64) -> Complex64 {
    Complex64::new(alpha0, 0.0) / Complex64::new(1.0, 2.0 * HBAR * alpha0 * tau / mass)
}

/// Width parameter of the freely evolving packet at time `tau` (s).
pub fn alpha_tau(spec: &WavePacketSpec, tau: f64) -> ComplexWidth {
    ComplexWidth {
        value: alpha_of(spec.alpha0(), spec.mass(), tau),
    }
}

/// Classical trajectory x0 + v0 tau, m.
pub fn classical_position(spec: &WavePacketSpec, tau: f64) -> f64 {
    spec.x0() + spec.v0() * tau
}

/// Global phase m v0^2 tau/(2 hbar) - atan(2 hbar alpha0 tau/m)/2, rad.
pub fn global_phase(spec: &WavePacketSpec, tau: f64) -> f64 {
    let kinetic = spec.mass() * spec.v0() * spec.v0() * tau / (2.0 * HBAR);
    kinetic - 0.5 * (2.0 * HBAR * spec.alpha0() * tau / spec.mass()).atan()
}

/// Free-particle propagator sqrt(m/(2 pi i hbar tau)) exp(i m xi^2/(2 hbar tau)),
/// 1/m. Rejects tau = 0, where it degenerates to a delta function.
pub fn free_propagator(mass: f64, tau: f64, xi: f64) -> Result<Complex64> {
    if tau == 0.0 {
        return Err(Error::PropagatorZeroTime);
    }
    let magnitude = (mass / (2.0 * PI * HBAR * tau.abs())).sqrt();
    let phase = mass * xi * xi / (2.0 * HBAR * tau) - FRAC_PI_4 * tau.signum();
    Ok(Complex64::from_polar(magnitude, phase))
}

/// Freely evolved Gaussian with width parameter `alpha0`, launched from
/// `center` with mean velocity `velocity`, evaluated at the barrier (x = 0)
/// after time `tau` (signed). Serves both the source packet (center < 0) and
/// the probe states (center > 0, evolved backwards).
///
/// This is the simplified single-exponential form; the identity
/// alpha_tau tau + i m/(2 hbar) = i m alpha_tau/(2 hbar alpha0) collapses the
/// tau v^2 and center-velocity cross terms into one factor.
pub fn barrier_amplitude(
    alpha0: f64,
    mass: f64,
    center: f64,
    velocity: f64,
    tau: f64,
) -> Complex64 {
    let a = alpha_of(alpha0, mass, tau);
    let prefactor = (2.0 * a * a / (PI * alpha0)).powf(0.25);
    let exponent = -Complex64::i()
        * (mass / HBAR)
        * (a / alpha0)
        * (0.5 * tau * velocity * velocity + center * velocity)
        - a * center * center;
    prefactor * exponent.exp()
}

/// Freely evolved packet amplitude at the barrier, with the spec's initial
/// position but velocity `v` overriding the spec's v0 (the thermal mixture
/// averages over this velocity). `tau` may be negative.
pub fn psi_at_barrier(spec: &WavePacketSpec, v: f64, tau: f64) -> BarrierAmplitude {
    barrier_amplitude(spec.alpha0(), spec.mass(), spec.x0(), v, tau)
}

/// Freely evolved wave function at arbitrary position `x` and time `tau`:
/// exp(i phi_tau) times the Gaussian with width alpha_tau centered on the
/// classical trajectory. Used as the closed-form reference for the
/// transmitted wave in the fully transparent case.
pub fn free_wavefunction(spec: &WavePacketSpec, x: f64, tau: f64) -> Complex64 {
    let a = alpha_of(spec.alpha0(), spec.mass(), tau);
    let xt = classical_position(spec, tau);
    let prefactor = (2.0 * a.re / PI).powf(0.25);
    let exponent = -a * (x - xt) * (x - xt)
        + Complex64::i() * (spec.mass() * spec.v0() * (x - xt) / HBAR + global_phase(spec, tau));
    prefactor * exponent.exp()
}
