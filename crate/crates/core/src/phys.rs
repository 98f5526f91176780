//! Physical constants, particle and wave-packet parameters, and the
//! semiclassical-regime diagnostic.
//!
//! All quantities are SI double precision throughout. Mass is accepted in
//! unified atomic mass units at the interface and converted once at
//! construction.

use crate::error::{Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054571817e-34;

/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.66053906660e-27;

/// A point (x, v) in position-velocity phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpacePoint {
    /// Position, m.
    pub x: f64,
    /// Velocity, m/s.
    pub v: f64,
}

/// Initial Gaussian wave packet: mass, spatial width, mean position and
/// velocity, plus the thermal velocity spread of the mixture it seeds.
///
/// The packet starts left of the barrier (x0 < 0) moving towards it
/// (v0 > 0). The width parameter is alpha0 = 1/(2 sigma^2) > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePacketSpec {
    mass: f64,
    sigma: f64,
    x0: f64,
    v0: f64,
    delta_v: f64,
}

impl WavePacketSpec {
    /// Builds a validated spec. `mass_u` is in unified atomic mass units;
    /// the remaining arguments are SI (m, m, m/s, m/s).
    pub fn new(mass_u: f64, sigma: f64, x0: f64, v0: f64, delta_v: f64) -> Result<Self> {
        if !(mass_u > 0.0) || !mass_u.is_finite() {
            return Err(Error::InvalidInput {
                field: "mass_u",
                reason: format!("must be positive and finite, got {mass_u}"),
            });
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidInput {
                field: "sigma",
                reason: format!("must be positive and finite, got {sigma}"),
            });
        }
        if !(x0 < 0.0) || !x0.is_finite() {
            return Err(Error::InvalidInput {
                field: "x0",
                reason: format!("packet must start left of the barrier (x0 < 0), got {x0}"),
            });
        }
        if !(v0 > 0.0) || !v0.is_finite() {
            return Err(Error::InvalidInput {
                field: "v0",
                reason: format!("packet must move towards the barrier (v0 > 0), got {v0}"),
            });
        }
        if !(delta_v >= 0.0) || !delta_v.is_finite() {
            return Err(Error::InvalidInput {
                field: "delta_v",
                reason: format!("thermal spread must be >= 0, got {delta_v}"),
            });
        }
        Ok(Self {
            mass: mass_u * ATOMIC_MASS_UNIT,
            sigma,
            x0,
            v0,
            delta_v,
        })
    }

    /// Mass in kg.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Spatial width sigma, m.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Initial mean position, m (negative).
    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Initial mean velocity, m/s (positive).
    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// Thermal velocity spread, m/s (zero for a pure state).
    pub fn delta_v(&self) -> f64 {
        self.delta_v
    }

    /// Width parameter alpha0 = 1/(2 sigma^2), 1/m^2.
    pub fn alpha0(&self) -> f64 {
        1.0 / (2.0 * self.sigma * self.sigma)
    }

    /// Time t0 = |x0|/v0 at which the classical particle crosses the barrier.
    pub fn barrier_crossing_time(&self) -> f64 {
        self.x0.abs() / self.v0
    }
}

/// Total propagation time of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationWindow {
    t: f64,
}

impl SimulationWindow {
    /// Requires t > 0 and t0 = |x0|/v0 strictly inside (0, t).
    pub fn new(t: f64, spec: &WavePacketSpec) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidInput {
                field: "t",
                reason: format!("must be positive and finite, got {t}"),
            });
        }
        let t0 = spec.barrier_crossing_time();
        if !(t0 < t) {
            return Err(Error::InvalidInput {
                field: "t",
                reason: format!(
                    "barrier crossing time t0 = {t0} s must lie inside the window (t0 < t = {t})"
                ),
            });
        }
        Ok(Self { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// Which of the three asymptotic-regime inequalities hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegimeFlags {
    /// 1 << |x0|/sigma (packet well left of the barrier).
    pub localization: bool,
    /// |x0|/sigma <~ v0 t/(2 sigma) (packet has passed the barrier by t).
    pub passage: bool,
    /// v0 t/(2 sigma) << sigma/(2 lambdabar) (frozen-Gaussian limit).
    pub semiclassical: bool,
}

impl RegimeFlags {
    pub fn all(&self) -> bool {
        self.localization && self.passage && self.semiclassical
    }
}

/// Diagnostic quantities for the asymptotic regime. Purely informative;
/// nothing here ever refuses to run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    /// Reduced de Broglie wavelength hbar/(m v0), m.
    pub lambdabar: f64,
    /// Frozen-Gaussian parameter hbar t/(m sigma^2).
    pub epsilon: f64,
    /// |x0|/sigma.
    pub ratio_localization: f64,
    /// v0 t/(2 sigma).
    pub ratio_passage: f64,
    /// sigma/(2 lambdabar).
    pub ratio_semiclassical: f64,
    /// Upper bound 2|x0| v0/sigma^2 on admissible |gamma|, 1/s.
    pub gamma_bound: f64,
    pub satisfied: RegimeFlags,
}

// Threshold factors: "a << b" means a <= b/5, "a <~ b" means a <= 1.1 b.
// A hair of multiplicative slack keeps parameter sets that sit exactly on a
// boundary from flipping on the last bit of the division.
const MUCH_LESS_FACTOR: f64 = 5.0;
const LESSISH_SLACK: f64 = 1.1;
const BOUNDARY_SLACK: f64 = 1.0 + 1e-12;

fn much_less(a: f64, b: f64) -> bool {
    a <= b / MUCH_LESS_FACTOR * BOUNDARY_SLACK
}

fn lessish(a: f64, b: f64) -> bool {
    a <= LESSISH_SLACK * b * BOUNDARY_SLACK
}

/// Evaluates the asymptotic-regime inequalities
/// 1 << |x0|/sigma <~ v0 t/(2 sigma) << sigma/(2 lambdabar)
/// for the given packet and window. Pure function; never refuses.
pub fn regime_report(spec: &WavePacketSpec, window: &SimulationWindow) -> RegimeReport {
    let lambdabar = HBAR / (spec.mass() * spec.v0());
    let epsilon = HBAR * window.t() / (spec.mass() * spec.sigma() * spec.sigma());
    let ratio_localization = spec.x0().abs() / spec.sigma();
    let ratio_passage = spec.v0() * window.t() / (2.0 * spec.sigma());
    let ratio_semiclassical = spec.sigma() / (2.0 * lambdabar);
    let gamma_bound = 2.0 * spec.x0().abs() * spec.v0() / (spec.sigma() * spec.sigma());
    RegimeReport {
        lambdabar,
        epsilon,
        ratio_localization,
        ratio_passage,
        ratio_semiclassical,
        gamma_bound,
        satisfied: RegimeFlags {
            localization: much_less(1.0, ratio_localization),
            passage: lessish(ratio_localization, ratio_passage),
            semiclassical: much_less(ratio_passage, ratio_semiclassical),
        },
    }
}
