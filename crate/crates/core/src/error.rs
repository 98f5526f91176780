use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    #[error("aperture transparency {chi} at tau = {tau} s exceeds 1")]
    TransparencyBound { tau: f64, chi: f64 },

    #[error("tabulated aperture queried at tau = {tau} s, outside [{lo}, {hi}] s")]
    TabulatedRange { tau: f64, lo: f64, hi: f64 },

    #[error("aperture table: {0}")]
    ApertureTable(String),

    #[error("free propagator is undefined at tau = 0 (delta-function limit)")]
    PropagatorZeroTime,

    #[error("integrand returned a non-finite value at tau = {tau}")]
    NonFiniteIntegrand { tau: f64 },

    #[error(
        "hermitian symmetry violated at (tau, tau') = ({tau}, {tau_prime}): \
         |g(tau, tau') - conj(g(tau', tau))| = {deviation:e}"
    )]
    HermitianSymmetry {
        tau: f64,
        tau_prime: f64,
        deviation: f64,
    },

    #[error("2d integral has residual imaginary part {imag:e} against real part {real:e}")]
    ResidualImaginary { real: f64, imag: f64 },

    #[error("thermal kernel velocity integral does not converge: Re A = {re_a:e} <= 0")]
    KernelDivergent { re_a: f64 },

    #[error("distribution value {value:e} is negative beyond roundoff (scale {scale:e})")]
    NegativeDistribution { value: f64, scale: f64 },

    #[error("field has zero total mass")]
    ZeroMassField,

    #[error("grid truncates the distribution at the {edge} edge ({detail}); enlarge the grid")]
    GridTruncation { edge: &'static str, detail: String },

    #[error("husimi grid point (x = {x}, v = {v}) failed")]
    GridPoint {
        x: f64,
        v: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
