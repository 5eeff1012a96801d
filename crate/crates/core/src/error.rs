use crate::scalar::Complex;
use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument outside domain: {0}")]
    Domain(String),

    /// `c` of a hypergeometric series sits on a nonpositive integer.
    #[error("hypergeometric parameter c is within tolerance of -{0}")]
    HypergeometricPole(u32),

    #[error("erf asymptotic series used outside its sector: |ph({branch}z)| = {phase:.4} >= 3pi/4")]
    Sector { branch: char, phase: f64 },

    #[error("k = {0} lies on the real integration contour")]
    Contour(Complex),

    #[error("quadrature did not converge: estimate {value}, error {error:e}")]
    Quadrature { value: Complex, error: f64 },

    #[error("ODE integration failed at r = {r}: {reason}")]
    Ode { r: f64, reason: String },

    #[error("tail of the potential too large at R = {r} (|V| R = {tail:e})")]
    TailTooLarge { r: f64, tail: f64 },

    #[error("integrand not representable in double precision: needs about {digits} digits")]
    Representability { digits: u32 },

    #[error("k = {0} is within tolerance of a zero of the Jost function")]
    NearResonance(Complex),

    #[error("pole count mismatch in region {region}: winding number {winding}, refined zeros {found}")]
    PoleCount {
        region: String,
        winding: i64,
        found: usize,
    },

    #[error("poles {0} and {1} are nearly degenerate")]
    DegeneratePoles(Complex, Complex),

    #[error("no resonance found below |k| = {0}")]
    NoResonance(f64),

    #[error("C(0) vanishes; late-time decay is faster than t^-3/2")]
    VanishingC0,

    #[error("f(0,0) vanishes: zero-energy resonance")]
    ZeroEnergyResonance,

    #[error("no crossover: W argument {0} is below -1/e")]
    NoCrossover(f64),

    #[error("tolerance not met: {0}")]
    Tolerance(String),

    #[error("{0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
