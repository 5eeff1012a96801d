//! Complex scalars, the precision context and a log-scaled complex type.

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

pub const I: Complex = Complex::new(0.0, 1.0);

/// Largest number of significant digits double precision can deliver.
pub const MAX_DIGITS: u32 = 15;

/// Working-precision context shared by the numerical layers.
///
/// Arithmetic is IEEE double throughout; `digits` sets the accuracy that
/// iterative procedures (series, Newton, quadrature) aim for and the number
/// of significant digits written to CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Context {
    digits: u32,
}

impl Default for Context {
    fn default() -> Self {
        Context { digits: 14 }
    }
}

impl Context {
    pub fn new(digits: u32) -> Result<Self> {
        if digits == 0 || digits > MAX_DIGITS {
            return Err(Error::Config(format!(
                "precision of {digits} digits not available (supported: 1..={MAX_DIGITS})"
            )));
        }
        Ok(Context { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Relative tolerance `10^-digits`, floored at a few ulps.
    pub fn tol(&self) -> f64 {
        10f64.powi(-(self.digits as i32)).max(4.0 * f64::EPSILON)
    }
}

/// `mant * exp(log)`, for quantities whose modulus leaves the f64 range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mant: Complex,
    pub log: f64,
}

impl Scaled {
    pub fn new(z: Complex) -> Self {
        Scaled { mant: z, log: 0.0 }
    }

    /// `exp(z)` without forming it.
    pub fn exp(z: Complex) -> Self {
        Scaled {
            mant: Complex::from_polar(1.0, z.im),
            log: z.re,
        }
    }

    pub fn zero() -> Self {
        Scaled::new(Complex::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.mant == Complex::new(0.0, 0.0)
    }

    /// Natural log of the modulus; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.mant.norm().ln() + self.log
    }

    pub fn value(&self) -> Complex {
        if self.is_zero() {
            return self.mant;
        }
        self.mant * self.log.exp()
    }

    pub fn scale(self, z: Complex) -> Self {
        Scaled {
            mant: self.mant * z,
            log: self.log,
        }
        .normalize()
    }

    fn normalize(self) -> Self {
        let m = self.mant.norm();
        if m == 0.0 || !m.is_finite() {
            return self;
        }
        let e = m.ln().round();
        if e.abs() < 8.0 {
            return self;
        }
        Scaled {
            mant: self.mant * (-e).exp(),
            log: self.log + e,
        }
    }
}

impl std::ops::Mul for Scaled {
    type Output = Scaled;
    fn mul(self, o: Scaled) -> Scaled {
        // operands may carry tiny mantissas whose product would be subnormal
        let (a, o) = (self.normalize(), o.normalize());
        Scaled {
            mant: a.mant * o.mant,
            log: a.log + o.log,
        }
        .normalize()
    }
}

impl std::ops::Div for Scaled {
    type Output = Scaled;
    fn div(self, o: Scaled) -> Scaled {
        let (a, o) = (self.normalize(), o.normalize());
        Scaled {
            mant: a.mant / o.mant,
            log: a.log - o.log,
        }
        .normalize()
    }
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let (s, c) = *acc;
    let t = s + x;
    let c = if s.abs() >= x.abs() {
        c + ((s - t) + x)
    } else {
        c + ((x - t) + s)
    };
    *acc = (t, c);
}

impl CompensatedSum {
    pub fn add(&mut self, z: Complex) {
        neumaier(&mut self.re, z.re);
        neumaier(&mut self.im, z.im);
    }

    pub fn value(&self) -> Complex {
        Complex::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

/// Sum in descending order of modulus with compensation; the result does not
/// depend on the input order.
pub fn sum_sorted(mut terms: Vec<Complex>) -> Complex {
    terms.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
    let mut acc = CompensatedSum::default();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}
