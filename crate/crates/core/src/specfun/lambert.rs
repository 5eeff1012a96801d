//! Lower real branch `W_{-1}` of the Lambert W function.

use crate::error::{Error, Result};

const INV_E: f64 = 0.36787944117144233;

/// `w <= -1` with `w e^w = x` for `-1/e <= x < 0`.
///
/// Halley iteration. The seed is `ln(-x) - ln(-ln(-x))` away from the branch
/// point and the series in `p = -sqrt(2(1 + e x))` close to it, where the
/// logarithmic seed lands on the wrong side of `-1`.
pub fn lambert_w_m1(x: f64) -> Result<f64> {
    if !(-INV_E..0.0).contains(&x) {
        return Err(Error::Domain(format!("W_-1 needs -1/e <= x < 0, got {x}")));
    }
    let e1 = 1.0 + std::f64::consts::E * x;
    if e1 <= 0.0 {
        return Ok(-1.0);
    }
    let p = -(2.0 * e1).sqrt();
    if p > -1e-7 {
        return Ok(-1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p);
    }
    let mut w = if x < -0.25 {
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        let l1 = (-x).ln();
        l1 - (-l1).ln()
    };
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs() {
            break;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(lambert_w_m1(-INV_E).unwrap(), -1.0);
        assert!((lambert_w_m1(-0.1).unwrap() + 3.577152063957297).abs() < 1e-14);
        assert!(lambert_w_m1(0.0).is_err());
        assert!(lambert_w_m1(-0.4).is_err());
    }

    #[test]
    fn round_trip_log_spaced() {
        for j in 0..20 {
            let x = -INV_E * (1e-8 / INV_E).powf((j as f64 + 0.5) / 20.0);
            let w = lambert_w_m1(x).unwrap();
            assert!(w <= -1.0);
            assert!((w * w.exp() - x).abs() < 1e-14 * x.abs(), "x = {x}");
        }
    }

    #[test]
    fn monotone_decreasing() {
        let mut prev = -1.0;
        for j in 1..200 {
            let x = -INV_E + j as f64 * INV_E / 200.0;
            let w = lambert_w_m1(x).unwrap();
            assert!(w < prev);
            prev = w;
        }
    }
}
