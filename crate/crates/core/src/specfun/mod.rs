//! Special functions: complex error function, Gauss hypergeometric series,
//! Lambert `W_{-1}`.

mod erf;
mod faddeeva;
mod hyp2f1;
mod lambert;

pub use erf::{erf, erf_asymptotic, erfc, Branch, Truncated};
pub use faddeeva::{erfcx, faddeeva_w};
pub use hyp2f1::{hyp2f1, hyp2f1_dc, hyp2f1_series, pochhammer, pole_index, Series};
pub use lambert::lambert_w_m1;
