//! Small-coupling expansion of the disorder-averaged log accuracy:
//!
//! ```text
//! ln SAR = n ln p_tok
//!        + j0²/4 · n(n-1) (m⁴ - 1)
//!        + j0⁴/2 · n(n-1) [c0 + c4(n) m⁴ + c6(n) m⁶ + c8(n) m⁸]
//! ```
//!
//! with `m = tanh h`. The quartic bracket is the one obtained from the joint
//! cumulants of the pair products `s_i s_j` under independent spins; the unit
//! tests rebuild it from that definition.

use super::{log_p_tok, SkParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOrder {
    Second,
    Fourth,
}

impl TryFrom<u32> for SeriesOrder {
    type Error = Error;

    fn try_from(order: u32) -> Result<Self> {
        match order {
            2 => Ok(SeriesOrder::Second),
            4 => Ok(SeriesOrder::Fourth),
            _ => Err(Error::param("order", format!("{order} is not 2 or 4"))),
        }
    }
}

/// Quartic bracket coefficients, each affine in `n`: `(constant, slope)`.
mod quartic {
    pub const C0: (f64, f64) = (0.25, 0.0);
    /// `(n - 4) / 2`
    pub const C4: (f64, f64) = (-2.0, 0.5);
    /// `-2 (n - 2)`
    pub const C6: (f64, f64) = (4.0, -2.0);
    /// `3 (2n - 3) / 4`
    pub const C8: (f64, f64) = (-2.25, 1.5);

    /// A widely circulated form of the bracket,
    /// `-1/2 - (n-4) m⁴ + 4(n-2) m⁶ - 3/2 (2n-3) m⁸`, which is `-2×` the
    /// correct one. Kept only so a test can pin the discrepancy.
    #[cfg(test)]
    pub const MISPRINTED: [(f64, f64); 4] = [(-0.5, 0.0), (4.0, -1.0), (-8.0, 4.0), (4.5, -3.0)];
}

fn affine(c: (f64, f64), n: f64) -> f64 {
    c.0 + c.1 * n
}

fn quartic_bracket(n: f64, m: f64) -> f64 {
    let m4 = m.powi(4);
    affine(quartic::C0, n) + affine(quartic::C4, n) * m4 + affine(quartic::C6, n) * m4 * m * m + affine(quartic::C8, n) * m4 * m4
}

fn log_series(params: &SkParams, order: SeriesOrder) -> f64 {
    let n = params.n as f64;
    let m = params.m();
    let j2 = params.j0 * params.j0;
    let pairs = n * (n - 1.0);
    let mut log = n * log_p_tok(params.h);
    log += j2 / 4.0 * pairs * (m.powi(4) - 1.0);
    if order == SeriesOrder::Fourth {
        log += j2 * j2 / 2.0 * pairs * quartic_bracket(n, m);
    }
    log
}

/// Truncated series for the geometric-mean SAR. Reliable roughly while
/// `j0² n ≲ 0.5`; outside that range it is evaluated anyway.
pub fn sar_perturbative(params: &SkParams, order: SeriesOrder) -> Result<f64> {
    params.validate()?;
    Ok(log_series(params, order).exp())
}
