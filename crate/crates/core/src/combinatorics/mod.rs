//! Log-space combinatorics: rising factorials, generalized factorial
//! coefficients (central and noncentral), signless Stirling numbers of the
//! first kind and the multivariate Chu–Vandermonde identity.
//!
//! Every quantity handled here is a nonnegative real, so values are carried
//! as natural logarithms in [`LogValue`], with zero mapped to `-inf`.

mod coeff;
mod stirling;
mod vandermonde;

pub use coeff::{log_noncentral_coeff, log_noncentral_scaled, noncentral_scaled_row, LogCoeffTable};
pub use stirling::{log_signless_stirling, signless_stirling_row};
pub use vandermonde::chu_vandermonde_sides;

use std::ops::{Add, Div, Mul};

use serde::{Deserialize, Serialize};
use statrs::function::factorial::{ln_binomial, ln_factorial};
use statrs::function::gamma::ln_gamma;

use crate::error::{GibbsError, Result};

/// Default cap on the order of a fully materialized coefficient table.
pub const DEFAULT_TABLE_CAP: usize = 4_000;

/// Default cap on the order of a single streamed coefficient row.
pub const DEFAULT_STREAM_CAP: usize = 10_000;

/// Environment variable overriding both coefficient caps.
pub const TABLE_CAP_ENV: &str = "GIBBS_TABLE_CAP";

fn cap_from_env(default: usize) -> usize {
    std::env::var(TABLE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(default)
}

/// Cap on materialized triangular tables.
pub fn table_cap() -> usize {
    cap_from_env(DEFAULT_TABLE_CAP)
}

/// Cap on streamed (single row) coefficient computations.
pub fn stream_cap() -> usize {
    cap_from_env(DEFAULT_STREAM_CAP)
}

/// Natural logarithm of a nonnegative real. Zero is `-inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    /// Wraps a logarithm. `ln` must not be NaN or `+inf`.
    #[inline]
    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan() && ln != f64::INFINITY, "bad log value {ln}");
        LogValue(ln)
    }

    pub fn from_value(x: f64) -> Result<Self> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(GibbsError::domain(format!(
                "cannot take the log of {x}: value must be finite and nonnegative"
            )));
        }
        Ok(LogValue(x.ln()))
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// `self^p` for a nonnegative integer power.
    pub fn powi(self, p: u32) -> Self {
        if p == 0 {
            LogValue::ONE
        } else {
            LogValue(self.0 * p as f64)
        }
    }

    /// Stable sum of many values.
    pub fn sum<I: IntoIterator<Item = LogValue>>(values: I) -> LogValue {
        let lns: Vec<f64> = values.into_iter().map(|v| v.0).collect();
        LogValue(log_sum_exp(&lns))
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    #[inline]
    fn mul(self, rhs: LogValue) -> LogValue {
        if self.is_zero() || rhs.is_zero() {
            LogValue::ZERO
        } else {
            LogValue(self.0 + rhs.0)
        }
    }
}

impl Div for LogValue {
    type Output = LogValue;
    #[inline]
    fn div(self, rhs: LogValue) -> LogValue {
        debug_assert!(!rhs.is_zero(), "division by zero in log space");
        if self.is_zero() {
            LogValue::ZERO
        } else {
            LogValue(self.0 - rhs.0)
        }
    }
}

impl Add for LogValue {
    type Output = LogValue;
    #[inline]
    fn add(self, rhs: LogValue) -> LogValue {
        LogValue(log_add_exp(self.0, rhs.0))
    }
}

/// `ln(exp(a) + exp(b))`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(sum(exp(values)))`, `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Rising factorials up to this order are accumulated as a direct product.
/// Beyond it the log-gamma difference takes over; its absolute error grows
/// with `ln Γ(x + n)`, so it is kept for orders no formula here reaches in
/// practice.
const DIRECT_RISING_MAX: usize = 1 << 16;

/// Above this base the factors are summed as logs one at a time, since a
/// running product could overflow.
const DIRECT_RISING_LARGE_BASE: f64 = 1.0e6;

/// `ln (x)_n` where `(x)_n = x (x+1) ... (x+n-1)` and `(x)_0 = 1`.
pub fn log_rising_factorial(x: f64, n: usize) -> Result<LogValue> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(GibbsError::domain(format!(
            "rising factorial base must be positive and finite, got {x}"
        )));
    }
    Ok(LogValue(ln_rising_unchecked(x, n)))
}

/// Same as [`log_rising_factorial`] for callers that have already
/// established `x > 0`.
#[inline]
pub(crate) fn ln_rising_unchecked(x: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if x > DIRECT_RISING_LARGE_BASE {
        return (0..n).map(|i| (x + i as f64).ln()).sum();
    }
    if n > DIRECT_RISING_MAX {
        return ln_gamma(x + n as f64) - ln_gamma(x);
    }
    // multiply in chunks, taking a log only when the product nears the
    // edge of the f64 range
    let mut acc = 0.0;
    let mut prod = 1.0f64;
    for i in 0..n {
        prod *= x + i as f64;
        if !(1e-280..=1e280).contains(&prod) {
            acc += prod.ln();
            prod = 1.0;
        }
    }
    acc + prod.ln()
}

/// `ln n!`.
#[inline]
pub fn ln_fact(n: usize) -> f64 {
    ln_factorial(n as u64)
}

/// `ln binom(n, k)`, `-inf` when `k > n`.
#[inline]
pub fn ln_binom(n: usize, k: usize) -> f64 {
    if k > n {
        f64::NEG_INFINITY
    } else {
        ln_binomial(n as u64, k as u64)
    }
}
