//! Weights of the normalized generalized gamma partition,
//!
//! ```text
//! V_{n,k} = σ^{k-1} e^β / Γ(n) · Σ_{i=0}^{n-1} binom(n-1, i) (-1)^i β^{i/σ} Γ(k - i/σ; β)
//! ```
//!
//! The alternating sum cancels catastrophically, so it is evaluated in MPFR
//! arithmetic. The working precision starts at `max(128, 4n)` bits and
//! doubles until at least 64 bits survive the cancellation.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, OnceLock};

use rug::{Float, Integer};

use crate::combinatorics::ln_fact;
use crate::error::{GibbsError, Result};

/// Default largest `n` for which weights are evaluated.
pub const DEFAULT_GG_MAX_N: usize = 200;

const MAX_PRECISION: u32 = 1 << 14;
const TARGET_BITS: i64 = 64;
const MIN_BITS: i64 = 10;

static GG_MAX_N: AtomicUsize = AtomicUsize::new(DEFAULT_GG_MAX_N);

type MemoKey = (u64, u64, usize, usize);

fn memo() -> &'static Mutex<HashMap<MemoKey, f64>> {
    static MEMO: OnceLock<Mutex<HashMap<MemoKey, f64>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Largest sample size accepted by the generalized gamma weights.
pub fn gg_max_n() -> usize {
    GG_MAX_N.load(Ordering::Relaxed)
}

/// Raises or lowers the generalized gamma size limit (process-wide).
pub fn set_gg_max_n(limit: usize) {
    GG_MAX_N.store(limit, Ordering::Relaxed);
}

/// `ln V_{n,k}` for the generalized gamma family. Memoized process-wide.
pub(crate) fn log_weight(sigma: f64, beta: f64, n: usize, k: usize) -> Result<f64> {
    let limit = gg_max_n();
    if n > limit {
        return Err(GibbsError::Range(format!(
            "generalized gamma weights are limited to n <= {limit}, got n = {n}"
        )));
    }
    let key = (sigma.to_bits(), beta.to_bits(), n, k);
    if let Some(&v) = memo().lock().expect("weight memo poisoned").get(&key) {
        return Ok(v);
    }
    let v = evaluate(sigma, beta, n, k)?;
    memo().lock().expect("weight memo poisoned").insert(key, v);
    Ok(v)
}

fn evaluate(sigma: f64, beta: f64, n: usize, k: usize) -> Result<f64> {
    let mut prec = (4 * n as u32).max(128);
    loop {
        let (sum, surviving) = alternating_sum(sigma, beta, n, k, prec);
        if surviving >= TARGET_BITS {
            return Ok(finish(sigma, beta, n, k, &sum));
        }
        if prec >= MAX_PRECISION {
            if surviving >= MIN_BITS {
                return Ok(finish(sigma, beta, n, k, &sum));
            }
            return Err(GibbsError::Precision {
                what: format!("generalized gamma weight V({n},{k}) at sigma={sigma}, beta={beta}"),
                bits: surviving,
            });
        }
        prec *= 2;
    }
}

fn finish(sigma: f64, beta: f64, n: usize, k: usize, sum: &Float) -> f64 {
    let ln_sum = Float::with_val(sum.prec(), sum.ln_ref()).to_f64();
    (k as f64 - 1.0) * sigma.ln() + beta - ln_fact(n - 1) + ln_sum
}

/// Returns the sum and the number of significant bits left after
/// cancellation (negative or zero when nothing survived).
fn alternating_sum(sigma: f64, beta: f64, n: usize, k: usize, prec: u32) -> (Float, i64) {
    let sigma_f = Float::with_val(prec, sigma);
    let beta_f = Float::with_val(prec, beta);
    let ln_beta = Float::with_val(prec, beta_f.ln_ref());
    let mut sum = Float::with_val(prec, 0);
    let mut max_exp = i64::MIN;
    for i in 0..n {
        let shift = Float::with_val(prec, i) / &sigma_f;
        let order = Float::with_val(prec, k) - &shift;
        let upper = upper_gamma(&order, &beta_f, prec);
        let power = Float::with_val(prec, &shift * &ln_beta).exp();
        let binom = Integer::from(Integer::binomial_u((n - 1) as u32, i as u32));
        let term = Float::with_val(prec, &power * &upper) * binom;
        if let Some(e) = term.get_exp() {
            max_exp = max_exp.max(e as i64);
        }
        if i % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
    }
    let surviving = match sum.get_exp() {
        Some(e) if sum.is_sign_positive() && max_exp != i64::MIN => prec as i64 - (max_exp - e as i64),
        _ => 0,
    };
    (sum, surviving)
}

/// `Γ(a; x)`. MPFR's own routine crawls once `x` is large, so past the
/// order the Legendre continued fraction is used instead (modified Lentz).
fn upper_gamma(a: &Float, x: &Float, prec: u32) -> Float {
    if *x < 4 || *x <= Float::with_val(prec, a + 1u32) {
        return Float::with_val(prec, a.gamma_inc_ref(x));
    }
    let wp = prec + 32;
    let tiny = Float::with_val(wp, Float::i_exp(1, -(wp as i32) * 4));
    let eps = Float::with_val(wp, Float::i_exp(1, -(wp as i32) + 8));
    // b_0 = x + 1 - a, a_i = -i (i - a), b_i = b_0 + 2i
    let mut b = Float::with_val(wp, x - a) + 1u32;
    let mut c = Float::with_val(wp, 1u32) / &tiny;
    let mut d = Float::with_val(wp, 1u32) / &b;
    let mut h = d.clone();
    for i in 1..200_000u32 {
        let an = -(Float::with_val(wp, i) * Float::with_val(wp, Float::with_val(wp, i) - a));
        b += 2u32;
        d = Float::with_val(wp, &an * &d) + &b;
        if d.is_zero() {
            d = tiny.clone();
        }
        c = Float::with_val(wp, &an / &c) + &b;
        if c.is_zero() {
            c = tiny.clone();
        }
        d.recip_mut();
        let delta = Float::with_val(wp, &c * &d);
        h *= &delta;
        if Float::with_val(wp, delta - 1u32).abs() < eps {
            let log_pre = Float::with_val(wp, a * Float::with_val(wp, x.ln_ref())) - x;
            return Float::with_val(prec, log_pre.exp() * h);
        }
    }
    Float::with_val(prec, a.gamma_inc_ref(x))
}
