use super::{ln_binom, ln_rising_unchecked, log_add_exp, log_sum_exp, stream_cap, table_cap, LogValue};
use crate::error::{GibbsError, Result};

/// Triangular table of generalized factorial coefficients `C(n, k; σ)` for a
/// fixed `σ ∈ [0, 1)`, `0 ≤ k ≤ n ≤ max_n`.
///
/// Internally the table holds the scaled coefficients `C(n, k; σ) / σ^k`.
/// They obey the all-positive recurrence
///
/// ```text
/// D(n+1, k) = (n - kσ) D(n, k) + D(n, k-1)
/// ```
///
/// which stays well defined at `σ = 0`, where it reduces to the signless
/// Stirling numbers of the first kind. Every consumer of the coefficients
/// divides by `σ^k` anyway, so the scaled form is what gets used.
#[derive(Debug, Clone)]
pub struct LogCoeffTable {
    sigma: f64,
    rows: Vec<Vec<LogValue>>,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&sigma) {
        return Err(GibbsError::domain(format!("sigma must lie in [0, 1), got {sigma}")));
    }
    Ok(())
}

impl LogCoeffTable {
    pub fn build(sigma: f64, max_n: usize) -> Result<Self> {
        check_sigma(sigma)?;
        if max_n == 0 {
            return Err(GibbsError::domain("coefficient table needs max_n >= 1"));
        }
        let cap = table_cap();
        if max_n > cap {
            return Err(GibbsError::Resource {
                what: "coefficient table order",
                requested: max_n,
                cap,
            });
        }
        let mut rows: Vec<Vec<LogValue>> = Vec::with_capacity(max_n + 1);
        rows.push(vec![LogValue::ONE]);
        for n in 0..max_n {
            let prev = &rows[n];
            let mut next = Vec::with_capacity(n + 2);
            next.push(LogValue::ZERO);
            for k in 1..=n + 1 {
                let stay = if k <= n {
                    let factor = n as f64 - k as f64 * sigma;
                    if factor > 0.0 && !prev[k].is_zero() {
                        factor.ln() + prev[k].ln()
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    f64::NEG_INFINITY
                };
                next.push(LogValue::from_ln(log_add_exp(stay, prev[k - 1].ln())));
            }
            rows.push(next);
        }
        Ok(LogCoeffTable { sigma, rows })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn max_n(&self) -> usize {
        self.rows.len() - 1
    }

    fn check(&self, n: usize, k: usize) -> Result<()> {
        if n > self.max_n() {
            return Err(GibbsError::Index {
                n,
                k,
                max_n: self.max_n(),
            });
        }
        Ok(())
    }

    /// `ln C(n, k; σ)`.
    pub fn log_coeff(&self, n: usize, k: usize) -> Result<LogValue> {
        let scaled = self.log_scaled(n, k)?;
        if scaled.is_zero() || k == 0 {
            return Ok(scaled);
        }
        if self.sigma == 0.0 {
            return Ok(LogValue::ZERO);
        }
        Ok(LogValue::from_ln(scaled.ln() + k as f64 * self.sigma.ln()))
    }

    /// `ln (C(n, k; σ) / σ^k)`; at `σ = 0` this is `ln |s(n, k)|`.
    pub fn log_scaled(&self, n: usize, k: usize) -> Result<LogValue> {
        self.check(n, k)?;
        Ok(self.rows[n].get(k).copied().unwrap_or(LogValue::ZERO))
    }

    /// Row `n` of the scaled coefficients, indexed by `k = 0..=n`.
    pub fn scaled_row(&self, n: usize) -> Result<&[LogValue]> {
        self.check(n, 0)?;
        Ok(&self.rows[n])
    }
}

fn check_noncentral(sigma: f64, gamma: f64) -> Result<()> {
    check_sigma(sigma)?;
    if !(-gamma > 0.0) || !gamma.is_finite() {
        return Err(GibbsError::domain(format!(
            "noncentral coefficients are supported only for -gamma > 0, got gamma = {gamma}"
        )));
    }
    Ok(())
}

/// `ln (C(n, k; σ, γ) / σ^k)` from the central table through
/// `C(n, k; σ, γ) = Σ_{s=k}^{n} binom(n, s) C(s, k; σ) (-γ)_{n-s}`.
pub fn log_noncentral_scaled(n: usize, k: usize, sigma: f64, gamma: f64, table: &LogCoeffTable) -> Result<LogValue> {
    check_noncentral(sigma, gamma)?;
    if table.sigma() != sigma {
        return Err(GibbsError::domain(format!(
            "table built for sigma = {} used with sigma = {sigma}",
            table.sigma()
        )));
    }
    table.check(n, k)?;
    if k > n {
        return Ok(LogValue::ZERO);
    }
    let shift = -gamma;
    let terms: Vec<f64> = (k..=n)
        .map(|s| {
            let d = table.rows[s][k];
            if d.is_zero() {
                f64::NEG_INFINITY
            } else {
                ln_binom(n, s) + d.ln() + ln_rising_unchecked(shift, n - s)
            }
        })
        .collect();
    Ok(LogValue::from_ln(log_sum_exp(&terms)))
}

/// `ln C(n, k; σ, γ)`, the noncentral generalized factorial coefficient.
pub fn log_noncentral_coeff(n: usize, k: usize, sigma: f64, gamma: f64, table: &LogCoeffTable) -> Result<LogValue> {
    let scaled = log_noncentral_scaled(n, k, sigma, gamma, table)?;
    if k == 0 || scaled.is_zero() {
        return Ok(scaled);
    }
    if sigma == 0.0 {
        return Ok(LogValue::ZERO);
    }
    Ok(LogValue::from_ln(scaled.ln() + k as f64 * sigma.ln()))
}

/// Full row `k = 0..=n` of `ln (C(n, k; σ, γ) / σ^k)`, streamed through
/// `E(i+1, k) = (i - γ - kσ) E(i, k) + E(i, k-1)` in `O(n^2)` time and
/// `O(n)` memory.
pub fn noncentral_scaled_row(n: usize, sigma: f64, gamma: f64) -> Result<Vec<LogValue>> {
    check_noncentral(sigma, gamma)?;
    let cap = stream_cap();
    if n > cap {
        return Err(GibbsError::Resource {
            what: "noncentral coefficient row order",
            requested: n,
            cap,
        });
    }
    let mut row = vec![f64::NEG_INFINITY; n + 1];
    row[0] = 0.0;
    for i in 0..n {
        let base = i as f64 - gamma;
        for k in (0..=i + 1).rev() {
            let stay = if k <= i && row[k] != f64::NEG_INFINITY {
                (base - k as f64 * sigma).ln() + row[k]
            } else {
                f64::NEG_INFINITY
            };
            let open = if k >= 1 { row[k - 1] } else { f64::NEG_INFINITY };
            row[k] = log_add_exp(stay, open);
        }
    }
    Ok(row.into_iter().map(LogValue::from_ln).collect())
}
