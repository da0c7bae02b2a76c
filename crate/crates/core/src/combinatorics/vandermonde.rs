use super::{ln_binom, ln_fact, ln_rising_unchecked, log_add_exp, LogValue};
use crate::error::{GibbsError, Result};

const MAX_COMPOSITIONS: usize = 10_000_000;

/// Both sides of the multivariate Chu–Vandermonde identity in rising
/// factorials:
///
/// ```text
/// Σ_{q_1+...+q_j = q} q!/(q_1!...q_j!) Π_i (a_i)_{n_i+q_i-1}
///     = (n - j + Σ_i a_i)_q Π_i (a_i)_{n_i-1},      n = Σ_i n_i
/// ```
///
/// The left side is summed by brute force over every composition, so this is
/// a test utility whose cost grows like `binom(q+j-1, j-1)`.
pub fn chu_vandermonde_sides(a: &[f64], n: &[usize], q: usize) -> Result<(LogValue, LogValue)> {
    if a.is_empty() || a.len() != n.len() {
        return Err(GibbsError::validation(format!(
            "need matching nonempty parameter lists, got {} and {}",
            a.len(),
            n.len()
        )));
    }
    if let Some(bad) = a.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(GibbsError::domain(format!("a_i must be positive, got {bad}")));
    }
    if n.contains(&0) {
        return Err(GibbsError::domain("n_i must be at least 1"));
    }
    let j = a.len();
    let count = ln_binom(q + j - 1, j - 1).exp();
    if count > MAX_COMPOSITIONS as f64 {
        return Err(GibbsError::Resource {
            what: "Chu-Vandermonde compositions",
            requested: count.min(usize::MAX as f64) as usize,
            cap: MAX_COMPOSITIONS,
        });
    }

    let ln_q_fact = ln_fact(q);
    let mut left = f64::NEG_INFINITY;
    let mut parts = vec![0usize; j];
    visit_compositions(q, &mut parts, 0, &mut |parts| {
        let term: f64 = ln_q_fact
            + parts
                .iter()
                .zip(a.iter().zip(n))
                .map(|(&qi, (&ai, &ni))| ln_rising_unchecked(ai, ni + qi - 1) - ln_fact(qi))
                .sum::<f64>();
        left = log_add_exp(left, term);
    });

    let total_n: usize = n.iter().sum();
    let base = total_n as f64 - j as f64 + a.iter().sum::<f64>();
    let right = ln_rising_unchecked(base, q)
        + a.iter()
            .zip(n)
            .map(|(&ai, &ni)| ln_rising_unchecked(ai, ni - 1))
            .sum::<f64>();
    Ok((LogValue::from_ln(left), LogValue::from_ln(right)))
}

fn visit_compositions(remaining: usize, parts: &mut [usize], at: usize, f: &mut impl FnMut(&[usize])) {
    if at + 1 == parts.len() {
        parts[at] = remaining;
        f(parts);
        return;
    }
    for take in 0..=remaining {
        parts[at] = take;
        visit_compositions(remaining - take, parts, at + 1, f);
    }
}
