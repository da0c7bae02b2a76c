use super::{log_add_exp, LogValue};

/// Row `n` of `ln |s(n, k)|`, `k = 0..=n`, from
/// `|s(i+1, k)| = i |s(i, k)| + |s(i, k-1)|`.
pub fn signless_stirling_row(n: usize) -> Vec<LogValue> {
    let mut row = vec![f64::NEG_INFINITY; n + 1];
    row[0] = 0.0;
    for i in 0..n {
        let li = (i as f64).ln();
        for k in (0..=i + 1).rev() {
            let stay = if k <= i && i > 0 {
                li + row[k]
            } else {
                f64::NEG_INFINITY
            };
            let open = if k >= 1 { row[k - 1] } else { f64::NEG_INFINITY };
            row[k] = log_add_exp(stay, open);
        }
    }
    row.into_iter().map(LogValue::from_ln).collect()
}

/// `ln |s(n, k)|`, the log of the number of permutations of `n` elements
/// with exactly `k` cycles.
pub fn log_signless_stirling(n: usize, k: usize) -> LogValue {
    if k > n {
        return LogValue::ZERO;
    }
    signless_stirling_row(n)[k]
}
