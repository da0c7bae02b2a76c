//! Nelder–Mead maximization with the standard coefficients
//! (reflection 1, expansion 2, contraction 1/2, shrink 1/2).

#[derive(Debug, Clone)]
pub(crate) struct SimplexOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Maximizes `f` from `start`, with initial edge lengths `steps`. Stops when
/// the spread of values over the simplex drops to `rel_tol · |best|` (or
/// an absolute `rel_tol` near zero), when every vertex lies within `x_tol`
/// of the best one, or after `max_evals` evaluations. Points where `f` is
/// not finite count as `-inf`.
pub(crate) fn maximize(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    steps: &[f64],
    rel_tol: f64,
    x_tol: f64,
    max_evals: usize,
) -> SimplexOutcome {
    let dim = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = eval(start, &mut evals);
    simplex.push((start.to_vec(), v0));
    for i in 0..dim {
        let mut x = start.to_vec();
        x[i] += steps[i];
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    let mut converged = false;
    loop {
        // best first; ties keep the earlier vertex
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        let flat = (best - worst).abs() <= rel_tol * best.abs().max(1.0);
        let small = simplex[1..]
            .iter()
            .all(|(x, _)| x.iter().zip(&simplex[0].0).all(|(a, b)| (a - b).abs() <= x_tol));
        if best.is_finite() && (flat || small) {
            converged = true;
            break;
        }
        if evals >= max_evals {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(1.0);
        let vr = eval(&reflected, &mut evals);
        if vr > simplex[0].1 {
            let expanded = along(2.0);
            let ve = eval(&expanded, &mut evals);
            simplex[dim] = if ve > vr { (expanded, ve) } else { (reflected, vr) };
            continue;
        }
        if vr > simplex[dim - 1].1 {
            simplex[dim] = (reflected, vr);
            continue;
        }
        let (contracted, vc) = if vr > worst {
            let x = along(0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        } else {
            let x = along(-0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        };
        if vc > vr.max(worst) {
            simplex[dim] = (contracted, vc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = anchor.iter().zip(&vertex.0).map(|(a, v)| a + 0.5 * (v - a)).collect();
            let v = eval(&x, &mut evals);
            *vertex = (x, v);
        }
    }

    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (point, value) = simplex.swap_remove(0);
    SimplexOutcome {
        point,
        value,
        evaluations: evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_peak() {
        let out = maximize(
            |x| -(x[0] - 1.5).powi(2) - 3.0 * (x[1] + 0.5).powi(2) + 2.0,
            &[0.0, 0.0],
            &[0.3, 0.3],
            1e-14,
            0.0,
            10_000,
        );
        assert!(out.converged);
        assert!((out.point[0] - 1.5).abs() < 1e-5 && (out.point[1] + 0.5).abs() < 1e-5);
    }

    #[test]
    fn rosenbrock_and_eval_cap() {
        let rosen = |x: &[f64]| -((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let out = maximize(rosen, &[-1.2, 1.0], &[0.1, 0.1], 1e-15, 0.0, 10_000);
        assert!((out.point[0] - 1.0).abs() < 1e-3, "{:?}", out.point);
        let capped = maximize(rosen, &[-1.2, 1.0], &[0.1, 0.1], 0.0, 0.0, 50);
        assert!(!capped.converged);
        assert!(capped.evaluations >= 50 && capped.evaluations < 60);
    }

    #[test]
    fn one_dimensional() {
        let out = maximize(|x| -(x[0] - 4.0).abs(), &[0.0], &[1.0], 1e-12, 0.0, 1000);
        assert!((out.point[0] - 4.0).abs() < 1e-6);
    }
}
