//! Small dense least-squares helpers used by the fit's inner solve.

/// Least squares `min ||M z - y||^2` for a skinny column-major matrix via
/// modified Gram-Schmidt QR. Columns whose residual norm collapses (rank
/// deficiency) get a zero coefficient.
pub fn lstsq(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = cols.len();
    let rows = y.len();
    let mut q: Vec<Vec<f64>> = cols.to_vec();
    let mut r = vec![vec![0.0; n]; n];
    let mut live = vec![true; n];

    for j in 0..n {
        for i in 0..j {
            if !live[i] {
                continue;
            }
            let dot: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[i][j] = dot;
            for k in 0..rows {
                q[j][k] -= dot * q[i][k];
            }
        }
        let norm: f64 = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        let col_scale: f64 = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-13 * col_scale.max(1e-300) {
            live[j] = false;
            r[j][j] = 1.0;
            for v in q[j].iter_mut() {
                *v = 0.0;
            }
        } else {
            r[j][j] = norm;
            for v in q[j].iter_mut() {
                *v /= norm;
            }
        }
    }

    // back-substitute R z = Q^T y
    let mut z = vec![0.0; n];
    for j in (0..n).rev() {
        if !live[j] {
            z[j] = 0.0;
            continue;
        }
        let qty: f64 = q[j].iter().zip(y).map(|(a, b)| a * b).sum();
        let mut s = qty;
        for k in j + 1..n {
            s -= r[j][k] * z[k];
        }
        z[j] = s / r[j][j];
    }
    z
}

/// Non-negative least squares `min ||M z - y||^2, z >= 0` (Lawson-Hanson
/// active set). Deterministic: candidate selection breaks ties toward the
/// smaller column index.
pub fn nnls(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = cols.len();
    let rows = y.len();
    let mut passive = vec![false; n];
    let mut x = vec![0.0; n];

    let residual = |x: &[f64]| -> Vec<f64> {
        let mut r = y.to_vec();
        for (j, col) in cols.iter().enumerate() {
            if x[j] != 0.0 {
                for i in 0..rows {
                    r[i] -= x[j] * col[i];
                }
            }
        }
        r
    };
    let grad_tol = {
        let ynorm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        1e-12 * ynorm.max(1e-300)
    };

    for _ in 0..(3 * n + 12) {
        let r = residual(&x);
        // most positive gradient among inactive columns
        let mut pick: Option<(f64, usize)> = None;
        for (j, col) in cols.iter().enumerate() {
            if passive[j] {
                continue;
            }
            let w: f64 = col.iter().zip(&r).map(|(a, b)| a * b).sum();
            if w > grad_tol && pick.map_or(true, |(bw, _)| w > bw) {
                pick = Some((w, j));
            }
        }
        let Some((_, j)) = pick else { break };
        passive[j] = true;

        loop {
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let sub: Vec<Vec<f64>> = idx.iter().map(|&i| cols[i].clone()).collect();
            let z = lstsq(&sub, y);
            if z.iter().all(|&v| v > 0.0) {
                x = vec![0.0; n];
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = z[k];
                }
                break;
            }
            // step toward z until the first coefficient hits zero
            let mut theta = f64::INFINITY;
            for (k, &i) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[i] - z[k];
                    if denom > 0.0 {
                        theta = theta.min(x[i] / denom);
                    } else {
                        theta = 0.0;
                    }
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                x[i] += theta * (z[k] - x[i]);
                if x[i] <= 1e-14 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}
