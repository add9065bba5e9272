//! Minimal deterministic Nelder-Mead simplex descent.
//!
//! No randomness: given the same starting point and objective, the search
//! path is identical on every run. Ties during simplex ordering are broken
//! by insertion order, which keeps the path stable even when the objective
//! returns equal values.

#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    pub max_evals: u32,
    /// Stop when the simplex value spread drops below
    /// `rel_tol * (|best| + 1e-300)`.
    pub rel_tol: f64,
    /// Edge length of the initial simplex, added per coordinate.
    pub initial_step: f64,
}

#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: u32,
    pub converged: bool,
}

pub fn minimize<F>(mut f: F, x0: &[f64], opts: &NmOptions) -> NmResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals: u32 = 0;
    let mut eval = |p: &[f64], evals: &mut u32| -> f64 {
        *evals += 1;
        let v = f(p);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evals)).collect();

    let mut converged = false;
    while evals < opts.max_evals {
        // stable sort keeps ordering deterministic under ties
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap().then(i.cmp(&j)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let best = values[0];
        let worst = values[n];
        if (worst - best).abs() <= opts.rel_tol * (best.abs() + 1e-300) {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for p in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let lerp = |from: &[f64], coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = lerp(&simplex[n], 1.0);
        let f_r = eval(&reflected, &mut evals);
        if f_r < values[0] {
            let expanded = lerp(&simplex[n], 2.0);
            let f_e = eval(&expanded, &mut evals);
            if f_e < f_r {
                simplex[n] = expanded;
                values[n] = f_e;
            } else {
                simplex[n] = reflected;
                values[n] = f_r;
            }
        } else if f_r < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_r;
        } else {
            let contracted = if f_r < values[n] {
                lerp(&simplex[n], 0.5) // outside
            } else {
                lerp(&simplex[n], -0.5) // inside
            };
            let f_c = eval(&contracted, &mut evals);
            if f_c < values[n].min(f_r) {
                simplex[n] = contracted;
                values[n] = f_c;
            } else {
                // shrink toward the best vertex
                for i in 1..=n {
                    let p: Vec<f64> = simplex[0]
                        .iter()
                        .zip(&simplex[i])
                        .map(|(b, v)| b + 0.5 * (v - b))
                        .collect();
                    values[i] = eval(&p, &mut evals);
                    simplex[i] = p;
                }
            }
        }
    }

    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .unwrap();
    NmResult {
        x: simplex[best].clone(),
        value: values[best],
        evals,
        converged,
    }
}
