//! Nelder–Mead downhill simplex.

#[derive(Clone, Copy, Debug)]
pub struct NelderMeadOptions {
    /// Offset of the initial simplex vertices along each coordinate axis.
    pub initial_step: f64,
    pub max_evaluations: usize,
    /// Stop once `f_worst − f_best < tolerance · (1 + |f_best|)`.
    pub tolerance: f64,
}

#[derive(Clone, Debug)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub start_value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` from `x0`. NaN objective values are treated as `+∞`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let evaluations = std::cell::Cell::new(0usize);
    let mut eval = |x: &[f64]| {
        evaluations.set(evaluations.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let start_value = eval(x0);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), start_value));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if worst - best < opts.tolerance * (1.0 + best.abs()) {
            converged = true;
            break;
        }
        if evaluations.get() >= opts.max_evaluations {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }

        let along = |out: &mut [f64], from: &[f64], coef: f64| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(from) {
                *o = c + coef * (c - w);
            }
        };

        along(&mut trial, &simplex[n].0, REFLECT);
        let f_reflect = eval(&trial);

        if f_reflect < best {
            along(&mut trial2, &simplex[n].0, EXPAND);
            let f_expand = eval(&trial2);
            if f_expand < f_reflect {
                simplex[n] = (trial2.clone(), f_expand);
            } else {
                simplex[n] = (trial.clone(), f_reflect);
            }
            continue;
        }
        if f_reflect < simplex[n - 1].1 {
            simplex[n] = (trial.clone(), f_reflect);
            continue;
        }

        let accepted = if f_reflect < worst {
            // outside contraction toward the reflected point
            along(&mut trial2, &simplex[n].0, REFLECT * CONTRACT);
            let f_c = eval(&trial2);
            (f_c <= f_reflect).then_some(f_c)
        } else {
            along(&mut trial2, &simplex[n].0, -CONTRACT);
            let f_c = eval(&trial2);
            (f_c < worst).then_some(f_c)
        };
        if let Some(f_c) = accepted {
            simplex[n] = (trial2.clone(), f_c);
            continue;
        }

        let anchor = simplex[0].0.clone();
        for (x, v) in simplex.iter_mut().skip(1) {
            for (xi, a) in x.iter_mut().zip(&anchor) {
                *xi = a + SHRINK * (*xi - a);
            }
            *v = eval(x);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NelderMeadOutcome {
        x,
        value,
        start_value,
        evaluations: evaluations.get(),
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> NelderMeadOptions {
        NelderMeadOptions {
            initial_step: 0.5,
            max_evaluations: 20_000,
            tolerance: 1e-14,
        }
    }

    #[test]
    fn minimizes_shifted_quadratic() {
        let target = [1.0, -2.0, 0.5, 3.0];
        let out = nelder_mead(
            |x| x.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum(),
            &[0.0; 4],
            &opts(),
        );
        assert!(out.converged);
        for (a, b) in out.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-5);
        }
        assert!(out.value <= out.start_value);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let out = nelder_mead(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            &opts(),
        );
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-4 && (out.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn respects_evaluation_budget() {
        let o = NelderMeadOptions {
            max_evaluations: 50,
            ..opts()
        };
        let out = nelder_mead(|x| x.iter().map(|v| v.abs().sqrt()).sum(), &[3.0; 9], &o);
        assert!(!out.converged);
        // the final iteration may overshoot by at most one shrink step
        assert!(out.evaluations <= 50 + 9 + 2);
    }

    #[test]
    fn nan_is_treated_as_infinite() {
        let out = nelder_mead(
            |x| {
                if x[0] < 0.0 {
                    f64::NAN
                } else {
                    (x[0] - 1.0).powi(2)
                }
            },
            &[0.5],
            &opts(),
        );
        assert!((out.x[0] - 1.0).abs() < 1e-5);
    }
}
