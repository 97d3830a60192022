//! Small bounded Levenberg–Marquardt solver for dense problems with a few parameters.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when the relative cost decrease falls below this.
    pub ftol: f64,
    /// Stop when the relative parameter step falls below this.
    pub xtol: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            ftol: 1e-15,
            xtol: 1e-12,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub x: DVector<f64>,
    /// Sum of squared residuals at `x`.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Standard-error proxy per parameter: `sqrt(diag((JᵀJ)⁻¹) · cost / (m - p))`.
    pub std_errors: DVector<f64>,
    /// A parameter ended on its bound.
    pub at_bound: Vec<bool>,
}

/// Minimises `|r(x)|²` with `x` kept in `[lower, upper]` by projection.
///
/// `model` returns the residual vector and its Jacobian at `x`.
pub fn minimize<F>(
    model: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &LmOptions,
) -> LmResult
where
    F: Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
{
    let p = x0.len();
    let lo = DVector::from_column_slice(lower);
    let hi = DVector::from_column_slice(upper);
    let project = |x: &DVector<f64>| x.zip_zip_map(&lo, &hi, |v, l, h| v.clamp(l, h));

    let mut x = project(&DVector::from_column_slice(x0));
    let (mut r, mut j) = model(&x);
    let mut cost = r.norm_squared();
    let mut mu = opts.initial_damping;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for i in 0..p {
                a[(i, i)] += mu * jtj[(i, i)].max(1e-300);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                mu *= 10.0;
                continue;
            };
            let trial = project(&(&x + &step));
            let (rt, jt) = model(&trial);
            let ct = rt.norm_squared();
            if ct.is_finite() && ct <= cost {
                let dx = (&trial - &x).norm();
                let rel_drop = (cost - ct) / cost.max(f64::MIN_POSITIVE);
                x = trial;
                r = rt;
                j = jt;
                cost = ct;
                mu = (mu / 3.0).max(1e-12);
                accepted = true;
                if rel_drop < opts.ftol || dx <= opts.xtol * (x.norm() + opts.xtol) {
                    converged = true;
                }
                break;
            }
            mu *= 4.0;
        }
        if !accepted {
            // no downhill step at any damping: we are at a (projected) minimum
            converged = true;
        }
        if converged || cost == 0.0 {
            converged = true;
            break;
        }
    }

    let m = r.len();
    let dof = m.saturating_sub(p).max(1) as f64;
    let jtj = j.transpose() * &j;
    let std_errors = match jtj.try_inverse() {
        Some(inv) => DVector::from_iterator(p, (0..p).map(|i| (inv[(i, i)].abs() * cost / dof).sqrt())),
        None => DVector::from_element(p, f64::INFINITY),
    };
    let at_bound = (0..p)
        .map(|i| x[i] <= lo[i] || x[i] >= hi[i])
        .collect();
    LmResult {
        x,
        cost,
        iterations,
        converged,
        std_errors,
        at_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_model<'a>(t: &'a [f64], y: &'a [f64]) -> impl Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>) + 'a {
        move |x: &DVector<f64>| {
            let (a, k) = (x[0], x[1]);
            let r = DVector::from_iterator(t.len(), t.iter().zip(y).map(|(t, y)| a * (-k * t).exp() - y));
            let mut j = DMatrix::zeros(t.len(), 2);
            for (i, t) in t.iter().enumerate() {
                j[(i, 0)] = (-k * t).exp();
                j[(i, 1)] = -a * t * (-k * t).exp();
            }
            (r, j)
        }
    }

    #[test]
    fn recovers_exponential() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 3.0 * (-0.7 * t).exp()).collect();
        let res = minimize(exp_model(&t, &y), &[1.0, 2.0], &[0.0, 0.0], &[10.0, 10.0], &LmOptions::default());
        assert!(res.converged);
        assert!((res.x[0] - 3.0).abs() < 1e-9 && (res.x[1] - 0.7).abs() < 1e-9);
    }

    #[test]
    fn respects_bounds() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 3.0 * (-0.7 * t).exp()).collect();
        let res = minimize(exp_model(&t, &y), &[1.0, 0.2], &[0.0, 0.0], &[2.0, 10.0], &LmOptions::default());
        assert!(res.x[0] <= 2.0);
        assert!(res.at_bound[0]);
    }
}
