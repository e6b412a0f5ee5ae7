//! Dense quasi-Newton minimizer shared by the pulse-parameter search and the
//! piecewise-constant gradient baseline.
//!
//! Inverse-Hessian BFGS with a backtracking Armijo line search
//! (`c = 1e-4`, shrink `0.5`); stops when the gradient infinity norm falls
//! below `1e-8` or after 200 iterations. Problems here range from 2 to a few
//! hundred variables, so the dense update is fine.

#[derive(Debug, Clone)]
pub struct BfgsOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub shrink: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { max_iters: 200, grad_tol: 1e-8, armijo_c: 1e-4, shrink: 0.5 }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_inf_norm: f64,
    pub iterations: usize,
    /// Accepted iterates `(x, f)`, starting with the initial point.
    pub trace: Vec<(Vec<f64>, f64)>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize `f` given a combined value-and-gradient oracle.
pub fn minimize<F>(mut f_and_grad: F, x0: &[f64], opts: &BfgsOptions) -> BfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut gx) = f_and_grad(&x);
    let mut trace = vec![(x.clone(), fx)];

    // inverse Hessian estimate, dense row-major
    let mut h: Vec<f64> = (0..n * n).map(|i| if i % (n + 1) == 0 { 1.0 } else { 0.0 }).collect();
    let mut first_update = true;
    let mut iterations = 0;

    for _ in 0..opts.max_iters {
        if inf_norm(&gx) < opts.grad_tol || !fx.is_finite() {
            break;
        }
        iterations += 1;

        // d = -H g
        let mut d = vec![0.0; n];
        for i in 0..n {
            d[i] = -dot(&h[i * n..(i + 1) * n], &gx);
        }
        let mut slope = dot(&gx, &d);
        if slope >= 0.0 {
            // not a descent direction; reset to steepest descent
            for i in 0..n * n {
                h[i] = if i % (n + 1) == 0 { 1.0 } else { 0.0 };
            }
            for i in 0..n {
                d[i] = -gx[i];
            }
            slope = dot(&gx, &d);
            first_update = true;
        }

        // backtracking Armijo
        let mut alpha = 1.0f64;
        let mut accepted = None;
        for _ in 0..60 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            let (ft, gt) = f_and_grad(&xt);
            if ft.is_finite() && ft <= fx + opts.armijo_c * alpha * slope {
                accepted = Some((xt, ft, gt));
                break;
            }
            alpha *= opts.shrink;
        }
        let Some((xn, fn_, gn)) = accepted else {
            break; // step underflow: no progress possible along d
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&gx).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * inf_norm(&s) * inf_norm(&y) && sy > 0.0 {
            if first_update {
                // standard H0 scaling before the first update
                let yy = dot(&y, &y);
                if yy > 0.0 {
                    let scale = sy / yy;
                    for i in 0..n {
                        h[i * n + i] = scale;
                    }
                }
                first_update = false;
            }
            let rho = 1.0 / sy;
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            let mut hy = vec![0.0; n];
            for i in 0..n {
                hy[i] = dot(&h[i * n..(i + 1) * n], &y);
            }
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j])
                        + rho * rho * yhy * s[i] * s[j]
                        + rho * s[i] * s[j];
                }
            }
        }

        x = xn;
        fx = fn_;
        gx = gn;
        trace.push((x.clone(), fx));
    }

    BfgsResult { grad_inf_norm: inf_norm(&gx), x, f: fx, iterations, trace }
}

/// Central-difference gradient with a fixed step per coordinate.
pub fn central_difference<F>(mut f: F, x: &[f64], step: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut g = vec![0.0; x.len()];
    let mut xt = x.to_vec();
    for i in 0..x.len() {
        xt[i] = x[i] + step;
        let fp = f(&xt);
        xt[i] = x[i] - step;
        let fm = f(&xt);
        xt[i] = x[i];
        g[i] = (fp - fm) / (2.0 * step);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_a_shifted_quadratic() {
        let res = minimize(
            |x| {
                let f = (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2);
                (f, vec![2.0 * (x[0] - 3.0), 4.0 * (x[1] + 1.0)])
            },
            &[0.0, 0.0],
            &BfgsOptions::default(),
        );
        assert!((res.x[0] - 3.0).abs() < 1e-7);
        assert!((res.x[1] + 1.0).abs() < 1e-7);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let res = minimize(
            |x| {
                let (a, b) = (1.0, 100.0);
                let f = (a - x[0]).powi(2) + b * (x[1] - x[0] * x[0]).powi(2);
                let g = vec![
                    -2.0 * (a - x[0]) - 4.0 * b * x[0] * (x[1] - x[0] * x[0]),
                    2.0 * b * (x[1] - x[0] * x[0]),
                ];
                (f, g)
            },
            &[-1.2, 1.0],
            &BfgsOptions { max_iters: 500, ..Default::default() },
        );
        assert!((res.x[0] - 1.0).abs() < 1e-5, "x = {:?}", res.x);
        assert!((res.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn fd_gradient_on_smooth_function() {
        let f = |x: &[f64]| x[0].sin() * x[1].exp();
        let g = central_difference(f, &[0.7, -0.3], 1e-6);
        let want = [0.7f64.cos() * (-0.3f64).exp(), 0.7f64.sin() * (-0.3f64).exp()];
        assert!((g[0] - want[0]).abs() < 1e-9);
        assert!((g[1] - want[1]).abs() < 1e-9);
    }

    #[test]
    fn descends_with_fd_gradients() {
        let f = |x: &[f64]| (x[0] - 0.5).powi(4) + (x[1] * x[1] - 1.0).powi(2) + x[1];
        let res = minimize(
            |x| (f(x), central_difference(f, x, 1e-6)),
            &[2.0, 2.0],
            &BfgsOptions::default(),
        );
        assert!(res.f < f(&[2.0, 2.0]));
        assert!(res.grad_inf_norm < 1e-5);
    }
}
