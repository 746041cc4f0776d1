//! Small deterministic numerical kernels: bracketed root finding, scalar
//! minimization, trapezoid weights, dense solves and symmetric eigenproblems.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootError {
    /// `f(a)` and `f(b)` have the same sign.
    NoSignChange,
    MaxIterations,
}

#[derive(Debug, Clone, Copy)]
pub struct RootOptions<T> {
    /// Absolute tolerance on the abscissa (added to a few ulps of `x`).
    pub x_tol: T,
    /// The iteration stops as soon as `|f(x)| <= f_tol`.
    pub f_tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for RootOptions<T> {
    fn default() -> Self {
        RootOptions {
            x_tol: T::zero(),
            f_tol: T::zero(),
            max_iter: 400,
        }
    }
}

/// Bisection until the bracket has shrunk by `2^-10`, then secant steps that
/// are kept inside the bracket (falling back to bisection when they leave it
/// or stall).
pub fn bracketed_root<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    opts: RootOptions<T>,
) -> Result<T, RootError> {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(RootError::NoSignChange);
    }

    let two = T::lit(2.0);
    let width0 = hi - lo;
    let coarse = width0 * T::lit(1.0 / 1024.0);
    let eps = T::epsilon();
    let converged = |lo: T, hi: T| {
        let mid = (lo + hi) / two;
        hi - lo <= opts.x_tol + T::lit(4.0) * eps * mid.abs().max(T::min_positive_value())
    };

    let mut iter = 0;
    while hi - lo > coarse {
        let mid = (lo + hi) / two;
        let f_mid = f(mid);
        if f_mid.abs() <= opts.f_tol {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
        iter += 1;
    }

    // Secant polish. (x0, f0) and (x1, f1) are the two most recent iterates.
    let (mut x0, mut f0, mut x1, mut f1) = (lo, f_lo, hi, f_hi);
    let mut best = if f_lo.abs() < f_hi.abs() { lo } else { hi };
    while iter < opts.max_iter {
        if converged(lo, hi) {
            return Ok(best);
        }
        let mut x = if f1 != f0 {
            x1 - f1 * (x1 - x0) / (f1 - f0)
        } else {
            (lo + hi) / two
        };
        // Stay strictly inside the bracket and insist on real progress.
        let margin = (hi - lo) * T::lit(1e-3);
        if !(x > lo + margin && x < hi - margin) || x.is_nan() {
            x = (lo + hi) / two;
        }
        let fx = f(x);
        best = x;
        if fx.abs() <= opts.f_tol || fx == T::zero() {
            return Ok(x);
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
        }
        x0 = x1;
        f0 = f1;
        x1 = x;
        f1 = fx;
        iter += 1;
    }
    if converged(lo, hi) {
        Ok(best)
    } else {
        Err(RootError::MaxIterations)
    }
}

/// Brent's parabolic/golden-section minimizer on `[a, b]`.
/// Returns `(x_min, f(x_min))`.
pub fn brent_minimize<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T, max_iter: usize) -> (T, T) {
    let golden = T::lit(0.381_966_011_250_105_1);
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let zeps = T::epsilon() * T::lit(1e-3);
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };

    let mut x = a + golden * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d = T::zero();
    let mut e = T::zero();

    for _ in 0..max_iter {
        let xm = half * (a + b);
        let tol1 = tol * x.abs() + zeps;
        let tol2 = two * tol1;
        if (x - xm).abs() <= tol2 - half * (b - a) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = two * (q - r);
            if q > T::zero() {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if !(p.abs() >= (half * q * etemp).abs() || p <= q * (a - x) || p >= q * (b - x)) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x >= xm { a - x } else { b - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Maximizes `f` on `[a, b]`: coarse scan over `n_scan` points, then Brent
/// refinement around the best sample. Returns `(x_max, f(x_max))`.
pub fn scan_maximize<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, n_scan: usize, tol: T) -> (T, T) {
    let n = n_scan.max(3);
    let step = (b - a) / T::from_count(n - 1);
    let mut best_i = 0;
    let mut best_f = T::neg_infinity();
    for i in 0..n {
        let fi = f(a + step * T::from_count(i));
        if fi > best_f {
            best_f = fi;
            best_i = i;
        }
    }
    let lo = a + step * T::from_count(best_i.saturating_sub(1));
    let hi = a + step * T::from_count((best_i + 1).min(n - 1));
    let (x, neg) = brent_minimize(|x| -f(x), lo, hi, tol, 200);
    if -neg >= best_f {
        (x, -neg)
    } else {
        (a + step * T::from_count(best_i), best_f)
    }
}

/// Trapezoid weights for `n` uniformly spaced samples with spacing `h`.
pub fn trapezoid_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    let mut w = vec![h; n];
    if n > 0 {
        w[0] = h / T::lit(2.0);
        w[n - 1] = h / T::lit(2.0);
    }
    if n == 1 {
        w[0] = T::zero();
    }
    w
}

/// Solves the dense system `a x = b` (row-major `n x n`) by Gaussian
/// elimination with partial pivoting. Returns `None` for a singular matrix.
pub fn solve_dense<T: Real>(mut a: Vec<T>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().partial_cmp(&a[j * n + col].abs()).unwrap())
            .unwrap();
        if a[pivot * n + col].abs() <= scale * T::epsilon() * T::lit(16.0) {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        for row in col + 1..n {
            let factor = a[row * n + col] / a[col * n + col];
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] = a[row * n + k] - factor * v;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc = acc - a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    Some(x)
}

/// Cyclic Jacobi eigen-decomposition of a real symmetric row-major `n x n`
/// matrix. Returns eigenvalues in ascending order and the matching
/// eigenvectors as columns of a row-major matrix.
pub fn symmetric_eigen<T: Real>(m: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    assert_eq!(m.len(), n * n);
    let mut a = m.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let two = T::lit(2.0);
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .fold(T::zero(), |s, (i, j)| s + a[i * n + j] * a[i * n + j]);
        let diag: T = (0..n).fold(T::zero(), |s, i| s + a[i * n + i] * a[i * n + i]);
        if off <= T::epsilon() * T::epsilon() * (diag + off) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + new_col] = v[row * n + old_col];
        }
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_of_cubic() {
        let r = bracketed_root(|x: f64| x * x * x - 2.0, 0.0, 3.0, RootOptions::default()).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn root_requires_sign_change() {
        let r = bracketed_root(|x: f64| x * x + 1.0, -1.0, 1.0, RootOptions::default());
        assert_eq!(r, Err(RootError::NoSignChange));
    }

    #[test]
    fn root_handles_steep_function() {
        let r = bracketed_root(|x: f64| (x - 0.3).powi(5), -1.0, 1.0, RootOptions::default()).unwrap();
        assert!((r - 0.3).abs() < 1e-10);
    }

    #[test]
    fn brent_finds_parabola_minimum() {
        let (x, fx) = brent_minimize(|x: f64| (x - 1.25).powi(2) + 3.0, -4.0, 4.0, 1e-10, 200);
        assert!((x - 1.25).abs() < 1e-8);
        assert!((fx - 3.0).abs() < 1e-14);
    }

    #[test]
    fn scan_maximize_finds_global_peak() {
        let (x, _) = scan_maximize(|x: f64| (-(x - 2.0).powi(2)).exp() + 0.5 * (-(x + 2.0).powi(2)).exp(), -5.0, 5.0, 41, 1e-10);
        assert!((x - 2.0).abs() < 1e-6);
    }

    #[test]
    fn dense_solve_and_singular() {
        let x = solve_dense(vec![2.0_f64, 1.0, 1.0, 3.0], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        assert!(solve_dense(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 1.0]).is_none());
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let m = [4.0, 1.0, 0.5, 1.0, 3.0, -0.25, 0.5, -0.25, 1.0];
        let (vals, vecs) = symmetric_eigen(&m, 3);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| vecs[i * 3 + k] * vals[k] * vecs[j * 3 + k]).sum();
                assert!((r - m[i * 3 + j]).abs() < 1e-12);
            }
        }
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }
}
