//! Bracketed scalar root finding (Van Wijngaarden–Dekker–Brent).

use crate::error::{Error, Result};

/// Finds a root of `f` in `[lo, hi]`.
///
/// Stops as soon as `|f(x)| <= tol` or the bracket has shrunk below
/// `tol * (1 + |x|)`. `max_iter` bounds the number of function evaluations.
pub fn brent_root<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    let mut evals = 2;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !fa.is_finite() || !fb.is_finite() || fa.signum() == fb.signum() {
        return Err(Error::Bracket { lo, hi, flo: fa, fhi: fb });
    }

    let mut c = b;
    let mut fc = fb;
    let mut d = b - a;
    let mut e = d;
    loop {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 0.5 * (tol * (1.0 + b.abs())).max(4.0 * f64::EPSILON * b.abs());
        let xm = 0.5 * (c - b);
        if fb.abs() <= tol || xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if evals >= max_iter {
            return Err(Error::Convergence { iterations: evals, last: fb.abs() });
        }

        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation, or secant when only two points differ.
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        evals += 1;
        if !fb.is_finite() {
            return Err(Error::InvalidInput(format!("function returned {fb} at {b}")));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        let x = brent_root(|x| x - 2.0, 0.0, 5.0, 1e-14, 100).unwrap();
        assert!((x - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cube_root_of_two() {
        let x = brent_root(|x| x * x * x - 2.0, 1.0, 2.0, 1e-15, 100).unwrap();
        assert!((x - 2f64.powf(1.0 / 3.0)).abs() < 1e-10);
        assert!((x - 1.259921).abs() < 1e-6);
    }

    #[test]
    fn root_at_endpoint() {
        assert_eq!(brent_root(|x| x - 1.0, 1.0, 3.0, 1e-12, 50).unwrap(), 1.0);
        assert_eq!(brent_root(|x| x - 3.0, 1.0, 3.0, 1e-12, 50).unwrap(), 3.0);
    }

    #[test]
    fn no_sign_change() {
        assert!(matches!(brent_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 50), Err(Error::Bracket { .. })));
    }

    #[test]
    fn iteration_cap() {
        assert!(matches!(brent_root(|x| x.powi(3) - 2.0, 0.0, 100.0, 0.0, 4), Err(Error::Convergence { .. })));
    }

    #[test]
    fn steep_and_flat_functions() {
        // Pole-like residual, as met when solving for the spherical multiplier.
        let x = brent_root(|x| 1.0 - 1e-3 / (x - 1.0), 1.0 + 1e-12, 10.0, 1e-14, 200).unwrap();
        assert!((x - 1.001).abs() < 1e-12);
        let x = brent_root(|x| (x - 0.3).powi(3), 0.0, 1.0, 1e-30, 500).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
    }
}
