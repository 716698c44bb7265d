//! Bracketing root finder and golden-section search.

use thiserror::Error;

use crate::scalar::{lit, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("root not bracketed: f({lo:e}) = {f_lo:e}, f({hi:e}) = {f_hi:e}")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("function evaluation failed: {0}")]
    Evaluation(String),
}

/// Bisection on `[lo, hi]`. Stops when `|f| <= f_tol` or the bracket has
/// shrunk to a few ulps. `f` may fail; the error is propagated as text.
pub fn bisect<T, F, E>(mut f: F, mut lo: T, mut hi: T, f_tol: T) -> Result<T, RootError>
where
    T: Scalar,
    F: FnMut(T) -> Result<T, E>,
    E: std::fmt::Display,
{
    let mut call = |x: T| f(x).map_err(|e| RootError::Evaluation(e.to_string()));
    let mut f_lo = call(lo)?;
    let f_hi = call(hi)?;
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if (f_lo > T::zero()) == (f_hi > T::zero()) {
        return Err(RootError::NotBracketed {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            f_lo: f_lo.as_f64(),
            f_hi: f_hi.as_f64(),
        });
    }
    for _ in 0..400 {
        let mid = lit::<T>(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = call(mid)?;
        if f_mid.abs() <= f_tol {
            return Ok(mid);
        }
        if (f_mid > T::zero()) == (f_lo > T::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(lit::<T>(0.5) * (lo + hi))
}

/// Maximizes a unimodal `f` on `[a, b]`; returns `(argmax, max)`.
pub fn golden_section_max<T, F>(mut f: F, mut a: T, mut b: T, x_tol: T) -> (T, T)
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let inv_phi = lit::<T>((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::convert::Infallible;

    #[test]
    fn sqrt_two() {
        let r = bisect(|x: f64| Ok::<_, Infallible>(x * x - 2.0), 0.0, 2.0, 1e-15).unwrap();
        assert_relative_eq!(r, 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn unbracketed() {
        let e = bisect(|x: f64| Ok::<_, Infallible>(x * x + 1.0), -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(e, RootError::NotBracketed { .. }));
    }

    #[test]
    fn golden_parabola() {
        let (x, fx) = golden_section_max(|x: f64| -(x - 0.3) * (x - 0.3) + 1.0, -2.0, 3.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
        assert_relative_eq!(fx, 1.0, max_relative = 1e-15);
    }
}
