//! Bracketing primitives shared by the root finders and curve tracers.
//!
//! Everything here runs until the bracket collapses to adjacent floating
//! point numbers (or an explicit width is reached), so the answers are as
//! accurate as the function evaluations allow.

use crate::error::{Error, Result};

const MAX_HALVINGS: usize = 400;

/// Midpoint that never overflows and stops when no representable point is
/// strictly inside `(a, b)`.
#[inline]
fn midpoint(a: f64, b: f64) -> Option<f64> {
    let m = a + 0.5 * (b - a);
    if m <= a.min(b) || m >= a.max(b) {
        None
    } else {
        Some(m)
    }
}

/// Finds a zero of `f` on `[a, b]` given `f(a)` and `f(b)` of opposite sign
/// (a zero endpoint is accepted as is).
pub fn bisect<F>(f: F, mut a: f64, mut b: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::Bracket(format!("no sign change on [{a}, {b}]: f = ({fa}, {fb})")));
    }
    let mut fb = fb;
    for _ in 0..MAX_HALVINGS {
        let Some(m) = midpoint(a, b) else { break };
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    Ok(if fa.abs() <= fb.abs() { a } else { b })
}

/// Shrinks `[yes, no]` where `pred(yes)` holds and `pred(no)` fails, until the
/// bracket is narrower than `width` or collapses. Returns the final pair.
pub fn bisect_predicate<P>(pred: P, mut yes: f64, mut no: f64, width: f64) -> (f64, f64)
where
    P: Fn(f64) -> bool,
{
    for _ in 0..MAX_HALVINGS {
        if (no - yes).abs() <= width {
            break;
        }
        let Some(m) = midpoint(yes, no) else { break };
        if pred(m) {
            yes = m;
        } else {
            no = m;
        }
    }
    (yes, no)
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F>(f: F, mut a: f64, mut b: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..MAX_HALVINGS {
        if (b - a).abs() <= 4.0 * f64::EPSILON * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
        if x1 >= x2 {
            break;
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bisect_rejects_same_sign() {
        assert!(matches!(bisect(|x| x * x + 1.0, -1.0, 1.0), Err(Error::Bracket(_))));
    }

    #[test]
    fn predicate_bisection_reaches_width() {
        let (y, n) = bisect_predicate(|x| x < 0.3, 0.0, 1.0, 1e-12);
        assert!(y < 0.3 && n >= 0.3 && n - y <= 1e-12);
    }

    #[test]
    fn golden_finds_parabola_top() {
        let x = golden_max(|x| -(x - 0.25) * (x - 0.25), -1.0, 2.0);
        assert!((x - 0.25).abs() < 1e-7);
    }
}
