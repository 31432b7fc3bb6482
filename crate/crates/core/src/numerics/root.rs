use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Bisection for a strictly decreasing function with `f(lo) > 0 > f(hi)`.
///
/// `f(lo)` may be `+inf` (a pole at the left end is fine). Returns once
/// `|f(root)| < tol` or the bracket is narrower than 1e-15.
pub fn find_root_monotone<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = f(lo);
    let f_hi = f(hi);
    if !(f_lo > 0.0) || !(f_hi < 0.0) {
        return Err(Error::BracketViolation { f_lo, f_hi });
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < tol || hi - lo < 1e-15 {
            return Ok(mid);
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        let x = find_root_monotone(|x| 1.0 - 2.0 * x, 0.0, 1.0, 1e-14).unwrap();
        assert!((x - 0.5).abs() < 1e-14);
    }

    #[test]
    fn pole_at_left_end() {
        let x = find_root_monotone(|x| 1.0 / x - 3.0, 0.0, 1.0, 1e-13).unwrap();
        assert!((x - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn fixed_point_instance_residual() {
        // one observed receiver with D = 1 and exterior mass 0.5
        let f = |e: f64| 1.0 / e - 1.0 / (2.0 - e) - 0.5;
        let x = find_root_monotone(f, 0.0, 1.0, 1e-13).unwrap();
        assert!(f(x).abs() < 1e-12);
    }

    #[test]
    fn bracket_violation() {
        let r = find_root_monotone(|x| 2.0 - x, 0.0, 1.0, 1e-12);
        assert!(matches!(r, Err(Error::BracketViolation { .. })));
    }
}
