//! Adaptive Simpson quadrature over fallible integrands.

use crate::error::Result;

const MAX_LEVEL: u32 = 40;

/// `∫_a^b f` to absolute tolerance `tol`; returns `(value, error estimate)`.
/// The end values are sampled just inside the interval, so a jump exactly at
/// `a` or `b` does not leak into the piece.
pub fn adaptive_simpson<F>(f: &mut F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if b.is_nan() || a.is_nan() || b <= a {
        return Ok((0.0, 0.0));
    }
    let h = (b - a) * 1e-12;
    let fa = f(a + h)?;
    let fb = f(b - h)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 0)
}

#[allow(clippy::too_many_arguments)]
fn step<F>(f: &mut F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, level: u32) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if level >= MAX_LEVEL || delta.abs() <= 15.0 * tol || m <= a || m >= b {
        return Ok((left + right + delta / 15.0, delta.abs() / 15.0));
    }
    let (l, el) = step(f, a, m, fa, flm, fm, left, tol / 2.0, level + 1)?;
    let (r, er) = step(f, m, b, fm, frm, fb, right, tol / 2.0, level + 1)?;
    Ok((l + r, el + er))
}

/// Integrates over `[a, b]` split at `breaks`, sharing `tol` evenly.
pub fn piecewise<F>(f: &mut F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let pieces = (pts.len() - 1).max(1) as f64;
    let (mut sum, mut err) = (0.0, 0.0);
    for w in pts.windows(2) {
        let (v, e) = adaptive_simpson(f, w[0], w[1], tol / pieces)?;
        sum += v;
        err += e;
    }
    Ok((sum, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_is_exact() {
        let (v, _) = adaptive_simpson(&mut |x: f64| Ok(x * x * x - 2.0 * x), 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 0.0).abs() < 1e-10);
    }

    #[test]
    fn exponential() {
        let (v, _) = adaptive_simpson(&mut |x: f64| Ok((-x).exp()), 0.0, 5.0, 1e-10).unwrap();
        assert!((v - (1.0 - (-5.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn step_function_with_break() {
        let mut f = |x: f64| Ok(if x < 0.3 { 1.0 } else { 2.0 });
        let (v, _) = piecewise(&mut f, 0.0, 1.0, &[0.3], 1e-12).unwrap();
        assert!((v - 1.7).abs() < 1e-12);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(&mut |_| Ok(1.0), 1.0, 1.0, 1e-6).unwrap(), (0.0, 0.0));
    }
}
