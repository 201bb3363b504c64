//! Scalar root finding on a bracket.

use crate::error::{Error, Result};

/// Result of a bracketed root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub value: f64,
    /// Final bracket width.
    pub width: f64,
    pub iterations: usize,
}

/// Illinois-modified regula falsi on `[a, b]`, where `g(a)` and `g(b)` have
/// opposite signs. Stops when the bracket is narrower than `x_tol` or `g`
/// vanishes exactly.
pub fn illinois<G>(mut g: G, mut a: f64, mut b: f64, x_tol: f64, max_iter: usize) -> Result<Root>
where
    G: FnMut(f64) -> Result<f64>,
{
    let mut fa = g(a)?;
    let mut fb = g(b)?;
    illinois_with_values(&mut g, &mut a, &mut b, &mut fa, &mut fb, x_tol, max_iter)
}

/// Same as [`illinois`] with known end values.
pub fn illinois_from<G>(mut g: G, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64, x_tol: f64, max_iter: usize) -> Result<Root>
where
    G: FnMut(f64) -> Result<f64>,
{
    illinois_with_values(&mut g, &mut a, &mut b, &mut fa, &mut fb, x_tol, max_iter)
}

fn illinois_with_values<G>(g: &mut G, a: &mut f64, b: &mut f64, fa: &mut f64, fb: &mut f64, x_tol: f64, max_iter: usize) -> Result<Root>
where
    G: FnMut(f64) -> Result<f64>,
{
    if *fa == 0.0 {
        return Ok(Root { x: *a, value: 0.0, width: 0.0, iterations: 0 });
    }
    if *fb == 0.0 {
        return Ok(Root { x: *b, value: 0.0, width: 0.0, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo: a.min(*b), hi: a.max(*b) });
    }
    let mut side = 0i8;
    for it in 1..=max_iter {
        let width = (*b - *a).abs();
        let mut c = (*a * *fb - *b * *fa) / (*fb - *fa);
        // Fall back to bisection if the secant leaves the bracket.
        let lo = a.min(*b);
        let hi = a.max(*b);
        if !(c > lo && c < hi) {
            c = 0.5 * (*a + *b);
        }
        let fc = g(c)?;
        if fc == 0.0 || width <= x_tol {
            return Ok(Root { x: c, value: fc, width, iterations: it });
        }
        if fc.signum() == fb.signum() {
            *b = c;
            *fb = fc;
            if side == -1 {
                *fa *= 0.5;
            }
            side = -1;
        } else {
            *a = c;
            *fa = fc;
            if side == 1 {
                *fb *= 0.5;
            }
            side = 1;
        }
        if (*b - *a).abs() <= x_tol {
            let (x, v) = if fa.abs() < fb.abs() { (*a, *fa) } else { (*b, *fb) };
            return Ok(Root { x, value: v, width: (*b - *a).abs(), iterations: it });
        }
    }
    Err(Error::NoConvergence { iterations: max_iter })
}

/// Plain bisection; robust when `g` is discontinuous near the root.
pub fn bisect<G>(mut g: G, mut a: f64, mut b: f64, x_tol: f64, max_iter: usize) -> Result<Root>
where
    G: FnMut(f64) -> Result<f64>,
{
    let mut fa = g(a)?;
    let fb = g(b)?;
    if fa == 0.0 {
        return Ok(Root { x: a, value: 0.0, width: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, value: 0.0, width: 0.0, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo: a.min(b), hi: a.max(b) });
    }
    for it in 1..=max_iter {
        let c = 0.5 * (a + b);
        let fc = g(c)?;
        if fc == 0.0 || (b - a).abs() <= x_tol {
            return Ok(Root { x: c, value: fc, width: (b - a).abs(), iterations: it });
        }
        if fc.signum() == fa.signum() {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    Err(Error::NoConvergence { iterations: max_iter })
}
