//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.
//!
//! The step is clamped so that requested output abscissae are hit exactly;
//! after every accepted step a callback may inspect or rewrite the state
//! (used for log-rescaling of linear problems and for zero-crossing logs).

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial step; `0` selects it automatically.
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Any state component above this magnitude is reported as overflow.
    pub overflow_limit: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            abs_tol: 1e-13,
            h_init: 0.0,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
            overflow_limit: 1e290,
        }
    }
}

impl StepControl {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }
}

/// What the step callback wants the driver to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Continue,
    /// The callback rewrote the state; derivatives are recomputed.
    Modified,
    Stop,
}

/// Passed to the step callback after every accepted step.
pub struct StepEvent<'a, const D: usize> {
    pub x: f64,
    pub y: &'a mut [f64; D],
    /// `Some(i)` when `x` equals output abscissa `i` exactly.
    pub output: Option<usize>,
}

/// Counters describing one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Abscissa reached (equals `x_end` unless stopped early).
    pub x_final: f64,
}

fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for i in 0..D {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

fn all_finite<const D: usize>(y: &[f64; D]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Integrates `y' = rhs(x, y)` from `x0` to `x_end`.
///
/// `outputs` must be increasing and lie in `(x0, x_end]`; the callback receives
/// each of them exactly once through [`StepEvent::output`].
pub fn integrate<const D: usize, F, G>(
    mut rhs: F,
    x0: f64,
    y0: [f64; D],
    x_end: f64,
    outputs: &[f64],
    ctrl: &StepControl,
    mut on_step: G,
) -> Result<Stats>
where
    F: FnMut(f64, &[f64; D]) -> Result<[f64; D]>,
    G: FnMut(StepEvent<'_, D>) -> Result<Action>,
{
    if !(x_end > x0) {
        return Err(Error::InvalidParameter("integration end must exceed start"));
    }
    if outputs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("output abscissae must be increasing"));
    }
    if outputs.first().is_some_and(|&o| o <= x0) || outputs.last().is_some_and(|&o| o > x_end) {
        return Err(Error::InvalidParameter("output abscissae must lie in (x0, x_end]"));
    }

    let mut stats = Stats { x_final: x0, ..Stats::default() };
    let mut x = x0;
    let mut y = y0;
    let mut k1 = rhs(x, &y)?;
    stats.evaluations += 1;

    let mut h = if ctrl.h_init > 0.0 { ctrl.h_init } else { initial_step(&mut rhs, x, &y, &k1, ctrl)? };
    stats.evaluations += 1;
    h = h.min(ctrl.h_max).min(x_end - x);

    let mut next_out = 0usize;
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= ctrl.max_steps {
            return Err(Error::MaxStepsExceeded { x });
        }
        let target = outputs.get(next_out).copied().unwrap_or(x_end);
        let mut hits = false;
        if x + h >= target - 1e-12 * h.max(target.abs() * f64::EPSILON) {
            h = target - x;
            hits = true;
        }
        if h < ctrl.h_min {
            return Err(Error::StepSizeCollapse { x, h });
        }

        let y2 = axpy(&y, h, &[(A21, &k1)]);
        let k2 = rhs(x + C2 * h, &y2)?;
        let y3 = axpy(&y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = rhs(x + C3 * h, &y3)?;
        let y4 = axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = rhs(x + C4 * h, &y4)?;
        let y5 = axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = rhs(x + C5 * h, &y5)?;
        let y6 = axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let k6 = rhs(x + h, &y6)?;
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(x + h, &y_new)?;
        stats.evaluations += 6;

        let err_vec = axpy(&[0.0; D], h, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
        let mut sum = 0.0;
        for i in 0..D {
            let sc = ctrl.abs_tol + ctrl.rel_tol * y[i].abs().max(y_new[i].abs());
            let r = err_vec[i] / sc;
            sum += r * r;
        }
        let err = (sum / D as f64).sqrt();

        if !err.is_finite() || !all_finite(&y_new) || !all_finite(&k7) {
            stats.rejected += 1;
            last_rejected = true;
            h *= 0.25;
            continue;
        }

        if err <= 1.0 {
            stats.accepted += 1;
            x = if hits { target } else { x + h };
            y = y_new;
            k1 = k7;
            if y.iter().any(|v| v.abs() > ctrl.overflow_limit) {
                return Err(Error::Overflow { x });
            }
            let output = if hits && next_out < outputs.len() {
                next_out += 1;
                Some(next_out - 1)
            } else {
                None
            };
            match on_step(StepEvent { x, y: &mut y, output })? {
                Action::Continue => {}
                Action::Modified => {
                    k1 = rhs(x, &y)?;
                    stats.evaluations += 1;
                }
                Action::Stop => {
                    stats.x_final = x;
                    return Ok(stats);
                }
            }
            if hits && output.is_none() || x >= x_end {
                stats.x_final = x;
                return Ok(stats);
            }
            let fac_max = if last_rejected { 1.0 } else { 5.0 };
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, fac_max);
            last_rejected = false;
            h = (h * fac).min(ctrl.h_max);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
    }
}

// Starting step from the local Lipschitz estimate (Hairer, Nørsett & Wanner, II.4).
fn initial_step<const D: usize, F>(rhs: &mut F, x: f64, y: &[f64; D], f0: &[f64; D], ctrl: &StepControl) -> Result<f64>
where
    F: FnMut(f64, &[f64; D]) -> Result<[f64; D]>,
{
    let norm = |v: &[f64; D]| {
        let mut s = 0.0;
        for i in 0..D {
            let sc = ctrl.abs_tol + ctrl.rel_tol * y[i].abs();
            s += (v[i] / sc) * (v[i] / sc);
        }
        (s / D as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y, h0, &[(1.0, f0)]);
    let f1 = rhs(x + h0, &y1)?;
    let mut diff = [0.0; D];
    for i in 0..D {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    Ok((100.0 * h0).min(h1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn exponential_growth() {
        let ctrl = StepControl::with_tolerances(1e-12, 1e-14);
        let mut last = [0.0];
        integrate(
            |_x, y: &[f64; 1]| Ok([y[0]]),
            0.0,
            [1.0],
            3.0,
            &[],
            &ctrl,
            |ev| {
                last = *ev.y;
                Ok(Action::Continue)
            },
        )
        .unwrap();
        assert!((last[0] / 3.0f64.exp() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn outputs_are_hit_exactly() {
        let ctrl = StepControl::with_tolerances(1e-10, 1e-12);
        let outs = [0.1, 0.5, 1.25, 2.0];
        let mut seen = Vec::new();
        integrate(
            |_x, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [0.0, 1.0],
            2.0,
            &outs,
            &ctrl,
            |ev| {
                if let Some(i) = ev.output {
                    seen.push((i, ev.x, ev.y[0]));
                }
                Ok(Action::Continue)
            },
        )
        .unwrap();
        assert_eq!(seen.len(), 4);
        for (i, x, s) in seen {
            assert_eq!(x, outs[i]);
            assert!((s - x.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn fifth_order_convergence() {
        // Fixed steps via tiny tolerances are not possible here, so compare the
        // error at two tolerance levels: work should scale like tol^{-1/5}.
        let run = |tol: f64| {
            let ctrl = StepControl::with_tolerances(tol, tol);
            integrate(|x, y: &[f64; 1]| Ok([x.cos() * y[0]]), 0.0, [1.0], 10.0, &[], &ctrl, |_| Ok(Action::Continue)).unwrap().accepted
                as f64
        };
        let ratio = run(1e-12) / run(1e-7);
        let expected = 1e5f64.powf(0.2);
        assert!(ratio > 0.6 * expected && ratio < 1.6 * expected, "ratio {ratio}");
    }

    #[test]
    fn stop_and_modify() {
        let ctrl = StepControl::with_tolerances(1e-10, 1e-12);
        let mut scale = 0.0;
        let st = integrate(
            |_x, y: &[f64; 1]| Ok([y[0]]),
            0.0,
            [1.0],
            100.0,
            &[],
            &ctrl,
            |ev| {
                if ev.y[0] > 1e10 {
                    ev.y[0] /= 1e10;
                    scale += 10.0 * core::f64::consts::LN_10;
                    return Ok(Action::Modified);
                }
                if ev.x > 50.0 {
                    return Ok(Action::Stop);
                }
                Ok(Action::Continue)
            },
        )
        .unwrap();
        assert!(st.x_final > 50.0 && st.x_final < 100.0);
        assert!(scale > 0.0);
    }

    #[test]
    fn overflow_is_reported() {
        let ctrl = StepControl { overflow_limit: 1e20, ..StepControl::with_tolerances(1e-8, 1e-8) };
        let r = integrate(|_x, y: &[f64; 1]| Ok([y[0]]), 0.0, [1.0], 100.0, &[], &ctrl, |_| Ok(Action::Continue));
        assert!(matches!(r, Err(Error::Overflow { .. })));
    }
}
