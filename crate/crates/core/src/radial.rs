//! Radial self-similar ODE in first-order flux form.
//!
//! State `(f, f', w, g)` with `w = f'' + (N-1) f'/y` the radial Laplacian and
//! `g = y^{N-1} m(f) w'` the flux, `m(f) = (f² + δ²)^{n/2}`. The focusing
//! equation reads `g' = y^{N-1} (α f − β y f')`; the defocusing one flips the sign.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::ode::{self, Action, StepControl};
use crate::params::{Sign, SimilarityParams};

/// Default handoff radius from the origin series to the integrator.
pub const DEFAULT_Y_START: f64 = 1e-3;
/// Default mobility floor `δ` for `n > 0`.
pub const DEFAULT_MOBILITY_FLOOR: f64 = 1e-8;
/// Default `|f|` level that triggers log-rescaling of linear trajectories.
pub const DEFAULT_RESCALE_THRESHOLD: f64 = 1e100;

/// Regularised mobility `(f² + δ²)^{n/2}`; exactly `|f|ⁿ` for `δ = 0`.
pub fn regularized_mobility(f: f64, n: f64, delta: f64) -> f64 {
    if n == 0.0 {
        return 1.0;
    }
    if delta == 0.0 {
        return f.abs().powf(n);
    }
    (f * f + delta * delta).powf(0.5 * n)
}

/// One point of the first-order system.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialState {
    pub y: f64,
    pub f: f64,
    pub df: f64,
    /// Radial Laplacian `w`.
    pub lap: f64,
    /// `y^{N-1} m(f) w'`.
    pub flux: f64,
}

impl RadialState {
    pub fn as_array(&self) -> [f64; 4] {
        [self.f, self.df, self.lap, self.flux]
    }

    pub fn from_array(y: f64, s: [f64; 4]) -> Self {
        Self { y, f: s[0], df: s[1], lap: s[2], flux: s[3] }
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && self.as_array().iter().all(|v| v.is_finite())
    }
}

/// Derivative of the state with respect to `y`.
pub fn rhs(params: &SimilarityParams, state: &RadialState, mobility_floor: f64) -> Result<[f64; 4]> {
    rhs_array(params, state.y, &state.as_array(), mobility_floor)
}

pub(crate) fn rhs_array(params: &SimilarityParams, y: f64, s: &[f64; 4], mobility_floor: f64) -> Result<[f64; 4]> {
    if !(y > 0.0) {
        return Err(Error::InvalidParameter("radial rhs needs y > 0"));
    }
    let [f, df, lap, flux] = *s;
    let weight = y.powi(params.radial_power());
    let denom = weight * regularized_mobility(f, params.n, mobility_floor);
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::SingularMobility { y });
    }
    let source = weight * (params.alpha * f - params.beta * y * df);
    let dflux = match params.sign {
        Sign::Focusing => source,
        Sign::Defocusing => -source,
    };
    Ok([df, lap - (params.radial_power() as f64) * df / y, flux / denom, dflux])
}

/// Normalisation at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum StartKind {
    /// `f(0) = 1, f''(0) = 0`.
    Sh1,
    /// `f(0) = 0, f''(0) = 1`.
    Sh2,
}

impl StartKind {
    /// Kind whose eigenfunctions carry the `k`-th eigenvalue: odd `k` vanish at
    /// the origin, even `k` do not.
    pub fn for_branch(k: u32) -> Self {
        if k % 2 == 1 {
            StartKind::Sh2
        } else {
            StartKind::Sh1
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StartKind::Sh1 => "sh1",
            StartKind::Sh2 => "sh2",
        }
    }
}

impl core::str::FromStr for StartKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sh1" => Ok(StartKind::Sh1),
            "sh2" => Ok(StartKind::Sh2),
            _ => Err(Error::InvalidParameter("start kind must be sh1 or sh2")),
        }
    }
}

/// Taylor start at the origin, handed to the integrator at `y_start`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OriginStart {
    pub kind: StartKind,
    pub f0: f64,
    pub f2: f64,
    /// Coefficients of `y⁰, y², y⁴, y⁶`.
    pub series: [f64; 4],
    pub y_start: f64,
    /// Mobility floor used by the series and to be used by the integrator.
    pub mobility_floor: f64,
}

impl OriginStart {
    /// State at the handoff radius.
    pub fn state(&self, params: &SimilarityParams) -> RadialState {
        let [c0, c2, c4, c6] = self.series;
        let y = self.y_start;
        let nd = params.dim as f64;
        let y2 = y * y;
        let f = c0 + y2 * (c2 + y2 * (c4 + y2 * c6));
        let df = y * (2.0 * c2 + y2 * (4.0 * c4 + 6.0 * c6 * y2));
        let lap = 2.0 * nd * c2 + y2 * (4.0 * (nd + 2.0) * c4 + 6.0 * (nd + 4.0) * c6 * y2);
        let dlap = y * (8.0 * (nd + 2.0) * c4 + 24.0 * (nd + 4.0) * c6 * y2);
        let m = regularized_mobility(f, params.n, self.mobility_floor);
        let flux = y.powi(params.radial_power()) * m * dlap;
        RadialState { y, f, df, lap, flux }
    }
}

/// Even power-series coefficients `c_0, c_2, …, c_{2·(len-1)}` of a regular
/// solution of the frozen-mobility equation
/// `Δ²f = (α f − β y f')/m`, from the recurrence
/// `c_{j+4} (j+4)(j+2)(j+N+2)(j+N) = (α − jβ) c_j / m`.
///
/// Generic over the scalar so that the recurrence can be run in exact
/// rational arithmetic.
pub fn series_recurrence<T>(alpha: T, beta: T, inv_mobility: T, dim: u32, c0: T, c2: T, terms: usize) -> Vec<T>
where
    T: num_traits::Num + Copy + num_traits::FromPrimitive,
{
    let mut c = Vec::with_capacity(terms);
    for i in 0..terms {
        let v = match i {
            0 => c0,
            1 => c2,
            _ => {
                let j = 2 * (i as u64) - 4; // power of the seed coefficient
                let dj = T::from_u64(j).unwrap();
                let nd = T::from_u32(dim).unwrap();
                let two = T::from_u8(2).unwrap();
                let four = T::from_u8(4).unwrap();
                let denom = (dj + four) * (dj + two) * (dj + nd + two) * (dj + nd);
                (alpha - dj * beta) * c[i - 2] * inv_mobility / denom
            }
        };
        c.push(v);
    }
    c
}

/// Builds the origin start for `kind`.
///
/// For `n = 0` the series is the exact linear recurrence. For `n > 0` the
/// mobility is frozen at its value at the handoff radius (leading order), and
/// `β` replaces `1/4`. A start with `f(0) = 0` and `n > 0` needs `δ > 0`.
pub fn origin_series(params: &SimilarityParams, kind: StartKind, y_start: f64, mobility_floor: f64) -> Result<OriginStart> {
    if !(y_start > 0.0 && y_start < 1.0) {
        return Err(Error::InvalidParameter("series handoff radius must lie in (0, 1)"));
    }
    let (c0, c2) = match kind {
        StartKind::Sh1 => (1.0, 0.0),
        StartKind::Sh2 => (0.0, 0.5),
    };
    if params.n > 0.0 && kind == StartKind::Sh2 && !(mobility_floor > 0.0) {
        return Err(Error::DegenerateOrigin);
    }
    let inv_m = if params.n == 0.0 {
        1.0
    } else {
        let leading = c0 + c2 * y_start * y_start;
        1.0 / regularized_mobility(leading, params.n, mobility_floor)
    };
    let mut alpha = params.alpha;
    let mut beta = params.beta;
    if params.sign == Sign::Defocusing {
        alpha = -alpha;
        beta = -beta;
    }
    let c = series_recurrence(alpha, beta, inv_m, params.dim, c0, c2, 4);
    Ok(OriginStart { kind, f0: c0, f2: 2.0 * c2, series: [c[0], c[1], c[2], c[3]], y_start, mobility_floor })
}

/// Integration settings for a radial shot.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// `|f|` level that triggers rescaling; `None` disables it.
    pub rescale_threshold: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-13, abs_tol: 1e-13, rescale_threshold: Some(DEFAULT_RESCALE_THRESHOLD), max_steps: 5_000_000 }
    }
}

/// A recorded state together with the log-scale in force when it was taken.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sample {
    pub state: RadialState,
    /// The unscaled solution is `state · e^{log_scale}`.
    pub log_scale: f64,
}

impl Sample {
    pub fn unscaled_f(&self) -> f64 {
        self.state.f * self.log_scale.exp()
    }

    pub fn unscaled_df(&self) -> f64 {
        self.state.df * self.log_scale.exp()
    }
}

/// Output of [`integrate`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Accumulated rescaling exponent at the end of the run.
    pub log_scale: f64,
    pub params: SimilarityParams,
    pub mobility_floor: f64,
    pub steps: usize,
}

impl Trajectory {
    /// Sample at the largest recorded `y` not exceeding `y`.
    pub fn sample_at(&self, y: f64) -> Option<&Sample> {
        let idx = self.samples.partition_point(|s| s.state.y <= y);
        if idx == 0 {
            None
        } else {
            Some(&self.samples[idx - 1])
        }
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

/// Where [`integrate`] records samples.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampling {
    /// Every accepted step (plus the handoff point).
    Steps,
    /// Exactly at these radii (increasing, inside `(y_start, y_end]`), plus the handoff point.
    At(Vec<f64>),
}

/// Uniform grid of `count` radii on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![hi],
        _ => (0..count).map(|i| if i + 1 == count { hi } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 }).collect(),
    }
}

/// Integrates a shot from the origin series to `y_end`.
///
/// For `n = 0` the equation is linear and homogeneous, so whenever `|f|`
/// exceeds the rescale threshold the whole state is divided by `e^K` with
/// `K = ⌊ln|f|⌋` and `K` is added to the running log-scale. For `n > 0`
/// rescaling is disabled and a non-finite state is an overflow error.
pub fn integrate(
    params: &SimilarityParams,
    start: &OriginStart,
    y_end: f64,
    options: &IntegrateOptions,
    sampling: &Sampling,
) -> Result<Trajectory> {
    if !(y_end > start.y_start) {
        return Err(Error::InvalidParameter("y_end must exceed the series handoff radius"));
    }
    if !(options.rel_tol > 0.0 && options.rel_tol <= 1e-6 && options.abs_tol > 0.0 && options.abs_tol <= 1e-6) {
        return Err(Error::InvalidParameter("tolerances must lie in (0, 1e-6]"));
    }
    let rescale = if params.n == 0.0 { options.rescale_threshold } else { None };
    let initial = start.state(params);
    let mut samples = Vec::new();
    samples.push(Sample { state: initial, log_scale: 0.0 });
    let outputs: &[f64] = match sampling {
        Sampling::Steps => &[],
        Sampling::At(v) => {
            let first = v.partition_point(|&y| y <= start.y_start);
            &v[first..]
        }
    };
    let record_steps = matches!(sampling, Sampling::Steps);
    let ctrl = StepControl {
        rel_tol: options.rel_tol,
        abs_tol: options.abs_tol,
        max_steps: options.max_steps,
        h_min: 1e-14 * y_end.max(1.0),
        ..StepControl::default()
    };
    let floor = start.mobility_floor;
    let mut log_scale = 0.0;
    let stats = ode::integrate(
        |y, s: &[f64; 4]| rhs_array(params, y, s, floor),
        start.y_start,
        initial.as_array(),
        y_end,
        outputs,
        &ctrl,
        |ev| {
            if record_steps || ev.output.is_some() {
                samples.push(Sample { state: RadialState::from_array(ev.x, *ev.y), log_scale });
            }
            if let Some(th) = rescale {
                let a = ev.y[0].abs();
                if a > th {
                    let k = a.ln().floor();
                    let inv = (-k).exp();
                    for v in ev.y.iter_mut() {
                        *v *= inv;
                    }
                    log_scale += k;
                    return Ok(Action::Modified);
                }
            }
            Ok(Action::Continue)
        },
    )?;
    Ok(Trajectory { samples, log_scale, params: *params, mobility_floor: floor, steps: stats.accepted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p(n: f64, dim: u32, alpha: f64) -> SimilarityParams {
        SimilarityParams::focusing(n, dim, alpha).unwrap()
    }

    #[test]
    fn first_eigenfunction_is_flux_stationary() {
        for dim in 1..5 {
            let params = p(0.0, dim, 0.5);
            let s = RadialState { y: 2.0, f: 2.0, df: 2.0, lap: dim as f64, flux: 0.0 };
            let d = rhs(&params, &s, 0.0).unwrap();
            assert_eq!(d[3], 0.0);
            assert_eq!(d[2], 0.0);
            assert!((d[1] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn second_eigenfunction_residual_vanishes() {
        // f2 = 1 + y^4/64 for N = 2, α = 1 evaluated at y = 1.
        let params = p(0.0, 2, 1.0);
        let y = 1.0f64;
        let f = 1.0 + y.powi(4) / 64.0;
        let df = y.powi(3) / 16.0;
        let lap = 3.0 * y * y / 16.0 + df / y; // f'' + f'/y
        let flux = y * (6.0 * y / 16.0 + 2.0 * y / 16.0); // y·w', w = y²/4
        let s = RadialState { y, f, df, lap, flux };
        let d = rhs(&params, &s, 0.0).unwrap();
        // g' must equal (y w')' = y Δw = y · 1 for w = y²/4 in 2-D.
        assert!((d[3] - y * 1.0).abs() < 1e-15);
        assert!((d[2] - 0.5 * y).abs() < 1e-15);
    }

    #[test]
    fn zero_state_is_fixed() {
        let params = p(0.0, 3, 0.7);
        let s = RadialState { y: 1.3, f: 0.0, df: 0.0, lap: 0.0, flux: 0.0 };
        assert_eq!(rhs(&params, &s, 0.0).unwrap(), [0.0; 4]);
    }

    #[test]
    fn focusing_defocusing_flux_duality() {
        let a = SimilarityParams::new(0.3, 2, 0.8, Sign::Focusing).unwrap();
        let b = SimilarityParams::new(0.3, 2, 0.8, Sign::Defocusing).unwrap();
        let s = RadialState { y: 1.7, f: 0.4, df: -1.2, lap: 2.0, flux: 0.3 };
        let da = rhs(&a, &s, 1e-8).unwrap();
        let db = rhs(&b, &s, 1e-8).unwrap();
        assert_eq!(da[3] + db[3], 0.0);
        assert_eq!(da[..3], db[..3]);
    }

    #[test]
    fn singular_mobility_reported() {
        let params = p(1.0, 1, 0.7);
        let s = RadialState { y: 1.0, f: 0.0, df: 0.0, lap: 1.0, flux: 1.0 };
        assert!(matches!(rhs(&params, &s, 0.0), Err(Error::SingularMobility { .. })));
        assert!(rhs(&params, &s, 1e-8).is_ok());
    }

    #[test]
    fn mobility_values() {
        assert!((regularized_mobility(0.0, 1.0, 1e-8) - 1e-8).abs() < 1e-22);
        assert_eq!(regularized_mobility(2.0, 0.0, 5.0), 1.0);
        assert!((regularized_mobility(3.0, 2.0, 0.0) - 9.0).abs() < 1e-14);
    }

    #[test]
    fn series_matches_printed_eigenfunctions() {
        let s = origin_series(&p(0.0, 2, 1.0), StartKind::Sh1, 1e-3, 0.0).unwrap();
        assert!((s.series[2] - 1.0 / 64.0).abs() < 1e-17);
        let s = origin_series(&p(0.0, 1, 1.5), StartKind::Sh2, 1e-3, 0.0).unwrap();
        assert!((s.series[3] - 1.0 / 720.0).abs() < 1e-18);
        assert_eq!((s.f0, s.f2), (0.0, 1.0));
        let c = series_recurrence(2.0f64, 0.25, 1.0, 1, 1.0, 0.0, 5);
        assert!((c[2] - 1.0 / 12.0).abs() < 1e-16);
        assert!((c[4] - 1.0 / 20160.0).abs() < 1e-19);
        assert_eq!(c[3], 0.0);
    }

    #[test]
    fn degenerate_origin_needs_floor() {
        let params = p(0.4, 1, 0.6);
        assert_eq!(origin_series(&params, StartKind::Sh2, 1e-3, 0.0), Err(Error::DegenerateOrigin));
        assert!(origin_series(&params, StartKind::Sh2, 1e-3, 1e-8).is_ok());
        assert!(origin_series(&params, StartKind::Sh1, 1e-3, 0.0).is_ok());
    }

    #[test]
    fn quadratic_eigenfunction_integrates_exactly() {
        for dim in 1..4 {
            let params = p(0.0, dim, 0.5);
            let start = origin_series(&params, StartKind::Sh2, DEFAULT_Y_START, 0.0).unwrap();
            let tr = integrate(&params, &start, 10.0, &IntegrateOptions::default(), &Sampling::At(vec![10.0])).unwrap();
            let f = tr.last().unwrap().unscaled_f();
            assert!((f / 50.0 - 1.0).abs() < 1e-12, "N={dim}: {f}");
        }
    }

    #[test]
    fn second_eigenfunction_at_two() {
        let params = p(0.0, 1, 1.0);
        let start = origin_series(&params, StartKind::Sh1, DEFAULT_Y_START, 0.0).unwrap();
        let tr = integrate(&params, &start, 2.0, &IntegrateOptions::default(), &Sampling::At(vec![2.0])).unwrap();
        let f = tr.last().unwrap().unscaled_f();
        assert!((f / (5.0 / 3.0) - 1.0).abs() < 1e-12, "{f}");
    }

    #[test]
    fn rescaling_is_transparent() {
        let params = p(0.0, 2, 0.8);
        let start = origin_series(&params, StartKind::Sh1, DEFAULT_Y_START, 0.0).unwrap();
        let grid = uniform_grid(1.0, 60.0, 60);
        let on = IntegrateOptions { rescale_threshold: Some(1e5), ..Default::default() };
        let off = IntegrateOptions { rescale_threshold: None, ..Default::default() };
        let a = integrate(&params, &start, 60.0, &on, &Sampling::At(grid.clone())).unwrap();
        let b = integrate(&params, &start, 60.0, &off, &Sampling::At(grid)).unwrap();
        assert!(a.log_scale > 0.0);
        assert_eq!(b.log_scale, 0.0);
        for (sa, sb) in a.samples.iter().zip(&b.samples) {
            let fa = sa.unscaled_f();
            let fb = sb.unscaled_f();
            assert!((fa - fb).abs() <= 1e-9 * fb.abs().max(1.0), "y={} {fa} {fb}", sa.state.y);
        }
    }

    #[test]
    fn samples_strictly_increasing() {
        let params = p(0.0, 3, 1.1);
        let start = origin_series(&params, StartKind::Sh2, DEFAULT_Y_START, 0.0).unwrap();
        let tr = integrate(&params, &start, 30.0, &IntegrateOptions::default(), &Sampling::Steps).unwrap();
        assert!(tr.samples.windows(2).all(|w| w[1].state.y > w[0].state.y));
    }
}
