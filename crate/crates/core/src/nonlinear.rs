//! Nonlinear (`n > 0`) eigenvalue branches `α_k(n)` by single-parameter shooting.
//!
//! The shot is fixed by the parity of `k` (`sh2` for odd, `sh1` for even) and
//! `α` is adjusted until the profile shows minimal growth `f ~ C y^μ` at a
//! matching radius `y_*`.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::ode::{self, Action, StepControl};
use crate::params::SimilarityParams;
use crate::radial::{self, IntegrateOptions, Sampling, StartKind, Trajectory};

pub use crate::radial::regularized_mobility;

/// Below this `|f|` the residual denominator is clamped.
pub const RESIDUAL_FLOOR: f64 = 1e-200;

/// Form of the minimal-growth residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ResidualForm {
    /// `(β y f' − α f)/|f|`, zero on `C y^μ`.
    #[default]
    GrowthConsistent,
    /// `(μ y f' − α f)/|f|`, kept for comparison; it does not vanish on `C y^μ`
    /// unless `μ² = α`.
    Literal,
}

/// Minimal-growth residual of a state.
pub fn residual_value(params: &SimilarityParams, y: f64, f: f64, df: f64, form: ResidualForm) -> Result<f64> {
    let scale = f.abs().max(RESIDUAL_FLOOR);
    if f.abs() < RESIDUAL_FLOOR && df.abs() < RESIDUAL_FLOOR {
        return Err(Error::IndeterminateResidual { y });
    }
    let lead = match form {
        ResidualForm::GrowthConsistent => params.beta,
        ResidualForm::Literal => params.mu,
    };
    Ok((lead * y * df - params.alpha * f) / scale)
}

/// Residual of a trajectory at `y_star`, which must be one of its samples.
pub fn minimal_growth_residual(trajectory: &Trajectory, y_star: f64, form: ResidualForm) -> Result<f64> {
    let s = trajectory
        .samples
        .iter()
        .find(|s| (s.state.y - y_star).abs() <= 1e-12 * y_star)
        .ok_or(Error::InvalidParameter("y_star is not a sample of the trajectory"))?;
    // A common scale factor cancels, so the rescaled state is used as is.
    residual_value(&trajectory.params, s.state.y, s.state.f, s.state.df, form)
}

/// Settings for branch-point solves.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BranchOptions {
    /// Mobility floor `δ`.
    pub delta: f64,
    /// Largest matching radius tried.
    pub y_star: f64,
    /// Matching radius is never reduced below this.
    pub y_star_min: f64,
    /// Largest accepted `|∂ ln f/∂α|` at `y_*`; the radius is reduced until the
    /// profile sensitivity drops below it, which keeps integration noise
    /// out of the residual.
    pub max_sensitivity: f64,
    pub form: ResidualForm,
    /// Acceptance threshold on the final residual.
    pub threshold: f64,
    /// Bracket width at which refinement stops.
    pub x_tol: f64,
    /// Half-width of the first search window relative to the guess.
    pub search_width: f64,
    /// How often the first window may be shifted when its peak sits on an edge.
    pub search_shifts: usize,
    pub zoom_points_initial: usize,
    pub zoom_points: usize,
    /// `y_*` is kept below this fraction of the best departure radius when
    /// the zoom could not reach the requested radius.
    pub departure_margin: f64,
    pub y_start: f64,
    pub integrate: IntegrateOptions,
    /// Re-solve with `δ/2` and flag points whose `α` moves by more than `delta_tol`.
    pub check_delta: bool,
    pub delta_tol: f64,
    /// Re-solve with `y_*` scaled by this factor and reject points whose `α`
    /// moves by more than `radius_tol` relative.
    pub radius_check: Option<f64>,
    pub radius_tol: f64,
    /// Overrides the parity rule for the start kind.
    pub kind: Option<StartKind>,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            delta: radial::DEFAULT_MOBILITY_FLOOR,
            y_star: 40.0,
            y_star_min: 2.0,
            max_sensitivity: 1e5,
            form: ResidualForm::GrowthConsistent,
            threshold: 1e-6,
            x_tol: 1e-13,
            search_width: 0.3,
            search_shifts: 1,
            zoom_points_initial: 25,
            zoom_points: 9,
            departure_margin: 0.9,
            y_start: radial::DEFAULT_Y_START,
            integrate: IntegrateOptions { rescale_threshold: None, ..IntegrateOptions::default() },
            check_delta: false,
            delta_tol: 1e-6,
            radius_check: Some(0.75),
            radius_tol: 1e-2,
            kind: None,
        }
    }
}

/// A converged point of a branch.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BranchPoint {
    pub n: f64,
    pub alpha: f64,
    pub k: u32,
    pub kind: StartKind,
    pub delta: f64,
    pub y_star: f64,
    /// Smaller of `|r|` at the two ends of the final bracket.
    pub residual: f64,
    pub bracket_width: f64,
    /// `μ(α, n)`.
    pub mu: f64,
    /// Least-squares slope of `ln |f|` against `ln y` on `[y_*/2, y_*]`.
    pub local_exponent: f64,
    /// `|α(δ/2) − α(δ)|` when the check was requested.
    pub delta_shift: Option<f64>,
    /// `|α(y_*') − α(y_*)|` from the matching-radius check.
    pub radius_shift: Option<f64>,
}

impl BranchPoint {
    /// Relative gap between the fitted local exponent and `μ`.
    pub fn exponent_gap(&self) -> f64 {
        (self.local_exponent - self.mu).abs() / self.mu
    }

    pub fn delta_sensitive(&self, tol: f64) -> bool {
        self.delta_shift.is_some_and(|d| d > tol)
    }
}

/// The `α`-independent part of a shot.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Shooter {
    n: f64,
    dim: u32,
    kind: StartKind,
    delta: f64,
    y_start: f64,
    integrate: IntegrateOptions,
    form: ResidualForm,
}

impl Shooter {
    fn trajectory(&self, alpha: f64, y_end: f64, sampling: &Sampling) -> Result<Trajectory> {
        let params = SimilarityParams::focusing(self.n, self.dim, alpha)?;
        let start = radial::origin_series(&params, self.kind, self.y_start, self.delta)?;
        radial::integrate(&params, &start, y_end, &self.integrate, sampling)
    }

    fn residual(&self, alpha: f64, y_star: f64) -> Result<f64> {
        let tr = self.trajectory(alpha, y_star, &Sampling::At(alloc::vec![y_star]))?;
        minimal_growth_residual(&tr, y_star, self.form)
    }
}

/// Approximate branch `α_k(0)/(1 − α_k(0) n)`, used for initial guesses.
pub fn branch_approximation(k: u32, n: f64) -> f64 {
    let a0 = 0.5 * k as f64;
    a0 / (1.0 - a0 * n)
}

/// Converges one branch point from `alpha_guess`.
///
/// A shot at `α ≠ α_k` follows the eigenfunction up to a departure radius
/// `y_d(α)` where the local exponent `y f'/f` leaves `[0, μ]` on its way to the
/// maximal regime. The peak of `y_d` gives a first estimate; `r(y_*)` is then
/// bisected at the root nearest the guess, with `y_*` kept inside the
/// undeparted range. Roots that move by more than `radius_tol` when `y_*` is
/// rescaled are rejected, since the oscillating maximal bundle produces sign
/// changes of `r` unrelated to the branch.
pub fn solve_branch_point(n: f64, dim: u32, k: u32, alpha_guess: f64, opts: &BranchOptions) -> Result<BranchPoint> {
    if k == 0 {
        return Err(Error::InvalidParameter("branch index k must be at least 1"));
    }
    if !(n > 0.0 && n < 2.0) {
        return Err(Error::InvalidParameter("nonlinear shooting needs 0 < n < 2"));
    }
    if !(alpha_guess > 0.0) {
        return Err(Error::InvalidParameter("alpha guess must be positive"));
    }
    let sh = Shooter {
        n,
        dim,
        kind: opts.kind.unwrap_or_else(|| StartKind::for_branch(k)),
        delta: opts.delta,
        y_start: opts.y_start,
        integrate: opts.integrate,
        form: opts.form,
    };
    let (alpha, residual, width, y_star) = converge(&sh, alpha_guess, opts)?;
    if !(residual <= opts.threshold) {
        return Err(Error::ResidualNotAchieved { residual, threshold: opts.threshold });
    }
    let params = SimilarityParams::focusing(n, dim, alpha)?;
    let local_exponent = fitted_exponent(&sh, alpha, y_star)?;
    let delta_shift = if opts.check_delta {
        let half = Shooter { delta: 0.5 * sh.delta, ..sh };
        let alt = converge(&half, alpha, &BranchOptions { search_width: 1e-4, ..*opts })?;
        Some((alt.0 - alpha).abs())
    } else {
        None
    };
    let radius_shift = match opts.radius_check {
        Some(ratio) => {
            let alt = converge(&sh, alpha, &BranchOptions { y_star: ratio * y_star, ..*opts });
            let shift = alt.map_or(f64::INFINITY, |v| (v.0 - alpha).abs());
            if !(shift <= opts.radius_tol * alpha) {
                return Err(Error::MatchingRadiusSensitive { alpha, shift });
            }
            Some(shift)
        }
        None => None,
    };
    Ok(BranchPoint {
        n,
        alpha,
        k,
        kind: sh.kind,
        delta: sh.delta,
        y_star,
        residual,
        bracket_width: width,
        mu: params.mu,
        local_exponent,
        delta_shift,
        radius_shift,
    })
}

/// Returns `(α, |r|, bracket width, y_*)`.
fn converge(sh: &Shooter, guess: f64, opts: &BranchOptions) -> Result<(f64, f64, f64, f64)> {
    let reach = opts.search_width * guess;
    let zoom = zoom_departure(sh, guess, opts)?;
    let mut centers = alloc::vec![guess];
    if (zoom.alpha - guess).abs() <= 0.5 * reach && (zoom.alpha - guess).abs() > opts.x_tol * guess {
        centers.insert(0, zoom.alpha);
    }
    let mut last = None;
    for center in centers {
        let mut cap = opts.y_star;
        while cap >= opts.y_star_min.max(Y_STAR_LADDER_MIN) {
            match converge_at(sh, center, zoom.width, cap, opts) {
                Ok(v) if (v.0 - guess).abs() <= reach => return Ok(v),
                Ok(v) => last = Some(Error::NoBracket { lo: guess - reach, hi: v.0 }),
                Err(e) => last = Some(e),
            }
            cap *= Y_STAR_LADDER;
        }
    }
    Err(last.unwrap_or(Error::NoBracket { lo: guess - reach, hi: guess + reach }))
}

/// Factor by which the matching radius shrinks when no crossing is found.
const Y_STAR_LADDER: f64 = 0.8;
/// Smallest matching radius tried on the ladder.
const Y_STAR_LADDER_MIN: f64 = 10.0;

/// Root of `r(y_*)` nearest to `center`, with `y_*` capped by departure and
/// sensitivity at `center`.
fn converge_at(sh: &Shooter, center: f64, width: f64, cap: f64, opts: &BranchOptions) -> Result<(f64, f64, f64, f64)> {
    let radius = departure_radius(sh, center, cap, DEPARTURE_SAMPLES)?;
    let mut y_star = if radius >= cap { cap } else { opts.departure_margin * radius };
    y_star = y_star.min(sensitivity_radius(sh, center, y_star, opts)?);
    if y_star < opts.y_star_min {
        return Err(no_bracket(sh, center, width, cap));
    }
    let g = |a: f64| sh.residual(a, y_star);
    let r0 = g(center)?;
    if r0 == 0.0 {
        return Ok((center, 0.0, 0.0, y_star));
    }
    let reach = opts.search_width * center;
    let mut h = (width / 64.0).max(4.0 * f64::EPSILON * center).min(reach);
    let (mut lo, mut r_lo, mut hi, mut r_hi) = (center, r0, center, r0);
    while h <= reach {
        // Walk outwards on both sides; a sign change across a zero of f is a
        // pole of r and is skipped after refinement.
        for side in [-1.0, 1.0] {
            let (edge, r_edge) = if side < 0.0 { (lo, r_lo) } else { (hi, r_hi) };
            let x = center + side * h;
            if x <= 0.0 {
                continue;
            }
            let rx = g(x)?;
            if rx.signum() != r_edge.signum() {
                let (a, ra, b, rb) = if side < 0.0 { (x, rx, edge, r_edge) } else { (edge, r_edge, x, rx) };
                let found = bisect_residual(&g, a, ra, b, rb, opts)?;
                if found.1 <= POLE_RESIDUAL {
                    return Ok((found.0, found.1, found.2, y_star));
                }
            }
            if side < 0.0 {
                lo = x;
                r_lo = rx;
            } else {
                hi = x;
                r_hi = rx;
            }
        }
        h *= 2.0;
    }
    Err(no_bracket(sh, center, reach, y_star))
}

/// Residual magnitude above which a refined sign change is taken to be a pole.
const POLE_RESIDUAL: f64 = 1.0;

fn bisect_residual<G>(g: &G, mut a: f64, mut ra: f64, mut b: f64, mut rb: f64, opts: &BranchOptions) -> Result<(f64, f64, f64)>
where
    G: Fn(f64) -> Result<f64>,
{
    while b - a > opts.x_tol * a.max(1.0) {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let rm = g(m)?;
        if rm == 0.0 {
            return Ok((m, 0.0, 0.0));
        }
        if rm.signum() == ra.signum() {
            a = m;
            ra = rm;
        } else {
            b = m;
            rb = rm;
        }
    }
    Ok(if ra.abs() <= rb.abs() { (a, ra.abs(), b - a) } else { (b, rb.abs(), b - a) })
}

#[derive(Debug, Clone, Copy)]
struct Zoom {
    alpha: f64,
    /// Width of the last zoom window.
    width: f64,
}

/// Admissible local exponents `p = y f'/f` before a shot counts as departed.
///
/// Minimal profiles have positive coefficients, so `0 <= p <= μ` up to
/// round-off; the maximal regime pushes `p` towards `4/n`.
fn departure_window(params: &SimilarityParams) -> (f64, f64) {
    let mu = params.mu;
    let gap = if params.n > 0.0 { 0.5 * (4.0 / params.n - mu) } else { f64::INFINITY };
    (-0.5, mu + gap.min(2.0))
}

/// First sampled radius in `(y_lo, y_end]` where the local exponent leaves the
/// departure window, or `y_end` if it never does.
fn departure_radius(sh: &Shooter, alpha: f64, y_end: f64, samples: usize) -> Result<f64> {
    let params = SimilarityParams::focusing(sh.n, sh.dim, alpha)?;
    let start = radial::origin_series(&params, sh.kind, sh.y_start, sh.delta)?;
    let y0 = start.state(&params);
    let grid = radial::uniform_grid(DEPARTURE_Y_LO, y_end, samples);
    let (p_lo, p_hi) = departure_window(&params);
    let ctrl = StepControl {
        rel_tol: sh.integrate.rel_tol,
        abs_tol: sh.integrate.abs_tol,
        max_steps: sh.integrate.max_steps,
        h_min: 1e-14 * y_end.max(1.0),
        ..StepControl::default()
    };
    let mut departed = y_end;
    let run = ode::integrate(
        |y, s: &[f64; 4]| radial::rhs_array(&params, y, s, sh.delta),
        sh.y_start,
        y0.as_array(),
        y_end,
        &grid,
        &ctrl,
        |ev| {
            if ev.output.is_some() {
                let (f, df) = (ev.y[0], ev.y[1]);
                let p = ev.x * df / f;
                if !(f > 0.0 && p >= p_lo && p <= p_hi) {
                    departed = ev.x;
                    return Ok(Action::Stop);
                }
            }
            Ok(Action::Continue)
        },
    );
    match run {
        Ok(_) => Ok(departed),
        Err(Error::Overflow { x }) | Err(Error::StepSizeCollapse { x, .. }) | Err(Error::SingularMobility { y: x }) => Ok(x.min(departed)),
        Err(e) => Err(e),
    }
}

/// Departure radius of a single shot, for diagnostics and plots.
pub fn departure_radius_at(n: f64, dim: u32, kind: StartKind, alpha: f64, y_end: f64, opts: &BranchOptions) -> Result<f64> {
    let sh = Shooter { n, dim, kind, delta: opts.delta, y_start: opts.y_start, integrate: opts.integrate, form: opts.form };
    departure_radius(&sh, alpha, y_end, DEPARTURE_SAMPLES)
}

/// Inner edge of the departure grid.
const DEPARTURE_Y_LO: f64 = 0.5;
/// Radii per departure shot.
const DEPARTURE_SAMPLES: usize = 400;

fn zoom_departure(sh: &Shooter, guess: f64, opts: &BranchOptions) -> Result<Zoom> {
    let y_end = opts.y_star;
    let mut lo = (guess * (1.0 - opts.search_width)).max(1e-6);
    let mut hi = guess * (1.0 + opts.search_width);
    let mut points = opts.zoom_points_initial;
    let mut shifts = 0;
    loop {
        let grid = radial::uniform_grid(lo, hi, points);
        let mut yd = Vec::with_capacity(points);
        for &a in &grid {
            yd.push(departure_radius(sh, a, y_end, DEPARTURE_SAMPLES)?);
        }
        let best = yd.iter().copied().fold(f64::MIN, f64::max);
        let ties: Vec<usize> = (0..points).filter(|&i| yd[i] == best).collect();
        let i = ties[ties.len() / 2];
        let width = hi - lo;
        if best >= y_end {
            return Ok(Zoom { alpha: grid[i], width: width / (points - 1) as f64 });
        }
        // A peak on the edge of the first window means the branch lies outside it.
        if (i == 0 || i == points - 1) && shifts < opts.search_shifts && points == opts.zoom_points_initial {
            let shift = if i == 0 { -0.8 * width } else { 0.8 * width };
            lo = (lo + shift).max(1e-6);
            hi += shift;
            shifts += 1;
            continue;
        }
        let step = width / (points - 1) as f64;
        if step <= opts.x_tol * grid[i].max(1.0) {
            return Ok(Zoom { alpha: grid[i], width: step });
        }
        lo = grid[i.saturating_sub(1)];
        hi = grid[(i + 1).min(points - 1)];
        points = opts.zoom_points;
    }
}

fn no_bracket(sh: &Shooter, alpha: f64, width: f64, y_star: f64) -> Error {
    // A profile that keeps changing sign on [1, y_*] at the best α has lost
    // its minimal structure; otherwise report the plain bracket failure.
    let grid = radial::uniform_grid(1.0, y_star, 200);
    if let Ok(tr) = sh.trajectory(alpha, y_star, &Sampling::At(grid)) {
        let changes = tr.samples.windows(2).filter(|w| w[0].state.f.signum() != w[1].state.f.signum()).count();
        if changes >= 2 {
            return Error::OscillatoryLoss { n: sh.n, alpha };
        }
    }
    Error::NoBracket { lo: alpha - width, hi: alpha + width }
}

/// Largest grid radius `≤ y_star` where `|∂ ln f/∂α|` stays below the cap.
fn sensitivity_radius(sh: &Shooter, alpha: f64, y_star: f64, opts: &BranchOptions) -> Result<f64> {
    let grid = radial::uniform_grid(0.25 * y_star, y_star, 64);
    let da = 1e-7 * alpha;
    let a = sh.trajectory(alpha, y_star, &Sampling::At(grid.clone()))?;
    let b = sh.trajectory(alpha + da, y_star, &Sampling::At(grid))?;
    let mut best = a.samples[1].state.y;
    for (sa, sb) in a.samples.iter().zip(&b.samples).skip(1) {
        let s = ((sb.state.f - sa.state.f) / (da * sa.state.f)).abs();
        if s.is_finite() && s <= opts.max_sensitivity {
            best = sa.state.y;
        } else {
            break;
        }
    }
    Ok(best.min(y_star))
}

/// Log-log slope of `|f|` on `[y_*/2, y_*]`.
fn fitted_exponent(sh: &Shooter, alpha: f64, y_star: f64) -> Result<f64> {
    let grid = radial::uniform_grid(0.5 * y_star, y_star, 32);
    let tr = sh.trajectory(alpha, y_star, &Sampling::At(grid))?;
    let pts: Vec<(f64, f64)> =
        tr.samples.iter().skip(1).filter(|s| s.state.f != 0.0).map(|s| (s.state.y.ln(), s.state.f.abs().ln())).collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + (p.0 - mx) * (p.0 - mx), acc.1 + (p.0 - mx) * (p.1 - my)));
    Ok(sxy / sxx)
}

/// A traced branch.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Branch {
    pub k: u32,
    pub dim: u32,
    pub points: Vec<BranchPoint>,
    /// `μ_{1,k}` fitted from the small-`n` points, when there are enough.
    pub slope_estimate: Option<f64>,
    /// `n` at which continuation stopped, with the reason.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub terminated: Option<(f64, Error)>,
}

/// Traces branch `k` over an increasing `n` grid starting at or below `10⁻³`.
///
/// Each guess extrapolates the last two converged points along the
/// approximation `α_k(0)/(1 − α_k(0) n)`. The first failure ends the branch
/// and is recorded in `terminated`.
pub fn trace_branch(dim: u32, k: u32, n_grid: &[f64], opts: &BranchOptions) -> Result<Branch> {
    crate::linear::check_increasing(n_grid)?;
    match n_grid.first() {
        Some(&n0) if n0 > 0.0 && n0 <= 1e-3 => {}
        _ => return Err(Error::InvalidParameter("n grid must start in (0, 1e-3]")),
    }
    let mut points: Vec<BranchPoint> = Vec::new();
    let mut terminated = None;
    for &n in n_grid {
        let guess = match points.as_slice() {
            [] => branch_approximation(k, n),
            [p] => p.alpha * branch_approximation(k, n) / branch_approximation(k, p.n),
            [.., p, q] => {
                let t = (n - q.n) / (q.n - p.n);
                q.alpha + t * (q.alpha - p.alpha)
            }
        };
        match solve_branch_point(n, dim, k, guess, opts) {
            Ok(p) => points.push(p),
            Err(e) => {
                terminated = Some((n, e));
                break;
            }
        }
    }
    let mut branch = Branch { k, dim, points, slope_estimate: None, terminated };
    branch.slope_estimate = branch_slope(&branch).ok();
    Ok(branch)
}

/// Largest `n` used by [`branch_slope`].
pub const SLOPE_WINDOW: f64 = 0.05;

/// Least-squares slope of `α − k/2` against `n` through the origin, over the
/// points with `n ≤ 0.05`.
pub fn branch_slope(branch: &Branch) -> Result<f64> {
    slope_through_anchor(branch.points.iter().map(|p| (p.n, p.alpha)), 0.5 * branch.k as f64)
}

/// [`branch_slope`] on raw `(n, α)` pairs anchored at `(0, alpha0)`.
pub fn slope_through_anchor<I>(points: I, alpha0: f64) -> Result<f64>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let (mut snn, mut sna, mut count) = (0.0, 0.0, 0usize);
    for (n, a) in points.into_iter().filter(|p| p.0 <= SLOPE_WINDOW) {
        snn += n * n;
        sna += n * (a - alpha0);
        count += 1;
    }
    if count < 3 {
        return Err(Error::InsufficientSamples { needed: 3, found: count });
    }
    Ok(sna / snn)
}

/// The measured slope next to the two candidate values it could match.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SlopeComparison {
    pub k: u32,
    pub slope: f64,
    /// `α_k(0)²`, from expanding the approximation formula.
    pub approximation: f64,
    /// Hölder exponent `μ_k = 4 α_k(0) = 2k` of the linear trace.
    pub holder_exponent: f64,
}

pub fn compare_slope(k: u32, slope: f64) -> SlopeComparison {
    let a0 = 0.5 * k as f64;
    SlopeComparison { k, slope, approximation: a0 * a0, holder_exponent: 4.0 * a0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_vanishes_on_power_law() {
        let p = SimilarityParams::focusing(0.4, 2, 0.9).unwrap();
        let (c, y) = (2.5, 7.0f64);
        let f = c * y.powf(p.mu);
        let df = c * p.mu * y.powf(p.mu - 1.0);
        let r = residual_value(&p, y, f, df, ResidualForm::GrowthConsistent).unwrap();
        assert!(r.abs() < 1e-13);
        let lit = residual_value(&p, y, f, df, ResidualForm::Literal).unwrap();
        assert!((lit - (p.mu * p.mu - p.alpha)).abs() < 1e-12);
    }

    #[test]
    fn residual_on_maximal_envelope() {
        let p = SimilarityParams::focusing(0.5, 1, 0.7).unwrap();
        let y: f64 = 3.0;
        let e = 4.0 / p.n;
        for sign in [1.0, -1.0] {
            let f = sign * y.powf(e);
            let df = sign * e * y.powf(e - 1.0);
            let r = residual_value(&p, y, f, df, ResidualForm::GrowthConsistent).unwrap();
            let expect = (4.0 * p.beta / p.n - p.alpha) * sign;
            assert!((r - expect).abs() < 1e-12);
            assert!(expect.abs() > 0.0);
        }
    }

    #[test]
    fn indeterminate_residual() {
        let p = SimilarityParams::focusing(0.5, 1, 0.7).unwrap();
        assert!(matches!(residual_value(&p, 2.0, 0.0, 0.0, ResidualForm::GrowthConsistent), Err(Error::IndeterminateResidual { .. })));
    }

    #[test]
    fn slope_of_exact_line() {
        let pts = [(0.01, 0.5025), (0.02, 0.505), (0.03, 0.5075), (0.2, 9.0)];
        assert!((slope_through_anchor(pts, 0.5).unwrap() - 0.25).abs() < 1e-12);
        let flat = [(0.01, 1.0), (0.02, 1.0), (0.03, 1.0)];
        assert_eq!(slope_through_anchor(flat, 1.0).unwrap(), 0.0);
        assert!(slope_through_anchor([(0.01, 0.5), (0.02, 0.5)], 0.5).is_err());
    }

    #[test]
    fn slope_of_approximation() {
        let pts = [0.01, 0.02, 0.03].map(|n| (n, branch_approximation(1, n)));
        assert!((slope_through_anchor(pts, 0.5).unwrap() - 0.25).abs() < 1e-2);
    }

    #[test]
    fn comparison_candidates() {
        let c = compare_slope(1, 0.25);
        assert_eq!((c.approximation, c.holder_exponent), (0.25, 2.0));
    }
}
