//! Linear (`n = 0`) spectrum.
//!
//! For `n = 0` the maximal bundle decays or grows like
//! `y^{-(2/3)(N+2α)} e^{a y^{4/3}}` with `a³ = −(1/4)(3/4)³`. A shot from the
//! origin is an eigenfunction exactly when the two growing modes are absent,
//! i.e. when both far-field constants `C₁`, `C₂` vanish.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::params::{Sign, SimilarityParams};
use crate::radial::{self, IntegrateOptions, OriginStart, Sampling, StartKind, Trajectory};
use crate::roots;

/// Exponent of `y` in the growth rate `e^{a y^{γ}}`.
pub const GROWTH_EXPONENT: f64 = 4.0 / 3.0;

/// Roots of `a³ = ∓(1/4)(3/4)³`.
///
/// Focusing: `a₁ = conj(a₂)` with positive real part, `a₃ < 0`.
/// Defocusing: `a₁ = conj(a₂)` with negative real part, `a₃ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CharRoots {
    pub a1: Complex64,
    pub a2: Complex64,
    pub a3: f64,
    /// `Re a₁`.
    pub c0: f64,
    /// `Im a₁ > 0`.
    pub c1: f64,
    pub growth_exponent: f64,
    pub sign: Sign,
}

impl CharRoots {
    /// Right-hand side of the defining cubic `a³ = rhs`.
    pub fn cubic_rhs(&self) -> f64 {
        cubic_rhs(self.sign)
    }

    /// Largest of `|a³ − rhs|` over the three roots.
    pub fn cubic_residual(&self) -> f64 {
        let r = Complex64::new(self.cubic_rhs(), 0.0);
        let a3 = Complex64::new(self.a3, 0.0);
        [self.a1, self.a2, a3].iter().map(|a| (a * a * a - r).norm()).fold(0.0, f64::max)
    }
}

fn cubic_rhs(sign: Sign) -> f64 {
    let q = 0.25 * 0.75 * 0.75 * 0.75;
    match sign {
        Sign::Focusing => -q,
        Sign::Defocusing => q,
    }
}

/// Closed-form characteristic roots.
pub fn char_roots(sign: Sign) -> CharRoots {
    let r = 0.75 * 4f64.powf(-1.0 / 3.0);
    let half = 0.5 * r;
    let im = r * 0.75f64.sqrt();
    let (re, a3) = match sign {
        Sign::Focusing => (half, -r),
        Sign::Defocusing => (-half, r),
    };
    CharRoots { a1: Complex64::new(re, im), a2: Complex64::new(re, -im), a3, c0: re, c1: im, growth_exponent: GROWTH_EXPONENT, sign }
}

/// Algebraic prefactor exponent `(2/3)(N + 2α)` of the maximal modes.
pub fn envelope_power(dim: u32, alpha: f64) -> f64 {
    2.0 / 3.0 * (dim as f64 + 2.0 * alpha)
}

/// Far-field model `y^{−(2/3)(N+2α)} e^{c₀y^{4/3}} (C₁ cos(c₁y^{4/3}) + C₂ sin(c₁y^{4/3}))`
/// of the maximal bundle.
pub fn far_field_model(dim: u32, alpha: f64, c1: f64, c2: f64, y: f64) -> f64 {
    let r = char_roots(Sign::Focusing);
    let z = y.powf(GROWTH_EXPONENT);
    let (s, c) = (r.c1 * z).sin_cos();
    (r.c0 * z - envelope_power(dim, alpha) * y.ln()).exp() * (c1 * c + c2 * s)
}

/// `f · y^{(2/3)(N+2α)} · e^{−c₀ y^{4/3}}` for an unscaled value `f·e^{log_scale}`,
/// evaluated in log space so that neither factor overflows.
pub fn scale_value(params: &SimilarityParams, roots: &CharRoots, y: f64, f: f64, log_scale: f64) -> f64 {
    if f == 0.0 {
        return 0.0;
    }
    let p = envelope_power(params.dim, params.alpha);
    let log = f.abs().ln() + log_scale + p * y.ln() - roots.c0 * y.powf(GROWTH_EXPONENT);
    f.signum() * log.exp()
}

/// Scaled far-field profile of a trajectory.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaledSeries {
    pub alpha: f64,
    pub dim: u32,
    /// Final rescaling exponent of the source trajectory.
    pub log_scale: f64,
    /// `(y, scaled f)` pairs.
    pub points: Vec<(f64, f64)>,
}

/// Applies [`scale_value`] to every sample of `trajectory`.
pub fn scaled_profile(trajectory: &Trajectory) -> ScaledSeries {
    let roots = char_roots(trajectory.params.sign);
    let points = trajectory
        .samples
        .iter()
        .map(|s| (s.state.y, scale_value(&trajectory.params, &roots, s.state.y, s.state.f, s.log_scale)))
        .collect();
    ScaledSeries { alpha: trajectory.params.alpha, dim: trajectory.params.dim, log_scale: trajectory.log_scale, points }
}

/// Far-field constants of one shot.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub c1: f64,
    pub c2: f64,
    pub window: (f64, f64),
    /// Root-mean-square misfit over the window.
    pub residual: f64,
    pub alpha: f64,
    /// Rescaling exponent already folded into `c1`, `c2`.
    pub log_scale_applied: f64,
    pub samples: usize,
    /// Condition number of the 2×2 normal matrix.
    pub condition: f64,
}

impl FitResult {
    /// Constants as seen by the rescaled integrator state.
    pub fn rescaled(&self) -> (f64, f64) {
        let s = (-self.log_scale_applied).exp();
        (self.c1 * s, self.c2 * s)
    }

    pub fn norm(&self) -> f64 {
        self.c1.hypot(self.c2)
    }
}

/// Minimum number of samples inside a fitting window.
pub const MIN_FIT_SAMPLES: usize = 50;
/// Largest accepted condition number of the normal equations.
pub const MAX_FIT_CONDITION: f64 = 1e4;

/// Least-squares fit of the scaled profile on `window` against
/// `{cos(c₁ y^{4/3}), sin(c₁ y^{4/3})}`.
pub fn fit_far_field(series: &ScaledSeries, window: (f64, f64)) -> Result<FitResult> {
    let roots = char_roots(Sign::Focusing);
    fit_with_frequency(series, window, roots.c1)
}

/// [`fit_far_field`] with an explicit angular frequency in `y^{4/3}`.
pub fn fit_with_frequency(series: &ScaledSeries, window: (f64, f64), freq: f64) -> Result<FitResult> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::InvalidParameter("fit window must satisfy lo < hi"));
    }
    let (mut scc, mut scs, mut sss, mut scv, mut ssv) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut count = 0usize;
    for &(y, v) in series.points.iter().filter(|p| p.0 >= lo && p.0 <= hi) {
        let (s, c) = (freq * y.powf(GROWTH_EXPONENT)).sin_cos();
        scc += c * c;
        scs += c * s;
        sss += s * s;
        scv += c * v;
        ssv += s * v;
        count += 1;
    }
    if count < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, found: count });
    }
    // Eigenvalues of the symmetric normal matrix.
    let tr = scc + sss;
    let disc = ((scc - sss) * (scc - sss) + 4.0 * scs * scs).sqrt();
    let lmax = 0.5 * (tr + disc);
    let lmin = 0.5 * (tr - disc);
    let condition = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
    if !(condition <= MAX_FIT_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let det = scc * sss - scs * scs;
    let c1 = (sss * scv - scs * ssv) / det;
    let c2 = (scc * ssv - scs * scv) / det;
    let mut sq = 0.0;
    for &(y, v) in series.points.iter().filter(|p| p.0 >= lo && p.0 <= hi) {
        let (s, c) = (freq * y.powf(GROWTH_EXPONENT)).sin_cos();
        let e = v - c1 * c - c2 * s;
        sq += e * e;
    }
    Ok(FitResult {
        c1,
        c2,
        window,
        residual: (sq / count as f64).sqrt(),
        alpha: series.alpha,
        log_scale_applied: series.log_scale,
        samples: count,
        condition,
    })
}

/// Settings for a linear shot.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearOptions {
    pub window: (f64, f64),
    /// Samples on the fit window.
    pub samples: usize,
    pub y_start: f64,
    pub integrate: IntegrateOptions,
}

impl Default for LinearOptions {
    fn default() -> Self {
        Self { window: (250.0, 300.0), samples: 512, y_start: radial::DEFAULT_Y_START, integrate: IntegrateOptions::default() }
    }
}

/// Integrates one `n = 0` shot and returns its trajectory on the fit window.
pub fn shoot(dim: u32, kind: StartKind, alpha: f64, opts: &LinearOptions) -> Result<Trajectory> {
    let params = SimilarityParams::focusing(0.0, dim, alpha)?;
    let start = radial::origin_series(&params, kind, opts.y_start, 0.0)?;
    shoot_from(&params, &start, opts)
}

fn shoot_from(params: &SimilarityParams, start: &OriginStart, opts: &LinearOptions) -> Result<Trajectory> {
    let grid = radial::uniform_grid(opts.window.0, opts.window.1, opts.samples);
    radial::integrate(params, start, opts.window.1, &opts.integrate, &Sampling::At(grid))
}

/// Shot plus far-field fit.
pub fn shoot_and_fit(dim: u32, kind: StartKind, alpha: f64, opts: &LinearOptions) -> Result<FitResult> {
    let tr = shoot(dim, kind, alpha, opts)?;
    fit_far_field(&scaled_profile(&tr), opts.window)
}

/// One row of an `α` scan.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScanRow {
    pub alpha: f64,
    /// `None` when the shot or the fit failed at this `α`.
    pub fit: Option<FitResult>,
}

/// `C₁(α)`, `C₂(α)` on a strictly increasing grid. Failed points become gaps.
pub fn scan_alpha(dim: u32, kind: StartKind, alpha_grid: &[f64], opts: &LinearOptions) -> Result<Vec<ScanRow>> {
    check_increasing(alpha_grid)?;
    Ok(alpha_grid.iter().map(|&alpha| ScanRow { alpha, fit: shoot_and_fit(dim, kind, alpha, opts).ok() }).collect())
}

pub(crate) fn check_increasing(grid: &[f64]) -> Result<()> {
    if grid.windows(2).all(|w| w[1] > w[0]) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("alpha grid must be strictly increasing"))
    }
}

/// Grid `offset, offset + step, …` up to `alpha_max`.
pub fn alpha_grid(offset: f64, step: f64, alpha_max: f64) -> Vec<f64> {
    if !(step > 0.0) || !(offset > 0.0) {
        return Vec::new();
    }
    let count = ((alpha_max - offset) / step).floor();
    if count < 0.0 {
        return Vec::new();
    }
    (0..=count as usize).map(|i| offset + i as f64 * step).collect()
}

/// A located linear eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearEigenvalue {
    pub k: u32,
    pub alpha: f64,
    pub kind: StartKind,
    /// Zeros of `C₁` and `C₂` that were paired.
    pub zero_c1: f64,
    pub zero_c2: f64,
    /// `|C₁|`, `|C₂|` of a shot at `alpha`.
    pub abs_c1: f64,
    pub abs_c2: f64,
}

/// Settings for [`find_linear_eigenvalues`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenSearch {
    pub shot: LinearOptions,
    /// Scan spacing in `α`.
    pub step: f64,
    /// First scan point; kept off the half-integers so no grid point sits on a zero.
    pub offset: f64,
    /// Two zeros closer than this are treated as one eigenvalue.
    pub coincidence: f64,
    /// Bracket width at which refinement stops.
    pub x_tol: f64,
    /// At a zero of one constant, the other must have dropped below this
    /// fraction of its size at the cell ends to be searched for a partner zero.
    pub collapse_ratio: f64,
}

impl Default for EigenSearch {
    fn default() -> Self {
        Self { shot: LinearOptions::default(), step: 0.05, offset: 0.0137, coincidence: 1e-6, x_tol: 1e-11, collapse_ratio: 1e-5 }
    }
}

/// A pair of zeros of `C₁` and `C₂` closer than the coincidence tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoincidentZero {
    pub zero_c1: f64,
    pub zero_c2: f64,
}

impl CoincidentZero {
    pub fn alpha(&self) -> f64 {
        0.5 * (self.zero_c1 + self.zero_c2)
    }
}

fn component(fit: &FitResult, which: usize) -> f64 {
    if which == 0 {
        fit.c1
    } else {
        fit.c2
    }
}

/// Coincident zeros of `C₁`, `C₂` for one start kind, in increasing order.
///
/// Every sign change of either constant on the scan is refined. If the other
/// constant has collapsed at that zero, its own zero is bracketed locally and
/// refined too; the pair is kept when both zeros agree to `coincidence`.
/// This catches eigenvalues where one constant has a second zero in the same
/// scan cell and so shows no sign change there.
pub fn coincident_zeros(dim: u32, kind: StartKind, alpha_grid: &[f64], search: &EigenSearch) -> Result<Vec<CoincidentZero>> {
    let table = scan_alpha(dim, kind, alpha_grid, &search.shot)?;
    coincident_zeros_from_table(dim, kind, &table, search)
}

/// [`coincident_zeros`] on an existing scan table.
pub fn coincident_zeros_from_table(dim: u32, kind: StartKind, table: &[ScanRow], search: &EigenSearch) -> Result<Vec<CoincidentZero>> {
    let eval = |alpha: f64, which: usize| shoot_and_fit(dim, kind, alpha, &search.shot).map(|f| component(&f, which));
    let mut found: Vec<CoincidentZero> = Vec::new();
    for w in table.windows(2) {
        let (Some(a), Some(b)) = (w[0].fit, w[1].fit) else { continue };
        for which in 0..2 {
            let (fa, fb) = (component(&a, which), component(&b, which));
            if fa.signum() == fb.signum() && fa != 0.0 && fb != 0.0 {
                continue;
            }
            let zi = roots::illinois_from(|x| eval(x, which), w[0].alpha, fa, w[1].alpha, fb, search.x_tol, 200)?.x;
            if found.iter().any(|c| (c.alpha() - zi).abs() <= 10.0 * search.coincidence) {
                continue;
            }
            let other = 1 - which;
            let scale = component(&a, other).abs().max(component(&b, other).abs());
            let at_zero = eval(zi, other)?;
            if at_zero.abs() > search.collapse_ratio * scale {
                continue;
            }
            let Some(zj) = partner_zero(|x| eval(x, other), zi, at_zero, search)? else { continue };
            if (zi - zj).abs() <= search.coincidence {
                let (zero_c1, zero_c2) = if which == 0 { (zi, zj) } else { (zj, zi) };
                found.push(CoincidentZero { zero_c1, zero_c2 });
            }
        }
    }
    found.sort_by(|x, y| x.alpha().total_cmp(&y.alpha()));
    Ok(found)
}

/// Zero of `g` near `z`, bracketed by growing a symmetric interval.
fn partner_zero<G>(mut g: G, z: f64, gz: f64, search: &EigenSearch) -> Result<Option<f64>>
where
    G: FnMut(f64) -> Result<f64>,
{
    if gz == 0.0 {
        return Ok(Some(z));
    }
    let mut h = search.x_tol.max(1e-12);
    while h <= 10.0 * search.coincidence {
        let gl = g(z - h)?;
        let gr = g(z + h)?;
        if gl.signum() != gz.signum() {
            return Ok(Some(roots::illinois_from(&mut g, z - h, gl, z, gz, search.x_tol, 200)?.x));
        }
        if gr.signum() != gz.signum() {
            return Ok(Some(roots::illinois_from(&mut g, z, gz, z + h, gr, search.x_tol, 200)?.x));
        }
        h *= 8.0;
    }
    Ok(None)
}

/// First `k_max` linear eigenvalues in dimension `dim`.
///
/// Odd `k` are searched with the `sh2` start and even `k` with `sh1`. Both
/// kinds are scanned on `(0, (k_max + 1)/2]` and the coincident zeros of each
/// kind are numbered in increasing order.
pub fn find_linear_eigenvalues(dim: u32, k_max: u32, search: &EigenSearch) -> Result<Vec<LinearEigenvalue>> {
    find_linear_eigenvalues_with(dim, k_max, search, StartKind::for_branch)
}

/// [`find_linear_eigenvalues`] with an explicit branch-to-kind assignment.
pub fn find_linear_eigenvalues_with<K>(dim: u32, k_max: u32, search: &EigenSearch, kind_of: K) -> Result<Vec<LinearEigenvalue>>
where
    K: Fn(u32) -> StartKind,
{
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1"));
    }
    let grid = alpha_grid(search.offset, search.step, 0.5 * (k_max + 1) as f64);
    let mut per_kind: Vec<(StartKind, Vec<CoincidentZero>)> = Vec::new();
    let mut out = Vec::new();
    for k in 1..=k_max {
        let kind = kind_of(k);
        if !per_kind.iter().any(|(kd, _)| *kd == kind) {
            per_kind.push((kind, coincident_zeros(dim, kind, &grid, search)?));
        }
        let ordinal = (1..k).filter(|&j| kind_of(j) == kind).count();
        let zeros = &per_kind.iter().find(|(kd, _)| *kd == kind).unwrap().1;
        let zero = *zeros.get(ordinal).ok_or(Error::NoCoincidentZero { k })?;
        let alpha = zero.alpha();
        let fit = shoot_and_fit(dim, kind, alpha, &search.shot)?;
        out.push(LinearEigenvalue {
            k,
            alpha,
            kind,
            zero_c1: zero.zero_c1,
            zero_c2: zero.zero_c2,
            abs_c1: fit.c1.abs(),
            abs_c2: fit.c2.abs(),
        });
    }
    Ok(out)
}

/// Dense coefficients (index = power of `y`) of the polynomial eigenfunction
/// for `α = k/2`.
///
/// `k ≤ 4` use the closed forms; larger `k` run the origin recurrence until it
/// terminates at power `2k`.
pub fn eigenfunction_oracle(k: u32, dim: u32) -> Result<Vec<f64>> {
    if k == 0 || dim == 0 {
        return Err(Error::InvalidParameter("k and N must be positive"));
    }
    let nd = dim as f64;
    let mut c = alloc::vec![0.0; 2 * k as usize + 1];
    match k {
        1 => c[2] = 0.5,
        2 => {
            c[0] = 1.0;
            c[4] = 1.0 / (8.0 * nd * (nd + 2.0));
        }
        3 => {
            c[2] = 0.5;
            c[6] = 1.0 / (48.0 * (nd + 2.0) * (nd + 4.0));
        }
        4 => {
            c[0] = 1.0;
            c[4] = 1.0 / (4.0 * nd * (nd + 2.0));
            c[8] = 1.0 / (192.0 * nd * (nd + 2.0) * (nd + 4.0) * (nd + 6.0));
        }
        _ => {
            let (c0, c2) = match StartKind::for_branch(k) {
                StartKind::Sh1 => (1.0, 0.0),
                StartKind::Sh2 => (0.0, 0.5),
            };
            let even = radial::series_recurrence(0.5 * k as f64, 0.25, 1.0, dim, c0, c2, k as usize + 2);
            for (i, v) in even.into_iter().enumerate().take(k as usize + 1) {
                c[2 * i] = v;
            }
        }
    }
    Ok(c)
}

/// Evaluates a dense polynomial.
pub fn eval_poly(coeffs: &[f64], y: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * y + c)
}

/// Solution of the 2–2 shooting problem at `n = 0`: `α` and the mixing
/// `ν` with `C(α, ν) = C^{sh1}(α) + ν C^{sh2}(α) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoTwoSolution {
    pub alpha: f64,
    pub nu: f64,
    pub c1: f64,
    pub c2: f64,
    pub iterations: usize,
}

/// Newton iteration on `(α, ν)` for the combined start `sh1 + ν·sh2`.
///
/// Because the equation is linear the far-field constants of the combined
/// shot are `C^{sh1} + ν C^{sh2}`, so each iterate costs two shots per `α`
/// plus two for the finite-difference `α` derivative. Converges only to
/// eigenvalues with `f(0) ≠ 0`; pure `sh2` eigenfunctions correspond to `ν = ∞`.
pub fn two_two_shoot(dim: u32, alpha0: f64, nu0: f64, opts: &LinearOptions, tol: f64, max_iter: usize) -> Result<TwoTwoSolution> {
    let eval = |alpha: f64| -> Result<([f64; 2], [f64; 2])> {
        let a = shoot_and_fit(dim, StartKind::Sh1, alpha, opts)?;
        let b = shoot_and_fit(dim, StartKind::Sh2, alpha, opts)?;
        Ok(([a.c1, a.c2], [b.c1, b.c2]))
    };
    let (mut alpha, mut nu) = (alpha0, nu0);
    for it in 1..=max_iter {
        let (p, q) = eval(alpha)?;
        let r = [p[0] + nu * q[0], p[1] + nu * q[1]];
        let h = 1e-6 * alpha.max(1.0);
        let (pp, qp) = eval(alpha + h)?;
        let (pm, qm) = eval(alpha - h)?;
        let da = [(pp[0] + nu * qp[0] - pm[0] - nu * qm[0]) / (2.0 * h), (pp[1] + nu * qp[1] - pm[1] - nu * qm[1]) / (2.0 * h)];
        // Jacobian columns: ∂/∂α = da, ∂/∂ν = q.
        let det = da[0] * q[1] - da[1] * q[0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::IllConditioned { condition: f64::INFINITY });
        }
        let dalpha = (r[0] * q[1] - r[1] * q[0]) / det;
        let dnu = (da[0] * r[1] - da[1] * r[0]) / det;
        alpha -= dalpha;
        nu -= dnu;
        if !(alpha > 0.0) {
            return Err(Error::NoConvergence { iterations: it });
        }
        if dalpha.abs() <= tol && dnu.abs() <= tol * nu.abs().max(1.0) {
            let (p, q) = eval(alpha)?;
            return Ok(TwoTwoSolution { alpha, nu, c1: p[0] + nu * q[0], c2: p[1] + nu * q[1], iterations: it });
        }
    }
    Err(Error::NoConvergence { iterations: max_iter })
}
