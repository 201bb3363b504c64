//! Oscillatory component of maximal solutions.
//!
//! For `n > 0` a maximal profile is written `f(y) = y^μ φ(s)` with `s = ln y`
//! and `μ = 4/n`. [`phi_rhs`] is the fourth-order equation for `φ` in
//! derivative form. It is singular where `φ = 0`, so orbits are integrated in
//! an equivalent flux form in the rescaled variables
//! `φ = μ^{−3/n} φ̂(ŝ)`, `s = ŝ/μ`, with the mobility `|φ̂|^n` floored.
//! With the coefficients sent to their `μ → ∞` limits the flux system
//! reduces to the small-`n` equation of [`phihat_rhs`] plus the `O(n)` term
//! `n(φ̂'/φ̂)(D+1)³φ̂` from differentiating the mobility.

use alloc::vec::Vec;
use core::cell::Cell;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linear::char_roots;
use crate::ode::{self, Action, StepControl};
use crate::params::{minimal_growth_exponent, similarity_beta, Sign};
use crate::radial::RadialState;

/// Exponents of the oscillatory ansatz.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OscParams {
    pub n: f64,
    pub dim: u32,
    pub alpha: f64,
    /// `4/n`.
    pub mu: f64,
    pub beta: f64,
}

impl OscParams {
    pub fn new(n: f64, dim: u32, alpha: f64) -> Result<Self> {
        if !(n > 0.0 && n < 2.0) {
            return Err(Error::InvalidParameter("oscillatory ansatz needs 0 < n < 2"));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension N must be at least 1"));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be positive"));
        }
        Ok(Self { n, dim, alpha, mu: 4.0 / n, beta: similarity_beta(n, alpha) })
    }

    /// `ln μ^{−3/n}`, the log of the amplitude factor between `φ` and `φ̂`.
    pub fn log_amplitude(&self) -> f64 {
        -(3.0 / self.n) * self.mu.ln()
    }

    /// Minimal-growth exponent of the same `(n, α)`, which lies below `μ`.
    pub fn minimal_exponent(&self) -> f64 {
        minimal_growth_exponent(self.n, self.alpha)
    }
}

/// `φ` and its first three `s`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OscState {
    pub s: f64,
    pub phi: f64,
    pub dphi: f64,
    pub d2phi: f64,
    pub d3phi: f64,
}

impl OscState {
    pub fn is_finite(&self) -> bool {
        [self.s, self.phi, self.dphi, self.d2phi, self.d3phi].iter().all(|v| v.is_finite())
    }
}

/// Returns `(φ̇, φ̈, φ⃛, φ⁗)` from the fourth-order `φ` equation.
///
/// `|φ| <= floor` is reported as [`Error::PhiZero`], since the `φ̇/φ` and
/// `|φ|^{−n}` terms are singular there.
pub fn phi_rhs(p: &OscParams, st: &OscState, floor: f64) -> Result<[f64; 4]> {
    let OscState { phi, dphi: d1, d2phi: d2, d3phi: d3, .. } = *st;
    if !(phi.abs() > floor) {
        return Err(Error::PhiZero { s: st.s });
    }
    let (n, mu, a) = (p.n, p.mu, p.alpha);
    let nn = p.dim as f64;
    let c3 = 2.0 * (nn - 4.0 + 2.0 * mu);
    let c2 = 6.0 * mu * mu + 6.0 * (nn - 4.0) * mu + 11.0 + (nn - 1.0) * (nn - 9.0);
    let c1 = 2.0 * (2.0 * mu + nn - 4.0) * (mu * mu + (nn - 4.0) * mu + 2.0 - nn);
    let c0 = mu * (mu - 2.0) * (mu * mu + 2.0 * (nn - 3.0) * mu + 3.0 + (nn - 1.0) * (nn - 5.0));
    let bracket = d3
        + (nn - 4.0 + 3.0 * mu) * d2
        + (3.0 * mu * mu + 2.0 * (nn - 4.0) * mu + 4.0 - 2.0 * nn) * d1
        + mu * (mu - 2.0) * (nn - 2.0 + mu) * phi;
    let nonlinear = n * (d1 / phi + mu) * bracket;
    let forcing = (0.25 * (1.0 + n * a) * (d1 + mu * phi) - a * phi) * phi.abs().powf(-n);
    let d4 = -(c3 * d3 + c2 * d2 + c1 * d1 + c0 * phi + nonlinear + forcing);
    Ok([d1, d2, d3, d4])
}

/// Sign-preserving display transform: `ln φ + 1` above 1, identity on
/// `[−1, 1]`, `−ln(−φ) − 1` below −1.
pub fn transform_phi(phi: f64) -> f64 {
    if phi > 1.0 {
        phi.ln() + 1.0
    } else if phi < -1.0 {
        -(-phi).ln() - 1.0
    } else {
        phi
    }
}

/// A value stored as `sign · e^{ln_abs}`, for amplitudes beyond `f64` range.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogValue {
    pub sign: f64,
    pub ln_abs: f64,
}

impl LogValue {
    pub fn from_value(v: f64) -> Self {
        Self { sign: if v < 0.0 { -1.0 } else { 1.0 }, ln_abs: v.abs().ln() }
    }

    /// May overflow to `±∞` or underflow to `±0`.
    pub fn value(&self) -> f64 {
        self.sign * self.ln_abs.exp()
    }

    /// [`transform_phi`] of the represented value, without forming it.
    pub fn transformed(&self) -> f64 {
        if self.ln_abs > 0.0 {
            self.sign * (self.ln_abs + 1.0)
        } else {
            self.value()
        }
    }
}

/// A point of `φ̂(ŝ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HatPoint {
    pub s_hat: f64,
    pub phi_hat: LogValue,
}

/// Applies `φ = μ^{−3/n} φ̂(ŝ)`, `s = ŝ/μ` to `(s, φ)` pairs; amplitudes are
/// handled in log space.
pub fn rescale_small_n(series: &[(f64, f64)], mu: f64) -> Result<Vec<HatPoint>> {
    let log_factor = hat_log_factor(mu)?;
    Ok(series
        .iter()
        .map(|&(s, phi)| {
            let v = LogValue::from_value(phi);
            HatPoint { s_hat: mu * s, phi_hat: LogValue { sign: v.sign, ln_abs: v.ln_abs + log_factor } }
        })
        .collect())
}

/// Inverse of [`rescale_small_n`].
pub fn unscale_small_n(series: &[HatPoint], mu: f64) -> Result<Vec<(f64, f64)>> {
    let log_factor = hat_log_factor(mu)?;
    Ok(series.iter().map(|p| (p.s_hat / mu, LogValue { sign: p.phi_hat.sign, ln_abs: p.phi_hat.ln_abs - log_factor }.value())).collect())
}

/// `ln μ^{3/n}` with `n = 4/μ`.
fn hat_log_factor(mu: f64) -> Result<f64> {
    if !(mu.is_finite() && mu > 2.0) {
        return Err(Error::InvalidParameter("mu = 4/n must be finite and exceed 2"));
    }
    Ok(0.75 * mu * mu.ln())
}

/// Derivatives `(φ̂', φ̂'', φ̂''', φ̂'''')` of the small-`n` equation
/// `φ̂'''' + 4φ̂''' + 6φ̂'' + 4φ̂' + φ̂ + ¼(φ̂' + φ̂)|φ̂|^{−n} = 0`.
pub fn phihat_rhs(n: f64, state: &[f64; 4], floor: f64) -> Result<[f64; 4]> {
    let [phi, d1, d2, d3] = *state;
    let weight = if n == 0.0 {
        1.0
    } else if phi.abs() > floor {
        phi.abs().powf(-n)
    } else {
        return Err(Error::PhiZero { s: f64::NAN });
    };
    let d4 = -(4.0 * d3 + 6.0 * d2 + 4.0 * d1 + phi) - 0.25 * (d1 + phi) * weight;
    Ok([d1, d2, d3, d4])
}

/// Characteristic polynomial `(m+1)((m+1)³ + ¼)` of the `n = 0` hat equation.
pub fn phihat_characteristic(m: num_complex::Complex64) -> num_complex::Complex64 {
    let q = m + 1.0;
    q * (q * q * q + 0.25)
}

/// Exponents `m` of `e^{mŝ}` solving the `n = 0` hat equation: `−1` and
/// `−1 + (4/3)a` for the three characteristic roots `a` of the linear bundle.
pub fn phihat_exponents() -> [num_complex::Complex64; 4] {
    let r = char_roots(Sign::Focusing);
    let shift = |a: num_complex::Complex64| a * (4.0 / 3.0) - 1.0;
    [num_complex::Complex64::new(-1.0, 0.0), shift(r.a1), shift(r.a2), shift(num_complex::Complex64::new(r.a3, 0.0))]
}

/// Envelope exponent `−1 + (4/3)c₀` of the dominant `n = 0` hat mode.
pub fn phihat_envelope_exponent() -> f64 {
    -1.0 + (4.0 / 3.0) * char_roots(Sign::Focusing).c0
}

/// How the two constants of the `ŝ → ∞` hat asymptotics enter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AsymptoticReading {
    /// `Â₁ cos + Â₂ sin`, a two-parameter family.
    #[default]
    CosSin,
    /// Both terms as cosines, as printed; the family collapses to one parameter.
    CosCos,
}

/// `e^{(−1+(4/3)c₀)ŝ}[Â₁ cos((4/3)c₁ŝ) + Â₂ (sin|cos)((4/3)c₁ŝ)]`.
pub fn phihat_asymptotic(s_hat: f64, a1: f64, a2: f64, reading: AsymptoticReading) -> f64 {
    let r = char_roots(Sign::Focusing);
    let w = (4.0 / 3.0) * r.c1 * s_hat;
    let second = match reading {
        AsymptoticReading::CosSin => w.sin(),
        AsymptoticReading::CosCos => w.cos(),
    };
    (phihat_envelope_exponent() * s_hat).exp() * (a1 * w.cos() + a2 * second)
}

/// The small-`n` identifications `ŷ = e^{(3n/16)y^{4/3}}`, `Â = (4/n)^{3/n} C`
/// evaluated at a radius `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmallNMatch {
    /// `ln ŷ`.
    pub ln_y_hat: f64,
    /// `ŝ = (4/n) ln ŷ`.
    pub s_hat: f64,
    /// `(4/3)c₁ŝ`, to be compared with the linear phase `c₁y^{4/3}`.
    pub phase: f64,
    /// `ln` of `ŷ^{4/n}(4/n)^{−3/n}e^{(−1+(4/3)c₀)ŝ}(4/n)^{3/n}`, to be compared
    /// with the linear growth `c₀y^{4/3}`.
    pub log_growth: f64,
}

pub fn small_n_match(n: f64, y: f64) -> Result<SmallNMatch> {
    if !(n > 0.0 && y > 0.0) {
        return Err(Error::InvalidParameter("small-n matching needs n > 0 and y > 0"));
    }
    let mu = 4.0 / n;
    let ln_y_hat = (3.0 * n / 16.0) * y.powf(4.0 / 3.0);
    let s_hat = mu * ln_y_hat;
    let r = char_roots(Sign::Focusing);
    let amp = (3.0 / n) * mu.ln();
    let log_growth = mu * ln_y_hat - amp + phihat_envelope_exponent() * s_hat + amp;
    Ok(SmallNMatch { ln_y_hat, s_hat, phase: (4.0 / 3.0) * r.c1 * s_hat, log_growth })
}

/// Coefficients of the flux-form hat system
///
/// ```text
/// φ̂' = p,  p' = λ − a₁p − a₀φ̂,  λ' = Ψ/m(φ̂) − bλ,  Ψ' = κφ̂ − β(p + φ̂) − cΨ
/// ```
///
/// with `λ = (D+1)(D+1−(2−N)/μ)φ̂` and `Ψ` the scaled flux.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HatSystem {
    pub n: f64,
    pub a1: f64,
    pub a0: f64,
    pub b: f64,
    pub c: f64,
    /// `α/μ`.
    pub kappa: f64,
    pub beta: f64,
}

impl HatSystem {
    /// Exact rescaling of the `φ` equation.
    pub fn exact(p: &OscParams) -> Self {
        let (mu, nn) = (p.mu, p.dim as f64);
        Self {
            n: p.n,
            a1: (2.0 * mu + nn - 2.0) / mu,
            a0: (mu + nn - 2.0) / mu,
            b: (mu - 2.0) / mu,
            c: (nn + mu) / mu,
            kappa: p.alpha / mu,
            beta: p.beta,
        }
    }

    /// Leading coefficients as `μ → ∞`; valid for `n = 0`.
    pub fn small_n_limit(n: f64) -> Self {
        Self { n, a1: 2.0, a0: 1.0, b: 1.0, c: 1.0, kappa: 0.0, beta: 0.25 }
    }

    fn mobility(&self, phi: f64, floor: f64, log_scale: f64) -> f64 {
        if self.n == 0.0 {
            1.0
        } else {
            (self.n * log_scale).exp() * (phi * phi + floor * floor).powf(0.5 * self.n)
        }
    }

    /// Flux-form right-hand side for the state `[φ̂, p, λ, Ψ]`.
    pub fn rhs(&self, y: &[f64; 4], floor: f64) -> Result<[f64; 4]> {
        self.rhs_scaled(y, floor, 0.0)
    }

    /// Right-hand side for a state stored divided by `e^{log_scale}`.
    /// The system is linear apart from the mobility, which picks up
    /// `e^{n·log_scale}`.
    pub fn rhs_scaled(&self, y: &[f64; 4], floor: f64, log_scale: f64) -> Result<[f64; 4]> {
        let [phi, p, lam, psi] = *y;
        let m = self.mobility(phi, floor, log_scale);
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::PhiZero { s: f64::NAN });
        }
        Ok([p, lam - self.a1 * p - self.a0 * phi, psi / m - self.b * lam, self.kappa * phi - self.beta * (p + phi) - self.c * psi])
    }

    /// Flux state from `(φ̂, φ̂', φ̂'', φ̂''')`.
    pub fn flux_state(&self, d: [f64; 4], floor: f64) -> [f64; 4] {
        let [phi, d1, d2, d3] = d;
        let lam = d2 + self.a1 * d1 + self.a0 * phi;
        let dlam = d3 + self.a1 * d2 + self.a0 * d1;
        [phi, d1, lam, self.mobility(phi, floor, 0.0) * (dlam + self.b * lam)]
    }

    /// `(φ̂, φ̂', φ̂'', φ̂''')` from a flux state.
    pub fn derivatives(&self, y: &[f64; 4], floor: f64) -> [f64; 4] {
        self.derivatives_scaled(y, floor, 0.0)
    }

    /// As [`Self::derivatives`] for a state divided by `e^{log_scale}`; the
    /// result carries the same factor.
    pub fn derivatives_scaled(&self, y: &[f64; 4], floor: f64, log_scale: f64) -> [f64; 4] {
        let [phi, p, lam, psi] = *y;
        let d2 = lam - self.a1 * p - self.a0 * phi;
        let dlam = psi / self.mobility(phi, floor, log_scale) - self.b * lam;
        [phi, p, d2, dlam - self.a1 * d2 - self.a0 * p]
    }
}

/// Settings for orbit integration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OscOptions {
    /// Mobility floor on the renormalised `φ̂`, relative to the running scale.
    pub floor: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// The running scale is reset once the largest state entry leaves
    /// `[1/renorm, renorm]`.
    pub renorm: f64,
}

impl Default for OscOptions {
    fn default() -> Self {
        Self { floor: 1e-12, rel_tol: 1e-10, abs_tol: 1e-13, max_steps: 5_000_000, renorm: 1e3 }
    }
}

/// One sample of an orbit; the flux state is `e^{log_scale}·state`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrbitSample {
    pub s_hat: f64,
    pub log_scale: f64,
    pub state: [f64; 4],
}

/// A sampled orbit of the flux-form hat system.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Orbit {
    pub system: HatSystem,
    /// `ln μ^{−3/n}` for exact orbits, `0` for small-`n` limit orbits.
    pub log_amplitude: f64,
    /// `μ` for exact orbits, `1` for limit orbits: `s = ŝ/scale`.
    pub scale: f64,
    pub floor: f64,
    /// Includes the start.
    pub samples: Vec<OrbitSample>,
    /// `ŝ` of every sign change of `φ̂`.
    pub crossings: Vec<f64>,
}

impl Orbit {
    /// Envelope slope of `ln |φ̂|` against `ŝ` from sample `from` on.
    pub fn envelope_exponent(&self, from: usize) -> Result<f64> {
        let pts: Vec<(f64, f64)> =
            (from.min(self.samples.len())..self.samples.len()).map(|i| (self.samples[i].s_hat, self.phi_hat(i).ln_abs)).collect();
        log_envelope_slope(&pts)
    }

    pub fn s(&self, i: usize) -> f64 {
        self.samples[i].s_hat / self.scale
    }

    pub fn phi_hat(&self, i: usize) -> LogValue {
        let v = LogValue::from_value(self.samples[i].state[0]);
        LogValue { sign: v.sign, ln_abs: v.ln_abs + self.samples[i].log_scale }
    }

    /// `φ = μ^{−3/n} φ̂`.
    pub fn phi(&self, i: usize) -> LogValue {
        let v = self.phi_hat(i);
        LogValue { sign: v.sign, ln_abs: v.ln_abs + self.log_amplitude }
    }

    /// `(φ̂, φ̂', φ̂'', φ̂''')` divided by `e^{log_scale}` of sample `i`.
    pub fn hat_derivatives(&self, i: usize) -> [f64; 4] {
        let smp = &self.samples[i];
        self.system.derivatives_scaled(&smp.state, self.floor, smp.log_scale)
    }

    /// `φ` and its `s`-derivatives. Entries under- or overflow when the
    /// orbit scale is extreme.
    pub fn osc_state(&self, i: usize) -> OscState {
        let d = self.hat_derivatives(i);
        let a = (self.log_amplitude + self.samples[i].log_scale).exp();
        let m = self.scale;
        OscState { s: self.s(i), phi: a * d[0], dphi: a * m * d[1], d2phi: a * m * m * d[2], d3phi: a * m * m * m * d[3] }
    }

    /// `φ̂` from index `from` on, scaled by a common factor so the largest
    /// magnitude is one.
    pub fn normalised_phi_hat(&self, from: usize) -> Vec<f64> {
        let idx = from.min(self.samples.len())..self.samples.len();
        let top = idx.clone().map(|i| self.phi_hat(i).ln_abs).fold(f64::NEG_INFINITY, f64::max);
        idx.map(|i| {
            let v = self.phi_hat(i);
            v.sign * (v.ln_abs - top).exp()
        })
        .collect()
    }
}

/// Integrates the flux-form hat system from `start` at `ŝ = s_hat0` to
/// `s_hat_end`, sampling every `ds_hat`. The state is renormalised as it
/// grows or decays so the orbit can settle at any amplitude.
#[allow(clippy::too_many_arguments)]
pub fn integrate_orbit(
    system: HatSystem,
    log_amplitude: f64,
    scale: f64,
    s_hat0: f64,
    start: [f64; 4],
    s_hat_end: f64,
    ds_hat: f64,
    opts: &OscOptions,
) -> Result<Orbit> {
    if !(ds_hat > 0.0 && s_hat_end > s_hat0) {
        return Err(Error::InvalidParameter("need s_hat_end > s_hat0 and a positive sample step"));
    }
    if !(opts.renorm > 1.0) {
        return Err(Error::InvalidParameter("renormalisation bound must exceed 1"));
    }
    let count = ((s_hat_end - s_hat0) / ds_hat).floor() as usize;
    let mut outputs: Vec<f64> = (1..=count).map(|i| s_hat0 + i as f64 * ds_hat).filter(|&x| x < s_hat_end).collect();
    outputs.push(s_hat_end);
    let ctrl = StepControl {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_steps: opts.max_steps,
        h_min: 1e-20 * (s_hat_end - s_hat0),
        ..StepControl::default()
    };
    let top0 = start.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(top0 > 0.0 && top0.is_finite()) {
        return Err(Error::InvalidParameter("orbit start must be finite and nonzero"));
    }
    let log_scale = Cell::new(top0.ln());
    let start_scaled = start.map(|v| v / top0);
    let mut samples = alloc::vec![OrbitSample { s_hat: s_hat0, log_scale: log_scale.get(), state: start_scaled }];
    let mut crossings = Vec::new();
    let (mut last, mut last_x) = (start[0], s_hat0);
    ode::integrate(
        |_, y: &[f64; 4]| system.rhs_scaled(y, opts.floor, log_scale.get()),
        s_hat0,
        start_scaled,
        s_hat_end,
        &outputs,
        &ctrl,
        |ev| {
            let phi = ev.y[0];
            if phi != 0.0 && last != 0.0 && phi.signum() != last.signum() {
                crossings.push(last_x + (ev.x - last_x) * last / (last - phi));
            }
            last = phi;
            last_x = ev.x;
            if ev.output.is_some() {
                samples.push(OrbitSample { s_hat: ev.x, log_scale: log_scale.get(), state: *ev.y });
            }
            let top = ev.y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if top > opts.renorm || top < 1.0 / opts.renorm {
                if !(top > 0.0) {
                    return Err(Error::PhiZero { s: ev.x / scale });
                }
                log_scale.set(log_scale.get() + top.ln());
                for v in ev.y.iter_mut() {
                    *v /= top;
                }
                last = ev.y[0];
                return Ok(Action::Modified);
            }
            Ok(Action::Continue)
        },
    )?;
    Ok(Orbit { system, log_amplitude, scale, floor: opts.floor, samples, crossings })
}

/// Exact orbit of the `φ` equation started from `φ̂ = 1` with vanishing
/// derivatives, over `s ∈ [0, s_end]`.
pub fn phi_orbit(p: &OscParams, s_end: f64, samples_per_unit: usize, opts: &OscOptions) -> Result<Orbit> {
    let sys = HatSystem::exact(p);
    let start = sys.flux_state([1.0, 0.0, 0.0, 0.0], opts.floor);
    let ds_hat = p.mu / samples_per_unit.max(1) as f64;
    integrate_orbit(sys, p.log_amplitude(), p.mu, 0.0, start, p.mu * s_end, ds_hat, opts)
}

/// Orbit of the small-`n` limit system from `φ̂ = 1` over `ŝ ∈ [0, s_hat_end]`.
pub fn phihat_orbit(n: f64, s_hat_end: f64, ds_hat: f64, opts: &OscOptions) -> Result<Orbit> {
    if !(n >= 0.0) {
        return Err(Error::InvalidParameter("n must be non-negative"));
    }
    let sys = HatSystem::small_n_limit(n);
    let start = sys.flux_state([1.0, 0.0, 0.0, 0.0], opts.floor);
    integrate_orbit(sys, 0.0, 1.0, 0.0, start, s_hat_end, ds_hat, opts)
}

/// Least-squares slope of `ln |v|` at the local maxima of `|v|` against the
/// abscissa.
pub fn envelope_exponent(points: &[(f64, f64)]) -> Result<f64> {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, v)| (x, v.abs().ln())).collect();
    log_envelope_slope(&logs)
}

/// As [`envelope_exponent`] with `ln |v|` supplied directly.
pub fn log_envelope_slope(points: &[(f64, f64)]) -> Result<f64> {
    let peaks: Vec<(f64, f64)> =
        points.windows(3).filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1 && w[1].1.is_finite()).map(|w| w[1]).collect();
    if peaks.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, found: peaks.len() });
    }
    let m = peaks.len() as f64;
    let (mx, my) = peaks.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / m, a.1 + p.1 / m));
    let (sxy, sxx) = peaks.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx) * (p.0 - mx)));
    Ok(sxy / sxx)
}

/// Radial state of `f = y^μ φ(ln y)` at sample `i` of an exact orbit, with
/// `y = e^s`. Entries overflow once `μ s` is large.
pub fn to_radial(orbit: &Orbit, i: usize) -> RadialState {
    let smp = &orbit.samples[i];
    let mu = orbit.scale;
    let s = orbit.s(i);
    let y = s.exp();
    let la = orbit.log_amplitude + smp.log_scale;
    let [phi, p, lam, psi] = smp.state;
    let dim_term = orbit.system.c * mu - mu;
    RadialState {
        y,
        f: (mu * s + la).exp() * phi,
        df: ((mu - 1.0) * s + la).exp() * mu * (p + phi),
        lap: ((mu - 2.0) * s + la).exp() * mu * mu * lam,
        flux: ((dim_term + mu) * s + la).exp() * psi,
    }
}

/// Outcome of period detection.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "outcome", rename_all = "lowercase"))]
pub enum Periodicity {
    /// A stable period with the autocorrelation at one period as confidence.
    Periodic { period: f64, confidence: f64 },
    /// No lag repeats the signal; `best` is the largest autocorrelation found.
    Lost { best: f64 },
    /// Too short or degenerate to decide.
    Undetermined,
}

/// Autocorrelation at or above which a lag counts as a period.
pub const PERIODIC_CONFIDENCE: f64 = 0.9;
/// Below this the signal is declared aperiodic.
pub const LOST_CONFIDENCE: f64 = 0.5;
/// Minimum number of periods the series has to cover.
pub const MIN_PERIODS: f64 = 5.0;

/// Estimates the period of a uniformly sampled series from its
/// autocorrelation. The first autocorrelation peak after the first zero
/// crossing is the candidate; it is accepted if the correlation stays high
/// at two and three periods.
pub fn detect_periodicity(series: &[f64], step: f64) -> Periodicity {
    let len = series.len();
    if len < 16 || !(step > 0.0) {
        return Periodicity::Undetermined;
    }
    let mean = series.iter().sum::<f64>() / len as f64;
    let x: Vec<f64> = series.iter().map(|v| v - mean).collect();
    if x.iter().all(|v| *v == 0.0) {
        return Periodicity::Undetermined;
    }
    let max_lag = len / 2;
    let ac = |k: usize| -> f64 {
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for i in 0..len - k {
            sxy += x[i] * x[i + k];
            sxx += x[i] * x[i];
            syy += x[i + k] * x[i + k];
        }
        if sxx == 0.0 || syy == 0.0 {
            0.0
        } else {
            sxy / (sxx * syy).sqrt()
        }
    };
    let r: Vec<f64> = (0..=max_lag).map(ac).collect();
    let Some(first_neg) = (1..=max_lag).find(|&k| r[k] < 0.0) else {
        return Periodicity::Undetermined;
    };
    let peak = (first_neg + 1..max_lag).filter(|&k| r[k] >= r[k - 1] && r[k] >= r[k + 1]).max_by(|&a, &b| {
        // Prefer the first strong peak; later ones are harmonics.
        let score = |k: usize| if r[k] >= PERIODIC_CONFIDENCE { 2.0 - k as f64 / max_lag as f64 } else { r[k] };
        score(a).total_cmp(&score(b))
    });
    let Some(k) = peak else {
        let best = r[first_neg..].iter().copied().fold(f64::MIN, f64::max);
        return if best < LOST_CONFIDENCE { Periodicity::Lost { best } } else { Periodicity::Undetermined };
    };
    // Parabolic refinement of the peak lag.
    let denom = r[k - 1] - 2.0 * r[k] + r[k + 1];
    let shift = if denom != 0.0 { 0.5 * (r[k - 1] - r[k + 1]) / denom } else { 0.0 };
    let period = (k as f64 + shift.clamp(-0.5, 0.5)) * step;
    let confidence = r[k];
    if (len as f64 - 1.0) * step < MIN_PERIODS * period {
        return Periodicity::Undetermined;
    }
    let harmonics = [2.0, 3.0].map(|h| {
        let lag = (h * period / step).round() as usize;
        if lag < len {
            ac(lag)
        } else {
            0.0
        }
    });
    let stable = confidence.min(harmonics[0]).min(harmonics[1]);
    if stable >= PERIODIC_CONFIDENCE {
        Periodicity::Periodic { period, confidence }
    } else if confidence < LOST_CONFIDENCE {
        Periodicity::Lost { best: confidence }
    } else {
        Periodicity::Undetermined
    }
}

/// Classifies the late part of an exact orbit from `φ̂ = 1`, integrated over
/// `ŝ ∈ [0, s_hat_end]` and sampled every `ds_hat`. The second half is tested.
pub fn classify_orbit(p: &OscParams, s_hat_end: f64, ds_hat: f64, opts: &OscOptions) -> Result<Periodicity> {
    let sys = HatSystem::exact(p);
    let start = sys.flux_state([1.0, 0.0, 0.0, 0.0], opts.floor);
    let orbit = integrate_orbit(sys, p.log_amplitude(), p.mu, 0.0, start, s_hat_end, ds_hat, opts)?;
    let tail = orbit.normalised_phi_hat(orbit.samples.len() / 2);
    Ok(detect_periodicity(&tail, ds_hat))
}

/// `(last periodic n, first non-periodic n)` on an increasing scan, or
/// `None` when every point is periodic or the first one is not.
pub fn loss_bracket(scan: &[(f64, Periodicity)]) -> Option<(f64, f64)> {
    let first_bad = scan.iter().position(|(_, p)| !matches!(p, Periodicity::Periodic { .. }))?;
    (first_bad > 0).then(|| (scan[first_bad - 1].0, scan[first_bad].0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn transform_values() {
        assert!((transform_phi(core::f64::consts::E) - 2.0).abs() < 1e-15);
        assert_eq!(transform_phi(0.5), 0.5);
        let e2 = core::f64::consts::E * core::f64::consts::E;
        assert!((transform_phi(-e2) + 3.0).abs() < 1e-15);
        assert_eq!(transform_phi(1.0), 1.0);
        assert_eq!(transform_phi(-1.0), -1.0);
        for v in [-1e300, -3.5, -0.2, 0.7, 42.0, 1e250] {
            assert!((LogValue::from_value(v).transformed() - transform_phi(v)).abs() < 1e-12);
        }
        assert_eq!(LogValue { sign: -1.0, ln_abs: 2000.0 }.transformed(), -2001.0);
    }

    #[test]
    fn rescale_round_trip() {
        let mu = 8.0;
        let series = [(0.1, 1.5), (0.2, -3e-5), (0.7, 2e10)];
        let hat = rescale_small_n(&series, mu).unwrap();
        assert_eq!(hat[0].s_hat, 0.8);
        // n = 0.5: φ̂ = 8⁶ φ.
        assert!((hat[0].phi_hat.value() - 1.5 * 8f64.powi(6)).abs() < 1e-6);
        let back = unscale_small_n(&hat, mu).unwrap();
        for (a, b) in series.iter().zip(&back) {
            assert!((a.0 - b.0).abs() < 1e-15);
            assert!((a.1 - b.1).abs() <= 1e-14 * a.1.abs());
        }
    }

    #[test]
    fn tiny_n_rescale_stays_finite() {
        let hat = rescale_small_n(&[(1.0, 1.0)], 4.0 / 1e-3).unwrap();
        assert!(hat[0].phi_hat.ln_abs.is_finite());
        assert!(hat[0].phi_hat.value().is_infinite());
    }

    #[test]
    fn hat_equation_exponentials() {
        for m in phihat_exponents() {
            assert!(phihat_characteristic(m).norm() < 1e-12, "m = {m}");
            // Check the ODE itself on e^{mŝ} at ŝ = 0: real and imaginary parts separately.
            let lin = m.powu(4) + 4.0 * m.powu(3) + 6.0 * m * m + 4.0 * m + 1.0 + 0.25 * (m + 1.0);
            assert!(lin.norm() < 1e-12);
        }
        let e = phihat_exponents();
        assert_eq!(e[0], Complex64::new(-1.0, 0.0));
        assert!((phihat_envelope_exponent() + 0.6850198).abs() < 1e-6);
        assert!((e[1].re - phihat_envelope_exponent()).abs() < 1e-14);
    }

    #[test]
    fn phihat_rhs_on_exponential() {
        let state = [1.0, -1.0, 1.0, -1.0];
        let d = phihat_rhs(0.0, &state, 1e-12).unwrap();
        assert!((d[3] - 1.0).abs() < 1e-15);
        assert!(phihat_rhs(0.5, &[0.0, 1.0, 0.0, 0.0], 1e-12).is_err());
    }

    #[test]
    fn mu_two_block_vanishes() {
        // At μ = 2 the zeroth-order non-n coefficient carries the factor μ − 2.
        let p = OscParams::new(2.0 - 1e-15, 1, 1.0).unwrap();
        let c0 = p.mu * (p.mu - 2.0);
        assert!(c0.abs() < 1e-13);
    }

    #[test]
    fn constant_state_residual() {
        for (n, dim, alpha, phi) in [(0.3, 1, 0.5, 2.0), (0.7, 3, 1.2, -0.4)] {
            let p = OscParams::new(n, dim, alpha).unwrap();
            let st = OscState { s: 0.0, phi, dphi: 0.0, d2phi: 0.0, d3phi: 0.0 };
            let d4 = phi_rhs(&p, &st, 1e-12).unwrap()[3];
            let mu = p.mu;
            let nn = dim as f64;
            let lin = mu * (mu - 2.0) * (mu * mu + 2.0 * (nn - 3.0) * mu + 3.0 + (nn - 1.0) * (nn - 5.0));
            let nl = n * mu * mu * (mu - 2.0) * (nn - 2.0 + mu);
            let forcing = 0.25 * (1.0 + n * alpha) * mu - alpha;
            let expect = -(lin + nl + forcing * phi.abs().powf(-n)) * phi;
            assert!((d4 - expect).abs() <= 1e-12 * expect.abs());
        }
    }

    #[test]
    fn flux_form_matches_derivative_form() {
        // The flux-form hat system and the transcribed φ equation describe the
        // same dynamics wherever φ ≠ 0.
        let p = OscParams::new(0.6, 2, 0.8).unwrap();
        let sys = HatSystem::exact(&p);
        let d = [0.7, -0.3, 0.45, 1.1];
        let y = sys.flux_state(d, 0.0);
        let back = sys.derivatives(&y, 0.0);
        for i in 0..4 {
            assert!((back[i] - d[i]).abs() < 1e-13);
        }
        // φ̂'''' from the flux form by differentiating the λ relation.
        let dy = sys.rhs(&y, 0.0).unwrap();
        let m = y[0].abs().powf(p.n);
        let dm = p.n * m * d[1] / d[0];
        let dlam = y[3] / m - sys.b * y[2];
        let d2lam = dy[3] / m - y[3] * dm / (m * m) - sys.b * dlam;
        let d4_hat = d2lam - sys.a1 * d[3] - sys.a0 * d[2];
        let a = p.log_amplitude().exp();
        let mu = p.mu;
        let st = OscState { s: 0.0, phi: a * d[0], dphi: a * mu * d[1], d2phi: a * mu * mu * d[2], d3phi: a * mu.powi(3) * d[3] };
        let d4 = phi_rhs(&p, &st, 0.0).unwrap()[3];
        let expect = a * mu.powi(4) * d4_hat;
        assert!((d4 - expect).abs() <= 1e-9 * expect.abs(), "{d4} vs {expect}");
    }

    #[test]
    fn limit_system_is_hat_equation() {
        let sys = HatSystem::small_n_limit(0.3);
        let d = [0.9, 0.2, -0.4, 0.3];
        let y = sys.flux_state(d, 0.0);
        let dy = sys.rhs(&y, 0.0).unwrap();
        let m = d[0].abs().powf(0.3);
        let dm = 0.3 * m * d[1] / d[0];
        let dlam = y[3] / m - y[2];
        let d2lam = dy[3] / m - y[3] * dm / (m * m) - dlam;
        let d4 = d2lam - 2.0 * d[3] - d[2];
        let cube = d[3] + 3.0 * d[2] + 3.0 * d[1] + d[0];
        let direct = phihat_rhs(0.3, &d, 0.0).unwrap()[3] - 0.3 * d[1] / d[0] * cube;
        assert!((d4 - direct).abs() < 1e-12, "{d4} vs {direct}");
    }

    #[test]
    fn periodicity_of_sinusoid() {
        let step = 0.01;
        let series: Vec<f64> = (0..5000).map(|i| (2.0 * core::f64::consts::PI * i as f64 * step / 3.7).sin()).collect();
        match detect_periodicity(&series, step) {
            Periodicity::Periodic { period, confidence } => {
                assert!((period - 3.7).abs() < 0.037, "{period}");
                assert!(confidence > 0.9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn periodicity_edge_cases() {
        assert_eq!(detect_periodicity(&[1.0; 100], 0.1), Periodicity::Undetermined);
        assert_eq!(detect_periodicity(&[1.0, 2.0], 0.1), Periodicity::Undetermined);
        // Two periods only.
        let short: Vec<f64> = (0..200).map(|i| (i as f64 * 0.01 * 2.0 * core::f64::consts::PI).sin()).collect();
        assert_eq!(detect_periodicity(&short, 0.01), Periodicity::Undetermined);
    }

    #[test]
    fn bracket_from_scan() {
        let per = Periodicity::Periodic { period: 1.0, confidence: 0.99 };
        let scan = [(0.1, per), (0.5, per), (0.8, Periodicity::Undetermined), (0.9, Periodicity::Lost { best: 0.1 })];
        assert_eq!(loss_bracket(&scan), Some((0.5, 0.8)));
        assert_eq!(loss_bracket(&scan[..2]), None);
        assert_eq!(loss_bracket(&scan[2..]), None);
    }

    #[test]
    fn cos_sin_reading_spans_two_dimensions() {
        let s = 3.0;
        let a = phihat_asymptotic(s, 1.0, 0.0, AsymptoticReading::CosSin);
        let b = phihat_asymptotic(s, 0.0, 1.0, AsymptoticReading::CosSin);
        assert!((a - b).abs() > 1e-3);
        let c = phihat_asymptotic(s, 1.0, 0.0, AsymptoticReading::CosCos);
        let d = phihat_asymptotic(s, 0.0, 1.0, AsymptoticReading::CosCos);
        assert_eq!(c, d);
    }

    #[test]
    fn small_n_identification() {
        let r = char_roots(Sign::Focusing);
        for y in [2.0, 5.0, 9.0f64] {
            let m = small_n_match(1e-2, y).unwrap();
            let z = y.powf(4.0 / 3.0);
            assert!((m.s_hat - 0.75 * z).abs() < 1e-10 * z);
            assert!((m.phase - r.c1 * z).abs() < 1e-9 * z);
            assert!((m.log_growth - r.c0 * z).abs() < 1e-8 * z.max(1.0));
        }
    }

    #[test]
    fn osc_params_invariant() {
        for n in [0.1, 0.3, 0.7, 1.3] {
            let p = OscParams::new(n, 1, 0.5).unwrap();
            assert!((p.mu * p.n - 4.0).abs() <= 4.0 * f64::EPSILON);
            assert!(p.minimal_exponent() < p.mu);
        }
        assert!(OscParams::new(0.0, 1, 0.5).is_err());
    }

    #[test]
    fn limit_orbit_envelope() {
        let orb = phihat_orbit(0.0, 60.0, 0.01, &OscOptions::default()).unwrap();
        let slope = orb.envelope_exponent(orb.samples.len() / 4).unwrap();
        assert!((slope + 0.6850198).abs() < 1e-3, "{slope}");
    }

    #[test]
    fn small_n_orbit_is_periodic() {
        let p = OscParams::new(0.1, 1, 0.5).unwrap();
        let orb = phi_orbit(&p, 600.0 / p.mu, 800, &OscOptions::default()).unwrap();
        let step = orb.samples[1].s_hat - orb.samples[0].s_hat;
        let tail = orb.normalised_phi_hat(orb.samples.len() / 2);
        assert!(matches!(detect_periodicity(&tail, step), Periodicity::Periodic { .. }));
        assert!(orb.crossings.len() > 100);
    }

    #[test]
    fn orbit_is_autonomous() {
        let p = OscParams::new(0.5, 2, 0.7).unwrap();
        let sys = HatSystem::exact(&p);
        let o = OscOptions::default();
        let start = sys.flux_state([1.0, -0.2, 0.1, 0.0], o.floor);
        let a = integrate_orbit(sys, 0.0, p.mu, 0.0, start, 20.0, 0.5, &o).unwrap();
        let b = integrate_orbit(sys, 0.0, p.mu, 5.0, start, 25.0, 0.5, &o).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        for i in 0..a.samples.len() {
            let (x, y) = (a.phi_hat(i), b.phi_hat(i));
            assert_eq!(x.sign, y.sign);
            assert!((x.ln_abs - y.ln_abs).abs() < 1e-6, "{i}");
        }
    }

    #[test]
    fn radial_reconstruction_solves_radial_equation() {
        use crate::params::SimilarityParams;
        use crate::radial::rhs;
        let p = OscParams::new(0.5, 2, 0.7).unwrap();
        let o = OscOptions { rel_tol: 1e-12, abs_tol: 1e-15, ..OscOptions::default() };
        let orb = phi_orbit(&p, 2.0, 4000, &o).unwrap();
        let rp = SimilarityParams::focusing(0.5, 2, 0.7).unwrap();
        for i in [2000, 5000, 7000] {
            let st = to_radial(&orb, i);
            let at = |j: usize| to_radial(&orb, j).as_array();
            let (m2, m1, p1, p2) = (at(i - 2), at(i - 1), at(i + 1), at(i + 2));
            let h = orb.s(i + 1) - orb.s(i);
            let d = rhs(&rp, &st, 0.0).unwrap();
            // Fourth-order central difference in s, then d/dy = (1/y) d/ds.
            let num: [f64; 4] = core::array::from_fn(|k| (8.0 * (p1[k] - m1[k]) - (p2[k] - m2[k])) / (12.0 * h * st.y));
            for k in 0..4 {
                let scale = st.as_array()[k].abs() * (p.mu + 2.0) / st.y;
                assert!((d[k] - num[k]).abs() <= 1e-8 * d[k].abs().max(scale), "i = {i}, k = {k}: {} vs {}", d[k], num[k]);
            }
        }
    }
}
