//! Small-`n` matched asymptotics of maximal solutions.
//!
//! In the inner region `1 ≪ y ≪ n^{−3/4}` the profile follows the linear
//! bundle `f₀ ~ k y^{−(2/3)(N+2α)} e^{a y^{4/3}}`. Where `ln |f₀| = O(1/n)` an
//! outer expansion `f ~ e^{b(Y)/n} B(Y)` takes over, with
//! `b(Y) = a (3/c₀) ln(1 + (c₀/3) Y^{4/3})`.
//!
//! The outer coordinate is `Y = n^{3/4} y` by default, which is the scaling
//! under which `ln |f₀| = O(1/n)` at `Y = O(1)`. [`YConvention::AsPrinted`]
//! uses `Y = n^{−3/4} y` instead.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linear::{char_roots, envelope_power, GROWTH_EXPONENT};
use crate::params::Sign;

/// Inner representation `y^{−(2/3)(N+2α)} (k₁e^{a₁y^{4/3}} + k₂e^{a₂y^{4/3}})`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WkbjInner {
    pub a1: Complex64,
    pub a2: Complex64,
    pub k1: Complex64,
    pub k2: Complex64,
    pub dim: u32,
    pub alpha: f64,
}

impl WkbjInner {
    /// Growing conjugate pair of the focusing cubic with arbitrary constants.
    pub fn new(dim: u32, alpha: f64, k1: Complex64, k2: Complex64) -> Self {
        let r = char_roots(Sign::Focusing);
        Self { a1: r.a1, a2: r.a2, k1, k2, dim, alpha }
    }

    /// `k₂ = conj(k₁)`, so the sum is real.
    pub fn realified(dim: u32, alpha: f64, k1: Complex64) -> Self {
        Self::new(dim, alpha, k1, k1.conj())
    }

    /// Constants matching the far-field model with `(C₁, C₂)`:
    /// `k₁ = (C₁ − iC₂)/2`.
    pub fn from_far_field(dim: u32, alpha: f64, c1: f64, c2: f64) -> Self {
        Self::realified(dim, alpha, Complex64::new(0.5 * c1, -0.5 * c2))
    }
}

/// `e^{log_scale} · value`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaledComplex {
    pub log_scale: f64,
    pub value: Complex64,
}

impl ScaledComplex {
    pub fn to_complex(&self) -> Complex64 {
        self.value * self.log_scale.exp()
    }

    /// `ln |·|`, finite even when [`Self::to_complex`] overflows.
    pub fn ln_abs(&self) -> f64 {
        self.log_scale + self.value.norm().ln()
    }
}

/// Evaluates the inner representation; the common growth `e^{Re(a₁)y^{4/3}}`
/// and the algebraic prefactor are kept in the log scale.
pub fn inner_eval(inner: &WkbjInner, y: f64) -> Result<ScaledComplex> {
    if !(y > 0.0) {
        return Err(Error::InvalidParameter("inner evaluation needs y > 0"));
    }
    let z = y.powf(GROWTH_EXPONENT);
    let lead = inner.a1.re;
    let term = |k: Complex64, a: Complex64| k * ((a - lead) * z).exp();
    Ok(ScaledComplex {
        log_scale: lead * z - envelope_power(inner.dim, inner.alpha) * y.ln(),
        value: term(inner.k1, inner.a1) + term(inner.k2, inner.a2),
    })
}

/// Residuals of the inner eikonal and transport equations with
/// `φ = a y^{4/3}` and `A = y^{exponent}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AmplitudeCheck {
    /// `(φ')³ + y/4`, consistent with the characteristic cubic.
    pub eikonal: Complex64,
    /// `(φ')³ − y/4` with the sign as printed.
    pub eikonal_printed: Complex64,
    /// `3yA' + 2(N + 2α − 1 − 12(φ')²φ'')A`, divided by `A`.
    pub transport: Complex64,
}

pub fn amplitude_check(a: Complex64, dim: u32, alpha: f64, exponent: f64, y: f64) -> AmplitudeCheck {
    let t = y.cbrt();
    let d1 = a * (4.0 / 3.0) * t;
    let d2 = a * (4.0 / 9.0) / (t * t);
    let cube = d1 * d1 * d1;
    let nn = dim as f64;
    AmplitudeCheck {
        eikonal: cube + 0.25 * y,
        eikonal_printed: cube - 0.25 * y,
        transport: 3.0 * exponent + 2.0 * (nn + 2.0 * alpha - 1.0 - 12.0 * d1 * d1 * d2),
    }
}

/// [`amplitude_check`] with the exponent `−(2/3)(N+2α)` at `y = 1`; the
/// transport residual does not depend on `y`.
pub fn wkbj_amplitude_ode_check(a: Complex64, dim: u32, alpha: f64) -> AmplitudeCheck {
    amplitude_check(a, dim, alpha, -envelope_power(dim, alpha), 1.0)
}

/// How the outer coordinate relates to `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum YConvention {
    /// `Y = n^{3/4} y`.
    #[default]
    Consistent,
    /// `Y = n^{−3/4} y`.
    AsPrinted,
}

impl YConvention {
    pub fn outer_coordinate(self, n: f64, y: f64) -> f64 {
        match self {
            Self::Consistent => n.powf(0.75) * y,
            Self::AsPrinted => n.powf(-0.75) * y,
        }
    }
}

/// `b(Y) = a (3/c₀) ln(1 + (c₀/3) Y^{4/3})`.
pub fn outer_b(big_y: f64, a: Complex64, c0: f64) -> Complex64 {
    a * (3.0 / c0) * (c0 / 3.0 * big_y.powf(GROWTH_EXPONENT)).ln_1p()
}

/// `b'(Y) = (4a/3) Y^{1/3} / (1 + (c₀/3) Y^{4/3})`.
pub fn outer_b_prime(big_y: f64, a: Complex64, c0: f64) -> Complex64 {
    a * (4.0 / 3.0) * big_y.cbrt() / (1.0 + c0 / 3.0 * big_y.powf(GROWTH_EXPONENT))
}

/// `|e^b| (b')³ + Y/4`.
pub fn eikonal_residual(big_y: f64, a: Complex64, c0: f64) -> Complex64 {
    let bp = outer_b_prime(big_y, a, c0);
    outer_b(big_y, a, c0).re.exp() * bp * bp * bp + 0.25 * big_y
}

/// `ln |B|` of the outer amplitude,
/// `(|k| − (2/3)(N+2α) ln Y − (c₀/12)(2N+3α−4) Y^{4/3}) / (1 + (c₀/3) Y^{4/3})`.
pub fn outer_amplitude(big_y: f64, dim: u32, alpha: f64, k_const: f64, c0: f64) -> f64 {
    let z = big_y.powf(GROWTH_EXPONENT);
    let q = 2.0 * dim as f64 + 3.0 * alpha - 4.0;
    (k_const - envelope_power(dim, alpha) * big_y.ln() - c0 / 12.0 * q * z) / (1.0 + c0 / 3.0 * z)
}

/// Real part of the outer transport equation
/// `3B'/B + (1 − α/4 + ln|B|) b' + 6b''/b' + 2(N − 1 + 2α)/Y` for
/// [`outer_amplitude`], with `Re(a) = c₀`.
pub fn outer_transport_residual(big_y: f64, dim: u32, alpha: f64, k_const: f64, c0: f64) -> f64 {
    let z = big_y.powf(GROWTH_EXPONENT);
    let x = c0 / 3.0 * z;
    let dx = 4.0 * c0 / 9.0 * big_y.cbrt();
    let p = envelope_power(dim, alpha);
    let q = 2.0 * dim as f64 + 3.0 * alpha - 4.0;
    let g = k_const - p * big_y.ln() - c0 / 12.0 * q * z;
    let dg = -p / big_y - c0 / 9.0 * q * big_y.cbrt();
    let l = g / (1.0 + x);
    let dl = dg / (1.0 + x) - g * dx / ((1.0 + x) * (1.0 + x));
    let re_bp = 3.0 * dx / (1.0 + x);
    let log_deriv_bp = 1.0 / (3.0 * big_y) - dx / (1.0 + x);
    3.0 * dl + (1.0 - 0.25 * alpha + l) * re_bp + 6.0 * log_deriv_bp + 2.0 * (dim as f64 - 1.0 + 2.0 * alpha) / big_y
}

/// Which root of the cubic a matching run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum MatchRoot {
    /// The growing complex root `a₁`.
    #[default]
    Growing,
    /// The real root `a₃`.
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchOptions {
    /// Inner amplitude constant of the single matched mode.
    pub k1: Complex64,
    pub convention: YConvention,
    pub root: MatchRoot,
    /// Overlap band `y ∈ [lo, hi] · n^{−1/4}`.
    pub band: (f64, f64),
    pub samples: usize,
}

impl Default for MatchOptions {
    fn default() -> Self {
        Self { k1: Complex64::new(1.0, 0.0), convention: YConvention::Consistent, root: MatchRoot::Growing, band: (0.5, 2.0), samples: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchPoint {
    pub y: f64,
    pub big_y: f64,
    pub ln_inner: f64,
    pub ln_outer: f64,
    pub phase_inner: f64,
    pub phase_outer: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchReport {
    pub n: f64,
    pub dim: u32,
    pub alpha: f64,
    pub convention: YConvention,
    /// `k` constant of the outer amplitude implied by `k₁`.
    pub k_const: f64,
    pub points: Vec<MatchPoint>,
    /// Largest `|ln|f_in| − ln|f_out||` over the band.
    pub max_log_mismatch: f64,
    /// `max_log_mismatch / max |ln|f_in||`.
    pub relative_mismatch: f64,
    pub max_phase_mismatch: f64,
}

/// Compares one inner mode `k₁ y^{−p} e^{a y^{4/3}}` with its outer
/// continuation `e^{b(Y)/n} B(Y)` over the overlap band.
pub fn match_inner_outer(n: f64, dim: u32, alpha: f64, opts: &MatchOptions) -> Result<MatchReport> {
    if !(n > 0.0 && n <= 0.05) {
        return Err(Error::InvalidParameter("matching is defined for 0 < n <= 0.05"));
    }
    if dim == 0 || !(alpha > 0.0) {
        return Err(Error::InvalidParameter("need N >= 1 and alpha > 0"));
    }
    let (lo, hi) = opts.band;
    if !(lo > 0.0 && hi > lo) || opts.samples < 2 {
        return Err(Error::InvalidParameter("overlap band must satisfy 0 < lo < hi with at least two samples"));
    }
    let r = char_roots(Sign::Focusing);
    let a = match opts.root {
        MatchRoot::Growing => r.a1,
        MatchRoot::Real => Complex64::new(r.a3, 0.0),
    };
    let p = envelope_power(dim, alpha);
    let y_ref = n.powf(-0.25);
    let k_const = opts.k1.norm().ln() + p * opts.convention.outer_coordinate(n, 1.0).ln();
    let mut points = Vec::with_capacity(opts.samples);
    for i in 0..opts.samples {
        let y = y_ref * (lo + (hi - lo) * i as f64 / (opts.samples - 1) as f64);
        let big_y = opts.convention.outer_coordinate(n, y);
        let z = y.powf(GROWTH_EXPONENT);
        let b = outer_b(big_y, a, r.c0) / n;
        points.push(MatchPoint {
            y,
            big_y,
            ln_inner: opts.k1.norm().ln() - p * y.ln() + a.re * z,
            ln_outer: b.re + outer_amplitude(big_y, dim, alpha, k_const, r.c0),
            phase_inner: opts.k1.arg() + a.im * z,
            phase_outer: opts.k1.arg() + b.im,
        });
    }
    let max_log_mismatch = points.iter().map(|q| (q.ln_inner - q.ln_outer).abs()).fold(0.0, f64::max);
    let scale = points.iter().map(|q| q.ln_inner.abs()).fold(0.0, f64::max);
    let max_phase_mismatch = points.iter().map(|q| (q.phase_inner - q.phase_outer).abs()).fold(0.0, f64::max);
    Ok(MatchReport {
        n,
        dim,
        alpha,
        convention: opts.convention,
        k_const,
        points,
        max_log_mismatch,
        relative_mismatch: if scale > 0.0 { max_log_mismatch / scale } else { max_log_mismatch },
        max_phase_mismatch,
    })
}
