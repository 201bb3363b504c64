//! Similarity exponents shared by every module.
//!
//! Profiles are sought in the form `u(r, t) = (∓t)^α f(r / (∓t)^β)` with
//! `β = (1 + αn)/4`; a profile with minimal growth `f ~ C y^μ` leaves the trace
//! `C r^μ` at the focusing time, `μ = α/β`.

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Which side of the focusing time the profile describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Sign {
    /// `t < 0`, blow-up (hole-filling) side.
    Focusing,
    /// `t > 0`, continuation after focusing.
    Defocusing,
}

/// The exponent tuple `(n, N, α, β, μ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimilarityParams {
    /// Mobility exponent, `0 <= n < 2`.
    pub n: f64,
    /// Spatial dimension.
    pub dim: u32,
    pub alpha: f64,
    pub beta: f64,
    /// Minimal-growth exponent `α/β`.
    pub mu: f64,
    pub sign: Sign,
}

impl SimilarityParams {
    /// Validates `(n, N, α)` and derives `β` and `μ`.
    pub fn new(n: f64, dim: u32, alpha: f64, sign: Sign) -> Result<Self> {
        if !(n.is_finite() && (0.0..2.0).contains(&n)) {
            return Err(Error::InvalidParameter("mobility exponent n must lie in [0, 2)"));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension N must be at least 1"));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be positive"));
        }
        Ok(Self { n, dim, alpha, beta: similarity_beta(n, alpha), mu: minimal_growth_exponent(n, alpha), sign })
    }

    /// Shorthand for the focusing case.
    pub fn focusing(n: f64, dim: u32, alpha: f64) -> Result<Self> {
        Self::new(n, dim, alpha, Sign::Focusing)
    }

    /// Same parameters with a different eigenvalue candidate.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.n, self.dim, alpha, self.sign)
    }

    /// Maximal-growth envelope exponent `4/n`; infinite for `n = 0`.
    pub fn maximal_exponent(&self) -> f64 {
        if self.n == 0.0 {
            f64::INFINITY
        } else {
            4.0 / self.n
        }
    }

    /// `N - 1`, the power of the radial weight.
    pub(crate) fn radial_power(&self) -> i32 {
        self.dim as i32 - 1
    }
}

/// `β = (1 + αn)/4`.
pub fn similarity_beta(n: f64, alpha: f64) -> f64 {
    (1.0 + alpha * n) / 4.0
}

/// `μ = 4α/(1 + αn)`.
pub fn minimal_growth_exponent(n: f64, alpha: f64) -> f64 {
    4.0 * alpha / (1.0 + alpha * n)
}

/// Evaluates the similarity solution `u(r, t) = (∓t)^α f(r/(∓t)^β)`.
///
/// `profile` is the similarity profile `f`. The sign of `t` must match the
/// parameter sign: negative for focusing, positive for defocusing.
pub fn reconstruct_solution<F>(params: &SimilarityParams, profile: F, r: f64, t: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let tau = match params.sign {
        Sign::Focusing if t < 0.0 => -t,
        Sign::Defocusing if t > 0.0 => t,
        _ if t == 0.0 => return Err(Error::InvalidParameter("t = 0 has no similarity form; use the trace")),
        _ => return Err(Error::InvalidParameter("sign of t does not match the profile side")),
    };
    let y = r / tau.powf(params.beta);
    Ok(tau.powf(params.alpha) * profile(y))
}

/// Focusing trace `C r^μ` left by a minimal profile as `t → 0⁻`.
pub fn focusing_trace(c: f64, mu: f64, r: f64) -> f64 {
    c * r.powf(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_first_eigenvalue_exponents() {
        let p = SimilarityParams::focusing(0.0, 1, 0.5).unwrap();
        assert_eq!(p.beta, 0.25);
        assert_eq!(p.mu, 2.0);
    }

    #[test]
    fn nonlinear_exponents() {
        let p = SimilarityParams::focusing(0.5, 3, 0.5).unwrap();
        assert!((p.beta - 0.3125).abs() < 1e-15);
        assert!((p.mu - 1.6).abs() < 1e-15);
    }

    #[test]
    fn linear_mu_is_four_alpha() {
        for &a in &[0.1, 0.5, 1.3, 2.75] {
            for dim in 1..4 {
                let p = SimilarityParams::focusing(0.0, dim, a).unwrap();
                assert_eq!(p.mu, 4.0 * a);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SimilarityParams::focusing(2.0, 1, 0.5).is_err());
        assert!(SimilarityParams::focusing(0.1, 1, 0.0).is_err());
        assert!(SimilarityParams::focusing(0.1, 1, -1.0).is_err());
        assert!(SimilarityParams::focusing(0.1, 0, 1.0).is_err());
        assert!(SimilarityParams::focusing(-0.1, 1, 1.0).is_err());
    }

    #[test]
    fn unit_time_returns_profile() {
        let p = SimilarityParams::focusing(0.3, 2, 0.8).unwrap();
        let prof = |y: f64| 1.0 + y * y;
        for &r in &[0.0, 0.5, 2.0] {
            assert_eq!(reconstruct_solution(&p, prof, r, -1.0).unwrap(), prof(r));
        }
        assert!(reconstruct_solution(&p, prof, 1.0, 0.0).is_err());
        assert!(reconstruct_solution(&p, prof, 1.0, 1.0).is_err());
    }

    #[test]
    fn quadratic_profile_is_time_independent() {
        // f1 = y^2/2 at α = 1/2: (−t)^{1/2} (r (−t)^{−1/4})^2 / 2 = r^2/2 for every t.
        let p = SimilarityParams::focusing(0.0, 3, 0.5).unwrap();
        let prof = |y: f64| 0.5 * y * y;
        for &t in &[-1e-6, -0.3, -4.0] {
            let u = reconstruct_solution(&p, prof, 1.7, t).unwrap();
            assert!((u - focusing_trace(0.5, p.mu, 1.7)).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_value() {
        assert_eq!(focusing_trace(3.0, 2.0, 2.0), 12.0);
    }
}
