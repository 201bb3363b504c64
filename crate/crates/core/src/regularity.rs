//! Regularity of the focusing trace `u(r, T⁻) = C r^{μ_k}` with
//! `μ_k = 4α_k/(1 + nα_k)`.
//!
//! The spatial Hölder exponent cannot exceed `μ_k`. When `μ_k < 1` the
//! gradient lies in `L^p` near the origin exactly for `p ∈ [1, p_*)` with
//! `p_* = N/(1 − μ_k)`. In time `|u(0,t) − u(0,0)| = (−t)^{α} f(0)`, so the
//! first branch bounds the `t`-exponent by `α₁(n) = 1/2 + O(n)`, above the
//! generic `1/8` for this equation.

use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

fn check(n: f64, alpha: f64) -> Result<()> {
    if !(0.0..2.0).contains(&n) {
        return Err(Error::InvalidParameter("n must lie in [0, 2)"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter("alpha must be positive"));
    }
    Ok(())
}

/// `μ_k = 4α/(1 + nα)`.
pub fn holder_exponent_x(n: f64, alpha: f64) -> Result<f64> {
    check(n, alpha)?;
    Ok(4.0 * alpha / (1.0 + n * alpha))
}

/// `p_* = N/(1 − μ)` when `μ < 1`, otherwise `None`.
pub fn gradient_integrability(n: f64, dim: u32, alpha: f64) -> Result<Option<f64>> {
    let mu = holder_exponent_x(n, alpha)?;
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension N must be at least 1"));
    }
    Ok((mu < 1.0).then(|| dim as f64 / (1.0 - mu)))
}

/// First-branch eigenvalue at `n`, linearly interpolated from `(n, α₁)` pairs.
/// `n = 0` gives `1/2` exactly.
pub fn holder_exponent_t(n: f64, branch1: &[(f64, f64)]) -> Result<f64> {
    if n == 0.0 {
        return Ok(0.5);
    }
    crate::linear::check_increasing(&branch1.iter().map(|p| p.0).collect::<Vec<_>>())?;
    // The n = 0 endpoint is known exactly.
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(branch1.len() + 1);
    if branch1.first().is_none_or(|p| p.0 > 0.0) {
        pts.push((0.0, 0.5));
    }
    pts.extend_from_slice(branch1);
    let last = pts.last().expect("non-empty");
    if !(n >= 0.0 && n <= last.0) {
        return Err(Error::InvalidParameter("n lies outside the traced branch"));
    }
    let i = pts.partition_point(|p| p.0 < n);
    if pts[i].0 == n {
        return Ok(pts[i].1);
    }
    let (a, b) = (pts[i - 1], pts[i]);
    Ok(a.1 + (b.1 - a.1) * (n - a.0) / (b.0 - a.0))
}

/// Hölder class `C^{l+ε}` with `l = ⌊μ⌋`, `ε ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HolderLabel {
    pub exponent: f64,
    pub integer: u32,
    pub fraction: f64,
}

/// Exponents within this distance of an integer are treated as that integer.
pub const EXPONENT_TOL: f64 = 1e-9;

impl HolderLabel {
    pub fn new(exponent: f64) -> Self {
        let nearest = exponent.round();
        let integer = if (exponent - nearest).abs() <= EXPONENT_TOL { nearest } else { exponent.floor() }.max(0.0);
        Self { exponent, integer: integer as u32, fraction: (exponent - integer).max(0.0) }
    }
}

impl fmt::Display for HolderLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.integer == 0 {
            write!(f, "C^{{{:.6}}}", self.fraction)
        } else {
            write!(f, "C^{{{}+{:.6}}}", self.integer, self.fraction)
        }
    }
}

/// One branch of a regularity report.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegularityRow {
    pub k: u32,
    pub alpha_k: f64,
    pub mu_k: f64,
    /// `2k − μ_k`; the trace is `C^{2k−ε}`.
    pub epsilon: f64,
    pub holder_label: HolderLabel,
    /// `false` when `ε > EXPONENT_TOL`: the trace is not classical in `C^{2k}`.
    pub classical: bool,
    /// Open threshold: `∇u ∈ L^p` iff `p ∈ [1, p_*)`.
    pub p_star: Option<f64>,
    /// `α_k`, the `t`-Hölder exponent at the origin.
    pub t_exponent_bound: f64,
}

impl RegularityRow {
    pub fn new(n: f64, dim: u32, k: u32, alpha_k: f64) -> Result<Self> {
        let mu_k = holder_exponent_x(n, alpha_k)?;
        let epsilon = 2.0 * k as f64 - mu_k;
        Ok(Self {
            k,
            alpha_k,
            mu_k,
            epsilon,
            holder_label: HolderLabel::new(mu_k),
            classical: epsilon <= EXPONENT_TOL,
            p_star: gradient_integrability(n, dim, alpha_k)?,
            t_exponent_bound: alpha_k,
        })
    }

    /// Short description such as `C^{4−ε}, ε = 0.01: not classical in C^4`.
    pub fn statement(&self) -> RowStatement<'_> {
        RowStatement(self)
    }
}

pub struct RowStatement<'a>(&'a RegularityRow);

impl fmt::Display for RowStatement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        let order = 2 * r.k;
        write!(f, "C^{{{order}-eps}}, eps = {:.6e}", r.epsilon)?;
        if !r.classical {
            write!(f, ": not classical in C^{order}")?;
        }
        match r.p_star {
            Some(p) => write!(f, "; grad u in L^p iff 1 <= p < {p:.6}"),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegularityReport {
    pub n: f64,
    pub dim: u32,
    pub rows: Vec<RegularityRow>,
}

/// The trace constant `C` is arbitrary; only the exponents are reported.
pub const TRACE_CONSTANT_NOTE: &str = "trace u(r,T-) = C r^mu_k with C an arbitrary constant";

/// One row per `(k, α_k)` pair.
pub fn regularity_report(n: f64, dim: u32, branches: &[(u32, f64)]) -> Result<RegularityReport> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension N must be at least 1"));
    }
    let rows = branches.iter().map(|&(k, a)| RegularityRow::new(n, dim, k, a)).collect::<Result<Vec<_>>>()?;
    Ok(RegularityReport { n, dim, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn x_exponent_values() {
        assert_eq!(holder_exponent_x(0.0, 0.5).unwrap(), 2.0);
        assert!((holder_exponent_x(0.5, 0.5).unwrap() - 1.6).abs() < 1e-15);
        // Fixed α = 1/2: ε(n) = 2 − μ = 4α²n + O(n²) = n + O(n²).
        let n = 1e-4;
        let eps = 2.0 - holder_exponent_x(n, 0.5).unwrap();
        assert!((eps / n - 1.0).abs() < 1e-3);
        // Along α₁ = 1/(2 − n) the trace exponent stays exactly 2.
        for n in [0.01, 0.1, 0.4] {
            assert!((holder_exponent_x(n, 1.0 / (2.0 - n)).unwrap() - 2.0).abs() < 1e-14);
        }
        assert!(holder_exponent_x(2.0, 0.5).is_err());
        assert!(holder_exponent_x(0.1, 0.0).is_err());
    }

    #[test]
    fn gradient_threshold() {
        let p = gradient_integrability(1.0, 2, 0.2).unwrap().unwrap();
        assert!((p - 6.0).abs() < 1e-12);
        assert_eq!(gradient_integrability(0.5, 3, 0.5).unwrap(), None);
        // μ < 1 iff α < 1/(4 − n).
        let n = 0.7;
        let edge = 1.0 / (4.0 - n);
        assert!(gradient_integrability(n, 1, edge * 0.999).unwrap().is_some());
        assert!(gradient_integrability(n, 1, edge * 1.001).unwrap().is_none());
    }

    #[test]
    fn linear_report() {
        let rows: Vec<(u32, f64)> = (1..=4).map(|k| (k, 0.5 * k as f64)).collect();
        let r = regularity_report(0.0, 2, &rows).unwrap();
        let mus: Vec<f64> = r.rows.iter().map(|x| x.mu_k).collect();
        assert_eq!(mus, [2.0, 4.0, 6.0, 8.0]);
        assert!(r.rows.iter().all(|x| x.classical && x.p_star.is_none()));
        assert!(regularity_report(0.1, 1, &[]).unwrap().rows.is_empty());
    }

    #[test]
    fn second_branch_not_classical() {
        // Measured second-branch eigenvalue at n = 10⁻³.
        let row = RegularityRow::new(1e-3, 1, 2, 1.0006).unwrap();
        assert!(row.epsilon > 0.0 && !row.classical);
        assert!(row.statement().to_string().contains("not classical in C^4"));
    }

    #[test]
    fn t_exponent_interpolation() {
        assert_eq!(holder_exponent_t(0.0, &[]).unwrap(), 0.5);
        let branch = [(1e-3, 0.5 / (1.0 - 5e-4)), (0.2, 0.5 / 0.9)];
        let v = holder_exponent_t(0.1, &branch).unwrap();
        assert!((v - 0.5263).abs() < 5e-3);
        assert!(holder_exponent_t(0.3, &branch).is_err());
    }

    #[test]
    fn consistency_identity() {
        for (n, a) in [(0.0, 0.5), (0.3, 0.9), (1.5, 2.0)] {
            let mu = holder_exponent_x(n, a).unwrap();
            assert!((mu * (1.0 + n * a) / 4.0 - a).abs() < 1e-15);
        }
    }

    #[test]
    fn labels() {
        assert_eq!(HolderLabel::new(1.6).to_string(), "C^{1+0.600000}");
        assert_eq!(HolderLabel::new(2.0 / 3.0).to_string(), "C^{0.666667}");
        assert_eq!(HolderLabel::new(2.0).integer, 2);
        let near = HolderLabel::new(2.0 - 1e-13);
        assert_eq!((near.integer, near.fraction), (2, 0.0));
        assert!(RegularityRow::new(0.01, 1, 1, 1.0 / 1.99).unwrap().classical);
    }
}
