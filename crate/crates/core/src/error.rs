use core::fmt;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violated its documented precondition.
    InvalidParameter(&'static str),
    /// `y^{N-1} m(f)` underflowed in the flux equation.
    SingularMobility { y: f64 },
    /// The adaptive step size fell below the minimum allowed.
    StepSizeCollapse { x: f64, h: f64 },
    /// Maximum number of integration steps exceeded.
    MaxStepsExceeded { x: f64 },
    /// The state became non-finite or exceeded the overflow guard.
    Overflow { x: f64 },
    /// Sign-change origin start requested for `n > 0` without a mobility floor.
    DegenerateOrigin,
    /// Not enough samples inside a fitting window.
    InsufficientSamples { needed: usize, found: usize },
    /// Least-squares normal equations are too poorly conditioned.
    IllConditioned { condition: f64 },
    /// No sign change was found around the initial guess.
    NoBracket { lo: f64, hi: f64 },
    /// The residual cannot be evaluated because `f` and `f'` both vanish.
    IndeterminateResidual { y: f64 },
    /// The shot trajectory lost its minimal structure (large-`n` oscillatory breakdown).
    OscillatoryLoss { n: f64, alpha: f64 },
    /// The converged residual stayed above the acceptance threshold.
    ResidualNotAchieved { residual: f64, threshold: f64 },
    /// `φ` vanished where the oscillatory equation is singular.
    PhiZero { s: f64 },
    /// The converged `α` depends on the matching radius.
    MatchingRadiusSensitive { alpha: f64, shift: f64 },
    /// No pair of coincident zeros of `C1`, `C2` was found for a requested eigenvalue.
    NoCoincidentZero { k: u32 },
    /// Newton iteration failed to converge.
    NoConvergence { iterations: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Self::SingularMobility { y } => write!(f, "singular mobility at y = {y:e}"),
            Self::StepSizeCollapse { x, h } => {
                write!(f, "step size collapsed to {h:e} at x = {x:e}")
            }
            Self::MaxStepsExceeded { x } => write!(f, "maximum step count exceeded at x = {x:e}"),
            Self::Overflow { x } => write!(f, "state overflow at x = {x:e}"),
            Self::DegenerateOrigin => {
                write!(f, "f(0) = 0 with n > 0 needs a positive mobility floor")
            }
            Self::InsufficientSamples { needed, found } => {
                write!(f, "need at least {needed} samples in window, found {found}")
            }
            Self::IllConditioned { condition } => {
                write!(f, "normal equations ill-conditioned (condition {condition:e})")
            }
            Self::NoBracket { lo, hi } => write!(f, "no sign change found in [{lo}, {hi}]"),
            Self::IndeterminateResidual { y } => write!(f, "indeterminate residual at y = {y}"),
            Self::OscillatoryLoss { n, alpha } => {
                write!(f, "oscillatory breakdown of the shot at n = {n}, alpha = {alpha}")
            }
            Self::ResidualNotAchieved { residual, threshold } => {
                write!(f, "residual {residual:e} above threshold {threshold:e}")
            }
            Self::PhiZero { s } => write!(f, "phi vanished at s = {s}"),
            Self::MatchingRadiusSensitive { alpha, shift } => {
                write!(f, "alpha = {alpha} moves by {shift:e} when the matching radius changes")
            }
            Self::NoCoincidentZero { k } => write!(f, "no coincident zero found for k = {k}"),
            Self::NoConvergence { iterations } => {
                write!(f, "no convergence after {iterations} iterations")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
