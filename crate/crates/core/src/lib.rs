//! Numerical core for self-similar focusing solutions of the thin film
//! equation `u_t = −∇·(|u|ⁿ ∇Δu)`.
//!
//! | module          | contents                                               |
//! |-----------------|--------------------------------------------------------|
//! | [`params`]      | similarity exponents, solution reconstruction          |
//! | [`ode`]         | adaptive Dormand–Prince 5(4) integrator                |
//! | [`radial`]      | radial ODE, origin series, shooting trajectories       |
//! | [`linear`]      | `n = 0` far-field fit and eigenvalue search            |
//! | [`nonlinear`]   | branches `α_k(n)` by minimal-growth shooting           |
//! | [`oscillatory`] | log-variable ODE, rescaled small-`n` limit, periodicity |
//! | [`wkbj`]        | inner/outer small-`n` asymptotics and matching         |
//! | [`regularity`]  | Hölder and Sobolev regularity of the focusing trace    |
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod linear;
pub mod nonlinear;
pub mod ode;
pub mod oscillatory;
pub mod params;
pub mod radial;
pub mod regularity;
pub mod roots;
pub mod wkbj;

pub use error::{Error, Result};
pub use params::{Sign, SimilarityParams};
pub use radial::{OriginStart, RadialState, StartKind, Trajectory};
