//! Entanglement entropies of the free massless Dirac-fermion ground state
//! localized to unions of intervals on the real line.
//!
//! The crate pairs every closed-form trace formula with an independent
//! numerical route:
//!
//! - [`closedform`]: cross-ratio trace formulas for separated and
//!   intersecting intervals, Rényi coefficients and separation asymptotics.
//! - [`specops`] and [`traces`]: Nyström discretizations of the band-limited
//!   (sine-kernel) projector and of the exact Fermi projector's block words.
//! - [`widom`]: the Widom coefficient for mollified interval symbols and
//!   its ε → 0 limit.
//! - [`herglotz`]: the Nevanlinna–Herglotz representation of `h_α`.
//!
//! Supporting modules: [`geometry`] (interval algebra), [`testfns`] (test
//! functions and the `U` coefficient), [`quad`] (quadrature rules),
//! [`report`] (CSV/JSON emission) and [`suite`] (the acceptance battery).

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod closedform;
pub mod error;
pub mod geometry;
pub mod herglotz;
pub mod quad;
pub mod report;
pub mod smooth;
pub mod specops;
pub mod suite;
pub mod testfns;
pub mod traces;
pub mod widom;

pub use error::{Error, ErrorClass, Result};
pub use geometry::{Endpoint, Interval, IntervalSet, Mobius, Partition};
pub use quad::{QuadratureRule, Scheme};
pub use specops::{NodeSizing, SpectralSystem, SpectrumResult};
pub use testfns::{RenyiFunction, TestFunction, UCoefficient};
pub use traces::{Averaging, SweepConfig, TraceEstimate};
