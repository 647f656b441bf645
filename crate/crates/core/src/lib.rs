//! Limit theory and simulation kernels for critical Galton-Watson processes
//! with heavy-tailed offspring.
//!
//! The crate covers four layers:
//!
//! * [`law`] — critical offspring distributions `f(s) = s + c (1-s)^{1+alpha}`
//!   (plus the exact geometric and unit reference laws) with exact pmf, tail
//!   and sampling support;
//! * [`gf`] — iteration of the offspring generating function at zero in the
//!   survival variable `u_n = 1 - f_n(0)`, survival probabilities, the
//!   small-deviation normalizer and the index finder for power comparisons;
//! * [`limits`] / [`laplace`] / [`regime`] — every closed-form limit object:
//!   the Yaglom law and its convolution powers by dual-backend Laplace
//!   inversion, the five conditional observation-regime transforms, the
//!   reduced-process and ancestor laws and the small-deviation asymptotics;
//! * [`sim`] — per-trial Monte Carlo kernels (population trajectories and
//!   genealogies) driven by reproducible per-trial random streams.
//!
//! The crate is `no_std` (with `alloc`); everything involving files, threads
//! and command-line plumbing lives in the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod accum;
pub mod combin;
pub mod gf;
pub mod laplace;
pub mod law;
pub mod limits;
pub mod regime;
pub mod rng;
pub mod sampler;
pub mod sim;
pub mod special;

mod dd;
mod fx;

pub use gf::ExtinctionTable;
pub use law::OffspringLaw;
pub use limits::YaglomLaw;
pub use regime::{RegimeId, RegimeSpec};
pub use sampler::LawSampler;
pub use sim::{EventSpec, McEstimate, ReducedCounts, Trajectory};
