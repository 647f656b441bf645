//! Iteration of the offspring pgf at zero, kept in the survival variable.
//!
//! `u_n = 1 - f_n(0)` obeys `u_{n+1} = u_n - (f(1-u_n) - (1-u_n))`, which for
//! the stable family collapses to the single fused update
//! `u_{n+1} = u_n - c u_n^{1+alpha}` and for the geometric law to
//! `u_{n+1} = u_n / (1 + u_n)`. Iterating in `u` avoids the catastrophic
//! cancellation that computing `1 - f_n(0)` directly would hit once
//! `u < 1e-8`; the update errors contract, so plain binary64 holds for every
//! horizon this crate touches (the geometric closed form `u_n = 1/(n+1)` is
//! the accuracy sentinel, checked in the tests).

use alloc::vec::Vec;
use core::fmt;

use crate::fx;
use crate::law::OffspringLaw;

/// Below this the survival probability is considered about to underflow.
const UNDERFLOW_FLOOR: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq)]
pub enum GfError {
    /// Requested index beyond the built table.
    OutOfRange { n: u64, n_max: u64 },
    /// Iterating further would underflow binary64.
    Underflow { largest_safe_n: u64 },
    /// `find_r` target misses the table's range.
    TargetOutOfRange { target: f64, u_min: f64 },
    /// Operation undefined for the law (e.g. the unit law never goes extinct).
    DegenerateLaw,
}

impl fmt::Display for GfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GfError::OutOfRange { n, n_max } => {
                write!(f, "index {n} beyond table horizon {n_max}")
            }
            GfError::Underflow { largest_safe_n } => write!(
                f,
                "survival probability underflows binary64; largest safe horizon is {largest_safe_n}"
            ),
            GfError::TargetOutOfRange { target, u_min } => write!(
                f,
                "target survival {target} below the table minimum {u_min}; extend the table"
            ),
            GfError::DegenerateLaw => write!(f, "operation undefined for a law without extinction"),
        }
    }
}

impl core::error::Error for GfError {}

/// Survival probabilities `u_k = 1 - f_k(0)` for `k = 0..=n_max`.
#[derive(Clone, Debug)]
pub struct ExtinctionTable {
    law: OffspringLaw,
    u: Vec<f64>,
}

impl ExtinctionTable {
    /// Iterate the pgf to horizon `n_max`. Cost `O(n_max)`.
    pub fn build(law: &OffspringLaw, n_max: u64) -> Result<Self, GfError> {
        let mut u = Vec::with_capacity(n_max as usize + 1);
        u.push(1.0f64);
        let mut cur = 1.0f64;
        for k in 0..n_max {
            cur = match law {
                OffspringLaw::Stable(s) => cur - s.c() * fx::pow(cur, 1.0 + s.alpha()),
                OffspringLaw::Geometric(_) => cur / (1.0 + cur),
                OffspringLaw::Unit(_) => cur,
            };
            if cur < UNDERFLOW_FLOOR {
                return Err(GfError::Underflow { largest_safe_n: k });
            }
            u.push(cur);
        }
        Ok(ExtinctionTable { law: law.clone(), u })
    }

    #[inline]
    pub fn law(&self) -> &OffspringLaw {
        &self.law
    }

    #[inline]
    pub fn n_max(&self) -> u64 {
        (self.u.len() - 1) as u64
    }

    /// `Q(n) = P(Z(n) > 0)`.
    pub fn survival(&self, n: u64) -> Result<f64, GfError> {
        self.u
            .get(n as usize)
            .copied()
            .ok_or(GfError::OutOfRange { n, n_max: self.n_max() })
    }

    /// The small-deviation normalizer `Delta(n) = u_n / (alpha n)`, with
    /// `alpha = 1` for the finite-variance geometric law.
    pub fn delta(&self, n: u64) -> Result<f64, GfError> {
        if n == 0 {
            return Err(GfError::OutOfRange { n: 0, n_max: self.n_max() });
        }
        let alpha = self.law.survival_index().ok_or(GfError::DegenerateLaw)?;
        Ok(self.survival(n)? / (alpha * n as f64))
    }

    /// `T = 1 / u_phi`, the population scale of the conditioning event.
    pub fn threshold(&self, phi: u64) -> Result<f64, GfError> {
        Ok(1.0 / self.survival(phi)?)
    }

    /// The unique `r` with `u_{r+1} <= 1 - (1 - u_l)^rho < u_r`.
    ///
    /// For `rho = 1` the target is `u_l` itself and monotonicity forces
    /// `r = l - 1`; asymptotically `r ~ l rho^{-alpha}`.
    pub fn find_r(&self, l: u64, rho: f64) -> Result<u64, GfError> {
        let u_l = self.survival(l)?;
        let target = if rho == 1.0 {
            u_l
        } else {
            // 1 - (1-u)^rho without cancellation for small u.
            -fx::expm1(rho * fx::log1p(-u_l))
        };
        // First index with u[i] <= target (the table is nonincreasing).
        let mut lo = 0usize;
        let mut hi = self.u.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.u[mid] <= target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if lo == self.u.len() {
            return Err(GfError::TargetOutOfRange { target, u_min: self.u[self.u.len() - 1] });
        }
        if lo == 0 {
            // target >= u_0 = 1: no r with u_r > target exists.
            return Err(GfError::TargetOutOfRange { target, u_min: self.u[0] });
        }
        Ok((lo - 1) as u64)
    }

    /// Direct slice access for export and tests.
    pub fn as_slice(&self) -> &[f64] {
        &self.u
    }
}
