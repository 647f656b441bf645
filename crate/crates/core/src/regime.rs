//! The five conditional observation regimes.
//!
//! Each regime fixes how the inner observation time `m` scales with the
//! horizon `n`, and which survival probability multiplies `Z(m)` inside the
//! conditional Laplace transform. The window functions are powers of `n`:
//! `phi(n) = ceil(n^{a_phi})`, `psi(n) = ceil(n^{a_psi})`,
//! `chi(n) = ceil(n^{a_chi})` (or identically zero), subject to
//! `0 <= a_chi < a_phi < a_psi < 1`.

use core::fmt;

use crate::fx;
use crate::gf::{ExtinctionTable, GfError};
use crate::limits::{
    regime1_lst, regime2_lst, regime3_lst, regime5_lst, LimitError, YaglomLaw,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegimeId {
    /// `m -> infinity`, `m = o(n)`; scaling `1 - f_m(0)`.
    Early = 1,
    /// `m ~ theta n`; scaling `1 - f_m(0)`.
    Proportional = 2,
    /// `m = n - psi(n)` with `n >> psi >> phi`; scaling `1 - f_psi(0)`.
    Intermediate = 3,
    /// `m = n - ceil(y phi(n))`; scaling `1 - f_{n-m}(0)`.
    AncestralWindow = 4,
    /// `m = n - chi(n)` with `phi >> chi >= 0`; scaling `1 - f_phi(0)`.
    Terminal = 5,
}

impl RegimeId {
    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<RegimeId> {
        match i {
            1 => Some(RegimeId::Early),
            2 => Some(RegimeId::Proportional),
            3 => Some(RegimeId::Intermediate),
            4 => Some(RegimeId::AncestralWindow),
            5 => Some(RegimeId::Terminal),
            _ => None,
        }
    }

    pub const ALL: [RegimeId; 5] = [
        RegimeId::Early,
        RegimeId::Proportional,
        RegimeId::Intermediate,
        RegimeId::AncestralWindow,
        RegimeId::Terminal,
    ];
}

impl fmt::Display for RegimeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Which survival probability multiplies `Z(m)` in the transform argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scaling {
    AtM,
    AtPsi,
    AtGap,
    AtPhi,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RegimeError {
    BadTheta(f64),
    BadY(f64),
    BadExponents { a_phi: f64, a_psi: f64, a_chi: f64 },
    BadInnerExponent(f64),
    /// `m` would be negative or past the horizon.
    BadHorizon { n: u64, m: i64 },
}

impl fmt::Display for RegimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeError::BadTheta(t) => write!(f, "theta = {t} outside (0, 1)"),
            RegimeError::BadY(y) => write!(f, "y = {y} must be positive"),
            RegimeError::BadExponents { a_phi, a_psi, a_chi } => write!(
                f,
                "window exponents must satisfy 0 <= a_chi ({a_chi}) < a_phi ({a_phi}) < a_psi ({a_psi}) < 1"
            ),
            RegimeError::BadInnerExponent(a) => {
                write!(f, "inner-time exponent a_m = {a} outside (0, 1)")
            }
            RegimeError::BadHorizon { n, m } => {
                write!(f, "inner time {m} outside [0, {n}]")
            }
        }
    }
}

impl core::error::Error for RegimeError {}

/// A fully parameterized observation regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeSpec {
    pub id: RegimeId,
    /// Time fraction for [`RegimeId::Proportional`].
    pub theta: f64,
    /// Window multiple for [`RegimeId::AncestralWindow`].
    pub y: f64,
    pub a_phi: f64,
    pub a_psi: f64,
    /// `None` means `chi` is identically zero.
    pub a_chi: Option<f64>,
    /// Inner-time exponent for [`RegimeId::Early`]: `m = ceil(n^{a_m})`.
    pub a_m: f64,
}

impl RegimeSpec {
    /// Defaults: `a_phi = 1/2`, `a_psi = 3/4`, `chi = 0`, `a_m = 1/2`,
    /// `theta = 1/2`, `y = 1`.
    pub fn new(id: RegimeId) -> Self {
        RegimeSpec { id, theta: 0.5, y: 1.0, a_phi: 0.5, a_psi: 0.75, a_chi: None, a_m: 0.5 }
    }

    pub fn validate(&self) -> Result<(), RegimeError> {
        let a_chi = self.a_chi.unwrap_or(0.0);
        if !(self.a_chi.map_or(true, |a| a >= 0.0)
            && a_chi < self.a_phi
            && self.a_phi < self.a_psi
            && self.a_psi < 1.0
            && self.a_phi > 0.0)
        {
            return Err(RegimeError::BadExponents {
                a_phi: self.a_phi,
                a_psi: self.a_psi,
                a_chi,
            });
        }
        match self.id {
            RegimeId::Proportional => {
                if !(self.theta > 0.0 && self.theta < 1.0) {
                    return Err(RegimeError::BadTheta(self.theta));
                }
            }
            RegimeId::AncestralWindow => {
                if !(self.y > 0.0) {
                    return Err(RegimeError::BadY(self.y));
                }
            }
            RegimeId::Early => {
                if !(self.a_m > 0.0 && self.a_m < 1.0) {
                    return Err(RegimeError::BadInnerExponent(self.a_m));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn phi(&self, n: u64) -> u64 {
        ceil_pow(n, self.a_phi)
    }

    pub fn psi(&self, n: u64) -> u64 {
        ceil_pow(n, self.a_psi)
    }

    pub fn chi(&self, n: u64) -> u64 {
        match self.a_chi {
            None => 0,
            Some(a) => ceil_pow(n, a),
        }
    }

    /// The inner observation time `m` for horizon `n`.
    pub fn m_of(&self, n: u64) -> Result<u64, RegimeError> {
        let m = match self.id {
            RegimeId::Early => ceil_pow(n, self.a_m) as i64,
            RegimeId::Proportional => fx::floor(self.theta * n as f64) as i64,
            RegimeId::Intermediate => n as i64 - self.psi(n) as i64,
            RegimeId::AncestralWindow => {
                n as i64 - fx::ceil(self.y * self.phi(n) as f64) as i64
            }
            RegimeId::Terminal => n as i64 - self.chi(n) as i64,
        };
        if m < 0 || m as u64 > n {
            return Err(RegimeError::BadHorizon { n, m });
        }
        Ok(m as u64)
    }

    pub fn scaling(&self) -> Scaling {
        match self.id {
            RegimeId::Early | RegimeId::Proportional => Scaling::AtM,
            RegimeId::Intermediate => Scaling::AtPsi,
            RegimeId::AncestralWindow => Scaling::AtGap,
            RegimeId::Terminal => Scaling::AtPhi,
        }
    }

    /// The survival probability multiplying `Z(m)`, read off the table.
    pub fn scaling_survival(&self, table: &ExtinctionTable, n: u64) -> Result<f64, GfError> {
        let m = self.m_of(n).map_err(|_| GfError::OutOfRange { n, n_max: table.n_max() })?;
        let at = match self.scaling() {
            Scaling::AtM => m,
            Scaling::AtPsi => self.psi(n),
            Scaling::AtGap => n - m,
            Scaling::AtPhi => self.phi(n),
        };
        table.survival(at)
    }

    /// The limit transform of this regime at `lambda`.
    pub fn limit_transform(&self, yag: &YaglomLaw, lambda: f64) -> Result<f64, LimitError> {
        let alpha = yag.alpha();
        Ok(match self.id {
            RegimeId::Early => regime1_lst(alpha, lambda),
            RegimeId::Proportional => regime2_lst(alpha, self.theta, lambda),
            RegimeId::Intermediate => regime3_lst(alpha, lambda),
            RegimeId::AncestralWindow => yag.regime4_transform(self.y, lambda)?.value,
            RegimeId::Terminal => regime5_lst(alpha, lambda),
        })
    }
}

/// `ceil(n^a)` with a guard against `pow` landing a hair above an exact
/// integer (e.g. `400^{1/2}`).
fn ceil_pow(n: u64, a: f64) -> u64 {
    let p = fx::pow(n as f64, a);
    let r = fx::round(p);
    let v = if fx::abs(p - r) < 1e-9 * r.max(1.0) { r } else { fx::ceil(p) };
    v as u64
}
