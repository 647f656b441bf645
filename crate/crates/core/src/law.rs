//! Critical offspring distributions.
//!
//! The workhorse is the stable family with generating function
//! `f(s) = s + c (1-s)^{1+alpha}`, `alpha` in `(0, 1]`, which is critical by
//! construction and has the heavy tail `P(xi > k) ~ c alpha k^{-(1+alpha)} /
//! Gamma(1-alpha)` for `alpha < 1`. Its pmf and tail function follow from the
//! identity `sum_k P(xi > k) s^k = 1 - c (1-s)^alpha`:
//!
//! * `p_0 = c`, `p_1 = 1 - c (1+alpha)`,
//! * `P(xi > 0) = 1 - c`, `P(xi > k+1) / P(xi > k) = (k - alpha) / (k + 1)`,
//! * `p_{k+1} = P(xi > k) (1+alpha) / (k+1)` for `k >= 1`.
//!
//! Probabilities are never formed from gamma-function ratios of large
//! arguments; everything below [`TABLE_LEN`] comes from the recurrences run
//! in double-double arithmetic so that pmf/tail stay mutually consistent to
//! well below `1e-12` relative, and the log-gamma closed form only serves the
//! far tail. Two exact reference laws accompany the family: the critical
//! geometric law `p_k = 2^{-(k+1)}` (finite variance, `sigma^2 = 2`) and the
//! deterministic unit law.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::dd::{self, Dd};
use crate::fx;

/// Table length for the stable family's precomputed pmf and tail values.
pub const TABLE_LEN: usize = 16_384;

/// Default sampling cutoff: alias lookup below, analytic tail walk above.
pub const DEFAULT_TABLE_CUTOFF: usize = 4096;

/// Largest admissible sampling cutoff (the alias table holds 2^13 cells).
pub const MAX_TABLE_CUTOFF: usize = 8191;

#[derive(Clone, Debug, PartialEq)]
pub enum LawError {
    /// `alpha` outside `(0, 1]`.
    InvalidAlpha(f64),
    /// `c` outside `(0, 1/(1+alpha)]`.
    InvalidTailConstant(f64),
    /// Sampling cutoff outside `[2, MAX_TABLE_CUTOFF]`.
    InvalidCutoff(usize),
}

impl fmt::Display for LawError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawError::InvalidAlpha(a) => {
                write!(f, "stable index alpha = {a} must lie in (0, 1]")
            }
            LawError::InvalidTailConstant(c) => {
                write!(f, "tail constant c = {c} must lie in (0, 1/(1+alpha)]")
            }
            LawError::InvalidCutoff(k) => {
                write!(f, "sampling cutoff {} outside [2, {}]", k, MAX_TABLE_CUTOFF)
            }
        }
    }
}

impl core::error::Error for LawError {}

/// Errors from the law specification grammar.
#[derive(Clone, Debug, PartialEq)]
pub enum LawParseError {
    Unrecognized(String),
    MissingField(&'static str),
    BadNumber(String),
    Invalid(LawError),
}

impl fmt::Display for LawParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawParseError::Unrecognized(s) => write!(f, "unrecognized law spec `{s}`"),
            LawParseError::MissingField(name) => write!(f, "law spec missing field `{name}`"),
            LawParseError::BadNumber(s) => write!(f, "malformed number `{s}` in law spec"),
            LawParseError::Invalid(e) => write!(f, "invalid law parameters: {e}"),
        }
    }
}

impl core::error::Error for LawParseError {}

/// Exact `2^{-n}`, down through the subnormal range.
#[inline]
fn pow2_neg(n: u64) -> f64 {
    if n <= 1022 {
        f64::from_bits((1023 - n) << 52)
    } else if n <= 1074 {
        f64::from_bits(1u64 << (1074 - n))
    } else {
        0.0
    }
}

/// Offspring distribution of one particle.
#[derive(Clone, Debug)]
pub enum OffspringLaw {
    Stable(StableOffspringLaw),
    Geometric(GeometricCriticalLaw),
    Unit(UnitOffspringLaw),
}

/// The heavy-tailed critical family `f(s) = s + c (1-s)^{1+alpha}`.
#[derive(Clone, Debug)]
pub struct StableOffspringLaw {
    alpha: f64,
    c: f64,
    table_cutoff: usize,
    /// `p_k` for `k < TABLE_LEN`.
    pmf: Vec<f64>,
    /// `P(xi > k)` for `k < TABLE_LEN`.
    tail: Vec<f64>,
}

/// Critical geometric law `p_k = (1/2)^{k+1}`, pgf `f(s) = 1/(2-s)`,
/// `sigma^2 = 2`. Everything about it is exactly computable, which makes it
/// the precision sentinel for the iteration engine.
#[derive(Clone, Copy, Debug, Default)]
pub struct GeometricCriticalLaw;

/// Deterministic law `p_1 = 1`; every trajectory stays at population one.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnitOffspringLaw;

impl GeometricCriticalLaw {
    pub const SIGMA_SQ: f64 = 2.0;
}

impl StableOffspringLaw {
    pub fn new(alpha: f64, c: f64, table_cutoff: usize) -> Result<Self, LawError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(LawError::InvalidAlpha(alpha));
        }
        if !(c > 0.0 && c <= 1.0 / (1.0 + alpha)) {
            return Err(LawError::InvalidTailConstant(c));
        }
        if !(2..=MAX_TABLE_CUTOFF).contains(&table_cutoff) {
            return Err(LawError::InvalidCutoff(table_cutoff));
        }

        // Run both recurrences in double-double so the identity
        // tail(k-1) - tail(k) = pmf(k) survives rounding of the stored f64s.
        let mut pmf = Vec::with_capacity(TABLE_LEN);
        let mut tail = Vec::with_capacity(TABLE_LEN);
        let one_plus_alpha = 1.0 + alpha;

        let c_dd = Dd::from_f64(c);
        let p0 = c_dd;
        let t0 = dd::sub(Dd::ONE, c_dd);
        let p1 = dd::sub(Dd::ONE, dd::mul_f64(c_dd, one_plus_alpha));
        let mut t = dd::sub(t0, p1); // P(xi > 1) = c * alpha
        pmf.push(p0.to_f64());
        pmf.push(p1.to_f64().max(0.0));
        tail.push(t0.to_f64());
        tail.push(t.to_f64());
        for k in 1..(TABLE_LEN - 1) {
            let p_next = dd::div_f64(dd::mul_f64(t, one_plus_alpha), (k + 1) as f64);
            t = dd::sub(t, p_next);
            if t.hi < 0.0 {
                t = Dd::from_f64(0.0);
            }
            pmf.push(p_next.to_f64());
            tail.push(t.to_f64());
        }

        Ok(StableOffspringLaw { alpha, c, table_cutoff, pmf, tail })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    #[inline]
    pub fn table_cutoff(&self) -> usize {
        self.table_cutoff
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if (k as usize) < TABLE_LEN {
            self.pmf[k as usize]
        } else {
            // p_k = P(xi > k-1) * (1 + alpha) / k
            self.tail_analytic(k - 1) * (1.0 + self.alpha) / k as f64
        }
    }

    pub fn tail(&self, k: u64) -> f64 {
        if (k as usize) < TABLE_LEN {
            self.tail[k as usize]
        } else {
            self.tail_analytic(k)
        }
    }

    #[inline]
    pub(crate) fn tail_table(&self) -> &[f64] {
        &self.tail
    }

    /// `P(xi > k) = c alpha Gamma(k - alpha) / (Gamma(1-alpha) Gamma(k+1))`
    /// for `k >= 1`, evaluated through log-gamma. Only used beyond the table.
    pub(crate) fn tail_analytic(&self, k: u64) -> f64 {
        if self.alpha == 1.0 {
            // Tail generating function degenerates to (1-c) + c s.
            return if k == 0 { 1.0 - self.c } else if k == 1 { self.c } else { 0.0 };
        }
        if k == 0 {
            return 1.0 - self.c;
        }
        let kf = k as f64;
        let log_t = fx::ln(self.c * self.alpha) - fx::lgamma(1.0 - self.alpha)
            + fx::lgamma(kf - self.alpha)
            - fx::lgamma(kf + 1.0);
        fx::exp(log_t)
    }

    /// Mean computed as the sum of tail probabilities, with the closed-form
    /// remainder `sum_{k>=K} P(xi>k) = c Gamma(K-alpha) / (Gamma(1-alpha)
    /// Gamma(K))`. Equals one in exact arithmetic (criticality).
    pub fn mean_via_tails(&self) -> f64 {
        let mut acc = 0.0;
        let mut comp = 0.0;
        for k in 0..TABLE_LEN {
            // Neumaier compensated sum.
            let x = self.tail[k];
            let t = acc + x;
            comp += if fx::abs(acc) >= fx::abs(x) { (acc - t) + x } else { (x - t) + acc };
            acc = t;
        }
        let remainder = if self.alpha == 1.0 {
            0.0
        } else {
            let kf = TABLE_LEN as f64;
            fx::exp(
                fx::ln(self.c) - fx::lgamma(1.0 - self.alpha) + fx::lgamma(kf - self.alpha)
                    - fx::lgamma(kf),
            )
        };
        acc + comp + remainder
    }

    /// `f(s) = s + c (1-s)^{1+alpha}`.
    pub fn pgf(&self, s: f64) -> f64 {
        s + self.c * fx::pow(1.0 - s, 1.0 + self.alpha)
    }
}

impl OffspringLaw {
    /// Canonical stable member with the default `c = 1/(1+alpha)` and the
    /// default sampling cutoff.
    pub fn stable(alpha: f64) -> Result<Self, LawError> {
        let c = 1.0 / (1.0 + alpha);
        Self::stable_with(alpha, c)
    }

    pub fn stable_with(alpha: f64, c: f64) -> Result<Self, LawError> {
        Ok(OffspringLaw::Stable(StableOffspringLaw::new(alpha, c, DEFAULT_TABLE_CUTOFF)?))
    }

    pub fn stable_with_cutoff(alpha: f64, c: f64, cutoff: usize) -> Result<Self, LawError> {
        Ok(OffspringLaw::Stable(StableOffspringLaw::new(alpha, c, cutoff)?))
    }

    pub fn geometric() -> Self {
        OffspringLaw::Geometric(GeometricCriticalLaw)
    }

    pub fn unit() -> Self {
        OffspringLaw::Unit(UnitOffspringLaw)
    }

    /// Stable index of the family; `None` for the reference laws.
    pub fn stable_alpha(&self) -> Option<f64> {
        match self {
            OffspringLaw::Stable(s) => Some(s.alpha),
            _ => None,
        }
    }

    /// Index governing the survival asymptotics: `alpha` for the stable
    /// family and 1 for the finite-variance geometric law.
    pub fn survival_index(&self) -> Option<f64> {
        match self {
            OffspringLaw::Stable(s) => Some(s.alpha),
            OffspringLaw::Geometric(_) => Some(1.0),
            OffspringLaw::Unit(_) => None,
        }
    }

    /// `P(xi = k)`.
    pub fn pmf(&self, k: u64) -> f64 {
        match self {
            OffspringLaw::Stable(s) => s.pmf(k),
            OffspringLaw::Geometric(_) => pow2_neg(k + 1),
            OffspringLaw::Unit(_) => {
                if k == 1 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `P(xi > k)`.
    pub fn tail(&self, k: u64) -> f64 {
        match self {
            OffspringLaw::Stable(s) => s.tail(k),
            // Geometric: P(xi > k) = 2^{-(k+1)}, same value as the pmf.
            OffspringLaw::Geometric(_) => self.pmf(k),
            OffspringLaw::Unit(_) => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Offspring mean computed from tail sums (one for every member).
    pub fn mean_via_tails(&self) -> f64 {
        match self {
            OffspringLaw::Stable(s) => s.mean_via_tails(),
            OffspringLaw::Geometric(_) | OffspringLaw::Unit(_) => 1.0,
        }
    }

    /// The probability generating function `f(s)` on `[0, 1]`.
    pub fn pgf(&self, s: f64) -> f64 {
        match self {
            OffspringLaw::Stable(l) => l.pgf(s),
            OffspringLaw::Geometric(_) => 1.0 / (2.0 - s),
            OffspringLaw::Unit(_) => s,
        }
    }

    /// Parse the law specification grammar:
    /// `stable(alpha=<f>, c=<f>)` | `geometric` | `unit`.
    /// An omitted `c` defaults to `1/(1+alpha)`.
    pub fn parse(spec: &str) -> Result<Self, LawParseError> {
        let s = spec.trim();
        match s {
            "geometric" => return Ok(Self::geometric()),
            "unit" => return Ok(Self::unit()),
            _ => {}
        }
        let body = s
            .strip_prefix("stable(")
            .and_then(|rest| rest.strip_suffix(')'))
            .ok_or_else(|| LawParseError::Unrecognized(String::from(s)))?;
        let mut alpha: Option<f64> = None;
        let mut c: Option<f64> = None;
        for field in body.split(',') {
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| LawParseError::Unrecognized(String::from(field)))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| LawParseError::BadNumber(String::from(value.trim())))?;
            match key.trim() {
                "alpha" => alpha = Some(value),
                "c" => c = Some(value),
                other => return Err(LawParseError::Unrecognized(String::from(other))),
            }
        }
        let alpha = alpha.ok_or(LawParseError::MissingField("alpha"))?;
        let c = c.unwrap_or(1.0 / (1.0 + alpha));
        Self::stable_with(alpha, c).map_err(LawParseError::Invalid)
    }
}

impl fmt::Display for OffspringLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OffspringLaw::Stable(s) => write!(f, "stable(alpha={}, c={})", s.alpha, s.c),
            OffspringLaw::Geometric(_) => write!(f, "geometric"),
            OffspringLaw::Unit(_) => write!(f, "unit"),
        }
    }
}
