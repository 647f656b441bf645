//! Closed-form limit objects: the Yaglom law, its convolution powers, the
//! five conditional observation-regime transforms, the reduced-process and
//! ancestor limit laws, and the small-deviation asymptotics.
//!
//! The Yaglom law `M` is only available through its Laplace–Stieltjes
//! transform `1 - (1 + lambda^{-alpha})^{-1/alpha}`; its CDF (and the CDFs of
//! its convolution powers) come from numerical inversion. No single inversion
//! method is trustworthy near the `x -> 0` cusp, so every CDF evaluation runs
//! two independent backends and fails loudly when they disagree beyond the
//! configured tolerance.

use core::fmt;

use num_complex::Complex64;

use crate::fx;
use crate::gf::{ExtinctionTable, GfError};
use crate::laplace::{self, EulerParams};
use crate::law::OffspringLaw;
use crate::special;

#[derive(Clone, Debug, PartialEq)]
pub enum LimitError {
    /// `alpha` outside `(0, 1]`.
    InvalidAlpha(f64),
    /// Argument required to be positive (or a probability) was not.
    BadArgument { what: &'static str, value: f64 },
    /// The two inversion backends disagree: the result cannot be trusted.
    BackendDisagreement { value: f64, check: f64, at: f64, tol: f64 },
    /// The certified series tail bound did not reach the tolerance in the
    /// allowed number of terms.
    SeriesBoundNotAttained { bound: f64, terms: u32 },
    /// Errors propagated from the extinction table.
    Table(GfError),
}

impl fmt::Display for LimitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitError::InvalidAlpha(a) => write!(f, "alpha = {a} outside (0, 1]"),
            LimitError::BadArgument { what, value } => {
                write!(f, "invalid argument {what} = {value}")
            }
            LimitError::BackendDisagreement { value, check, at, tol } => write!(
                f,
                "inversion backends disagree at {at}: {value} vs {check} (tolerance {tol})"
            ),
            LimitError::SeriesBoundNotAttained { bound, terms } => write!(
                f,
                "series tail bound {bound} not below tolerance after {terms} terms"
            ),
            LimitError::Table(e) => write!(f, "table error: {e}"),
        }
    }
}

impl core::error::Error for LimitError {}

impl From<GfError> for LimitError {
    fn from(e: GfError) -> Self {
        LimitError::Table(e)
    }
}

/// Inversion and series configuration.
#[derive(Clone, Copy, Debug)]
pub struct InversionConfig {
    pub talbot_nodes: u32,
    pub euler: EulerParams,
    /// Mandatory cross-backend agreement for CDF values.
    pub agreement_tol: f64,
    /// Target for certified series tails.
    pub series_tol: f64,
    pub max_series_terms: u32,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            talbot_nodes: 40,
            euler: EulerParams::default(),
            agreement_tol: 1e-6,
            series_tol: 1e-6,
            max_series_terms: 500,
        }
    }
}

/// The Yaglom limit law for stable index `alpha`, with its inversion config.
#[derive(Clone, Debug)]
pub struct YaglomLaw {
    alpha: f64,
    cfg: InversionConfig,
}

/// Result of the regime-4 series: value, certified truncation bound, terms.
#[derive(Clone, Copy, Debug)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: u32,
}

/// `E exp(-lambda M) = 1 - (1 + lambda^{-alpha})^{-1/alpha}`, evaluated in a
/// cancellation-free rearrangement over the whole positive axis.
pub fn yaglom_lst(alpha: f64, lambda: f64) -> Result<f64, LimitError> {
    check_alpha(alpha)?;
    if !(lambda > 0.0) {
        return Err(LimitError::BadArgument { what: "lambda", value: lambda });
    }
    let ln_l = fx::ln(lambda);
    if -alpha * ln_l > 700.0 {
        // lambda^{-alpha} would overflow; switch to the lambda (1+lambda^alpha)
        // form, whose power is tiny here.
        let la = fx::exp(alpha * ln_l);
        return Ok(1.0 - lambda * fx::exp(-fx::log1p(la) / alpha));
    }
    let inv_pow = fx::exp(-alpha * ln_l); // lambda^{-alpha}
    Ok(-fx::expm1(-fx::log1p(inv_pow) / alpha))
}

#[inline]
fn check_alpha(alpha: f64) -> Result<(), LimitError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(LimitError::InvalidAlpha(alpha))
    }
}

/// The transform as a complex function, `Phi(s) = 1 - s (1 + s^alpha)^{-1/alpha}`
/// on the principal branch; agrees with [`yaglom_lst`] on the positive axis.
#[inline]
fn phi_complex(alpha: f64, s: Complex64) -> Complex64 {
    let sa = s.powf(alpha);
    Complex64::new(1.0, 0.0) - s * (Complex64::new(1.0, 0.0) + sa).powf(-1.0 / alpha)
}

impl YaglomLaw {
    pub fn new(alpha: f64) -> Result<Self, LimitError> {
        Self::with_config(alpha, InversionConfig::default())
    }

    pub fn with_config(alpha: f64, cfg: InversionConfig) -> Result<Self, LimitError> {
        check_alpha(alpha)?;
        Ok(YaglomLaw { alpha, cfg })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn config(&self) -> &InversionConfig {
        &self.cfg
    }

    /// LST of `M` at `lambda > 0`.
    pub fn lst(&self, lambda: f64) -> Result<f64, LimitError> {
        yaglom_lst(self.alpha, lambda)
    }

    /// `M(x)` by dual-backend Laplace inversion of `Phi(s)/s`.
    ///
    /// Value from the fixed-Talbot contour, cross-checked against the
    /// Euler-accelerated Fourier method; both must agree within
    /// `agreement_tol` or an error carrying both values is returned.
    pub fn cdf(&self, x: f64) -> Result<f64, LimitError> {
        if !(x > 0.0) {
            return Err(LimitError::BadArgument { what: "x", value: x });
        }
        let alpha = self.alpha;
        let f = |s: Complex64| phi_complex(alpha, s) / s;
        let value = laplace::talbot(f, x, self.cfg.talbot_nodes);
        let check = laplace::euler(f, x, self.cfg.euler);
        self.agree(value, check, x)
    }

    /// CDF of the `j`-fold convolution `M^{*j}`, inverting `Phi(s)^j / s`.
    ///
    /// `j = 1` delegates to [`Self::cdf`]. Powers are safe on both contours
    /// for this transform family: `|Phi| < 1` along the fixed Talbot contour
    /// at the radii used here (pinned by a test), so roundoff never amplifies
    /// with `j`.
    pub fn conv_cdf(&self, j: u32, x: f64) -> Result<f64, LimitError> {
        if j == 0 {
            return Err(LimitError::BadArgument { what: "j", value: 0.0 });
        }
        if j == 1 {
            return self.cdf(x);
        }
        if !(x > 0.0) {
            return Err(LimitError::BadArgument { what: "x", value: x });
        }
        let alpha = self.alpha;
        let jf = j as i32;
        let fc = |s: Complex64| phi_complex(alpha, s).powi(jf) / s;
        let value = laplace::talbot(fc, x, self.cfg.talbot_nodes);
        let check = laplace::euler(fc, x, self.cfg.euler);
        self.agree(value, check, x)
    }

    fn agree(&self, value: f64, check: f64, at: f64) -> Result<f64, LimitError> {
        if fx::abs(value - check) > self.cfg.agreement_tol {
            return Err(LimitError::BackendDisagreement {
                value,
                check,
                at,
                tol: self.cfg.agreement_tol,
            });
        }
        Ok(value.clamp(0.0, 1.0))
    }

    /// The regime-4 limit transform
    /// `sum_{j>=1} alpha Gamma(j+alpha)/(j! (1+lambda)^{alpha+j}) y M^{*j}(y^{-1/alpha})`,
    /// summed adaptively with a certified tail bound built from
    /// `M^{*j}(x) <= M(x)^j` and the monotonicity of the coefficients.
    pub fn regime4_transform(&self, y: f64, lambda: f64) -> Result<SeriesValue, LimitError> {
        if !(y > 0.0) {
            return Err(LimitError::BadArgument { what: "y", value: y });
        }
        if !(lambda >= 0.0) {
            return Err(LimitError::BadArgument { what: "lambda", value: lambda });
        }
        let x = fx::pow(y, -1.0 / self.alpha);
        let q = self.cdf(x)?; // M(x) < 1
        let r = 1.0 / (1.0 + lambda);
        let front = fx::pow(1.0 + lambda, -self.alpha) * y;
        let qr = q * r;

        let mut coef = self.alpha * fx::tgamma(1.0 + self.alpha); // alpha*Gamma(j+alpha)/j! at j=1
        let mut rpow = r;
        let mut sum = 0.0;
        let mut j = 1u32;
        loop {
            // Certified bound on everything from term j on.
            let tail_bound = front * coef * fx::pow(qr, j as f64) / (1.0 - qr);
            if tail_bound < self.cfg.series_tol {
                return Ok(SeriesValue { value: sum, tail_bound, terms: j - 1 });
            }
            if j > self.cfg.max_series_terms {
                return Err(LimitError::SeriesBoundNotAttained { bound: tail_bound, terms: j - 1 });
            }
            let conv = self.conv_cdf(j, x)?;
            sum += front * coef * rpow * conv;
            coef *= (j as f64 + self.alpha) / (j as f64 + 1.0);
            rpow *= r;
            j += 1;
        }
    }

    /// Limit pmf of the reduced process:
    /// `alpha Gamma(j+alpha)/j! * y * M^{*j}(y^{-1/alpha})`.
    pub fn reduced_limit_pmf(&self, y: f64, j: u32) -> Result<f64, LimitError> {
        if j == 0 {
            return Err(LimitError::BadArgument { what: "j", value: 0.0 });
        }
        if !(y > 0.0) {
            return Err(LimitError::BadArgument { what: "y", value: y });
        }
        let x = fx::pow(y, -1.0 / self.alpha);
        let mut coef = self.alpha * fx::tgamma(1.0 + self.alpha);
        for i in 1..j {
            coef *= (i as f64 + self.alpha) / (i as f64 + 1.0);
        }
        Ok(coef * y * self.conv_cdf(j, x)?)
    }

    /// Total mass of the reduced limit law (1 in exact arithmetic) with its
    /// certified truncation bound; this is the regime-4 series at `lambda = 0`.
    pub fn reduced_pmf_total(&self, y: f64) -> Result<SeriesValue, LimitError> {
        self.regime4_transform(y, 0.0)
    }

    /// Limit CDF of the scaled ancestor distance:
    /// `alpha Gamma(1+alpha) y M(y^{-1/alpha})`; identical to
    /// [`Self::reduced_limit_pmf`] with `j = 1`.
    pub fn mrca_limit_cdf(&self, y: f64) -> Result<f64, LimitError> {
        self.reduced_limit_pmf(y, 1)
    }
}

/// Regime 1: `(1 + lambda^alpha)^{-(1/alpha + 1)}`.
pub fn regime1_lst(alpha: f64, lambda: f64) -> f64 {
    fx::pow(1.0 + fx::pow(lambda, alpha), -(1.0 / alpha + 1.0))
}

/// Regime 2 with time fraction `theta`:
/// `(1 - theta + (lambda (1-theta)^{1/alpha} + theta^{1/alpha})^alpha)^{-(1/alpha+1)}`.
pub fn regime2_lst(alpha: f64, theta: f64, lambda: f64) -> f64 {
    let inner = lambda * fx::pow(1.0 - theta, 1.0 / alpha) + fx::pow(theta, 1.0 / alpha);
    fx::pow(1.0 - theta + fx::pow(inner, alpha), -(1.0 / alpha + 1.0))
}

/// Regime 3: `(1 + lambda)^{-(alpha + 1)}`.
pub fn regime3_lst(alpha: f64, lambda: f64) -> f64 {
    fx::pow(1.0 + lambda, -(alpha + 1.0))
}

/// Regime 5: `alpha int_0^1 x^{alpha-1} e^{-lambda x} dx`, evaluated through
/// the regularized lower incomplete gamma as
/// `Gamma(alpha+1) P(alpha, lambda) / lambda^alpha`; the `lambda -> 0` limit
/// is 1.
pub fn regime5_lst(alpha: f64, lambda: f64) -> f64 {
    if lambda < 1e-290 {
        return 1.0;
    }
    fx::tgamma(alpha + 1.0) * special::reg_lower_gamma(alpha, lambda)
        / fx::pow(lambda, alpha)
}

/// Small-deviation asymptotics of `P(H(n, phi))`.
#[derive(Clone, Copy, Debug)]
pub struct SmallDeviation {
    /// `Delta(n) * phi / Gamma(1 + alpha)`.
    pub value: f64,
    /// The equivalent threshold form `Delta(n) T^alpha / (alpha Gamma(1+alpha) c)`
    /// with `T = 1/u_phi`; only available for the stable family, where the
    /// slowly varying factor is the constant `c`.
    pub t_form: Option<f64>,
}

pub fn small_deviation_prob(
    table: &ExtinctionTable,
    n: u64,
    phi: u64,
) -> Result<SmallDeviation, LimitError> {
    if phi == 0 || phi >= n {
        return Err(LimitError::BadArgument { what: "phi", value: phi as f64 });
    }
    let alpha = table
        .law()
        .survival_index()
        .ok_or(LimitError::BadArgument { what: "law", value: f64::NAN })?;
    let delta = table.delta(n)?;
    let gamma1a = fx::tgamma(1.0 + alpha);
    let value = delta * phi as f64 / gamma1a;
    let t_form = match table.law() {
        OffspringLaw::Stable(s) => {
            let t = table.threshold(phi)?;
            Some(delta * fx::pow(t, s.alpha()) / (s.alpha() * gamma1a * s.c()))
        }
        _ => None,
    };
    Ok(SmallDeviation { value, t_form })
}

/// Finite-variance analogue (geometric law): `P(0 < Z(n) <= T) ~ 4T / (sigma^4 n^2)`.
pub fn finite_variance_small_deviation(sigma_sq: f64, n: u64, t: f64) -> f64 {
    4.0 * t / (sigma_sq * sigma_sq * (n as f64) * (n as f64))
}

/// Residual of the series identity
/// `sum_{j>=1} alpha Gamma(j+alpha)/j! t^j = Gamma(alpha+1) ((1-t)^{-alpha} - 1)`,
/// which underpins the certified regime-4 tail bounds.
pub fn term2_identity_check(alpha: f64, t: f64) -> Result<f64, LimitError> {
    check_alpha(alpha)?;
    if !(t >= 0.0 && t < 1.0) {
        return Err(LimitError::BadArgument { what: "t", value: t });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let closed = fx::tgamma(alpha + 1.0) * fx::expm1(-alpha * fx::log1p(-t));
    let mut coef = alpha * fx::tgamma(1.0 + alpha);
    let mut tpow = t;
    let mut sum = 0.0;
    for j in 1..200_000u32 {
        let term = coef * tpow;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        coef *= (j as f64 + alpha) / (j as f64 + 1.0);
        tpow *= t;
    }
    Ok(fx::abs(sum - closed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lst_closed_values() {
        // alpha = 1: 1 - 1/(1+1/lambda)^{1} at lambda=1 -> 1 - 1/2.
        assert!((yaglom_lst(1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        // alpha = 1/2, lambda = 1: 1 - 1/(1+1)^2 = 3/4.
        assert!((yaglom_lst(0.5, 1.0).unwrap() - 0.75).abs() < 1e-15);
        assert!(yaglom_lst(0.5, 0.0).is_err());
        assert!(yaglom_lst(0.5, -1.0).is_err());
        assert!(yaglom_lst(1.5, 1.0).is_err());
    }

    #[test]
    fn lst_large_lambda_asymptotics() {
        // lambda^alpha * (1 - LST complement)... the survival-scale display:
        // 1 - (1+lambda^{-alpha})^{-1/alpha} ~ lambda^{-alpha}/alpha.
        let alpha = 0.5;
        let lambda = 1e6;
        let phi = yaglom_lst(alpha, lambda).unwrap();
        let scaled = phi * alpha * fx::pow(lambda, alpha);
        assert!((scaled - 1.0).abs() < 1e-3, "scaled = {scaled}");
    }

    #[test]
    fn lst_extreme_arguments_stay_in_unit_interval() {
        for &alpha in &[0.3, 0.5, 0.8, 1.0] {
            for &lambda in &[1e-320, 1e-12, 1e-3, 1.0, 1e4, 1e12, 1e300] {
                let v = yaglom_lst(alpha, lambda).unwrap();
                assert!(v > 0.0 && v < 1.0, "alpha={alpha} lambda={lambda} v={v}");
            }
        }
    }

    #[test]
    fn lst_is_completely_monotone_on_grid() {
        // Alternating finite differences on a geometric grid.
        let yag = YaglomLaw::new(0.5).unwrap();
        let h = 0.05;
        let grid: alloc::vec::Vec<f64> = (1..200).map(|i| i as f64 * h).collect();
        let vals: alloc::vec::Vec<f64> =
            grid.iter().map(|&l| yag.lst(l).unwrap()).collect();
        let mut diffs = vals.clone();
        for order in 1..=3usize {
            for i in 0..diffs.len() - 1 {
                diffs[i] = diffs[i + 1] - diffs[i];
            }
            diffs.pop();
            let expected_sign = if order % 2 == 1 { -1.0 } else { 1.0 };
            for (i, &d) in diffs.iter().enumerate() {
                assert!(
                    d * expected_sign >= -1e-12,
                    "difference order {order} wrong sign at {i}: {d}"
                );
            }
        }
    }

    #[test]
    fn cdf_alpha_one_is_unit_exponential() {
        let yag = YaglomLaw::new(1.0).unwrap();
        let mut x = 0.01;
        while x <= 10.0 {
            let got = yag.cdf(x).unwrap();
            let expect = -fx::expm1(-x);
            assert!((got - expect).abs() < 1e-8, "x={x}: {got} vs {expect}");
            x *= 1.6;
        }
    }

    #[test]
    fn cdf_small_x_power_law() {
        // alpha Gamma(1+alpha) M(x) / x^alpha -> 1 monotonically as x -> 0.
        let alpha = 0.5;
        let yag = YaglomLaw::new(alpha).unwrap();
        let scale = alpha * fx::tgamma(1.0 + alpha);
        let mut prev_gap = f64::INFINITY;
        for &x in &[1e-1, 1e-2, 1e-3] {
            let ratio = scale * yag.cdf(x).unwrap() / fx::pow(x, alpha);
            let gap = (ratio - 1.0).abs();
            assert!(gap < prev_gap, "no improvement at x={x}: {gap} vs {prev_gap}");
            prev_gap = gap;
        }
        assert!(prev_gap < 0.02);
    }

    #[test]
    fn conv_cdf_gamma_reference() {
        // alpha = 1: M^{*j} is Gamma(j, 1); j = 2 at x = 1 gives 1 - 2/e.
        let yag = YaglomLaw::new(1.0).unwrap();
        let got = yag.conv_cdf(2, 1.0).unwrap();
        let expect = 1.0 - 2.0 * fx::exp(-1.0);
        assert!((got - expect).abs() < 1e-7, "{got} vs {expect}");
        // General j against the regularized incomplete gamma.
        for j in [3u32, 5, 8] {
            for &x in &[0.5, 2.0, 6.0] {
                let got = yag.conv_cdf(j, x).unwrap();
                let expect = special::reg_lower_gamma(j as f64, x);
                assert!((got - expect).abs() < 1e-6, "j={j} x={x}: {got} vs {expect}");
            }
        }
    }

    #[test]
    fn transform_stays_contractive_on_talbot_contour() {
        // Powers of Phi are only safe under Talbot because |Phi| < 1 along
        // the contour at the radii in use; pin that property.
        for &alpha in &[0.3, 0.5, 0.8, 1.0] {
            for &x in &[0.05, 0.25, 1.0, 4.0, 10.0, 40.0] {
                let m = 40u32;
                let r = 2.0 * m as f64 / (5.0 * x);
                for k in 1..m {
                    let theta = k as f64 * core::f64::consts::PI / m as f64;
                    let cot = fx::cos(theta) / fx::sin(theta);
                    let s = Complex64::new(r * theta * cot, r * theta);
                    let norm = phi_complex(alpha, s).norm();
                    assert!(
                        norm < 1.0,
                        "|Phi| = {norm} at alpha={alpha}, x={x}, node {k}"
                    );
                }
            }
        }
    }

    #[test]
    fn conv_cdf_j1_matches_cdf_bitwise() {
        let yag = YaglomLaw::new(0.5).unwrap();
        for &x in &[0.3, 1.0, 4.0] {
            assert_eq!(yag.conv_cdf(1, x).unwrap(), yag.cdf(x).unwrap());
        }
    }

    #[test]
    fn conv_cdf_matches_grid_self_convolution() {
        // M^{*3}(2) against direct numerical convolution of the inverted
        // density of M^{*2} with M (midpoint rule on the CDF increments).
        let yag = YaglomLaw::new(0.5).unwrap();
        let x = 2.0;
        let n = 400;
        let h = x / n as f64;
        // CDF tables on the grid.
        let m1: alloc::vec::Vec<f64> =
            (0..=n).map(|i| if i == 0 { 0.0 } else { yag.cdf(i as f64 * h).unwrap() }).collect();
        let m2: alloc::vec::Vec<f64> =
            (0..=n).map(|i| if i == 0 { 0.0 } else { yag.conv_cdf(2, i as f64 * h).unwrap() }).collect();
        // P(S2 + X <= x) = sum over increments of M at midpoint weights.
        let mut acc = 0.0;
        for i in 0..n {
            let dm = m1[i + 1] - m1[i];
            // remaining budget for S2 at the midpoint of the increment
            let rest = x - (i as f64 + 0.5) * h;
            let idx = (rest / h).floor() as usize;
            let m2v = if rest <= 0.0 {
                0.0
            } else {
                let frac = rest / h - idx as f64;
                m2[idx.min(n)] * (1.0 - frac) + m2[(idx + 1).min(n)] * frac
            };
            acc += dm * m2v;
        }
        let direct = yag.conv_cdf(3, x).unwrap();
        assert!((acc - direct).abs() < 1e-4, "grid {acc} vs inversion {direct}");
    }

    #[test]
    fn regime_transform_values() {
        // Regime 1, alpha=1/2, lambda=1: (1+1)^{-3} = 1/8.
        assert!((regime1_lst(0.5, 1.0) - 0.125).abs() < 1e-15);
        // Regime 3, alpha=1/2, lambda=1: 2^{-3/2}.
        assert!((regime3_lst(0.5, 1.0) - fx::pow(2.0, -1.5)).abs() < 1e-15);
        // Regime 5, alpha=1, lambda=1: 1 - 1/e.
        assert!((regime5_lst(1.0, 1.0) - (1.0 - fx::exp(-1.0))).abs() < 1e-12);
        // lambda = 0 gives 1 in every regime.
        for &alpha in &[0.3, 0.5, 0.8] {
            assert_eq!(regime1_lst(alpha, 0.0), 1.0);
            assert_eq!(regime2_lst(alpha, 0.4, 0.0), 1.0);
            assert_eq!(regime3_lst(alpha, 0.0), 1.0);
            assert_eq!(regime5_lst(alpha, 0.0), 1.0);
        }
        let yag = YaglomLaw::new(0.5).unwrap();
        let r4 = yag.regime4_transform(1.0, 0.0).unwrap();
        assert!((r4.value - 1.0).abs() < 1e-5, "regime-4 mass {}", r4.value);
    }

    #[test]
    fn regime2_theta_zero_reduces_to_regime1() {
        for &alpha in &[0.3, 0.5, 0.8, 1.0] {
            let mut lambda = 0.05;
            while lambda < 30.0 {
                let a = regime2_lst(alpha, 0.0, lambda);
                let b = regime1_lst(alpha, lambda);
                assert!((a - b).abs() < 1e-12);
                lambda *= 1.7;
            }
        }
    }

    #[test]
    fn regime4_collapses_to_regime3_for_large_y() {
        let yag = YaglomLaw::new(0.5).unwrap();
        let lambda = 1.0;
        let r3 = regime3_lst(0.5, lambda);
        let mut prev_gap = f64::INFINITY;
        for &y in &[10.0, 100.0, 1000.0] {
            let r4 = yag.regime4_transform(y, lambda).unwrap().value;
            let gap = (r4 - r3).abs();
            assert!(gap < prev_gap, "no collapse trend at y={y}");
            prev_gap = gap;
        }
        assert!(prev_gap / r3 < 0.02, "final gap {prev_gap}");
    }

    #[test]
    fn regime4_alpha_one_exponential_reference() {
        // At alpha = 1 the series is sum_j (1+lambda)^{-(1+j)} P(j, y) with
        // Gamma(j,1) convolutions; independent evaluation by incomplete gamma.
        let yag = YaglomLaw::new(1.0).unwrap();
        let (y, lambda) = (1.0, 1.0);
        let got = yag.regime4_transform(y, lambda).unwrap().value;
        let mut expect = 0.0;
        for j in 1..200 {
            expect += fx::pow(2.0, -(1.0 + j as f64)) * special::reg_lower_gamma(j as f64, 1.0);
        }
        assert!((got - expect).abs() < 1e-6, "{got} vs {expect}");
    }

    #[test]
    fn reduced_pmf_sums_to_one() {
        let yag = YaglomLaw::new(0.5).unwrap();
        for &y in &[0.5, 1.0, 2.0] {
            let total = yag.reduced_pmf_total(y).unwrap();
            assert!(
                (total.value - 1.0).abs() < 1e-5,
                "mass at y={y}: {} (bound {})",
                total.value,
                total.tail_bound
            );
        }
    }

    #[test]
    fn reduced_pmf_j1_tends_to_one_for_large_y() {
        let yag = YaglomLaw::new(0.5).unwrap();
        let mut prev = 0.0;
        for &y in &[1.0, 10.0, 1000.0] {
            let p1 = yag.reduced_limit_pmf(y, 1).unwrap();
            assert!(p1 > prev, "not monotone at y={y}");
            prev = p1;
        }
        assert!((prev - 1.0).abs() < 0.05, "p1 at y=1000: {prev}");
    }

    #[test]
    fn reduced_pmf_alpha_one_closed_form() {
        let yag = YaglomLaw::new(1.0).unwrap();
        let p1 = yag.reduced_limit_pmf(1.0, 1).unwrap();
        let expect = 1.0 - fx::exp(-1.0); // Gamma(2)/1! * 1 * M(1)
        assert!((p1 - expect).abs() < 1e-7);
    }

    #[test]
    fn mrca_cdf_properties() {
        let yag = YaglomLaw::new(0.5).unwrap();
        // Bitwise identical to the j=1 reduced pmf.
        for &y in &[0.25, 1.0, 7.0] {
            assert_eq!(yag.mrca_limit_cdf(y).unwrap(), yag.reduced_limit_pmf(y, 1).unwrap());
        }
        // Nondecreasing over a log grid of 64 points in [0.01, 1000].
        let mut prev = -1.0;
        for i in 0..64 {
            let y = 0.01 * fx::pow(1000.0 / 0.01, i as f64 / 63.0);
            let v = yag.mrca_limit_cdf(y).unwrap();
            assert!(v >= prev - 1e-9, "decreasing at y={y}: {v} < {prev}");
            prev = v;
        }
        assert!(prev > 0.95);
    }

    #[test]
    fn term2_identity_residuals() {
        for &alpha in &[0.2, 0.5, 0.9] {
            let mut t = 0.05;
            while t <= 0.9 + 1e-12 {
                let res = term2_identity_check(alpha, t).unwrap();
                assert!(res < 1e-10, "alpha={alpha} t={t}: residual {res}");
                t += 0.05;
            }
        }
        assert_eq!(term2_identity_check(0.5, 0.0).unwrap(), 0.0);
        // alpha = 1: both sides equal t/(1-t); the identity persists.
        let res = term2_identity_check(1.0, 0.5).unwrap();
        assert!(res < 1e-10, "alpha=1 residual {res}");
    }

    #[test]
    fn small_deviation_forms() {
        let law = OffspringLaw::stable_with(0.5, 2.0 / 3.0).unwrap();
        let table = ExtinctionTable::build(&law, 100_000).unwrap();
        let sd = small_deviation_prob(&table, 100_000, 317).unwrap();
        let t_form = sd.t_form.unwrap();
        // Linear in phi.
        let sd2 = small_deviation_prob(&table, 100_000, 634).unwrap();
        assert!((sd2.value / sd.value - 2.0).abs() < 1e-12);
        // The two asymptotic forms approach each other as phi grows; the
        // gap at phi = 317 is about 1.9% (computed from the table itself)
        // and shrinks through the grid.
        let mut prev = f64::INFINITY;
        for &phi in &[317u64, 3_000, 30_000] {
            let s = small_deviation_prob(&table, 100_000, phi).unwrap();
            let ratio = s.t_form.unwrap() / s.value;
            assert!((ratio - 1.0).abs() < prev, "phi={phi}");
            prev = (ratio - 1.0).abs();
        }
        assert!(prev < 2e-3);
        let ratio317 = t_form / sd.value;
        assert!((ratio317 - 1.0).abs() < 0.025, "ratio at phi=317: {ratio317}");

        // Geometric: finite-variance form T/n^2 with sigma^2 = 2.
        let fv = finite_variance_small_deviation(2.0, 400, 21.0);
        assert!((fv - 21.0 / 160_000.0).abs() < 1e-18);
        assert!(small_deviation_prob(&table, 100_000, 0).is_err());
        let unit_table = ExtinctionTable::build(&OffspringLaw::unit(), 10).unwrap();
        assert!(small_deviation_prob(&unit_table, 10, 2).is_err());
    }
}
