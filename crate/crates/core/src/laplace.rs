//! Numerical inversion of Laplace transforms.
//!
//! Three classical backends, deliberately different in character so they can
//! cross-check each other:
//!
//! * [`talbot`] — the fixed Talbot contour (trapezoid rule on a cotangent
//!   contour). Very accurate for transforms analytic off the negative real
//!   axis, but the contour enters the left half-plane, so integrands that
//!   grow there (e.g. high convolution powers of a transform) amplify
//!   roundoff.
//! * [`euler`] — the Fourier-series method on a Bromwich line with Euler
//!   (binomial) acceleration of the alternating series. Evaluates only at
//!   `Re s = a/(2t) > 0`, where transforms of probability measures satisfy
//!   `|F(s)| <= F(Re s)`, so it stays stable for convolution powers.
//! * [`gaver_stehfest`] — Salzer-accelerated Gaver functionals; real
//!   evaluations only.
//!
//! All return `f(t)` for a locally smooth `f`; accuracy in binary64 is about
//! `1e-9`..`1e-12` for the transforms in this crate.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fx;

/// Fixed-Talbot inversion with `m` nodes (Abate–Valko parameterization).
pub fn talbot(f: impl Fn(Complex64) -> Complex64, t: f64, m: u32) -> f64 {
    debug_assert!(t > 0.0);
    let m = m.max(8);
    let r = 2.0 * m as f64 / (5.0 * t);
    // theta = 0 term: s = r on the real axis.
    let mut sum = 0.5 * f(Complex64::new(r, 0.0)).re * fx::exp(r * t);
    for k in 1..m {
        let theta = k as f64 * core::f64::consts::PI / m as f64;
        let cot = fx::cos(theta) / fx::sin(theta);
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let est = (Complex64::new(0.0, t * s.im) + t * s.re).exp()
            * f(s)
            * Complex64::new(1.0, sigma);
        sum += est.re;
    }
    sum * r / m as f64
}

/// Parameters for [`euler`]: discretization error is about `e^{-a}`, and the
/// binomial average of `terms_avg` partial sums after `terms_base` terms
/// accelerates the alternating Fourier series.
#[derive(Clone, Copy, Debug)]
pub struct EulerParams {
    pub a: f64,
    pub terms_base: u32,
    pub terms_avg: u32,
}

impl Default for EulerParams {
    fn default() -> Self {
        EulerParams { a: 23.0, terms_base: 26, terms_avg: 13 }
    }
}

/// Euler-accelerated Fourier series inversion.
pub fn euler(f: impl Fn(Complex64) -> Complex64, t: f64, p: EulerParams) -> f64 {
    debug_assert!(t > 0.0);
    let a = p.a;
    let x = a / (2.0 * t);
    let pi_t = core::f64::consts::PI / t;
    let scale = fx::exp(a / 2.0) / t;

    let base = 0.5 * f(Complex64::new(x, 0.0)).re;
    let total_terms = p.terms_base + p.terms_avg;
    let mut partial = Vec::with_capacity(p.terms_avg as usize + 1);
    let mut acc = base;
    let mut sign = -1.0;
    for k in 1..=total_terms {
        let s = Complex64::new(x, k as f64 * pi_t);
        acc += sign * f(s).re;
        sign = -sign;
        if k >= p.terms_base {
            partial.push(acc);
        }
    }
    // Binomial (Euler) average of the last terms_avg+1 partial sums.
    let mavg = p.terms_avg;
    let mut avg = 0.0;
    let mut binom = 1.0f64;
    for (j, &s_j) in partial.iter().enumerate() {
        avg += binom * s_j;
        binom *= (mavg as f64 - j as f64) / (j as f64 + 1.0);
    }
    scale * avg / fx::pow(2.0, mavg as f64)
}

/// Gaver–Stehfest inversion with `2 * n_half` terms (real evaluations only).
/// `n_half = 8` is a good binary64 compromise.
pub fn gaver_stehfest(f: impl Fn(f64) -> f64, t: f64, n_half: u32) -> f64 {
    debug_assert!(t > 0.0);
    let n = 2 * n_half as usize;
    let weights = stehfest_weights(n);
    let ln2_t = core::f64::consts::LN_2 / t;
    let mut sum = 0.0;
    for (k, w) in weights.iter().enumerate() {
        sum += w * f((k + 1) as f64 * ln2_t);
    }
    sum * ln2_t
}

/// Salzer weights `V_k` for even `n`, from exact integer factorials.
fn stehfest_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    let fact = |m: usize| -> f64 {
        let mut acc = 1.0f64;
        for i in 2..=m {
            acc *= i as f64;
        }
        acc
    };
    let mut v = Vec::with_capacity(n);
    for k in 1..=n {
        let mut sum = 0.0;
        let j_lo = k.div_ceil(2);
        let j_hi = k.min(half);
        for j in j_lo..=j_hi {
            let num = fx::pow(j as f64, half as f64) * fact(2 * j);
            let den =
                fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k);
            sum += num / den;
        }
        let sign = if (k + half) % 2 == 0 { 1.0 } else { -1.0 };
        v.push(sign * sum);
    }
    v
}
