//! Thin wrappers over `libm` so the crate builds without `std` float methods.

#![allow(dead_code)]

#[inline(always)]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline(always)]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline(always)]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline(always)]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline(always)]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline(always)]
pub fn log1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline(always)]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline(always)]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline(always)]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline(always)]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline(always)]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline(always)]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline(always)]
pub fn tan(x: f64) -> f64 {
    libm::tan(x)
}

#[inline(always)]
pub fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

#[inline(always)]
pub fn tgamma(x: f64) -> f64 {
    libm::tgamma(x)
}

#[inline(always)]
pub fn fma(a: f64, b: f64, c: f64) -> f64 {
    libm::fma(a, b, c)
}
