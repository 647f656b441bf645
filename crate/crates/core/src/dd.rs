//! Minimal double-double arithmetic used when building high-accuracy tables.
//!
//! Only the handful of operations the table builders need; each value is an
//! unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.

use crate::fx;

#[derive(Clone, Copy, Debug)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    // Requires |a| >= |b|.
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: fx::fma(a, b, -p),
    }
}

#[inline]
pub fn add(a: Dd, b: Dd) -> Dd {
    let s = two_sum(a.hi, b.hi);
    quick_two_sum(s.hi, s.lo + a.lo + b.lo)
}

#[inline]
pub fn sub(a: Dd, b: Dd) -> Dd {
    add(a, Dd { hi: -b.hi, lo: -b.lo })
}

#[inline]
pub fn mul_f64(a: Dd, b: f64) -> Dd {
    let p = two_prod(a.hi, b);
    quick_two_sum(p.hi, p.lo + a.lo * b)
}

#[inline]
pub fn div_f64(a: Dd, b: f64) -> Dd {
    let q1 = a.hi / b;
    let r = sub(a, two_prod(q1, b));
    let q2 = (r.hi + r.lo) / b;
    quick_two_sum(q1, q2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_recovers_lost_bits() {
        let a = Dd::from_f64(1.0);
        let tiny = Dd::from_f64(1e-25);
        let s = add(a, tiny);
        let back = sub(s, a);
        assert_eq!(back.to_f64(), 1e-25);
    }

    #[test]
    fn dd_div_roundtrip() {
        let x = div_f64(Dd::from_f64(1.0), 3.0);
        let y = mul_f64(x, 3.0);
        assert!((y.to_f64() - 1.0).abs() < 1e-30);
    }
}
