//! Order-stable accumulation of Monte Carlo moments.
//!
//! Workers fill per-chunk accumulators independently; the driver merges them
//! in fixed chunk order, so the end result is bit-identical for any worker
//! count. Sums are Neumaier-compensated, which also makes the merge order the
//! only ordering that matters.

/// Compensated first and second moments of a weight sequence.
#[derive(Clone, Copy, Debug, Default)]
pub struct MomentAccum {
    count: u64,
    sum: f64,
    sum_c: f64,
    sum_sq: f64,
    sum_sq_c: f64,
}

#[inline]
fn neumaier(acc: &mut f64, comp: &mut f64, x: f64) {
    let t = *acc + x;
    if acc.abs() >= x.abs() {
        *comp += (*acc - t) + x;
    } else {
        *comp += (x - t) + *acc;
    }
    *acc = t;
}

impl MomentAccum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, w: f64) {
        self.count += 1;
        neumaier(&mut self.sum, &mut self.sum_c, w);
        neumaier(&mut self.sum_sq, &mut self.sum_sq_c, w * w);
    }

    /// Merge another accumulator; callers must apply merges in a fixed order.
    pub fn merge(&mut self, other: &MomentAccum) {
        self.count += other.count;
        neumaier(&mut self.sum, &mut self.sum_c, other.sum);
        neumaier(&mut self.sum, &mut self.sum_c, other.sum_c);
        neumaier(&mut self.sum_sq, &mut self.sum_sq_c, other.sum_sq);
        neumaier(&mut self.sum_sq, &mut self.sum_sq_c, other.sum_sq_c);
    }

    #[inline]
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.sum_c
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.count as f64
    }

    /// Standard error of the mean, `s / sqrt(count)`.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let n = self.count as f64;
        let s = self.sum();
        let ss = self.sum_sq + self.sum_sq_c;
        let var = ((ss - s * s / n) / (n - 1.0)).max(0.0);
        libm::sqrt(var / n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr() {
        let mut a = MomentAccum::new();
        for x in [1.0, 2.0, 3.0, 4.0] {
            a.add(x);
        }
        assert_eq!(a.mean(), 2.5);
        // sample sd = sqrt(5/3), stderr = sd/2
        assert!((a.stderr() - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn merge_equals_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 101.0).collect();
        let mut whole = MomentAccum::new();
        for &x in &xs {
            whole.add(x);
        }
        let mut left = MomentAccum::new();
        let mut right = MomentAccum::new();
        for &x in &xs[..500] {
            left.add(x);
        }
        for &x in &xs[500..] {
            right.add(x);
        }
        let mut merged = left;
        merged.merge(&right);
        assert_eq!(merged.count(), whole.count());
        assert!((merged.mean() - whole.mean()).abs() < 1e-15);
        assert!((merged.stderr() - whole.stderr()).abs() < 1e-15);
    }

    #[test]
    fn constant_weights_have_zero_stderr() {
        let mut a = MomentAccum::new();
        for _ in 0..100 {
            a.add(1.0);
        }
        assert_eq!(a.mean(), 1.0);
        assert_eq!(a.stderr(), 0.0);
    }
}
