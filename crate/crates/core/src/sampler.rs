//! Exact offspring sampling.
//!
//! The stable family is sampled through an alias table over `k < cutoff` plus
//! one aggregated cell for `{xi >= cutoff}`; landing there resolves by
//! inverse-CDF against the stored tail values, falling back to the log-gamma
//! closed form past the table, so the support is never truncated. One `u64`
//! feeds both the alias cell index (top 13 bits) and the 51-bit acceptance
//! fraction, which keeps the per-cell probabilities at the resolution of the
//! f64 table itself.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::law::{OffspringLaw, StableOffspringLaw, TABLE_LEN};

const CELL_BITS: u32 = 13;
const CELLS: usize = 1 << CELL_BITS;
const FRAC_BITS: u32 = 64 - CELL_BITS;
const FRAC_SCALE: f64 = (1u64 << FRAC_BITS) as f64;

#[derive(Clone, Copy, Debug)]
struct AliasCell {
    /// Accept the cell's own outcome when the 51-bit fraction is below this.
    threshold: u64,
    alias: u32,
}

/// Immutable sampling plan for one offspring law; shareable across threads.
#[derive(Clone, Debug)]
pub struct LawSampler {
    kind: SamplerKind,
}

#[derive(Clone, Debug)]
enum SamplerKind {
    Stable(StableSampler),
    Geometric,
    Unit,
}

#[derive(Clone, Debug)]
struct StableSampler {
    cells: Vec<AliasCell>,
    cutoff: u64,
    /// Tail table copied from the law, for the beyond-cutoff walk.
    tail: Vec<f64>,
    alpha: f64,
    c: f64,
}

impl LawSampler {
    pub fn new(law: &OffspringLaw) -> Self {
        let kind = match law {
            OffspringLaw::Stable(s) => SamplerKind::Stable(StableSampler::build(s)),
            OffspringLaw::Geometric(_) => SamplerKind::Geometric,
            OffspringLaw::Unit(_) => SamplerKind::Unit,
        };
        LawSampler { kind }
    }

    /// One exact draw from the offspring law.
    #[inline]
    pub fn sample(&self, rng: &mut impl RngCore) -> u64 {
        match &self.kind {
            SamplerKind::Stable(s) => s.sample(rng),
            SamplerKind::Geometric => sample_geometric(rng),
            SamplerKind::Unit => 1,
        }
    }
}

/// `P(xi = k) = 2^{-(k+1)}` is exactly the law of the number of trailing
/// zeros of unbounded fair bits.
#[inline]
fn sample_geometric(rng: &mut impl RngCore) -> u64 {
    let mut base = 0u64;
    loop {
        let u = rng.next_u64();
        if u != 0 {
            return base + u.trailing_zeros() as u64;
        }
        base += 64;
    }
}

impl StableSampler {
    fn build(law: &StableOffspringLaw) -> Self {
        let cutoff = law.table_cutoff();
        // Outcomes: k = 0..cutoff-1 and one tail outcome with id = cutoff.
        let n_out = cutoff + 1;
        debug_assert!(n_out <= CELLS);
        let mut weights = Vec::with_capacity(CELLS);
        for k in 0..cutoff {
            weights.push(law.pmf(k as u64));
        }
        weights.push(law.tail((cutoff - 1) as u64)); // P(xi >= cutoff)
        weights.resize(CELLS, 0.0);

        // Vose alias construction over CELLS cells.
        let total: f64 = weights.iter().sum();
        let scale = CELLS as f64 / total;
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * scale).collect();
        let mut small: Vec<u32> = Vec::with_capacity(CELLS);
        let mut large: Vec<u32> = Vec::with_capacity(CELLS);
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i as u32);
            } else {
                large.push(i as u32);
            }
        }
        let mut cells = alloc::vec![AliasCell { threshold: 0, alias: 0 }; CELLS];
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            let p = scaled[s as usize];
            cells[s as usize] = AliasCell {
                threshold: to_threshold(p),
                alias: l,
            };
            scaled[l as usize] = (scaled[l as usize] + p) - 1.0;
            if scaled[l as usize] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        for &i in small.iter().chain(large.iter()) {
            // Leftovers are numerically 1; they always keep their own outcome.
            cells[i as usize] = AliasCell { threshold: u64::MAX, alias: i };
        }

        StableSampler {
            cells,
            cutoff: cutoff as u64,
            tail: law.tail_table().to_vec(),
            alpha: law.alpha(),
            c: law.c(),
        }
    }

    #[inline]
    fn sample(&self, rng: &mut impl RngCore) -> u64 {
        let u = rng.next_u64();
        let cell = (u >> FRAC_BITS) as usize;
        let frac = u & ((1u64 << FRAC_BITS) - 1);
        let c = self.cells[cell];
        let outcome = if frac < c.threshold { cell as u64 } else { c.alias as u64 };
        if outcome < self.cutoff {
            outcome
        } else {
            self.sample_tail(rng)
        }
    }

    /// Inverse CDF on `{xi >= cutoff}`: the smallest `k` with
    /// `P(xi > k) <= v` for `v` uniform on `(0, P(xi > cutoff-1))`.
    #[cold]
    fn sample_tail(&self, rng: &mut impl RngCore) -> u64 {
        let bound = self.tail[self.cutoff as usize - 1];
        let v = bound * ((rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0));
        let lo = self.cutoff as usize;
        if v >= self.tail[TABLE_LEN - 1] {
            // Partition point within the stored tail: tail[k] <= v < tail[k-1].
            let mut lo = lo;
            let mut hi = TABLE_LEN - 1;
            while lo < hi {
                let mid = (lo + hi) / 2;
                if self.tail[mid] <= v {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            return lo as u64;
        }
        // Past the table: bisect the log-gamma tail.
        if self.alpha == 1.0 {
            return 2; // P(xi > 2) = 0 for the alpha = 1 member
        }
        let lg1ma = libm::lgamma(1.0 - self.alpha);
        let log_ca = libm::log(self.c * self.alpha);
        let tail_at = |k: f64| -> f64 {
            libm::exp(log_ca - lg1ma + libm::lgamma(k - self.alpha) - libm::lgamma(k + 1.0))
        };
        let mut lo = TABLE_LEN as u64;
        let mut hi = lo;
        while tail_at(hi as f64) > v {
            match hi.checked_mul(2) {
                Some(next) if next < (1u64 << 62) => hi = next,
                _ => return u64::MAX, // astronomically rare; caller flags overflow
            }
        }
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if tail_at(mid as f64) <= v {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }
}

#[inline]
fn to_threshold(p: f64) -> u64 {
    // p in [0, 1] mapped to the 51-bit acceptance scale.
    let t = p * FRAC_SCALE;
    if t >= FRAC_SCALE {
        u64::MAX
    } else if t <= 0.0 {
        0
    } else {
        t as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_key, trial_rng};

    #[test]
    fn unit_law_always_one() {
        let s = LawSampler::new(&OffspringLaw::unit());
        let key = stream_key(7);
        let mut rng = trial_rng(&key, 0);
        for _ in 0..100 {
            assert_eq!(s.sample(&mut rng), 1);
        }
    }

    #[test]
    fn geometric_matches_pmf() {
        let law = OffspringLaw::geometric();
        let s = LawSampler::new(&law);
        let key = stream_key(11);
        let mut rng = trial_rng(&key, 0);
        let n = 2_000_000u64;
        let mut counts = [0u64; 24];
        for _ in 0..n {
            let k = s.sample(&mut rng) as usize;
            counts[k.min(23)] += 1;
        }
        for k in 0..20 {
            let p = law.pmf(k as u64);
            let exp = n as f64 * p;
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (counts[k] as f64 - exp).abs() < 5.0 * sd + 1.0,
                "cell {k}: {} vs {exp}",
                counts[k]
            );
        }
    }

    #[test]
    fn stable_small_cells_match_pmf() {
        let law = OffspringLaw::stable_with(0.5, 2.0 / 3.0).unwrap();
        let s = LawSampler::new(&law);
        let key = stream_key(3);
        let mut rng = trial_rng(&key, 0);
        let n = 4_000_000u64;
        let mut counts = [0u64; 33];
        for _ in 0..n {
            let k = s.sample(&mut rng) as usize;
            counts[k.min(32)] += 1;
        }
        for k in 0..32 {
            let p = law.pmf(k as u64);
            if p == 0.0 {
                assert_eq!(counts[k], 0, "impossible outcome {k} sampled");
                continue;
            }
            let exp = n as f64 * p;
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (counts[k] as f64 - exp).abs() < 5.0 * sd + 1.0,
                "cell {k}: {} vs {exp}",
                counts[k]
            );
        }
    }

    #[test]
    fn stable_tail_walk_frequency() {
        // P(xi > 10^3) estimated from draws against the analytic tail.
        let law = OffspringLaw::stable_with(0.5, 2.0 / 3.0).unwrap();
        let s = LawSampler::new(&law);
        let key = stream_key(5);
        let mut rng = trial_rng(&key, 1);
        let n = 10_000_000u64;
        let mut over = 0u64;
        for _ in 0..n {
            if s.sample(&mut rng) > 1000 {
                over += 1;
            }
        }
        let p = law.tail(1000);
        let exp = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (over as f64 - exp).abs() <= 4.0 * sd,
            "tail hits {over} vs expected {exp} (sd {sd})"
        );
    }
}
