//! Per-trial Monte Carlo kernels.
//!
//! [`simulate_trajectory`] runs the population-size chain `Z(0..=n)`;
//! [`run_checkpoints`] is the allocation-free variant used by estimator hot
//! loops. [`simulate_reduced`] realizes the family tree depth-first with an
//! explicit stack and extracts the reduced counts `Z(m,n)` (generation-`m`
//! individuals with descendants at the horizon) together with the ancestor
//! distance `d(n)`. [`simulate_level_tree`] realizes the same tree
//! breadth-first, consuming the random stream in exactly the order of
//! [`run_checkpoints`], so a trial that was screened cheaply can be replayed
//! with full genealogy when it turns out to matter.
//!
//! Populations at or beyond `2^63` abort the trial with an overflow flag;
//! such trials are counted separately by the drivers (they cannot satisfy a
//! small-deviation event at the horizon).

use alloc::vec::Vec;

use crate::gf::{ExtinctionTable, GfError};
use crate::rng::TrialRng;
use crate::sampler::LawSampler;

/// Population values must stay below this.
pub const OVERFLOW_LIMIT: u64 = 1 << 63;
/// Single draws at or beyond this abort the trial outright. (A single
/// offspring count this size has probability below 1e-28 per draw; treating
/// it as overflow keeps the summation loop free of checked arithmetic.)
const HUGE_DRAW: u64 = 1 << 62;

/// The small-deviation conditioning event `{0 < Z(n) <= floor(w / u_phi)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventSpec {
    pub n: u64,
    pub phi: u64,
    pub w: f64,
    /// `floor(w / u_phi)`; ties at the boundary are included.
    pub t_int: u64,
}

impl EventSpec {
    pub fn new(table: &ExtinctionTable, n: u64, phi: u64, w: f64) -> Result<Self, GfError> {
        if phi >= n {
            return Err(GfError::OutOfRange { n: phi, n_max: n });
        }
        let u_phi = table.survival(phi)?;
        // The relative nudge absorbs iteration rounding when w/u_phi sits on
        // an integer (e.g. the geometric law's exact 1/u_phi = phi + 1).
        let t_int = libm::floor((w / u_phi) * (1.0 + 1e-9)) as u64;
        Ok(EventSpec { n, phi, w, t_int })
    }

    #[inline]
    pub fn holds(&self, z_n: u64) -> bool {
        z_n > 0 && z_n <= self.t_int
    }
}

/// A realized population-size path.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// `Z(0..=n)`; truncated early only on overflow.
    pub z: Vec<u64>,
    /// First generation with `Z(k) = 0`, if the path died by the horizon.
    pub absorbed_at: Option<u64>,
    /// Generation at which the population exceeded the overflow limit.
    pub overflow_at: Option<u64>,
}

/// Reduced-process observables of one trial.
#[derive(Clone, Debug)]
pub struct ReducedCounts {
    /// `(m, Z(m, n))` for each requested checkpoint.
    pub counts: Vec<(u64, u64)>,
    /// `d(n) = n - beta(n)`, present iff `Z(n) > 0`.
    pub mrca_distance: Option<u64>,
}

/// Monte Carlo point estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Trials satisfying the conditioning event.
    pub hits: u64,
    pub trials: u64,
    pub seed: u64,
    /// Transform argument, when the estimate is an LST point.
    pub lambda: Option<f64>,
}

/// Sum of `count` offspring draws; `None` flags overflow.
#[inline]
fn next_generation(s: &LawSampler, count: u64, rng: &mut TrialRng) -> Option<u64> {
    let mut acc = 0u64;
    for _ in 0..count {
        let d = s.sample(rng);
        if d >= HUGE_DRAW {
            return None;
        }
        acc += d;
        if acc >= OVERFLOW_LIMIT {
            return None;
        }
    }
    Some(acc)
}

/// Run the population chain to generation `n`.
pub fn simulate_trajectory(s: &LawSampler, n: u64, rng: &mut TrialRng) -> Trajectory {
    let mut z = Vec::with_capacity(n as usize + 1);
    z.push(1u64);
    let mut cur = 1u64;
    let mut absorbed_at = None;
    for k in 0..n {
        if cur == 0 {
            z.push(0);
            continue;
        }
        match next_generation(s, cur, rng) {
            Some(next) => {
                cur = next;
                z.push(cur);
                if cur == 0 && absorbed_at.is_none() {
                    absorbed_at = Some(k + 1);
                }
            }
            None => {
                return Trajectory { z, absorbed_at: None, overflow_at: Some(k + 1) };
            }
        }
    }
    Trajectory { z, absorbed_at, overflow_at: None }
}

/// Hot-loop variant: record `Z` only at the sorted `checkpoints` (values in
/// `0..=n`), writing into `out`. Returns `(Z(n), overflow)`; after overflow
/// the outputs are meaningless and the trial must be discarded.
#[inline]
pub fn run_checkpoints(
    s: &LawSampler,
    n: u64,
    checkpoints: &[u64],
    rng: &mut TrialRng,
    out: &mut [u64],
) -> (u64, bool) {
    debug_assert_eq!(checkpoints.len(), out.len());
    let mut cur = 1u64;
    let mut ci = 0usize;
    for k in 0..=n {
        while ci < checkpoints.len() && checkpoints[ci] == k {
            out[ci] = cur;
            ci += 1;
        }
        if k == n {
            break;
        }
        if cur == 0 {
            // Everything later is zero, including remaining checkpoints.
            for slot in out[ci..].iter_mut() {
                *slot = 0;
            }
            return (0, false);
        }
        cur = match next_generation(s, cur, rng) {
            Some(v) => v,
            None => return (0, true),
        };
    }
    (cur, false)
}

/// Depth-first realization of the family tree to depth `n` with an explicit
/// stack (depth bounded by `n`), producing the trajectory and the reduced
/// counts at the requested checkpoints.
pub fn simulate_reduced(
    s: &LawSampler,
    n: u64,
    checkpoints: &[u64],
    rng: &mut TrialRng,
) -> (Trajectory, ReducedCounts) {
    struct Frame {
        pending: u64,
        reached: bool,
    }

    let nn = n as usize;
    let mut z = alloc::vec![0u64; nn + 1];
    let mut reduced = alloc::vec![0u64; nn + 1];
    let mut overflow_at: Option<u64> = None;

    z[0] = 1;
    if n == 0 {
        reduced[0] = 1;
    } else {
        let mut stack: Vec<Frame> = Vec::with_capacity(nn + 1);
        let root_draw = s.sample(rng);
        if root_draw >= HUGE_DRAW {
            overflow_at = Some(1);
        } else {
            stack.push(Frame { pending: root_draw, reached: false });
        }
        'dfs: while let Some(top_idx) = stack.len().checked_sub(1) {
            if stack[top_idx].pending > 0 {
                stack[top_idx].pending -= 1;
                let depth = top_idx + 1;
                z[depth] += 1;
                if z[depth] >= OVERFLOW_LIMIT {
                    overflow_at = Some(depth as u64);
                    break 'dfs;
                }
                if depth == nn {
                    stack[top_idx].reached = true;
                } else {
                    let d = s.sample(rng);
                    if d >= HUGE_DRAW {
                        overflow_at = Some(depth as u64 + 1);
                        break 'dfs;
                    }
                    stack.push(Frame { pending: d, reached: false });
                }
            } else {
                let frame = stack.pop().expect("stack nonempty");
                if frame.reached {
                    reduced[top_idx] += 1;
                    if top_idx > 0 {
                        stack[top_idx - 1].reached = true;
                    }
                }
            }
        }
        reduced[nn] = z[nn];
        if z[nn] > 0 {
            reduced[0] = 1;
        }
    }

    if let Some(at) = overflow_at {
        let trajectory = Trajectory {
            z: z[..at as usize].to_vec(),
            absorbed_at: None,
            overflow_at,
        };
        return (trajectory, ReducedCounts { counts: Vec::new(), mrca_distance: None });
    }

    let absorbed_at = z.iter().position(|&v| v == 0).map(|k| k as u64);
    let mrca_distance = if z[nn] > 0 {
        // beta(n) = max m < n with Z(m, n) = 1; exists since Z(0, n) = 1.
        (0..nn).rev().find(|&m| reduced[m] == 1).map(|m| n - m as u64)
    } else {
        None
    };
    let counts = checkpoints
        .iter()
        .map(|&m| (m, reduced.get(m as usize).copied().unwrap_or(0)))
        .collect();
    (
        Trajectory { z, absorbed_at, overflow_at: None },
        ReducedCounts { counts, mrca_distance },
    )
}

/// Breadth-first tree realization with per-node offspring counts recorded
/// level by level. Draws occur in exactly the order of [`run_checkpoints`],
/// so replaying a trial's stream reproduces the same trajectory.
#[derive(Clone, Debug, Default)]
pub struct LevelTree {
    /// `offspring[k][i]`: offspring count of the `i`-th node of generation
    /// `k`, for `k < n` while the population is alive.
    pub offspring: Vec<Vec<u64>>,
}

impl LevelTree {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, n: usize) {
        if self.offspring.len() < n {
            self.offspring.resize_with(n, Vec::new);
        }
        for level in self.offspring.iter_mut() {
            level.clear();
        }
    }
}

/// Returns `(Z(n), overflow)`.
pub fn simulate_level_tree(
    s: &LawSampler,
    n: u64,
    rng: &mut TrialRng,
    tree: &mut LevelTree,
) -> (u64, bool) {
    tree.reset(n as usize);
    let mut cur = 1u64;
    for k in 0..n as usize {
        if cur == 0 {
            return (0, false);
        }
        let level = &mut tree.offspring[k];
        level.reserve(cur as usize);
        let mut acc = 0u64;
        for _ in 0..cur {
            let d = s.sample(rng);
            if d >= HUGE_DRAW {
                return (0, true);
            }
            level.push(d);
            acc += d;
            if acc >= OVERFLOW_LIMIT {
                return (0, true);
            }
        }
        cur = acc;
    }
    (cur, false)
}

/// Reduced counts `Z(m, n)` for every `m = 0..=n` from a recorded tree.
pub fn reduced_counts_from_levels(tree: &LevelTree, n: u64, z_n: u64) -> Vec<u64> {
    let nn = n as usize;
    let mut reduced = alloc::vec![0u64; nn + 1];
    reduced[nn] = z_n;
    if z_n == 0 {
        return reduced;
    }
    // reach[i] for the generation below the one being processed.
    let mut reach_below: Vec<bool> = alloc::vec![true; z_n as usize];
    for m in (0..nn).rev() {
        let level = &tree.offspring[m];
        let mut reach: Vec<bool> = Vec::with_capacity(level.len());
        let mut child = 0usize;
        let mut count = 0u64;
        for &o in level.iter() {
            let mut hit = false;
            for _ in 0..o {
                hit |= reach_below[child];
                child += 1;
            }
            reach.push(hit);
            count += hit as u64;
        }
        reduced[m] = count;
        reach_below = reach;
    }
    reduced
}

/// `beta(n)`-based ancestor distance from a full reduced-count vector.
pub fn mrca_distance_from_reduced(reduced: &[u64], n: u64) -> Option<u64> {
    if *reduced.last()? == 0 {
        return None;
    }
    (0..n as usize).rev().find(|&m| reduced[m] == 1).map(|m| n - m as u64)
}
