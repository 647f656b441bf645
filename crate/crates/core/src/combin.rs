//! Exact combinatorics: Stirling numbers of the second kind and partial Bell
//! polynomials at all-ones arguments.
//!
//! The two are equal (`B_{J,k}(1,...,1) = S(J,k)`), but they are computed by
//! different recurrences on purpose — the triangular Stirling recurrence
//! versus the binomial Bell recurrence — so each serves as an independent
//! check of the other.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Exact range supported without overflow checks.
pub const MAX_J: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombinError {
    OutOfRange { j: u32, k: u32 },
}

impl fmt::Display for CombinError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CombinError::OutOfRange { j, k } => {
                write!(f, "(J, k) = ({j}, {k}) outside 1 <= k <= J <= {MAX_J}")
            }
        }
    }
}

impl core::error::Error for CombinError {}

fn check(j: u32, k: u32) -> Result<(), CombinError> {
    if k >= 1 && k <= j && j <= MAX_J {
        Ok(())
    } else {
        Err(CombinError::OutOfRange { j, k })
    }
}

/// `S(J, k)` by the triangular recurrence `S(n,k) = k S(n-1,k) + S(n-1,k-1)`.
pub fn stirling2(j: u32, k: u32) -> Result<u128, CombinError> {
    check(j, k)?;
    let mut row: Vec<u128> = vec![0; k as usize + 1];
    row[0] = 1; // S(0,0)
    for _n in 1..=j {
        for i in (1..=k as usize).rev() {
            row[i] = (i as u128) * row[i] + row[i - 1];
        }
        row[0] = 0;
    }
    Ok(row[k as usize])
}

/// `B_{J,k}(1,1,...,1)` by the Bell-polynomial recurrence
/// `B_{n,k} = sum_i C(n-1, i-1) B_{n-i, k-1}`.
pub fn bell_at_ones(j: u32, k: u32) -> Result<u128, CombinError> {
    check(j, k)?;
    let jd = j as usize;
    let kd = k as usize;
    // Pascal triangle up to j-1.
    let mut binom = vec![vec![0u128; jd]; jd];
    for n in 0..jd {
        binom[n][0] = 1;
        for r in 1..=n {
            binom[n][r] = binom[n - 1][r - 1] + if r <= n - 1 { binom[n - 1][r] } else { 0 };
        }
    }
    let mut b = vec![vec![0u128; kd + 1]; jd + 1];
    b[0][0] = 1;
    for n in 1..=jd {
        for kk in 1..=kd.min(n) {
            let mut acc = 0u128;
            for i in 1..=(n - kk + 1) {
                acc += binom[n - 1][i - 1] * b[n - i][kk - 1];
            }
            b[n][kk] = acc;
        }
    }
    Ok(b[jd][kd])
}
