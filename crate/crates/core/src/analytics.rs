//! Size model of the backtracking tree.
//!
//! `a_n` counts the states of the tree enumerating all permutations of `n`
//! objects (root excluded). The variadic `f` nests such trees for a
//! sequence of `(n, α)` tuples, where `α` is the number of sets a pivot may
//! be paired with before a bag of size `n` is enumerated. All counts here
//! exclude the root state; callers comparing with a measured state count
//! add one.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Error;

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `a_1 = 0`, `a_n = n (1 + a_{n-1})`.
pub fn a_n(n: u64) -> BigUint {
    assert!(n >= 1, "a_n is defined for n >= 1");
    let mut a = BigUint::zero();
    for k in 2..=n {
        a = (a + 1u32) * k;
    }
    a
}

/// `n! Σ_{i=1}^{n-1} 1/i!` evaluated with exact rationals.
pub fn a_n_series(n: u64) -> BigRational {
    assert!(n >= 1);
    let mut sum = BigRational::zero();
    for i in 1..n {
        sum += BigRational::new(BigInt::one(), BigInt::from(factorial(i)));
    }
    sum * BigRational::from_integer(BigInt::from(factorial(n)))
}

/// Optimal enumeration of two independent pairs of sizes `p` and `q`:
/// `a_min + min! · a_max`.
pub fn a_pq(p: u64, q: u64) -> BigUint {
    assert!(p >= 1 && q >= 1);
    let (lo, hi) = (p.min(q), p.max(q));
    a_n(lo) + factorial(lo) * a_n(hi)
}

/// `a_{p,q}` from `min[p(1 + a_{p-1,q}), q(1 + a_{p,q-1})]` with
/// `a_{1,q} = a_q` and `a_{p,1} = a_p`.
pub fn a_pq_dp(p: u64, q: u64) -> BigUint {
    assert!(p >= 1 && q >= 1);
    let (p, q) = (p as usize, q as usize);
    let mut t: Vec<Vec<BigUint>> = vec![vec![BigUint::zero(); q + 1]; p + 1];
    for i in 1..=p {
        for j in 1..=q {
            t[i][j] = if i == 1 {
                a_n(j as u64)
            } else if j == 1 {
                a_n(i as u64)
            } else {
                let x = (BigUint::one() + &t[i - 1][j]) * i;
                let y = (BigUint::one() + &t[i][j - 1]) * j;
                x.min(y)
            };
        }
    }
    t[p][q].clone()
}

/// Sequence of `(n, α)` tuples, `n ≥ 2`, `α ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSeq(Vec<(u64, u64)>);

impl TupleSeq {
    pub fn new(tuples: Vec<(u64, u64)>) -> Result<Self, Error> {
        if tuples.is_empty() {
            return Err(Error::InvalidArgument("empty tuple sequence".into()));
        }
        if let Some(&(n, a)) = tuples.iter().find(|&&(n, a)| n < 2 || a < 1) {
            return Err(Error::InvalidArgument(format!("invalid tuple ({n}, {a})")));
        }
        Ok(TupleSeq(tuples))
    }

    pub fn tuples(&self) -> &[(u64, u64)] {
        &self.0
    }

    /// Parses `"n:a,n:a,..."`.
    pub fn parse(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidArgument(format!("expected n:alpha pairs, got {s:?}"));
        let tuples = s
            .split(',')
            .map(|part| {
                let (n, a) = part.trim().split_once(':').ok_or_else(bad)?;
                Ok((n.trim().parse().map_err(|_| bad())?, a.trim().parse().map_err(|_| bad())?))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        TupleSeq::new(tuples)
    }
}

/// `f((n₁,α₁)) = α₁ a_{n₁}`; otherwise `α₁ [a_{n₁} + n₁! f(rest)]`.
pub fn f_variadic(seq: &TupleSeq) -> BigUint {
    f_raw(seq.tuples())
}

pub(crate) fn f_raw(tuples: &[(u64, u64)]) -> BigUint {
    let mut acc = BigUint::zero();
    for (i, &(n, alpha)) in tuples.iter().enumerate().rev() {
        acc = if i + 1 == tuples.len() {
            a_n(n) * alpha
        } else {
            (a_n(n) + factorial(n) * acc) * alpha
        };
    }
    acc
}

/// `f((m,α),(n,β),…) − f((n,β),(m,α),…)`, which does not depend on the
/// tail: `β a_n (α m! − 1) − α a_m (β n! − 1)`.
pub fn delta_f(m: u64, n: u64, alpha: u64, beta: u64) -> BigInt {
    let (am, an) = (BigInt::from(a_n(m)), BigInt::from(a_n(n)));
    let (fm, fn_) = (BigInt::from(factorial(m)), BigInt::from(factorial(n)));
    let (alpha, beta) = (BigInt::from(alpha), BigInt::from(beta));
    &beta * an * (&alpha * fm - 1) - &alpha * am * (beta * fn_ - 1)
}

/// Order minimising `f`: tuples with `α = 1` by increasing `n`, then the
/// others by decreasing `n`, ties by increasing `α`.
pub fn optimal_order(seq: &TupleSeq) -> TupleSeq {
    let mut t = seq.0.clone();
    t.sort_by_key(|&(n, a)| {
        if a == 1 {
            (0u8, n as i128, 0u64)
        } else {
            (1u8, -(n as i128), a)
        }
    });
    TupleSeq(t)
}

/// Bubble sort swapping adjacent tuples whenever `Δf > 0`.
pub fn bubble_order(seq: &TupleSeq) -> TupleSeq {
    let mut t = seq.0.clone();
    let mut swapped = true;
    while swapped {
        swapped = false;
        for i in 1..t.len() {
            let ((m, a), (n, b)) = (t[i - 1], t[i]);
            if delta_f(m, n, a, b) > BigInt::zero() {
                t.swap(i - 1, i);
                swapped = true;
            }
        }
    }
    TupleSeq(t)
}

/// Upper bound on backtracking states for a system of size `N`:
/// `ceil(N · 2437 / 709)`, where `2437/709` exceeds `2(e − 1)`.
pub fn state_bound(n_after_deductions: &BigUint) -> BigUint {
    let num = n_after_deductions * 2437u32;
    (num + 708u32) / 709u32
}
