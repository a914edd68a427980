//! Closed forms, recursions, and bounds for the expected number of package
//! drawings, plus the missing-count chain that carries the exact computation
//! to large `n`.
//!
//! Throughout, `n` is the number of coupon types and `s` the package size.
//! `Y` denotes the number of rounds until the collection is complete.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::comb::{binomial, dd, hyper_kernel};
use crate::value::{wrap, ExactValue, Mode, Scalar};
use crate::{Error, Result};

/// Partial sum of the harmonic series, `H_n = 1 + 1/2 + ... + 1/n` (`H_0 = 0`).
pub fn harmonic(n: u64, mode: Mode) -> Result<ExactValue> {
    Ok(match mode {
        Mode::Exact => wrap(harmonic_t::<BigRational>(n)),
        Mode::Float => wrap(harmonic_t::<f64>(n)),
    })
}

fn harmonic_t<T: Scalar>(n: u64) -> T {
    // smallest terms first so the float path loses nothing to absorption
    let mut acc = T::zero();
    for i in (1..=n).rev() {
        acc += T::ratio(1, i);
    }
    acc
}

/// Expected rounds for the classical single-coupon collector, `n * H_n`.
pub fn classical_expectation(n: u64, mode: Mode) -> Result<ExactValue> {
    if n == 0 {
        return Err(Error::invalid("classical expectation needs n >= 1"));
    }
    Ok(match mode {
        Mode::Exact => wrap(T_classical::<BigRational>(n)),
        Mode::Float => wrap(T_classical::<f64>(n)),
    })
}

#[allow(non_snake_case)]
fn T_classical<T: Scalar>(n: u64) -> T {
    T::from_u64(n) * harmonic_t::<T>(n)
}

fn check_ns(n: u64, s: u64, smax: u64) -> Result<()> {
    if n == 0 || s == 0 || s > smax {
        return Err(Error::invalid(format!(
            "need 1 <= s <= {smax} for n = {n}, got s = {s}"
        )));
    }
    Ok(())
}

/// Expected rounds when every package is a uniformly random `s`-subset.
///
/// Computed by the first-passage recursion on the number of distinct coupons
/// seen so far: with `k` coupons still missing after conditioning, the number
/// hit by the next package is hypergeometric. Requires `1 <= s <= n`; at
/// `s = n` a single round completes the collection.
pub fn uniform_expectation(n: u64, s: u64, mode: Mode) -> Result<ExactValue> {
    check_ns(n, s, n)?;
    Ok(match mode {
        Mode::Exact => wrap(uniform_rec::<BigRational>(n, s)),
        Mode::Float => wrap(uniform_rec::<f64>(n, s)),
    })
}

/// Intermediate values `a_1 ..= a_{n-s}` of the uniform recursion, where
/// `a_k` is the expected number of further rounds when `k` coupons are
/// missing. The answer itself is `1 + a_{n-s}`.
pub fn uniform_recursion_terms(n: u64, s: u64, mode: Mode) -> Result<Vec<ExactValue>> {
    check_ns(n, s, n)?;
    Ok(match mode {
        Mode::Exact => uniform_terms::<BigRational>(n, s).into_iter().map(wrap).collect(),
        Mode::Float => uniform_terms::<f64>(n, s).into_iter().map(wrap).collect(),
    })
}

fn uniform_terms<T: Scalar>(n: u64, s: u64) -> Vec<T> {
    // a_0 = 0; for 1 <= k <= n-s,
    //   a_k = (1 + sum_{i=1..min(s,k)} P(B_i) a_{k-i}) / (1 - P(B_0)),
    // where B_i is the event that a package hits exactly i of the k missing
    // coupons. The hypergeometric weights come out of the shared kernel.
    let mut a: Vec<T> = vec![T::zero()];
    for k in 1..=n.saturating_sub(s) {
        let (lo, probs) = hyper_kernel::<T>(n, k, s);
        debug_assert_eq!(lo, 0, "k <= n-s leaves room for an all-miss package");
        let mut num = T::one();
        let mut den = T::one();
        for (off, p) in probs.iter().enumerate() {
            let i = lo + off as u64;
            if i == 0 {
                den = den - p.clone();
            } else {
                num += p.clone() * a[(k - i) as usize].clone();
            }
        }
        a.push(num / den);
    }
    a.remove(0);
    a
}

fn uniform_rec<T: Scalar>(n: u64, s: u64) -> T {
    if s == n {
        return T::one();
    }
    T::one() + uniform_terms::<T>(n, s).pop().expect("n > s gives at least a_1")
}

/// Expected rounds for the uniform scheme via inclusion-exclusion:
/// `E[Y] = sum_{j=1..n} (-1)^{j+1} C(n,j) / (1 - q_j)` with
/// `q_j = C(n-j,s) / C(n,s)`.
///
/// Requires `1 <= s <= n - 1`; at `s = n` the alternating sum degenerates
/// (every `q_j` vanishes) and the recursion should be used instead. The float
/// path runs in double-double arithmetic because the alternating terms grow
/// like `C(n, n/2)` while the answer stays `O(n log n)`.
pub fn uniform_expectation_ie(n: u64, s: u64, mode: Mode) -> Result<ExactValue> {
    check_ns(n, s, n.saturating_sub(1))?;
    match mode {
        Mode::Exact => {
            let total = BigRational::from_integer(binomial(n, s).into());
            let mut sum = BigRational::zero();
            for j in 1..=n {
                let cnj = BigRational::from_integer(binomial(n, j).into());
                let qj = BigRational::from_integer(binomial(n - j, s).into()) / total.clone();
                let term = cnj / (BigRational::one() - qj);
                if j % 2 == 1 {
                    sum += term;
                } else {
                    sum -= term;
                }
            }
            Ok(ExactValue::Exact(sum))
        }
        Mode::Float => Ok(ExactValue::Float(uniform_ie_f64(n, s))),
    }
}

fn uniform_ie_f64(n: u64, s: u64) -> f64 {
    use dd::*;
    let mut sum = Dd::ZERO;
    let mut cnj = Dd::from(1.0);
    let mut qj = Dd::from(1.0);
    for j in 1..=n {
        // C(n,j) and q_j = prod_{v<j} (n-s-v)/(n-v), updated incrementally
        cnj = div(mul(cnj, Dd::from((n - j + 1) as f64)), Dd::from(j as f64));
        let term = if j <= n - s {
            qj = mul(
                qj,
                div(Dd::from((n - s - j + 1) as f64), Dd::from((n - j + 1) as f64)),
            );
            div(cnj, sub(Dd::from(1.0), qj))
        } else {
            cnj
        };
        sum = if j % 2 == 1 { add(sum, term) } else { sub(sum, term) };
    }
    sum.to_f64()
}

/// Expected rounds when the `n` packages are the cyclic windows
/// `{j+1, ..., j+s}` (mod `n`), each with probability `1/n`.
///
/// For `floor(n/2) <= s <= n-1` the uncovered region is always a single
/// circular arc, so the process collapses to the arc length and satisfies
/// `t_k = (n + 2 sum_{i<k} t_i) / (s + k - 1)` with `E[Y] = 1 + t_{n-s}`.
/// Outside that range the uncovered set can split into several arcs and the
/// collapse is invalid, which is reported as an error.
pub fn arcs_expectation(n: u64, s: u64, mode: Mode) -> Result<ExactValue> {
    Ok(match mode {
        Mode::Exact => wrap(T_arcs::<BigRational>(n, s)?),
        Mode::Float => wrap(T_arcs::<f64>(n, s)?),
    })
}

fn check_arcs(n: u64, s: u64) -> Result<()> {
    if n < 2 || s < n / 2 || s > n - 1 {
        return Err(Error::StateCollapse { n, s });
    }
    Ok(())
}

#[allow(non_snake_case)]
fn T_arcs<T: Scalar>(n: u64, s: u64) -> Result<T> {
    Ok(T::one() + arcs_terms::<T>(n, s)?.pop().expect("s <= n-1"))
}

/// The recursion intermediates `t_1 ..= t_{n-s}`, where `t_k` is the expected
/// number of further rounds when the uncovered arc has length `k`.
pub fn arcs_recursion_terms(n: u64, s: u64, mode: Mode) -> Result<Vec<ExactValue>> {
    Ok(match mode {
        Mode::Exact => arcs_terms::<BigRational>(n, s)?.into_iter().map(wrap).collect(),
        Mode::Float => arcs_terms::<f64>(n, s)?.into_iter().map(wrap).collect(),
    })
}

fn arcs_terms<T: Scalar>(n: u64, s: u64) -> Result<Vec<T>> {
    check_arcs(n, s)?;
    let mut terms = Vec::with_capacity((n - s) as usize);
    let mut running = T::zero();
    for k in 1..=n - s {
        let tk = (T::from_u64(n) + T::from_u64(2) * running.clone()) / T::from_u64(s + k - 1);
        running += tk.clone();
        terms.push(tk);
    }
    Ok(terms)
}

/// Closed form of the arcs recursion, `E[Y] = 1 + n^2 / (s(s+1))`.
pub fn arcs_closed_form(n: u64, s: u64, mode: Mode) -> Result<ExactValue> {
    check_arcs(n, s)?;
    Ok(match mode {
        Mode::Exact => wrap(
            BigRational::one()
                + BigRational::ratio(n * n, s * (s + 1)),
        ),
        Mode::Float => wrap(1.0 + (n as f64) * (n as f64) / ((s * (s + 1)) as f64)),
    })
}

/// Expected rounds for the near-decomposition scheme: `m = ceil(n/s)` blocks,
/// the last padded with already-used labels, drawn uniformly. The waiting
/// time is a classical collector over the `m` blocks, so `E[Y] = m * H_m`.
pub fn near_decomposition_expectation(n: u64, s: u64, mode: Mode) -> Result<ExactValue> {
    check_ns(n, s, n.saturating_sub(1))?;
    let m = n.div_ceil(s);
    Ok(match mode {
        Mode::Exact => wrap(T_classical::<BigRational>(m)),
        Mode::Float => wrap(T_classical::<f64>(m)),
    })
}

/// Expected rounds for the rotation scheme: `m = floor(n/(n-s))` windows, the
/// `j`-th being `{j(n-s)+1, ..., j(n-s)+s}` reduced mod `n`. Any two distinct
/// windows already cover everything, so `Y` is geometric after the first draw
/// and `E[Y] = 1 + m/(m-1)`. Requires `s >= n/2`, i.e. `m >= 2`.
pub fn rotation_expectation(n: u64, s: u64, mode: Mode) -> Result<ExactValue> {
    check_ns(n, s, n.saturating_sub(1))?;
    let m = n / (n - s);
    if m < 2 {
        return Err(Error::RotationDegenerate { n, s });
    }
    Ok(match mode {
        Mode::Exact => wrap(BigRational::one() + BigRational::ratio(m, m - 1)),
        Mode::Float => wrap(1.0 + m as f64 / (m - 1) as f64),
    })
}

/// Harmonic-ratio bounds valid for any fixed package scheme with
/// `2 <= s <= n-1`:
/// `H_n / (H_n - H_{n-s})  <  E[Y]  <  1 + H_{n-1} / (H_n - H_{n-s})`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsPair {
    pub lower: ExactValue,
    pub upper: ExactValue,
}

pub fn expectation_bounds(n: u64, s: u64, mode: Mode) -> Result<BoundsPair> {
    if s < 2 || s > n.saturating_sub(1) {
        return Err(Error::invalid(format!(
            "bounds hold for 2 <= s <= n-1, got n = {n}, s = {s}"
        )));
    }
    fn pair<T: Scalar>(n: u64, s: u64) -> (T, T) {
        let gap = harmonic_t::<T>(n) - harmonic_t::<T>(n - s);
        let lower = harmonic_t::<T>(n) / gap.clone();
        let upper = T::one() + harmonic_t::<T>(n - 1) / gap;
        (lower, upper)
    }
    Ok(match mode {
        Mode::Exact => {
            let (lo, hi) = pair::<BigRational>(n, s);
            BoundsPair { lower: wrap(lo), upper: wrap(hi) }
        }
        Mode::Float => {
            let (lo, hi) = pair::<f64>(n, s);
            BoundsPair { lower: wrap(lo), upper: wrap(hi) }
        }
    })
}

/// Default tolerance on the truncation bound of [`missing_count_pmf`].
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-12;

/// Exact-mode rows of the missing-count chain are capped at this `n`; beyond
/// it the dense rational rows stop being a sensible object to materialize.
pub const EXACT_CHAIN_MAX_N: u64 = 128;

enum Rows {
    Exact(Vec<Vec<BigRational>>),
    Float(Vec<Vec<f64>>),
}

/// Distribution of the number of still-missing coupons after each round of
/// the uniform scheme, one row per round `k = 0 ..= kmax`.
///
/// Row `k` is the pmf of `X_k` = missing count after `k` packages, so
/// `P[Y <= k] = P[X_k = 0]` and `E[Y] = sum_k P[Y > k]`. The expectation is
/// truncated at `kmax`; `truncation_bound` is the union bound
/// `n q^(kmax+1) / (1-q)` with `q = (n-s)/n` on the discarded tail, and the
/// result is flagged when that bound exceeds [`DEFAULT_TRUNCATION_TOL`].
pub struct MissingCountPmf {
    pub n: u64,
    pub s: u64,
    rows: Rows,
    pub truncation_bound: f64,
    pub truncation_flagged: bool,
}

impl MissingCountPmf {
    pub fn mode(&self) -> Mode {
        match self.rows {
            Rows::Exact(_) => Mode::Exact,
            Rows::Float(_) => Mode::Float,
        }
    }

    pub fn kmax(&self) -> usize {
        match &self.rows {
            Rows::Exact(r) => r.len() - 1,
            Rows::Float(r) => r.len() - 1,
        }
    }

    /// `P[X_k = m]`.
    pub fn prob(&self, k: usize, m: u64) -> ExactValue {
        match &self.rows {
            Rows::Exact(r) => wrap(r[k][m as usize].clone()),
            Rows::Float(r) => wrap(r[k][m as usize]),
        }
    }

    pub fn row_f64(&self, k: usize) -> Vec<f64> {
        match &self.rows {
            Rows::Exact(r) => r[k].iter().map(|v| v.to_f64_lossy()).collect(),
            Rows::Float(r) => r[k].clone(),
        }
    }

    /// `P[Y <= k] = P[X_k = 0]`.
    pub fn complete_prob(&self, k: usize) -> ExactValue {
        self.prob(k, 0)
    }

    /// Tail-sum expectation `sum_{k=0..kmax} P[Y > k]`; a lower bound on
    /// `E[Y]` that is off by at most `truncation_bound`.
    pub fn expected_rounds(&self) -> ExactValue {
        match &self.rows {
            Rows::Exact(r) => {
                let mut acc = BigRational::zero();
                for row in r {
                    acc += BigRational::one() - row[0].clone();
                }
                wrap(acc)
            }
            Rows::Float(r) => {
                let mut acc = 0.0;
                for row in r {
                    acc += 1.0 - row[0];
                }
                wrap(acc)
            }
        }
    }
}

fn chain_rows<T: Scalar>(n: u64, s: u64, kmax: usize) -> Vec<Vec<T>> {
    let size = n as usize + 1;
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(kmax + 1);
    let mut row0 = vec![T::zero(); size];
    row0[n as usize] = T::one();
    rows.push(row0);
    // kernels keyed by current missing count; reused across rounds
    let mut kernels: HashMap<u64, (u64, Vec<T>)> = HashMap::new();
    for _ in 1..=kmax {
        let prev = rows.last().expect("seeded with row 0");
        let mut next = vec![T::zero(); size];
        for m in 0..=n {
            let pm = prev[m as usize].clone();
            if pm.is_zero() {
                continue;
            }
            if m == 0 {
                next[0] += pm; // complete: absorbing
                continue;
            }
            let (lo, kern) = kernels
                .entry(m)
                .or_insert_with(|| hyper_kernel::<T>(n, m, s))
                .clone();
            for (off, p) in kern.iter().enumerate() {
                let hit = lo + off as u64;
                next[(m - hit) as usize] += pm.clone() * p.clone();
            }
        }
        rows.push(next);
    }
    rows
}

fn truncation_bound(n: u64, s: u64, kmax: usize) -> f64 {
    let q = (n - s) as f64 / n as f64;
    if q == 0.0 {
        return 0.0;
    }
    n as f64 * q.powi(kmax as i32 + 1) / (1.0 - q)
}

/// Distribution of the missing count over the first `kmax` rounds of the
/// uniform scheme. See [`MissingCountPmf`].
pub fn missing_count_pmf(n: u64, s: u64, kmax: usize, mode: Mode) -> Result<MissingCountPmf> {
    check_ns(n, s, n)?;
    if kmax == 0 {
        return Err(Error::invalid("missing-count chain needs kmax >= 1"));
    }
    if mode == Mode::Exact && n > EXACT_CHAIN_MAX_N {
        return Err(Error::Budget(format!(
            "exact missing-count rows are capped at n <= {EXACT_CHAIN_MAX_N}, got n = {n}; use float mode"
        )));
    }
    let rows = match mode {
        Mode::Exact => Rows::Exact(chain_rows::<BigRational>(n, s, kmax)),
        Mode::Float => Rows::Float(chain_rows::<f64>(n, s, kmax)),
    };
    let bound = truncation_bound(n, s, kmax);
    Ok(MissingCountPmf {
        n,
        s,
        rows,
        truncation_bound: bound,
        truncation_flagged: bound > DEFAULT_TRUNCATION_TOL,
    })
}

/// Expected rounds for the uniform scheme through the missing-count chain,
/// with `kmax` chosen so the truncation bound is at most `tol`. Returns the
/// expectation and the realized bound. This is the workhorse for large `n`,
/// where neither the recursion over rationals nor inclusion-exclusion is
/// practical.
pub fn chain_expected_rounds(n: u64, s: u64, tol: f64, mode: Mode) -> Result<(ExactValue, f64)> {
    check_ns(n, s, n)?;
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let q = (n - s) as f64 / n as f64;
    let mut kmax = if q == 0.0 {
        1
    } else {
        let est = ((tol * (1.0 - q) / n as f64).ln() / q.ln()).ceil();
        est.max(2.0) as usize
    };
    while truncation_bound(n, s, kmax) > tol {
        kmax += 1;
    }
    let pmf = missing_count_pmf(n, s, kmax, mode)?;
    Ok((pmf.expected_rounds(), pmf.truncation_bound))
}
