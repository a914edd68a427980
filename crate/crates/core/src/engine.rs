//! Subset-lattice dynamic program for arbitrary package distributions.
//!
//! States are subsets of the coupon set encoded as bitmasks. For a collected
//! set `S` that is not yet full,
//!
//! ```text
//! E[S] = (1 + sum_{P not subset of S} p_P * E[S | P]) / (1 - sum_{P subset of S} p_P)
//! ```
//!
//! and every `S | P` on the right has strictly more bits than `S`, so the
//! table fills level by level from the full set downward. Within one
//! popcount level the states are independent and are solved in parallel;
//! each state's sum runs over the support in a fixed order, which keeps the
//! float path bit-identical regardless of thread count.

use num_rational::BigRational;
use rayon::prelude::*;

use crate::dist::{build_distribution, DistributionKind, PackageDistribution};
use crate::exact;
use crate::value::{wrap, ExactValue, Mode, Scalar};
use crate::{Error, Result};

/// The DP never runs above this `n` (the dense table is `2^n` entries).
pub const MAX_ENGINE_N: u64 = 22;

/// Work budget: `|support| * 2^n` elementary updates.
pub const ENGINE_WORK_BUDGET: u128 = 1 << 34;

fn engine_inputs(dist: &PackageDistribution) -> Result<Vec<u64>> {
    if dist.n() > MAX_ENGINE_N {
        return Err(Error::Budget(format!(
            "subset DP needs n <= {MAX_ENGINE_N}, got n = {}; module exact handles large n for the named schemes",
            dist.n()
        )));
    }
    let masks = dist.masks()?;
    let work = masks.len() as u128 * (1u128 << dist.n());
    if work > ENGINE_WORK_BUDGET {
        return Err(Error::Budget(format!(
            "subset DP would perform {work} updates, budget is {ENGINE_WORK_BUDGET}"
        )));
    }
    Ok(masks)
}

fn exact_probs(dist: &PackageDistribution) -> Result<Vec<BigRational>> {
    dist.probabilities()
        .and_then(|p| p.as_exact().map(<[BigRational]>::to_vec))
        .ok_or_else(|| {
            Error::ExactUnavailable(
                "distribution carries float probabilities; rerun in float mode or supply rationals"
                    .into(),
            )
        })
}

/// Expected number of rounds to complete the collection under `dist`.
pub fn expected_rounds(dist: &PackageDistribution, mode: Mode) -> Result<ExactValue> {
    let masks = engine_inputs(dist)?;
    match mode {
        Mode::Exact => {
            let probs = exact_probs(dist)?;
            Ok(wrap(dp(dist.n() as usize, &masks, &probs)))
        }
        Mode::Float => {
            let probs = dist.probabilities().expect("explicit support").to_f64();
            Ok(wrap(dp(dist.n() as usize, &masks, &probs)))
        }
    }
}

/// Balanced pairwise sum. For rationals this is much cheaper than a linear
/// fold, whose accumulator grows and gets re-normalized against every term;
/// the order is fixed, so results stay deterministic (and exact arithmetic
/// is order-independent anyway).
fn tree_sum<T: Scalar>(mut terms: Vec<T>) -> T {
    if terms.is_empty() {
        return T::zero();
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a + b,
                None => a,
            });
        }
        terms = next;
    }
    terms.pop().expect("nonempty")
}

fn dp<T: Scalar>(n: usize, masks: &[u64], probs: &[T]) -> T {
    let size = 1usize << n;
    let full = (size - 1) as u64;
    let mut levels: Vec<Vec<u32>> = vec![Vec::new(); n.max(1)];
    for state in 0..full {
        levels[state.count_ones() as usize].push(state as u32);
    }
    let mut table: Vec<T> = vec![T::zero(); size];
    for level in (0..levels.len()).rev() {
        let states = std::mem::take(&mut levels[level]);
        let solve = |st: &u32| -> (u32, T) {
            let st64 = *st as u64;
            let mut stay = T::zero();
            let mut terms = Vec::new();
            for (pm, p) in masks.iter().zip(probs) {
                if pm & !st64 == 0 {
                    stay += p.clone();
                } else {
                    terms.push(p.clone() * table[(st64 | pm) as usize].clone());
                }
            }
            let jump = tree_sum(terms);
            (*st, (T::one() + jump) / (T::one() - stay))
        };
        let solved: Vec<(u32, T)> = if states.len() >= 512 {
            states.par_iter().map(solve).collect()
        } else {
            states.iter().map(solve).collect()
        };
        for (st, v) in solved {
            table[st as usize] = v;
        }
    }
    table[0].clone()
}

/// Distribution of the number of rounds `Y` itself: `probs[k-1] = P[Y = k]`
/// for `k = 1 ..= kmax`, plus the residual `P[Y > kmax]`.
#[derive(Clone, Debug)]
pub struct RoundsPmf {
    pub probs: Vec<ExactValue>,
    pub residual: ExactValue,
}

/// Forward-propagates the state distribution `kmax` steps to get the pmf of
/// the completion round.
pub fn rounds_pmf(dist: &PackageDistribution, kmax: usize, mode: Mode) -> Result<RoundsPmf> {
    if kmax == 0 {
        return Err(Error::invalid("rounds pmf needs kmax >= 1"));
    }
    let masks = engine_inputs(dist)?;
    match mode {
        Mode::Exact => {
            let probs = exact_probs(dist)?;
            let (pmf, residual) = forward(dist.n() as usize, &masks, &probs, kmax);
            Ok(RoundsPmf {
                probs: pmf.into_iter().map(wrap).collect(),
                residual: wrap(residual),
            })
        }
        Mode::Float => {
            let probs = dist.probabilities().expect("explicit support").to_f64();
            let (pmf, residual) = forward(dist.n() as usize, &masks, &probs, kmax);
            Ok(RoundsPmf {
                probs: pmf.into_iter().map(wrap).collect(),
                residual: wrap(residual),
            })
        }
    }
}

fn forward<T: Scalar>(n: usize, masks: &[u64], probs: &[T], kmax: usize) -> (Vec<T>, T) {
    let size = 1usize << n;
    let full = size - 1;
    let mut cur: Vec<T> = vec![T::zero(); size];
    cur[0] = T::one();
    let mut pmf = Vec::with_capacity(kmax);
    let mut done_before = T::zero();
    for _ in 1..=kmax {
        let mut next: Vec<T> = vec![T::zero(); size];
        for st in 0..size {
            let mass = cur[st].clone();
            if mass.is_zero() {
                continue;
            }
            if st == full {
                next[full] += mass;
                continue;
            }
            for (pm, p) in masks.iter().zip(probs) {
                next[st | *pm as usize] += mass.clone() * p.clone();
            }
        }
        let done_now = next[full].clone();
        pmf.push(done_now.clone() - done_before.clone());
        done_before = done_now;
        cur = next;
    }
    (pmf, T::one() - done_before)
}

/// Which slice of the `s` range a pair `(n, s)` falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `2 <= s < floor(n/2)`: the near-decomposition is the reference scheme.
    BelowHalf,
    /// `floor(n/2) <= s <= n-2`: the arcs scheme takes over.
    UpperWindow,
    /// `s = n-1`: the arcs scheme coincides with the uniform one.
    Penultimate,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::BelowHalf => "s<floor(n/2)",
            Regime::UpperWindow => "floor(n/2)<=s<=n-2",
            Regime::Penultimate => "s=n-1",
        }
    }

    pub fn classify(n: u64, s: u64) -> Regime {
        if s == n - 1 {
            Regime::Penultimate
        } else if s >= n / 2 {
            Regime::UpperWindow
        } else {
            Regime::BelowHalf
        }
    }
}

/// One row of the scheme comparison for a fixed `n`: exact expectations of
/// the named schemes and how they order against the uniform one.
#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub n: u64,
    pub s: u64,
    pub regime: Regime,
    pub uniform: ExactValue,
    pub near_decomposition: ExactValue,
    pub arcs: Option<ExactValue>,
    pub rotation: Option<ExactValue>,
    pub lower_bound: ExactValue,
    pub upper_bound: ExactValue,
    pub near_beats_uniform: bool,
    pub arcs_beats_uniform: Option<bool>,
    pub arcs_equals_uniform: Option<bool>,
    pub rotation_beats_uniform: Option<bool>,
    /// At `s = floor(n/2)` with `s >= 3`, marks the pairs whose
    /// near-decomposition value fails to stay below the harmonic lower bound
    /// on the uniform scheme, so that bound alone cannot order the two
    /// schemes there. For all `n <= 40` these are exactly
    /// `(7,3), (9,4), (11,5), (13,6)`.
    pub boundary_exception: bool,
}

/// Exact comparison of the named schemes for every `s` in `2 ..= n-1`.
/// Values come from the closed forms and recursions in module [`exact`],
/// not from the subset DP, so any `n` a rational recursion can handle is fine.
pub fn compare_report(n: u64) -> Result<Vec<ComparisonRow>> {
    if n < 4 {
        return Err(Error::invalid("comparison needs n >= 4"));
    }
    let mode = Mode::Exact;
    let mut rows = Vec::with_capacity((n - 2) as usize);
    for s in 2..n {
        let uniform = exact::uniform_expectation(n, s, mode)?;
        let near = exact::near_decomposition_expectation(n, s, mode)?;
        let bounds = exact::expectation_bounds(n, s, mode)?;
        let arcs = if s >= n / 2 {
            Some(exact::arcs_expectation(n, s, mode)?)
        } else {
            None
        };
        let rotation = match exact::rotation_expectation(n, s, mode) {
            Ok(v) => Some(v),
            Err(Error::RotationDegenerate { .. }) => None,
            Err(e) => return Err(e),
        };
        let ur = uniform.as_rational().expect("exact mode");
        let near_beats = near.as_rational().expect("exact mode") < ur;
        let arcs_beats = arcs
            .as_ref()
            .map(|a| a.as_rational().expect("exact mode") < ur);
        let arcs_equals = arcs
            .as_ref()
            .map(|a| a.as_rational().expect("exact mode") == ur);
        let rot_beats = rotation
            .as_ref()
            .map(|r| r.as_rational().expect("exact mode") < ur);
        let boundary_exception = s == n / 2
            && s >= 3
            && near.as_rational().expect("exact mode")
                >= bounds.lower.as_rational().expect("exact mode");
        rows.push(ComparisonRow {
            n,
            s,
            regime: Regime::classify(n, s),
            uniform,
            near_decomposition: near,
            arcs,
            rotation,
            lower_bound: bounds.lower,
            upper_bound: bounds.upper,
            near_beats_uniform: near_beats,
            arcs_beats_uniform: arcs_beats,
            arcs_equals_uniform: arcs_equals,
            rotation_beats_uniform: rot_beats,
            boundary_exception,
        });
    }
    Ok(rows)
}

/// Convenience: expected rounds of a named scheme evaluated through the DP.
pub fn expected_rounds_named(
    kind: DistributionKind,
    n: u64,
    s: u64,
    mode: Mode,
) -> Result<ExactValue> {
    expected_rounds(&build_distribution(kind, n, s)?, mode)
}
