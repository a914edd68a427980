//! Search for package distributions that beat the uniform scheme, and exact
//! certificates of the improvement.
//!
//! The search is projected gradient descent on the simplex of probabilities
//! over all `C(n,s)` packages. The objective (expected rounds) solves a
//! linear system over the subset lattice, so its gradient is computed with
//! one adjoint sweep instead of `2 * C(n,s)` finite-difference evaluations:
//! if `E` solves `(I - T(p)) E = 1` and `u` is the expected number of visits
//! to each state, then `dE_empty/dp_j = sum_S u_S * E[S | P_j]`.
//!
//! Float search results are then rounded onto a common denominator and
//! re-evaluated with exact rational arithmetic; the reported winner is the
//! exact minimum over the rationalized search output, the named schemes, and
//! the uniform distribution itself, so `best_value <= uniform_value` is an
//! identity, not a float comparison.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comb::{binomial, combinations};
use crate::dist::{
    build_distribution, to_json_value, DistributionKind, Package, PackageDistribution, ProbInput,
};
use crate::engine;
use crate::exact;
use crate::value::{format_rational, parse_rational_text, wrap, ExactValue, Mode};
use crate::{Error, Result};

/// Hard caps of the search: full support size and coupon count.
pub const MAX_SEARCH_SUPPORT: u64 = 256;
pub const MAX_SEARCH_N: u64 = 12;

/// Common denominator the float optimum is rounded onto before the exact
/// re-evaluation.
pub const RATIONALIZE_DENOMINATOR: u64 = 1_000_000;

#[derive(Clone, Copy, Debug)]
pub struct OptimizeConfig {
    /// Total number of starts: uniform, the named schemes, then random
    /// Dirichlet points.
    pub restarts: u32,
    pub iters: u32,
    /// Initial step size; adapted multiplicatively during the run.
    pub step: f64,
    pub seed: u64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            restarts: 8,
            iters: 200,
            step: 0.25,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizationResult {
    pub n: u64,
    pub s: u64,
    /// The winning distribution, always with exact rational probabilities.
    pub distribution: PackageDistribution,
    pub best_value: ExactValue,
    pub uniform_value: ExactValue,
    /// `best_value < uniform_value`, compared exactly.
    pub improved: bool,
    /// False when the support exceeded the search budget and only the named
    /// schemes were considered.
    pub searched: bool,
    pub config: OptimizeConfig,
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::invalid("cannot project an empty vector"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("cannot project a non-finite vector"));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in sorted.iter().enumerate() {
        prefix += ui;
        let t = (prefix - 1.0) / (i as f64 + 1.0);
        if ui - t > 0.0 {
            theta = t;
        }
    }
    Ok(v.iter().map(|&x| (x - theta).max(0.0)).collect())
}

/// Expected-rounds objective over a fixed support, with cached state levels.
struct Objective {
    n: usize,
    masks: Vec<u64>,
    full: u64,
    /// Non-full states grouped by popcount, ascending.
    levels: Vec<Vec<u32>>,
}

impl Objective {
    fn new(n: usize, masks: Vec<u64>) -> Self {
        let full = (1u64 << n) - 1;
        let mut levels: Vec<Vec<u32>> = vec![Vec::new(); n];
        for state in 0..full {
            levels[state.count_ones() as usize].push(state as u32);
        }
        Objective {
            n,
            masks,
            full,
            levels,
        }
    }

    fn covered(&self, probs: &[f64]) -> bool {
        let mut cover = 0u64;
        for (pm, &p) in self.masks.iter().zip(probs) {
            if p > 1e-12 {
                cover |= pm;
            }
        }
        cover == self.full
    }

    fn e_table(&self, probs: &[f64]) -> Vec<f64> {
        let size = 1usize << self.n;
        let mut e = vec![0.0; size];
        for level in (0..self.levels.len()).rev() {
            for &st in &self.levels[level] {
                let st64 = st as u64;
                let mut stay = 0.0;
                let mut jump = 0.0;
                for (pm, &p) in self.masks.iter().zip(probs) {
                    if pm & !st64 == 0 {
                        stay += p;
                    } else {
                        jump += p * e[(st64 | pm) as usize];
                    }
                }
                e[st as usize] = (1.0 + jump) / (1.0 - stay);
            }
        }
        e
    }

    /// Expected rounds from the empty state; infinite without coverage.
    fn value(&self, probs: &[f64]) -> f64 {
        if !self.covered(probs) {
            return f64::INFINITY;
        }
        self.e_table(probs)[0]
    }

    /// Expected visit counts per state, from the empty state.
    fn visit_table(&self, probs: &[f64]) -> Vec<f64> {
        let size = 1usize << self.n;
        let mut incoming = vec![0.0; size];
        incoming[0] = 1.0;
        let mut visits = vec![0.0; size];
        for level in 0..self.levels.len() {
            for &st in &self.levels[level] {
                let inc = incoming[st as usize];
                if inc == 0.0 {
                    continue;
                }
                let st64 = st as u64;
                let mut stay = 0.0;
                for (pm, &p) in self.masks.iter().zip(probs) {
                    if pm & !st64 == 0 {
                        stay += p;
                    }
                }
                let u = inc / (1.0 - stay);
                visits[st as usize] = u;
                for (pm, &p) in self.masks.iter().zip(probs) {
                    if pm & !st64 != 0 {
                        incoming[(st64 | pm) as usize] += u * p;
                    }
                }
            }
        }
        visits
    }

    /// Objective value and its gradient with respect to the raw
    /// probabilities (before the simplex constraint is accounted for).
    fn value_and_gradient(&self, probs: &[f64]) -> (f64, Vec<f64>) {
        if !self.covered(probs) {
            return (f64::INFINITY, vec![0.0; self.masks.len()]);
        }
        let e = self.e_table(probs);
        let u = self.visit_table(probs);
        let mut grad = vec![0.0; self.masks.len()];
        for level in 0..self.levels.len() {
            for &st in &self.levels[level] {
                let us = u[st as usize];
                if us == 0.0 {
                    continue;
                }
                let st64 = st as u64;
                for (j, pm) in self.masks.iter().enumerate() {
                    grad[j] += us * e[(st64 | pm) as usize];
                }
            }
        }
        (e[0], grad)
    }
}

/// One projected gradient descent run; monotone by construction.
fn descend(obj: &Objective, start: &[f64], config: &OptimizeConfig) -> Result<(f64, Vec<f64>)> {
    let mut x = project_to_simplex(start)?;
    let mut fx = obj.value(&x);
    if !fx.is_finite() {
        return Ok((fx, x));
    }
    let mut step = config.step;
    for _ in 0..config.iters {
        let (_, raw_grad) = obj.value_and_gradient(&x);
        // chain rule through normalization: moving along the simplex, only
        // the component of the gradient orthogonal to 1 matters
        let dot: f64 = raw_grad.iter().zip(&x).map(|(g, p)| g * p).sum();
        let grad: Vec<f64> = raw_grad.iter().map(|g| g - dot).collect();
        let mut accepted = false;
        let mut trial_step = step;
        for _ in 0..40 {
            let cand: Vec<f64> = x
                .iter()
                .zip(&grad)
                .map(|(xi, gi)| xi - trial_step * gi)
                .collect();
            let cand = project_to_simplex(&cand)?;
            let fc = obj.value(&cand);
            if fc < fx - 1e-12 {
                x = cand;
                fx = fc;
                step = (trial_step * 1.5).min(4.0);
                accepted = true;
                break;
            }
            trial_step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok((fx, x))
}

fn named_start(
    kind: DistributionKind,
    n: u64,
    s: u64,
    index: &HashMap<u64, usize>,
    dim: usize,
) -> Option<Vec<f64>> {
    let dist = build_distribution(kind, n, s).ok()?;
    let packages = dist.packages()?;
    let probs = dist.probabilities()?.to_f64();
    let mut v = vec![0.0; dim];
    for (pkg, p) in packages.iter().zip(probs) {
        v[*index.get(&pkg.mask())?] = p;
    }
    Some(v)
}

fn build_starts(
    n: u64,
    s: u64,
    index: &HashMap<u64, usize>,
    dim: usize,
    config: &OptimizeConfig,
) -> Vec<Vec<f64>> {
    let mut starts = vec![vec![1.0 / dim as f64; dim]];
    for kind in [
        DistributionKind::NearDecomposition,
        DistributionKind::Arcs,
        DistributionKind::Rotation,
    ] {
        if let Some(v) = named_start(kind, n, s, index, dim) {
            starts.push(v);
        }
    }
    starts.truncate(config.restarts as usize);
    let mut r = 0u64;
    while starts.len() < config.restarts as usize {
        // Dirichlet(1): normalized exponentials, one rng stream per start
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(10_000 + r);
        let v: Vec<f64> = (0..dim)
            .map(|_| -(rng.random::<f64>().max(1e-300)).ln())
            .collect();
        let sum: f64 = v.iter().sum();
        starts.push(v.into_iter().map(|x| x / sum).collect());
        r += 1;
    }
    starts
}

/// Rounds simplex weights onto numerators over [`RATIONALIZE_DENOMINATOR`]
/// with the largest-remainder rule, so they sum to the denominator exactly.
fn rationalize_weights(x: &[f64]) -> Vec<u64> {
    let d = RATIONALIZE_DENOMINATOR;
    let mut floors: Vec<u64> = Vec::with_capacity(x.len());
    let mut fracs: Vec<(f64, usize)> = Vec::with_capacity(x.len());
    for (i, &xi) in x.iter().enumerate() {
        let scaled = (xi.max(0.0) * d as f64).min(d as f64);
        floors.push(scaled.floor() as u64);
        fracs.push((scaled - scaled.floor(), i));
    }
    let shortfall = d - floors.iter().sum::<u64>().min(d);
    fracs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in fracs.iter().take(shortfall as usize) {
        floors[i] += 1;
    }
    floors
}

fn rationalized_candidate(
    n: u64,
    s: u64,
    packages: &[Package],
    x: &[f64],
) -> Option<(PackageDistribution, BigRational)> {
    let numerators = rationalize_weights(x);
    let support: Vec<(Package, ProbInput)> = packages
        .iter()
        .zip(&numerators)
        .filter(|(_, &m)| m > 0)
        .map(|(pkg, &m)| {
            (
                pkg.clone(),
                ProbInput::Rational(BigRational::new(
                    BigInt::from(m),
                    BigInt::from(RATIONALIZE_DENOMINATOR),
                )),
            )
        })
        .collect();
    let dist = PackageDistribution::custom(n, s, support).ok()?;
    let value = engine::expected_rounds(&dist, Mode::Exact).ok()?;
    let value = value.as_rational()?.clone();
    Some((dist, value))
}

fn named_candidate(
    kind: DistributionKind,
    n: u64,
    s: u64,
) -> Option<(PackageDistribution, BigRational)> {
    let dist = build_distribution(kind, n, s).ok()?;
    let value = match kind {
        DistributionKind::Uniform => exact::uniform_expectation(n, s, Mode::Exact),
        DistributionKind::Arcs => exact::arcs_expectation(n, s, Mode::Exact),
        DistributionKind::NearDecomposition => {
            exact::near_decomposition_expectation(n, s, Mode::Exact)
        }
        DistributionKind::Rotation => exact::rotation_expectation(n, s, Mode::Exact),
        DistributionKind::Custom => return None,
    }
    .ok()?;
    Some((dist, value.as_rational()?.clone()))
}

fn assemble(
    n: u64,
    s: u64,
    search: Option<(PackageDistribution, BigRational)>,
    config: &OptimizeConfig,
    searched: bool,
) -> Result<OptimizationResult> {
    let uniform_value = exact::uniform_expectation(n, s, Mode::Exact)?
        .as_rational()
        .expect("exact mode")
        .clone();
    let mut candidates: Vec<(PackageDistribution, BigRational)> = Vec::new();
    candidates.extend(search);
    for kind in [
        DistributionKind::NearDecomposition,
        DistributionKind::Arcs,
        DistributionKind::Rotation,
        DistributionKind::Uniform,
    ] {
        candidates.extend(named_candidate(kind, n, s));
    }
    let mut best = 0;
    for i in 1..candidates.len() {
        if candidates[i].1 < candidates[best].1 {
            best = i;
        }
    }
    let (distribution, best_value) = candidates.swap_remove(best);
    let improved = best_value < uniform_value;
    Ok(OptimizationResult {
        n,
        s,
        distribution,
        best_value: wrap(best_value),
        uniform_value: wrap(uniform_value),
        improved,
        searched,
        config: *config,
    })
}

/// Searches the full `C(n,s)`-package simplex for a distribution with a
/// smaller expected completion time than uniform. Requires
/// `C(n,s) <= 256` and `n <= 12`. Deterministic for a fixed config.
pub fn optimize_distribution(
    n: u64,
    s: u64,
    config: &OptimizeConfig,
) -> Result<OptimizationResult> {
    if n < 2 || s == 0 || s > n - 1 {
        return Err(Error::invalid(format!(
            "search needs 1 <= s <= n-1, got n = {n}, s = {s}"
        )));
    }
    if n > MAX_SEARCH_N {
        return Err(Error::Budget(format!(
            "search needs n <= {MAX_SEARCH_N}, got n = {n}"
        )));
    }
    let count = binomial(n, s);
    if count > BigUint::from(MAX_SEARCH_SUPPORT) {
        return Err(Error::Budget(format!(
            "search support C({n},{s}) = {count} exceeds {MAX_SEARCH_SUPPORT}"
        )));
    }
    if config.restarts == 0 || config.iters == 0 || !(config.step > 0.0) {
        return Err(Error::invalid("search needs restarts >= 1, iters >= 1, step > 0"));
    }
    let packages: Vec<Package> = combinations(n, s)
        .into_iter()
        .map(|c| Package::new(c).expect("valid subsets"))
        .collect();
    let masks: Vec<u64> = packages.iter().map(Package::mask).collect();
    let index: HashMap<u64, usize> = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let obj = Objective::new(n as usize, masks);
    let starts = build_starts(n, s, &index, packages.len(), config);
    let runs: Vec<Result<(f64, Vec<f64>)>> = starts
        .par_iter()
        .map(|start| descend(&obj, start, config))
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for run in runs {
        let (f, x) = run?;
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, x));
        }
    }
    let (_, best_x) = best.expect("at least one start");
    let search = rationalized_candidate(n, s, &packages, &best_x);
    assemble(n, s, search, config, true)
}

/// A certificate that some distribution strictly beats uniform at `(n, s)`,
/// combining the named schemes with the simplex search (when the support
/// fits the budget). Requires `2 <= s <= n - 2` and `n <= 12`; at
/// `s = n - 1` the uniform scheme is optimal and the request is rejected.
pub fn improvement_certificate(n: u64, s: u64) -> Result<OptimizationResult> {
    if n > MAX_SEARCH_N {
        return Err(Error::Budget(format!(
            "certificates need n <= {MAX_SEARCH_N}, got n = {n}"
        )));
    }
    if s == n.saturating_sub(1) {
        return Err(Error::invalid(
            "no improvement exists at s = n-1: the uniform scheme is optimal there",
        ));
    }
    if s < 2 || n < 4 || s > n - 2 {
        return Err(Error::invalid(format!(
            "certificates need 2 <= s <= n-2, got n = {n}, s = {s}"
        )));
    }
    let config = OptimizeConfig::default();
    if binomial(n, s) <= BigUint::from(MAX_SEARCH_SUPPORT) {
        optimize_distribution(n, s, &config)
    } else {
        assemble(n, s, None, &config, false)
    }
}

// ---------------------------------------------------------------------------
// Certificate serialization and verification
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CertificateFile {
    n: u64,
    s: u64,
    best_value: String,
    best_value_float: f64,
    uniform_value: String,
    uniform_value_float: f64,
    improved: bool,
    searched: bool,
    restarts: u32,
    iters: u32,
    step: f64,
    seed: u64,
    distribution: serde_json::Value,
}

/// Renders a result as a self-contained JSON certificate.
pub fn certificate_json(result: &OptimizationResult) -> Result<serde_json::Value> {
    let best = result
        .best_value
        .as_rational()
        .ok_or_else(|| Error::invalid("certificate needs an exact best value"))?;
    let uniform = result
        .uniform_value
        .as_rational()
        .ok_or_else(|| Error::invalid("certificate needs an exact uniform value"))?;
    Ok(serde_json::to_value(CertificateFile {
        n: result.n,
        s: result.s,
        best_value: format_rational(best),
        best_value_float: result.best_value.to_f64(),
        uniform_value: format_rational(uniform),
        uniform_value_float: result.uniform_value.to_f64(),
        improved: result.improved,
        searched: result.searched,
        restarts: result.config.restarts,
        iters: result.config.iters,
        step: result.config.step,
        seed: result.config.seed,
        distribution: to_json_value(&result.distribution)?,
    })?)
}

/// Outcome of re-checking a certificate from scratch.
#[derive(Clone, Debug)]
pub struct CertificateCheck {
    pub n: u64,
    pub s: u64,
    pub claimed_value: ExactValue,
    pub recomputed_value: ExactValue,
    pub uniform_value: ExactValue,
    /// The claimed expectation equals the recomputed one exactly.
    pub value_matches: bool,
    /// The claimed `improved` flag agrees with the exact comparison.
    pub improved_consistent: bool,
    pub ok: bool,
}

/// Re-validates a certificate: re-ingests the distribution, recomputes its
/// exact expectation and the uniform reference, and compares both against
/// the claims. Nothing from the file is trusted beyond the distribution.
pub fn verify_certificate(text: &str) -> Result<CertificateCheck> {
    let file: CertificateFile = serde_json::from_str(text)?;
    let dist = crate::dist::from_json_str(&file.distribution.to_string())?;
    if dist.n() != file.n || dist.s() != file.s {
        return Err(Error::InvalidDistribution(format!(
            "certificate header says (n, s) = ({}, {}) but distribution has ({}, {})",
            file.n,
            file.s,
            dist.n(),
            dist.s()
        )));
    }
    let claimed = parse_rational_text(&file.best_value)
        .ok_or_else(|| Error::invalid(format!("bad best_value: {:?}", file.best_value)))?;
    let recomputed = engine::expected_rounds(&dist, Mode::Exact)?;
    let uniform = exact::uniform_expectation(file.n, file.s, Mode::Exact)?;
    let value_matches = recomputed.as_rational() == Some(&claimed);
    let improved_exact =
        recomputed.as_rational().expect("exact mode") < uniform.as_rational().expect("exact mode");
    let improved_consistent = improved_exact == file.improved;
    Ok(CertificateCheck {
        n: file.n,
        s: file.s,
        claimed_value: ExactValue::Exact(claimed),
        recomputed_value: recomputed,
        uniform_value: uniform,
        value_matches,
        improved_consistent,
        ok: value_matches && improved_consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn simplex_projection_reference_points() {
        assert_eq!(project_to_simplex(&[0.5, 0.5]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(project_to_simplex(&[2.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        let p = project_to_simplex(&[0.3, 0.3]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let p = project_to_simplex(&[0.1, -3.0, 0.4]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
        assert!(project_to_simplex(&[]).is_err());
        assert!(project_to_simplex(&[f64::NAN]).is_err());
    }

    #[test]
    fn adjoint_gradient_matches_finite_differences() {
        for (n, s) in [(5u64, 2u64), (6, 3)] {
            let masks: Vec<u64> = combinations(n, s)
                .into_iter()
                .map(|c| Package::new(c).unwrap().mask())
                .collect();
            let dim = masks.len();
            let obj = Objective::new(n as usize, masks);
            // a fixed interior point, mildly non-uniform
            let mut x: Vec<f64> = (0..dim).map(|i| 1.0 + 0.3 * ((i * 7 % 5) as f64)).collect();
            let sum: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= sum);
            let (fx, grad) = obj.value_and_gradient(&x);
            let h = 1e-6;
            for i in (0..dim).step_by(dim / 5 + 1) {
                let mut xp = x.clone();
                xp[i] += h;
                let mut xm = x.clone();
                xm[i] -= h;
                // compare d/dp_i of the raw (unnormalized) objective
                let num = (obj.value(&xp) - obj.value(&xm)) / (2.0 * h);
                assert!(
                    (grad[i] - num).abs() <= 1e-4 * (1.0 + num.abs()),
                    "n={n} s={s} i={i}: adjoint {} vs numeric {num} (f={fx})",
                    grad[i]
                );
            }
        }
    }

    #[test]
    fn search_finds_the_decomposition_at_4_2() {
        let r = optimize_distribution(4, 2, &OptimizeConfig::default()).unwrap();
        assert_eq!(r.best_value.as_rational().unwrap(), &rat(3, 1));
        assert_eq!(r.uniform_value.as_rational().unwrap(), &rat(19, 5));
        assert!(r.improved);
    }

    #[test]
    fn uniform_is_kept_when_nothing_beats_it() {
        // at s = n-1 uniform is optimal; the search must come back empty-handed
        let r = optimize_distribution(4, 3, &OptimizeConfig::default()).unwrap();
        assert_eq!(r.best_value.as_rational(), r.uniform_value.as_rational());
        assert!(!r.improved);
    }

    #[test]
    fn search_is_reproducible() {
        let cfg = OptimizeConfig {
            restarts: 4,
            iters: 40,
            ..OptimizeConfig::default()
        };
        let a = optimize_distribution(6, 2, &cfg).unwrap();
        let b = optimize_distribution(6, 2, &cfg).unwrap();
        assert_eq!(a.best_value.as_rational(), b.best_value.as_rational());
        assert_eq!(
            a.distribution.packages().unwrap(),
            b.distribution.packages().unwrap()
        );
    }

    #[test]
    fn certificates_beat_uniform_on_both_flanks() {
        let r = improvement_certificate(10, 3).unwrap();
        assert!(r.improved);
        assert!(r.best_value.as_rational().unwrap() <= &rat(25, 3), "near-decomposition level");
        let r = improvement_certificate(10, 7).unwrap();
        assert!(r.improved);
        assert!(r.best_value.as_rational().unwrap() <= &rat(5, 2), "rotation level");
        // support too large for the search: named schemes still certify
        let r = improvement_certificate(12, 6).unwrap();
        assert!(r.improved && !r.searched);
        assert!(r.best_value.as_rational().unwrap() <= &rat(3, 1));
        assert!(improvement_certificate(10, 9).is_err());
        assert!(improvement_certificate(13, 4).is_err());
    }

    #[test]
    fn certificate_json_round_trips_through_verify() {
        let r = improvement_certificate(6, 2).unwrap();
        let text = certificate_json(&r).unwrap().to_string();
        let check = verify_certificate(&text).unwrap();
        assert!(check.ok, "{check:?}");
        assert_eq!(
            check.recomputed_value.as_rational(),
            r.best_value.as_rational()
        );
        // tampering with the claimed value must be caught
        let tampered = text.replace(
            &format!("\"best_value\":\"{}\"", format_rational(r.best_value.as_rational().unwrap())),
            "\"best_value\":\"1/1\"",
        );
        assert_ne!(tampered, text, "tamper target not found");
        let check = verify_certificate(&tampered).unwrap();
        assert!(!check.ok && !check.value_matches);
    }

    #[test]
    fn rationalize_weights_hits_the_denominator_exactly() {
        let x = [0.3333333333, 0.3333333333, 0.3333333334];
        let m = rationalize_weights(&x);
        assert_eq!(m.iter().sum::<u64>(), RATIONALIZE_DENOMINATOR);
        let x = [1.0, 0.0, 0.0];
        assert_eq!(rationalize_weights(&x), vec![RATIONALIZE_DENOMINATOR, 0, 0]);
    }
}
