//! Seeded Monte Carlo simulation of the collection process.
//!
//! Reproducibility contract: trial `t` draws from `ChaCha8` seeded with the
//! user seed on stream `t`, and per-trial results are merged with integer
//! arithmetic only (sums, squared sums, count maps). Both operations are
//! exactly associative and commutative, so a report is bit-identical for a
//! given `(distribution, trials, seed)` regardless of how rayon chunks the
//! work or how many threads it uses.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dist::{DistributionKind, PackageDistribution};
use crate::{Error, Result};

/// Half-width multiplier of the 95% normal confidence interval.
pub const CI95_Z: f64 = 1.96;

struct Bitset {
    words: Vec<u64>,
    missing: u64,
}

impl Bitset {
    fn new(n: u64) -> Self {
        Bitset {
            words: vec![0; n.div_ceil(64) as usize],
            missing: n,
        }
    }

    /// Marks 0-based coupon `i`, tracking how many are still unseen.
    fn insert(&mut self, i: u64) {
        let word = &mut self.words[(i / 64) as usize];
        let bit = 1u64 << (i % 64);
        if *word & bit == 0 {
            *word |= bit;
            self.missing -= 1;
        }
    }
}

enum SamplerKind {
    /// Uniform `s`-subsets drawn with a partial shuffle; the support is never
    /// enumerated, so this works at any `n`.
    UniformSubsets,
    /// Explicit support with a cumulative-weight table.
    Weighted {
        index: WeightedIndex<f64>,
        packages: Vec<Vec<u32>>,
    },
}

/// Draws completion times for one distribution.
pub struct RoundSampler {
    n: u64,
    s: u64,
    kind: SamplerKind,
}

impl RoundSampler {
    pub fn new(dist: &PackageDistribution) -> Result<Self> {
        let kind = if dist.kind() == DistributionKind::Uniform {
            SamplerKind::UniformSubsets
        } else {
            let packages = dist
                .packages()
                .ok_or_else(|| {
                    Error::InvalidDistribution("virtual support on a non-uniform kind".into())
                })?
                .iter()
                .map(|p| p.coupons().to_vec())
                .collect();
            let weights = dist.probabilities().expect("explicit support").to_f64();
            let index = WeightedIndex::new(&weights)
                .map_err(|e| Error::InvalidDistribution(format!("bad weights: {e}")))?;
            SamplerKind::Weighted { index, packages }
        };
        Ok(RoundSampler {
            n: dist.n(),
            s: dist.s(),
            kind,
        })
    }

    /// Number of rounds until every coupon has been seen.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        let mut seen = Bitset::new(self.n);
        let mut rounds = 0u64;
        match &self.kind {
            SamplerKind::UniformSubsets => {
                let n = self.n as usize;
                let s = self.s as usize;
                let mut perm: Vec<u32> = (0..n as u32).collect();
                while seen.missing > 0 {
                    rounds += 1;
                    // partial Fisher-Yates: after s swaps the prefix is a
                    // uniform s-subset, and the array remains a permutation,
                    // so the next round can shuffle it again as is
                    for i in 0..s {
                        let j = rng.random_range(i..n);
                        perm.swap(i, j);
                        seen.insert(perm[i] as u64);
                    }
                }
            }
            SamplerKind::Weighted { index, packages } => {
                while seen.missing > 0 {
                    rounds += 1;
                    let pick = index.sample(rng);
                    for &c in &packages[pick] {
                        seen.insert(c as u64 - 1);
                    }
                }
            }
        }
        rounds
    }
}

/// One completion time drawn from `dist`. For bulk work use
/// [`estimate_expected_rounds`], which builds the sampler once.
pub fn sample_rounds(dist: &PackageDistribution, rng: &mut ChaCha8Rng) -> Result<u64> {
    Ok(RoundSampler::new(dist)?.sample(rng))
}

/// Summary of a simulation run.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SimulationReport {
    pub distribution: String,
    pub n: u64,
    pub s: u64,
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
    /// Completion-round counts, `rounds -> number of trials`.
    pub empirical_pmf: BTreeMap<u64, u64>,
}

impl SimulationReport {
    pub const CSV_HEADER: &'static str =
        "distribution,n,s,trials,seed,mean,std_error,ci95_lo,ci95_hi";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.distribution,
            self.n,
            self.s,
            self.trials,
            self.seed,
            self.mean,
            self.std_error,
            self.ci95.0,
            self.ci95.1
        )
    }

    /// Empirical `P[Y <= k]`.
    pub fn empirical_prob_at_most(&self, k: u64) -> f64 {
        let hits: u64 = self
            .empirical_pmf
            .range(..=k)
            .map(|(_, count)| *count)
            .sum();
        hits as f64 / self.trials as f64
    }

    /// Empirical pmf normalized to probabilities.
    pub fn empirical_pmf_f64(&self) -> BTreeMap<u64, f64> {
        self.empirical_pmf
            .iter()
            .map(|(&k, &c)| (k, c as f64 / self.trials as f64))
            .collect()
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

type Tally = (u128, u128, BTreeMap<u64, u64>);

fn merge_tallies(mut a: Tally, b: Tally) -> Tally {
    a.0 += b.0;
    a.1 += b.1;
    for (k, v) in b.2 {
        *a.2.entry(k).or_insert(0) += v;
    }
    a
}

/// Runs `trials` independent collection processes and reports the sample
/// mean with its standard error and 95% confidence interval.
pub fn estimate_expected_rounds(
    dist: &PackageDistribution,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport> {
    if trials < 2 {
        return Err(Error::invalid("simulation needs at least 2 trials"));
    }
    let sampler = RoundSampler::new(dist)?;
    let (sum, sumsq, pmf) = (0..trials)
        .into_par_iter()
        .fold(
            || (0u128, 0u128, BTreeMap::new()),
            |mut acc, t| {
                let r = sampler.sample(&mut trial_rng(seed, t));
                acc.0 += r as u128;
                acc.1 += (r as u128) * (r as u128);
                *acc.2.entry(r).or_insert(0) += 1;
                acc
            },
        )
        .reduce(|| (0u128, 0u128, BTreeMap::new()), merge_tallies);
    let tf = trials as f64;
    let mean = sum as f64 / tf;
    let var = ((sumsq as f64) - (sum as f64) * (sum as f64) / tf) / (tf - 1.0);
    let std_error = (var.max(0.0) / tf).sqrt();
    Ok(SimulationReport {
        distribution: dist.kind().label().to_string(),
        n: dist.n(),
        s: dist.s(),
        trials,
        seed,
        mean,
        std_error,
        ci95: (mean - CI95_Z * std_error, mean + CI95_Z * std_error),
        empirical_pmf: pmf,
    })
}

/// Empirical pmf of the number of coupons still missing after `k` rounds of
/// the uniform scheme, from `trials` independent runs.
pub fn empirical_missing_pmf(
    n: u64,
    s: u64,
    k: u64,
    trials: u64,
    seed: u64,
) -> Result<BTreeMap<u64, f64>> {
    if n == 0 || s == 0 || s > n {
        return Err(Error::invalid(format!(
            "need 1 <= s <= n, got n = {n}, s = {s}"
        )));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let counts: BTreeMap<u64, u64> = (0..trials)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc, t| {
            let mut rng = trial_rng(seed, t);
            let mut seen = Bitset::new(n);
            let mut perm: Vec<u32> = (0..n as u32).collect();
            for _ in 0..k {
                for i in 0..s as usize {
                    let j = rng.random_range(i..n as usize);
                    perm.swap(i, j);
                    seen.insert(perm[i] as u64);
                }
            }
            *acc.entry(seen.missing).or_insert(0) += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    Ok(counts
        .into_iter()
        .map(|(m, c)| (m, c as f64 / trials as f64))
        .collect())
}
