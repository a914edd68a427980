//! Package distributions: validated supports of `s`-subsets with positive
//! probabilities, the four named constructions, and the JSON ingestion format
//! used by the CLI and by optimizer certificates.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::comb::{binomial, combinations};
use crate::value::{format_rational, parse_rational_text};
use crate::{Error, Result};

/// Float-mode probabilities may miss 1 by at most this much in total.
pub const FLOAT_SUM_TOL: f64 = 1e-12;

/// Above this `n` the uniform support (all `C(n,s)` subsets) is kept virtual
/// instead of materialized.
pub const UNIFORM_MATERIALIZE_MAX_N: u64 = 16;

/// Materialized supports are capped at this many coupon labels in total.
const MATERIALIZE_LABEL_BUDGET: u64 = 1 << 24;

/// An unordered set of `s` distinct coupon labels from `{1, ..., n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Package {
    coupons: Vec<u32>, // sorted ascending
}

impl Package {
    pub fn new(mut coupons: Vec<u32>) -> Result<Self> {
        if coupons.is_empty() {
            return Err(Error::invalid("package must contain at least one coupon"));
        }
        coupons.sort_unstable();
        if coupons.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("package has a repeated coupon label"));
        }
        if coupons[0] == 0 {
            return Err(Error::invalid("coupon labels are 1-based"));
        }
        Ok(Package { coupons })
    }

    pub fn coupons(&self) -> &[u32] {
        &self.coupons
    }

    pub fn len(&self) -> usize {
        self.coupons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coupons.is_empty()
    }

    /// Bitmask with bit `c-1` set per coupon `c`. Only usable for `n <= 64`.
    pub fn mask(&self) -> u64 {
        self.coupons.iter().fold(0u64, |m, &c| m | 1u64 << (c - 1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistributionKind {
    Uniform,
    Arcs,
    NearDecomposition,
    Rotation,
    Custom,
}

impl DistributionKind {
    pub fn label(self) -> &'static str {
        match self {
            DistributionKind::Uniform => "uniform",
            DistributionKind::Arcs => "arcs",
            DistributionKind::NearDecomposition => "near_decomposition",
            DistributionKind::Rotation => "rotation",
            DistributionKind::Custom => "custom",
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DistributionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "uniform" => Ok(DistributionKind::Uniform),
            "arcs" => Ok(DistributionKind::Arcs),
            "near_decomposition" => Ok(DistributionKind::NearDecomposition),
            "rotation" => Ok(DistributionKind::Rotation),
            "custom" => Ok(DistributionKind::Custom),
            other => Err(Error::invalid(format!("unknown distribution kind: {other}"))),
        }
    }
}

/// Probabilities of the support packages, all-rational or all-float.
///
/// A distribution ingested with any floating point probability is float for
/// good: rationalizing a rounded decimal would fabricate precision, and the
/// exact engines refuse such inputs instead.
#[derive(Clone, Debug)]
pub enum Probabilities {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

impl Probabilities {
    pub fn len(&self) -> usize {
        match self {
            Probabilities::Exact(v) => v.len(),
            Probabilities::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Probabilities::Exact(v) => v.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect(),
            Probabilities::Float(v) => v.clone(),
        }
    }

    pub fn as_exact(&self) -> Option<&[BigRational]> {
        match self {
            Probabilities::Exact(v) => Some(v),
            Probabilities::Float(_) => None,
        }
    }
}

/// One probability as supplied by a caller or a JSON file.
#[derive(Clone, Debug)]
pub enum ProbInput {
    Rational(BigRational),
    Float(f64),
}

#[derive(Clone, Debug)]
enum SupportRepr {
    Explicit {
        packages: Vec<Package>,
        probs: Probabilities,
    },
    /// All `C(n,s)` subsets, equiprobable, never enumerated.
    VirtualUniform,
}

/// A probability distribution over packages, validated at construction:
/// every package has exactly `s` coupons with labels in `{1, ..., n}`,
/// packages are pairwise distinct, probabilities are positive and sum to 1
/// (exactly for rational inputs, within [`FLOAT_SUM_TOL`] for float inputs),
/// and the support covers every coupon.
#[derive(Clone, Debug)]
pub struct PackageDistribution {
    n: u64,
    s: u64,
    kind: DistributionKind,
    repr: SupportRepr,
}

impl PackageDistribution {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn is_virtual_uniform(&self) -> bool {
        matches!(self.repr, SupportRepr::VirtualUniform)
    }

    pub fn packages(&self) -> Option<&[Package]> {
        match &self.repr {
            SupportRepr::Explicit { packages, .. } => Some(packages),
            SupportRepr::VirtualUniform => None,
        }
    }

    pub fn probabilities(&self) -> Option<&Probabilities> {
        match &self.repr {
            SupportRepr::Explicit { probs, .. } => Some(probs),
            SupportRepr::VirtualUniform => None,
        }
    }

    pub fn support_len(&self) -> Option<usize> {
        self.packages().map(<[Package]>::len)
    }

    /// Builds a custom distribution from explicit (package, probability)
    /// pairs, running the full validation. Errors carry the index of the
    /// offending package.
    pub fn custom(n: u64, s: u64, support: Vec<(Package, ProbInput)>) -> Result<Self> {
        Self::from_support(n, s, DistributionKind::Custom, support)
    }

    fn from_support(
        n: u64,
        s: u64,
        kind: DistributionKind,
        support: Vec<(Package, ProbInput)>,
    ) -> Result<Self> {
        if n == 0 || s == 0 || s > n {
            return Err(Error::invalid(format!(
                "need 1 <= s <= n, got n = {n}, s = {s}"
            )));
        }
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let mut packages = Vec::with_capacity(support.len());
        let mut inputs = Vec::with_capacity(support.len());
        for (index, (pkg, prob)) in support.into_iter().enumerate() {
            if pkg.len() as u64 != s {
                return Err(Error::InvalidPackage {
                    index,
                    message: format!("has {} coupons, expected s = {s}", pkg.len()),
                });
            }
            if let Some(&label) = pkg.coupons().iter().find(|&&c| c as u64 > n) {
                return Err(Error::InvalidPackage {
                    index,
                    message: format!("coupon label {label} exceeds n = {n}"),
                });
            }
            match &prob {
                ProbInput::Rational(r) => {
                    if !r.is_positive() {
                        return Err(Error::InvalidPackage {
                            index,
                            message: format!("probability {} is not positive", format_rational(r)),
                        });
                    }
                }
                ProbInput::Float(x) => {
                    if !(x.is_finite() && *x > 0.0) {
                        return Err(Error::InvalidPackage {
                            index,
                            message: format!("probability {x} is not positive and finite"),
                        });
                    }
                }
            }
            packages.push(pkg);
            inputs.push(prob);
        }
        let mut seen = BTreeSet::new();
        for (index, pkg) in packages.iter().enumerate() {
            if !seen.insert(pkg.coupons().to_vec()) {
                return Err(Error::InvalidPackage {
                    index,
                    message: "duplicate package".into(),
                });
            }
        }
        let all_exact = inputs.iter().all(|p| matches!(p, ProbInput::Rational(_)));
        let probs = if all_exact {
            let v: Vec<BigRational> = inputs
                .into_iter()
                .map(|p| match p {
                    ProbInput::Rational(r) => r,
                    ProbInput::Float(_) => unreachable!(),
                })
                .collect();
            let sum: BigRational = v.iter().cloned().sum();
            if !sum.is_one() {
                return Err(Error::InvalidDistribution(format!(
                    "probabilities sum to {}, expected 1",
                    format_rational(&sum)
                )));
            }
            Probabilities::Exact(v)
        } else {
            let v: Vec<f64> = inputs
                .into_iter()
                .map(|p| match p {
                    ProbInput::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
                    ProbInput::Float(x) => x,
                })
                .collect();
            let sum: f64 = v.iter().sum();
            if (sum - 1.0).abs() > FLOAT_SUM_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "probabilities sum to {sum}, expected 1 within {FLOAT_SUM_TOL}"
                )));
            }
            Probabilities::Float(v)
        };
        // coverage: every coupon must appear in some package
        let mut covered = vec![false; n as usize];
        for pkg in &packages {
            for &c in pkg.coupons() {
                covered[(c - 1) as usize] = true;
            }
        }
        if let Some(missing) = covered.iter().position(|&c| !c) {
            return Err(Error::Coverage {
                coupon: missing as u32 + 1,
            });
        }
        Ok(PackageDistribution {
            n,
            s,
            kind,
            repr: SupportRepr::Explicit { packages, probs },
        })
    }

    /// Package bitmasks for the subset-lattice engine. Needs `n <= 64` and an
    /// explicit support.
    pub(crate) fn masks(&self) -> Result<Vec<u64>> {
        if self.n > 64 {
            return Err(Error::Budget(format!(
                "bitmask support needs n <= 64, got n = {}",
                self.n
            )));
        }
        match self.packages() {
            Some(pkgs) => Ok(pkgs.iter().map(Package::mask).collect()),
            None => Err(Error::Budget(format!(
                "uniform support with n = {} is virtual; use the closed forms in module exact",
                self.n
            ))),
        }
    }
}

fn equiprobable(count: u64) -> Vec<ProbInput> {
    let p = BigRational::new(BigInt::one(), BigInt::from(count));
    vec![ProbInput::Rational(p); count as usize]
}

fn check_label_budget(count: u64, s: u64) -> Result<()> {
    if count.saturating_mul(s) > MATERIALIZE_LABEL_BUDGET {
        return Err(Error::Budget(format!(
            "materializing {count} packages of size {s} exceeds the label budget"
        )));
    }
    Ok(())
}

/// Builds one of the four named distributions.
///
/// * `Uniform`: all `C(n,s)` subsets equiprobable, materialized for
///   `n <= 16` and kept virtual beyond that.
/// * `Arcs`: the `n` cyclic windows of length `s`, each with probability `1/n`.
/// * `NearDecomposition`: `ceil(n/s)` aligned blocks, the last one padded
///   with the lowest labels, equiprobable.
/// * `Rotation`: the `floor(n/(n-s))` windows shifted by multiples of `n-s`,
///   equiprobable; requires `s >= n/2`.
///
/// `Custom` is not built here; ingest it with [`PackageDistribution::custom`]
/// or [`from_json_str`].
pub fn build_distribution(kind: DistributionKind, n: u64, s: u64) -> Result<PackageDistribution> {
    if n == 0 || s == 0 || s > n.saturating_sub(1) {
        return Err(Error::invalid(format!(
            "named distributions need 1 <= s <= n-1, got n = {n}, s = {s}"
        )));
    }
    match kind {
        DistributionKind::Uniform => {
            if n > UNIFORM_MATERIALIZE_MAX_N {
                return Ok(PackageDistribution {
                    n,
                    s,
                    kind,
                    repr: SupportRepr::VirtualUniform,
                });
            }
            let count = binomial(n, s).to_u64().expect("n <= 16");
            check_label_budget(count, s)?;
            let support = combinations(n, s)
                .into_iter()
                .map(|c| Package::new(c).expect("combinations are valid packages"))
                .zip(equiprobable(count))
                .collect();
            PackageDistribution::from_support(n, s, kind, support)
        }
        DistributionKind::Arcs => {
            check_label_budget(n, s)?;
            let mut support = Vec::with_capacity(n as usize);
            for (j, p) in equiprobable(n).into_iter().enumerate() {
                let window: Vec<u32> = (0..s)
                    .map(|t| ((j as u64 + t) % n) as u32 + 1)
                    .collect();
                support.push((Package::new(window)?, p));
            }
            PackageDistribution::from_support(n, s, kind, support)
        }
        DistributionKind::NearDecomposition => {
            let m = n.div_ceil(s);
            check_label_budget(m, s)?;
            let mut support = Vec::with_capacity(m as usize);
            for (j, p) in equiprobable(m).into_iter().enumerate() {
                let j = j as u64;
                // block j covers js+1 ..= (j+1)s; the last block wraps into
                // the lowest labels so it still has exactly s coupons
                let block: Vec<u32> = (0..s)
                    .map(|t| ((j * s + t) % n) as u32 + 1)
                    .collect();
                support.push((Package::new(block)?, p));
            }
            PackageDistribution::from_support(n, s, kind, support)
        }
        DistributionKind::Rotation => {
            let m = n / (n - s);
            if m < 2 {
                return Err(Error::RotationDegenerate { n, s });
            }
            check_label_budget(m, s)?;
            let mut support = Vec::with_capacity(m as usize);
            for (j, p) in equiprobable(m).into_iter().enumerate() {
                let start = j as u64 * (n - s);
                let window: Vec<u32> = (0..s)
                    .map(|t| ((start + t) % n) as u32 + 1)
                    .collect();
                support.push((Package::new(window)?, p));
            }
            PackageDistribution::from_support(n, s, kind, support)
        }
        DistributionKind::Custom => Err(Error::invalid(
            "custom distributions are ingested from explicit support or JSON",
        )),
    }
}

// ---------------------------------------------------------------------------
// JSON ingestion and emission
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DistFile {
    n: u64,
    s: u64,
    packages: Vec<PackageEntry>,
}

#[derive(Serialize, Deserialize)]
struct PackageEntry {
    coupons: Vec<u32>,
    prob: ProbSpec,
}

/// A probability in a JSON file: a number, a decimal string, or `"p/q"`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ProbSpec {
    Number(f64),
    Text(String),
}

fn parse_prob(spec: &ProbSpec) -> Result<ProbInput> {
    match spec {
        ProbSpec::Number(x) => Ok(ProbInput::Float(*x)),
        ProbSpec::Text(t) => parse_rational_text(t)
            .map(ProbInput::Rational)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "cannot parse probability {t:?}; use \"p/q\", a plain decimal, or a number"
                ))
            }),
    }
}

/// Parses a distribution from the JSON ingestion format:
/// `{"n": 4, "s": 2, "packages": [{"coupons": [1,2], "prob": "1/2"}, ...]}`.
pub fn from_json_str(text: &str) -> Result<PackageDistribution> {
    let file: DistFile = serde_json::from_str(text)?;
    let mut support = Vec::with_capacity(file.packages.len());
    for entry in &file.packages {
        let prob = parse_prob(&entry.prob)?;
        support.push((Package::new(entry.coupons.clone())?, prob));
    }
    PackageDistribution::custom(file.n, file.s, support)
}

/// Emits a distribution in the same JSON format ingestion accepts. Rational
/// probabilities are written as `"p/q"` strings, float ones as numbers.
/// Virtual uniform supports cannot be serialized.
pub fn to_json_value(dist: &PackageDistribution) -> Result<serde_json::Value> {
    let packages = dist.packages().ok_or_else(|| {
        Error::Budget("virtual uniform support has no explicit package list".into())
    })?;
    let probs = dist.probabilities().expect("explicit support has probabilities");
    let entries: Vec<PackageEntry> = packages
        .iter()
        .enumerate()
        .map(|(i, pkg)| PackageEntry {
            coupons: pkg.coupons().to_vec(),
            prob: match probs {
                Probabilities::Exact(v) => ProbSpec::Text(format_rational(&v[i])),
                Probabilities::Float(v) => ProbSpec::Number(v[i]),
            },
        })
        .collect();
    Ok(serde_json::to_value(DistFile {
        n: dist.n(),
        s: dist.s(),
        packages: entries,
    })?)
}
