//! Combinatorial helpers: exact binomials, hypergeometric weights, and a
//! small double-double arithmetic kernel for cancellation-heavy float sums.

use num_bigint::BigUint;

use crate::value::Scalar;

/// Exact binomial coefficient C(n, k).
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// All `s`-subsets of `{1, ..., n}` in lexicographic order.
pub fn combinations(n: u64, s: u64) -> Vec<Vec<u32>> {
    assert!(s >= 1 && s <= n, "combinations need 1 <= s <= n");
    let mut out = Vec::new();
    let mut subset: Vec<u32> = (1..=s as u32).collect();
    loop {
        out.push(subset.clone());
        let mut i = s as usize;
        while i > 0 && subset[i - 1] == (n - (s - i as u64)) as u32 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        subset[i - 1] += 1;
        for j in i..s as usize {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Hypergeometric probabilities for the number of "marked" coupons in a
/// package: out of `n` coupons, `m` are marked, and a package of `s` distinct
/// coupons is drawn uniformly. Returns `(lo, w)` where `w[j]` is
/// `P[draw contains lo + j marked coupons]` and the support is
/// `lo ..= min(s, m)` with `lo = max(0, s + m - n)`.
///
/// The weights are built from the ratio recurrence
/// `P(i+1)/P(i) = (m-i)(s-i) / ((i+1)(n-m-s+i+1))`
/// started at the mode and normalized by the total, so no large binomial is
/// ever formed. Over the rationals the normalization makes each row an exact
/// probability vector; over `f64` it keeps every intermediate in range even
/// for `n` in the hundreds of thousands.
pub fn hyper_kernel<T: Scalar>(n: u64, m: u64, s: u64) -> (u64, Vec<T>) {
    assert!(m <= n && s <= n && s >= 1, "kernel needs 1 <= s <= n, m <= n");
    let lo = s.saturating_sub(n - m);
    let hi = s.min(m);
    let len = (hi - lo + 1) as usize;
    let mode = (((s + 1) * (m + 1)) / (n + 2)).clamp(lo, hi);
    let mut w = vec![T::zero(); len];
    let idx = |i: u64| (i - lo) as usize;
    w[idx(mode)] = T::one();
    for i in mode..hi {
        let num = (m - i) * (s - i);
        // n + i + 1 - m - s >= 1 on the support, but must be grouped so the
        // unsigned arithmetic never dips below zero
        let den = (i + 1) * (n + i + 1 - m - s);
        w[idx(i + 1)] = w[idx(i)].clone() * T::ratio(num, den);
    }
    for i in (lo + 1..=mode).rev() {
        let num = i * (n + i - m - s);
        let den = (m - i + 1) * (s - i + 1);
        w[idx(i - 1)] = w[idx(i)].clone() * T::ratio(num, den);
    }
    let mut total = T::zero();
    for v in &w {
        total += v.clone();
    }
    for v in &mut w {
        *v = v.clone() / total.clone();
    }
    (lo, w)
}

/// Double-double arithmetic: an unevaluated sum hi + lo carrying roughly 106
/// bits of precision. Used where an alternating sum cancels ten or more
/// leading digits, which plain compensated summation cannot survive.
pub mod dd {
    #[derive(Clone, Copy, Debug)]
    pub struct Dd {
        pub hi: f64,
        pub lo: f64,
    }

    impl Dd {
        pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

        pub fn from(x: f64) -> Dd {
            Dd { hi: x, lo: 0.0 }
        }

        pub fn to_f64(self) -> f64 {
            self.hi + self.lo
        }
    }

    fn quick_two_sum(a: f64, b: f64) -> Dd {
        // requires |a| >= |b|
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd {
            hi: p,
            lo: f64::mul_add(a, b, -p),
        }
    }

    pub fn add(a: Dd, b: Dd) -> Dd {
        let s = two_sum(a.hi, b.hi);
        let lo = s.lo + a.lo + b.lo;
        quick_two_sum(s.hi, lo)
    }

    pub fn sub(a: Dd, b: Dd) -> Dd {
        add(a, neg(b))
    }

    pub fn neg(a: Dd) -> Dd {
        Dd { hi: -a.hi, lo: -a.lo }
    }

    pub fn mul(a: Dd, b: Dd) -> Dd {
        let p = two_prod(a.hi, b.hi);
        let lo = p.lo + a.hi * b.lo + a.lo * b.hi;
        quick_two_sum(p.hi, lo)
    }

    pub fn div(a: Dd, b: Dd) -> Dd {
        let q1 = a.hi / b.hi;
        let r = sub(a, mul(Dd::from(q1), b));
        let q2 = r.hi / b.hi;
        let r = sub(r, mul(Dd::from(q2), b));
        let q3 = r.hi / b.hi;
        add(quick_two_sum(q1, q2), Dd::from(q3))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};

    #[test]
    fn combinations_are_lexicographic_and_complete() {
        let all = combinations(5, 3);
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![1, 2, 3]);
        assert_eq!(all[1], vec![1, 2, 4]);
        assert_eq!(all[9], vec![3, 4, 5]);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(combinations(4, 4), vec![vec![1, 2, 3, 4]]);
    }

    #[test]
    fn binomial_small_table() {
        assert_eq!(binomial(10, 5), BigUint::from(252u32));
        assert_eq!(binomial(0, 0), BigUint::from(1u32));
        assert_eq!(binomial(5, 7), BigUint::from(0u32));
        assert_eq!(
            binomial(56, 28).to_string(),
            "7648690600760440" // still exactly representable in f64
        );
    }

    #[test]
    fn kernel_matches_binomial_formula_exactly() {
        // P[i] = C(m,i) C(n-m,s-i) / C(n,s)
        for &(n, m, s) in &[(10u64, 4u64, 3u64), (9, 9, 2), (12, 5, 7), (7, 3, 5)] {
            let (lo, w) = hyper_kernel::<BigRational>(n, m, s);
            let total = binomial(n, s);
            let mut sum = BigRational::zero();
            for (j, p) in w.iter().enumerate() {
                let i = lo + j as u64;
                let want = BigRational::new(
                    (binomial(m, i) * binomial(n - m, s - i)).into(),
                    total.clone().into(),
                );
                assert_eq!(p, &want, "n={n} m={m} s={s} i={i}");
                sum += p.clone();
            }
            assert!(sum.is_one(), "row must sum to one exactly");
        }
    }

    #[test]
    fn kernel_float_row_sums_to_one() {
        let (_, w) = hyper_kernel::<f64>(100_000, 40_000, 1_000);
        let sum: f64 = w.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let (lo, we) = hyper_kernel::<BigRational>(2_000, 700, 60);
        let (lof, wf) = hyper_kernel::<f64>(2_000, 700, 60);
        assert_eq!(lo, lof);
        for (e, f) in we.iter().zip(&wf) {
            assert!((e.to_f64().unwrap() - f).abs() <= 1e-14);
        }
    }

    #[test]
    fn dd_survives_catastrophic_cancellation() {
        use dd::*;
        // (1e16 + 1) - 1e16 == 1 in double-double, 0 or 2 in plain f64 sums
        let a = add(Dd::from(1e16), Dd::from(1.0));
        let b = sub(a, Dd::from(1e16));
        assert_eq!(b.to_f64(), 1.0);
        let third = div(Dd::from(1.0), Dd::from(3.0));
        let one = mul(third, Dd::from(3.0));
        assert!((one.to_f64() - 1.0).abs() < 1e-30);
    }
}
