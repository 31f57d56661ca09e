//! Closed-form rate and subpacketization comparisons.
//!
//! Rates are exact rationals; subpacketization levels are arbitrary-precision
//! integers. Floating point only appears in the log-scale exponents.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use statrs::function::gamma::ln_gamma;

use crate::{Error, Rational, Result};

/// `C(n, r)` exactly.
pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::from(0u32);
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        // acc * (n - i) is always divisible by (i + 1)
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `log2 C(n, r)` through log-gamma, without forming the integer.
pub fn log2_binomial(n: u64, r: u64) -> f64 {
    let ln = ln_gamma(n as f64 + 1.0) - ln_gamma(r as f64 + 1.0) - ln_gamma((n - r) as f64 + 1.0);
    ln / std::f64::consts::LN_2
}

/// `log2` of an arbitrarily large integer, accurate to double precision.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().unwrap_or(0.0).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(0.0);
    top.log2() + shift as f64
}

/// MN rate `K(1 - M/N) / (1 + K M/N)`.
pub fn rate_mn(users: u64, cache_ratio: Rational) -> Rational {
    let k = Rational::from_integer(users);
    let one = Rational::one();
    k * (one - cache_ratio) / (one + k * cache_ratio)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonRow {
    pub users: u64,
    pub q: u64,
    pub k: u64,
    pub rate_mn: Rational,
    pub rate_star: Rational,
    pub subpack_mn: BigUint,
    pub subpack_star: BigUint,
}

/// MN vs proposed at `K = q*k`, `M/N = 1/q`. `k = 1` is accepted here even
/// though no design exists for it.
pub fn comparison_row(q: u64, k: u64) -> Result<ComparisonRow> {
    if q < 2 || k < 1 {
        return Err(Error::InvalidParams(format!(
            "comparison needs q ≥ 2 and k ≥ 1 (got q={q}, k={k})"
        )));
    }
    Ok(ComparisonRow {
        users: q * k,
        q,
        k,
        rate_mn: Rational::new(q * k - k, 1 + k),
        rate_star: Rational::from_integer(q - 1),
        subpack_mn: binomial(q * k, k),
        subpack_star: BigUint::from(q).pow((k - 1) as u32),
    })
}

pub fn comparison_table(q: u64, ks: impl IntoIterator<Item = u64>) -> Result<Vec<ComparisonRow>> {
    ks.into_iter().map(|k| comparison_row(q, k)).collect()
}

/// `R^MN / R* = k/(k+1)`; checked against the ratio of the two rates.
pub fn rate_ratio(q: u64, k: u64) -> Result<Rational> {
    let row = comparison_row(q, k)?;
    let ratio = Rational::new(k, k + 1);
    assert_eq!(row.rate_mn / row.rate_star, ratio);
    Ok(ratio)
}

/// `(1/(kq)) log2(F^MN / F*)`.
pub fn subpack_exponent(q: u64, k: u64) -> Result<f64> {
    if q < 2 || k < 2 {
        return Err(Error::InvalidParams(format!(
            "exponent needs q ≥ 2 and k ≥ 2 (got q={q}, k={k})"
        )));
    }
    let log_ratio = log2_binomial(q * k, k) - (k - 1) as f64 * (q as f64).log2();
    Ok(log_ratio / (k * q) as f64)
}

/// Large-`k` limit of [`subpack_exponent`]: `(1 - 1/q) log2(q/(q-1))`.
pub fn subpack_exponent_limit(q: u64) -> f64 {
    let q = q as f64;
    (1.0 - 1.0 / q) * (q / (q - 1.0)).log2()
}

/// Memory sharing between MN at `t/(2k)` and `(2k-t)/(2k)` for `K = 2k`,
/// `M/N = 1/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemShareRow {
    pub k: u64,
    pub t: u64,
    pub rate: Rational,
    pub subpack: BigUint,
}

pub fn memshare_row(k: u64, t: u64) -> Result<MemShareRow> {
    if t == 0 || t >= k {
        return Err(Error::InvalidParams(format!(
            "memory sharing needs 0 < t < k (got k={k}, t={t})"
        )));
    }
    let first = Rational::new(2 * k - t, 1 + t);
    let second = Rational::new(t, 1 + 2 * k - t);
    Ok(MemShareRow {
        k,
        t,
        rate: (first + second) / 2,
        subpack: binomial(2 * k, t) * 2u32,
    })
}

/// Value the subpacketization exponent of memory sharing is compared with.
pub const MEMSHARE_REFERENCE_LIMIT: f64 = 2.8;

/// `2 H(1/3) - 1`: what `(1/k) log2(F^{MN,MS}/F*)` tends to at
/// `t = (2k-2)/3` when evaluated with the binary entropy approximation.
pub fn memshare_entropy_limit() -> f64 {
    let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    2.0 * h(1.0 / 3.0) - 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemShareComparison {
    pub row: MemShareRow,
    pub subpack_star: BigUint,
    /// `(1/k) log2(F^{MN,MS} / F*)`.
    pub exponent: f64,
    pub reference_limit: f64,
}

/// Memory sharing tuned to the proposed rate: `t = (2k-2)/3`, which is an
/// integer only for `k ≡ 1 (mod 3)`.
pub fn memshare_comparison(k: u64) -> Result<MemShareComparison> {
    if k % 3 != 1 {
        return Err(Error::InvalidParams(format!(
            "t = (2k-2)/3 is fractional for k={k}; use k ≡ 1 (mod 3), e.g. 4, 7, 10, 13"
        )));
    }
    let t = (2 * k - 2) / 3;
    let row = memshare_row(k, t)?;
    let exponent = (1.0 + log2_binomial(2 * k, t) - (k - 1) as f64) / k as f64;
    Ok(MemShareComparison {
        row,
        subpack_star: BigUint::from(2u32).pow((k - 1) as u32),
        exponent,
        reference_limit: MEMSHARE_REFERENCE_LIMIT,
    })
}

/// Admissible `k` values for [`memshare_comparison`] within `range`.
pub fn memshare_ks(range: std::ops::RangeInclusive<u64>) -> impl Iterator<Item = u64> {
    range.filter(|k| k % 3 == 1 && *k > 1)
}

/// Fixed-point rendering with `places` decimals, rounding half away from
/// zero.
pub fn format_decimal(r: Rational, places: u32) -> String {
    let scale = 10u64.pow(places);
    let scaled = (r * Rational::from_integer(scale) + Rational::new(1, 2)).floor().to_integer();
    let (int, frac) = (scaled / scale, scaled % scale);
    if places == 0 {
        int.to_string()
    } else {
        format!("{int}.{frac:0width$}", width = places as usize)
    }
}

pub fn rational_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
