//! Continued fractions, the triple construction `-ε < θn² + m² - m'² < 0`,
//! and σ-crossing searches between two Robin levels.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numeric::two_product;
use crate::real::Real;
use crate::secular::RobinParameter;
use crate::spectrum::{
    eigenvalue, enumerate_band, level_difference, multiplicity_scan, MultTolerance,
    MultiplicityCluster, Rectangle, DEFAULT_RECORD_BUDGET,
};

pub const MAX_CF_DEPTH: usize = 40;
pub const DEFAULT_QUOTIENT_BOUND: u64 = 10;
/// Largest denominator accepted as "θ is this rational".
const RATIONAL_DENOMINATOR_CAP: u64 = 1 << 26;

pub const TOL_CROSSING: f64 = 1e-10;
pub const MAX_BISECTIONS: u32 = 200;
/// Upper end of the σ range searched when growing a bracket.
pub const SIGMA_SEARCH_LIMIT: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuedFraction<T> {
    pub theta: T,
    /// `a₀; a₁, a₂, …`, only quotients shared by every real that rounds to `theta`.
    pub partial_quotients: Vec<u64>,
    pub convergents: Vec<(u128, u128)>,
    pub requested_depth: usize,
    /// The expansion ended: `theta` is the rational `p/q` of the last convergent.
    pub terminated: bool,
    /// Fewer quotients than requested could be certified at this precision.
    pub precision_exhausted: bool,
}

/// Exact value of a positive float as a ratio of integers.
fn exact_ratio<T: Real>(x: T) -> (BigInt, BigInt) {
    let (mantissa, exponent, _) = x.integer_decode();
    scaled(BigInt::from(mantissa), exponent as i32)
}

fn scaled(num: BigInt, exponent: i32) -> (BigInt, BigInt) {
    if exponent >= 0 {
        (num << exponent as usize, BigInt::from(1))
    } else {
        (num, BigInt::from(1) << (-exponent) as usize)
    }
}

/// Euclid on `p/q`, at most `depth` quotients. The flag reports termination.
fn euclid(mut p: BigInt, mut q: BigInt, depth: usize) -> (Vec<BigInt>, bool) {
    let mut out = Vec::new();
    while out.len() < depth {
        let a = &p / &q;
        let r = &p - &a * &q;
        out.push(a);
        if r.is_zero() {
            return (out, true);
        }
        p = q;
        q = r;
    }
    (out, false)
}

/// Convergents from quotients; stops at the first overflow.
fn convergents(quotients: &[u64]) -> Vec<(u128, u128)> {
    let (mut p0, mut q0, mut p1, mut q1) = (1u128, 0u128, 0u128, 1u128);
    let mut out = Vec::with_capacity(quotients.len());
    for &a in quotients {
        let a = a as u128;
        let next = a
            .checked_mul(p0)
            .and_then(|v| v.checked_add(p1))
            .zip(a.checked_mul(q0).and_then(|v| v.checked_add(q1)));
        let Some((p, q)) = next else { break };
        out.push((p, q));
        (p1, q1, p0, q0) = (p0, q0, p, q);
    }
    out
}

/// Continued fraction of `theta` to `depth` quotients (`a₀` counts as one).
///
/// The float is expanded exactly together with both ends of its rounding
/// interval; quotients are kept while all three expansions agree. A float
/// that is exactly a rational with small denominator expands to completion.
pub fn continued_fraction<T: Real>(theta: T, depth: usize) -> Result<ContinuedFraction<T>> {
    if !(theta.is_finite() && theta > T::zero()) {
        return Err(invalid(format!("theta must be positive and finite, got {theta}")));
    }
    if depth == 0 || depth > MAX_CF_DEPTH {
        return Err(invalid(format!("depth must be in 1..={MAX_CF_DEPTH}, got {depth}")));
    }
    if theta >= T::lit(9_223_372_036_854_775_808.0) {
        return Err(invalid("integer part of theta exceeds 63 bits"));
    }

    let (p, q) = exact_ratio(theta);
    let (exact, terminated) = euclid(p, q, depth);
    let small_rational = terminated && denominator_of(&exact) <= RATIONAL_DENOMINATOR_CAP as u128;

    let certified: Vec<BigInt> = if small_rational {
        exact
    } else {
        let (mantissa, exponent, _) = theta.integer_decode();
        let twice = BigInt::from(mantissa) << 1usize;
        let (lo_p, lo_q) = scaled(&twice - 1, exponent as i32 - 1);
        let (hi_p, hi_q) = scaled(&twice + 1, exponent as i32 - 1);
        let (lo, _) = euclid(lo_p, lo_q, depth + 1);
        let (hi, _) = euclid(hi_p, hi_q, depth + 1);
        exact
            .iter()
            .zip(&lo)
            .zip(&hi)
            .take_while(|((e, l), h)| e == l && e == h)
            .map(|((e, _), _)| e.clone())
            .collect()
    };

    let mut partial_quotients: Vec<u64> = certified.iter().map_while(|a| a.to_u64()).collect();
    let mut convs = convergents(&partial_quotients);
    partial_quotients.truncate(convs.len());
    convs.truncate(partial_quotients.len());
    let terminated = small_rational && partial_quotients.len() == certified.len();
    Ok(ContinuedFraction {
        theta,
        precision_exhausted: !terminated && partial_quotients.len() < depth,
        partial_quotients,
        convergents: convs,
        requested_depth: depth,
        terminated,
    })
}

fn denominator_of(quotients: &[BigInt]) -> u128 {
    let small: Option<Vec<u64>> = quotients.iter().map(|a| a.to_u64()).collect();
    match small {
        Some(qs) if convergents(&qs).len() == qs.len() => {
            convergents(&qs).last().map_or(u128::MAX, |c| c.1)
        }
        _ => u128::MAX,
    }
}

/// Finite-depth proxy for bounded partial quotients. Not a proof.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BadlyApproximableProxy {
    /// Largest of `a₁, a₂, …` over the certified expansion.
    pub max_partial_quotient: u64,
    pub is_candidate: bool,
    pub depth_used: usize,
    pub precision_exhausted: bool,
}

pub fn badly_approximable_proxy<T: Real>(theta: T, depth: usize, bound: u64) -> Result<BadlyApproximableProxy> {
    let cf = continued_fraction(theta, depth)?;
    let max = cf.partial_quotients.iter().skip(1).copied().max().unwrap_or(0);
    Ok(BadlyApproximableProxy {
        max_partial_quotient: max,
        is_candidate: max <= bound,
        depth_used: cf.partial_quotients.len(),
        precision_exhausted: cf.precision_exhausted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleWitness<T> {
    pub theta: T,
    pub epsilon: T,
    pub n: u64,
    pub m: u64,
    pub m_prime: u64,
    /// `θn² + m² - m'²`, evaluated as `-4 (j - θn₁²)` with an error-free product.
    pub q_value: T,
    pub n1: u64,
    pub j: u64,
}

impl<T: Real> TripleWitness<T> {
    /// `θn² + m² - m'²` in plain floating point.
    pub fn direct_value(&self) -> T {
        let n = T::from_index(self.n);
        let m = T::from_index(self.m);
        let mp = T::from_index(self.m_prime);
        self.theta * n * n + m * m - mp * mp
    }

    pub fn is_valid(&self) -> bool {
        let bounds = |q: T| -self.epsilon < q && q < T::zero();
        self.n >= 1 && self.m >= 1 && bounds(self.q_value) && bounds(self.direct_value())
    }
}

/// `(j, j - θn²)` with `j = ⌈θn²⌉`; the gap is exact up to one rounding.
fn ceiling_gap<T: Real>(theta: T, n1: u64) -> (u64, T) {
    let sq = T::from_index(n1 * n1);
    let (p, e) = two_product(theta, sq);
    let mut j = p.ceil();
    let mut gap = (j - p) - e;
    if gap <= T::zero() {
        j = j + T::one();
        gap = gap + T::one();
    } else if gap > T::one() {
        j = j - T::one();
        gap = gap - T::one();
    }
    (j.to_u64().unwrap_or(u64::MAX), gap)
}

/// Largest `n₁` scanned; beyond it `θn₁²` is not resolved to the needed accuracy.
pub fn max_triple_scan<T: Real>() -> u64 {
    if T::epsilon() < T::lit(1e-10) {
        1_000_000
    } else {
        4096
    }
}

/// First `n₁ ≤ n_max` with `frac(θn₁²) ∈ (1 - ε/4, 1)` and `j ≥ 2`, returned
/// as `(n, m, m') = (2n₁, j - 1, j + 1)`.
pub fn hl_triple<T: Real>(theta: T, epsilon: T, n_max: u64) -> Result<TripleWitness<T>> {
    check_triple_args(theta, epsilon, n_max)?;
    let window = epsilon / T::lit(4.0);
    let hit = (1..=n_max).into_par_iter().find_first(|&n1| {
        let (j, gap) = ceiling_gap(theta, n1);
        j >= 2 && gap < window
    });
    match hit {
        Some(n1) => {
            witness_at(theta, epsilon, n1)
        }
        None => {
            let (best_n1, best_gap) = (1..=n_max)
                .into_par_iter()
                .map(|n1| (n1, ceiling_gap(theta, n1)))
                .filter(|(_, (j, _))| *j >= 2)
                .map(|(n1, (_, gap))| (n1, gap.as_f64()))
                .reduce(|| (0, f64::INFINITY), |a, b| {
                    if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
                        b
                    } else {
                        a
                    }
                });
            Err(Error::WitnessNotFound {
                n_max,
                best_n1,
                best_frac: 1.0 - best_gap,
            })
        }
    }
}

fn check_triple_args<T: Real>(theta: T, epsilon: T, n_max: u64) -> Result<()> {
    if !(theta.is_finite() && theta > T::zero()) {
        return Err(invalid(format!("theta must be positive and finite, got {theta}")));
    }
    if !(epsilon.is_finite() && epsilon > T::zero()) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let cap = max_triple_scan::<T>();
    if n_max == 0 || n_max > cap {
        return Err(invalid(format!("n_max must be in 1..={cap}, got {n_max}")));
    }
    Ok(())
}

fn witness_at<T: Real>(theta: T, epsilon: T, n1: u64) -> Result<TripleWitness<T>> {
    let (j, gap) = ceiling_gap(theta, n1);
    let witness = TripleWitness {
        theta,
        epsilon,
        n: 2 * n1,
        m: j - 1,
        m_prime: j + 1,
        q_value: -T::lit(4.0) * gap,
        n1,
        j,
    };
    if !witness.is_valid() {
        return Err(Error::Internal(format!(
            "witness at n1 = {n1} fails its recheck: q = {}, direct = {}",
            witness.q_value,
            witness.direct_value()
        )));
    }
    Ok(witness)
}

/// Up to `count` witnesses in ascending `n₁`; possibly empty.
pub fn hl_triples<T: Real>(theta: T, epsilon: T, n_max: u64, count: usize) -> Result<Vec<TripleWitness<T>>> {
    check_triple_args(theta, epsilon, n_max)?;
    let window = epsilon / T::lit(4.0);
    let hits: Vec<u64> = (1..=n_max)
        .into_par_iter()
        .filter(|&n1| {
            let (j, gap) = ceiling_gap(theta, n1);
            j >= 2 && gap < window
        })
        .collect();
    hits.into_iter()
        .take(count)
        .map(|n1| witness_at(theta, epsilon, n1))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingResult<T> {
    #[serde(rename = "L")]
    pub length: T,
    pub pair_a: (u32, u32),
    pub pair_b: (u32, u32),
    pub sigma_star: T,
    /// `|Λ_a(σ*) - Λ_b(σ*)|`.
    pub residual: T,
    pub bracket: (T, T),
    pub iterations: u32,
}

/// Bisection for `Λ_a(σ) = Λ_b(σ)` on `[sigma_lo, sigma_hi]` (`sigma_lo`
/// defaults to 0) down to `|Λ_a - Λ_b| < 1e-10`.
pub fn crossing_search<T: Real>(
    length: T,
    pair_a: (u32, u32),
    pair_b: (u32, u32),
    sigma_hi: T,
    sigma_lo: Option<T>,
) -> Result<CrossingResult<T>> {
    crossing_search_with_tolerance(length, pair_a, pair_b, sigma_hi, sigma_lo, T::lit(TOL_CROSSING))
}

pub fn crossing_search_with_tolerance<T: Real>(
    length: T,
    pair_a: (u32, u32),
    pair_b: (u32, u32),
    sigma_hi: T,
    sigma_lo: Option<T>,
    tol: T,
) -> Result<CrossingResult<T>> {
    Rectangle::new(length)?;
    if !(tol.is_finite() && tol > T::zero()) {
        return Err(invalid(format!("crossing tolerance must be positive, got {tol}")));
    }
    if pair_a == pair_b {
        return Err(invalid("pair_a and pair_b coincide; the difference vanishes identically"));
    }
    let mut lo = RobinParameter::new(sigma_lo.unwrap_or_else(T::zero))?.value();
    let mut hi = RobinParameter::new(sigma_hi)?.value();
    if !(hi > lo) {
        return Err(invalid(format!("need sigma_lo < sigma_hi, got [{lo}, {hi}]")));
    }
    let g = |s: T| level_difference(length, s, pair_a, pair_b);
    let mut g_lo = g(lo)?;
    let mut g_hi = g(hi)?;
    if lo == T::zero() && g_lo == T::zero() {
        return Err(invalid(
            "the levels already coincide at sigma = 0; supply a positive sigma_lo",
        ));
    }
    let result = |s: T, gs: T, lo: T, hi: T, iterations| CrossingResult {
        length,
        pair_a,
        pair_b,
        sigma_star: s,
        residual: gs.abs(),
        bracket: (lo, hi),
        iterations,
    };
    for (s, gs) in [(lo, g_lo), (hi, g_hi)] {
        if gs.abs() < tol {
            return Ok(result(s, gs, lo, hi, 0));
        }
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::NoSignChange {
            sigma_lo: lo.as_f64(),
            sigma_hi: hi.as_f64(),
            g_lo: g_lo.as_f64(),
            g_hi: g_hi.as_f64(),
        });
    }
    for it in 1..=MAX_BISECTIONS {
        let mid = lo + (hi - lo) / T::lit(2.0);
        let g_mid = g(mid)?;
        if g_mid.abs() < tol {
            return Ok(result(mid, g_mid, lo, hi, it));
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
        if !(mid > lo || mid < hi) || hi - lo <= T::epsilon() * hi {
            break;
        }
    }
    Err(Error::NotConverged(format!(
        "bisection stalled on [{lo}, {hi}] with g = ({g_lo}, {g_hi})"
    )))
}

/// Doubles `sigma_hi` from `sigma_start` until `Λ_a - Λ_b` changes sign
/// relative to `sigma_lo`, then bisects.
pub fn find_crossing<T: Real>(
    length: T,
    pair_a: (u32, u32),
    pair_b: (u32, u32),
    sigma_start: T,
    sigma_lo: Option<T>,
) -> Result<CrossingResult<T>> {
    find_crossing_with_tolerance(length, pair_a, pair_b, sigma_start, sigma_lo, T::lit(TOL_CROSSING))
}

pub fn find_crossing_with_tolerance<T: Real>(
    length: T,
    pair_a: (u32, u32),
    pair_b: (u32, u32),
    sigma_start: T,
    sigma_lo: Option<T>,
    tol: T,
) -> Result<CrossingResult<T>> {
    if !(sigma_start.is_finite() && sigma_start > T::zero()) {
        return Err(invalid(format!("sigma_start must be positive, got {sigma_start}")));
    }
    let lo = sigma_lo.unwrap_or_else(T::zero);
    let g_lo = level_difference(length, lo, pair_a, pair_b)?;
    let limit = T::lit(SIGMA_SEARCH_LIMIT);
    let mut hi = sigma_start.max(lo * T::lit(2.0));
    loop {
        let g_hi = level_difference(length, hi, pair_a, pair_b)?;
        if g_hi.signum() != g_lo.signum() || g_hi.abs() < tol || hi >= limit {
            return crossing_search_with_tolerance(length, pair_a, pair_b, hi, sigma_lo, tol);
        }
        hi = (hi * T::lit(2.0)).min(limit);
    }
}

/// Witness and crossing of the multiplicity construction for `L² = θ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleCrossing<T> {
    pub witness: TripleWitness<T>,
    pub crossing: CrossingResult<T>,
}

/// `hl_triple`, then the crossing of `(n, m)` with `(0, m')` on `L = √θ`,
/// searched upward from `σ = ε`.
pub fn triple_crossing<T: Real>(theta: T, epsilon: T, n_max: u64) -> Result<TripleCrossing<T>> {
    let witness = hl_triple(theta, epsilon, n_max)?;
    let index = |v: u64| u32::try_from(v).map_err(|_| invalid("triple index exceeds u32"));
    let a = (index(witness.n)?, index(witness.m)?);
    let b = (0, index(witness.m_prime)?);
    let crossing = find_crossing(theta.sqrt(), a, b, epsilon, None)?;
    Ok(TripleCrossing { witness, crossing })
}

/// The cluster containing both pairs of a crossing, scanned on a narrow band.
pub fn cluster_at_crossing<T: Real>(
    crossing: &CrossingResult<T>,
    tol: MultTolerance<T>,
) -> Result<Option<MultiplicityCluster<T>>> {
    let (l, s) = (crossing.length, crossing.sigma_star);
    let la = eigenvalue(l, s, crossing.pair_a.0, crossing.pair_a.1)?.lambda;
    let lb = eigenvalue(l, s, crossing.pair_b.0, crossing.pair_b.1)?.lambda;
    let margin = T::lit(4.0) * tol.threshold(la.max(lb)) + T::one();
    let floor = (la.min(lb) - margin).max(T::zero());
    let band = enumerate_band(l, s, floor, la.max(lb) + margin, DEFAULT_RECORD_BUDGET)?;
    Ok(multiplicity_scan(&band, tol, false)?.into_iter().find(|c| {
        c.members.contains(&crossing.pair_a) && c.members.contains(&crossing.pair_b)
    }))
}
