//! One-dimensional Robin frequencies.
//!
//! On the unit interval the Robin eigenfunctions split into even and odd
//! classes. The `n`-th frequency `k_n(σ)` lies in `[nπ, (n+1)π]` and solves
//!
//! * `k tan(k/2) = σ` for even `n`,
//! * `-k cot(k/2) = σ` for odd `n`.
//!
//! Writing `k = nπ + δ` both forms collapse to `(nπ + δ) tan(δ/2) = σ` with
//! `δ ∈ [0, π)`. The solver works in that reduced coordinate (or in the
//! complement `u = π - δ` on the upper half bracket), so the unknown keeps full
//! relative precision even when `k` is large or `σ` is huge.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numeric::two_product;
use crate::real::Real;

/// Relative shrink applied at the singular end of the bracket before bisection.
const SINGULAR_SHRINK: f64 = 1e-9;

/// Bisection steps taken before switching to Newton.
const BISECTION_WARMUP: usize = 12;

const MAX_ITERATIONS: usize = 400;

/// A validated Robin constant `σ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct RobinParameter<T>(T);

impl<T: Real> RobinParameter<T> {
    pub fn new(sigma: T) -> Result<Self> {
        if !sigma.is_finite() {
            return Err(invalid(format!("sigma must be finite, got {sigma}")));
        }
        if sigma < T::zero() {
            return Err(invalid(format!("sigma must be nonnegative, got {sigma}")));
        }
        Ok(Self(sigma))
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    #[inline]
    pub fn is_neumann(self) -> bool {
        self.0 == T::zero()
    }
}

/// Symmetry class of the eigenfunction, fixed by `n mod 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: u32) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// One solved frequency `k_n(σ)` on the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frequency<T> {
    pub n: u32,
    pub sigma: T,
    pub k: T,
    /// `δ = k - nπ`, carried at full relative precision.
    pub offset: T,
    /// `u = π - δ`; accurate when the root sits close to the Dirichlet end.
    pub complement: T,
    /// Parity-form defect `|k tan(δ/2) - σ| / (1 + k)`.
    pub residual: T,
    pub parity: Parity,
}

impl<T: Real> Frequency<T> {
    /// `k_n(σ)² - (nπ)²`, free of cancellation.
    pub fn shift(&self) -> T {
        let two = T::lit(2.0);
        let base = T::from_index(self.n as u64) * T::PI();
        self.offset * (two * base + self.offset)
    }

    pub fn k_squared(&self) -> T {
        self.k * self.k
    }

    /// `tan(δ/2)`, which equals `σ / k` at a root with `k > 0`.
    fn tan_half(&self) -> T {
        let two = T::lit(2.0);
        if self.offset <= T::FRAC_PI_2() {
            (self.offset / two).tan()
        } else {
            (self.complement / two).tan().recip()
        }
    }
}

/// Frequency on an interval of length `L`: `k_{L;n}(σ) = k_n(σL) / L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledFrequency<T> {
    pub length: T,
    pub n: u32,
    pub sigma: T,
    pub k: T,
    /// Unit-interval solve at `σL` the scaled value derives from.
    pub unit: Frequency<T>,
}

impl<T: Real> ScaledFrequency<T> {
    /// `k_{L;n}(σ)² - k_{L;n}(0)²`.
    pub fn shift(&self) -> T {
        self.unit.shift() / (self.length * self.length)
    }
}

/// `nπ + d` rounded once, with `nπ` carried as an unevaluated sum.
fn add_to_multiple_of_pi<T: Real>(n: u64, d: T) -> T {
    let pi_lo = T::lit((std::f64::consts::PI - T::PI().as_f64()) + 1.224_646_799_147_353_2e-16);
    let nn = T::from_index(n);
    let (p, e) = two_product(nn, T::PI());
    p + (e + nn * pi_lo + d)
}

fn check_index<T: Real>(n: u32) -> Result<()> {
    if n > T::MAX_INDEX {
        return Err(Error::PrecisionExhausted {
            n: n as u64,
            cap: T::MAX_INDEX as u64,
        });
    }
    Ok(())
}

/// Solves the secular equation for the `n`-th Robin frequency.
pub fn solve_k<T: Real>(n: u32, sigma: T) -> Result<Frequency<T>> {
    let sigma = RobinParameter::new(sigma)?.value();
    check_index::<T>(n)?;
    let pi = T::PI();
    let base = T::from_index(n as u64) * pi;
    let parity = Parity::of(n);

    if sigma == T::zero() {
        return Ok(Frequency {
            n,
            sigma,
            k: add_to_multiple_of_pi(n as u64, T::zero()),
            offset: T::zero(),
            complement: pi,
            residual: T::zero(),
            parity,
        });
    }

    let two = T::lit(2.0);
    let half = T::FRAC_PI_2();
    let lower = |d: T| (base + d) * (d / two).tan() - sigma;
    let at_half = lower(half);

    let (offset, complement, k, defect) = if at_half == T::zero() {
        (half, half, add_to_multiple_of_pi(n as u64, half), T::zero())
    } else if at_half > T::zero() {
        // Root in [nπ, (n+1/2)π]: solve for δ.
        let d = safeguarded_newton(
            |d: T| {
                let t = (d / two).tan();
                let k = base + d;
                (k * t - sigma, t + k / two * (T::one() + t * t))
            },
            T::zero(),
            half,
        )?;
        (d, pi - d, add_to_multiple_of_pi(n as u64, d), lower(d))
    } else {
        // Root in [(n+1/2)π, (n+1)π]: solve for u = π - δ, singular at u = 0.
        let top = T::from_index(n as u64 + 1) * pi;
        let upper = |u: T| (top - u) / (u / two).tan() - sigma;
        if upper(half) >= T::zero() {
            // the two coordinates disagree only by rounding here
            return finish(n, sigma, parity, half, half, add_to_multiple_of_pi(n as u64, half), at_half);
        }
        let mut u_lo = pi * T::lit(SINGULAR_SHRINK).max(T::lit(8.0) * T::epsilon());
        while upper(u_lo) <= T::zero() {
            u_lo = u_lo * T::lit(1e-3);
            if u_lo <= T::min_positive_value() {
                return Err(Error::NotConverged(format!(
                    "root for n = {n}, sigma = {sigma} is unresolvably close to (n+1)pi"
                )));
            }
        }
        let u = safeguarded_newton(
            |u: T| {
                let c = (u / two).tan().recip();
                let k = top - u;
                (k * c - sigma, -c - k / two * (T::one() + c * c))
            },
            u_lo,
            half,
        )?;
        (pi - u, u, add_to_multiple_of_pi(n as u64 + 1, -u), upper(u))
    };

    finish(n, sigma, parity, offset, complement, k, defect)
}

fn finish<T: Real>(
    n: u32,
    sigma: T,
    parity: Parity,
    offset: T,
    complement: T,
    k: T,
    defect: T,
) -> Result<Frequency<T>> {
    let residual = defect.abs() / (T::one() + k);
    // The defect of a σ-sized quantity cannot drop below a few ulps of σ.
    let accept = T::tol_secular().max(T::lit(16.0) * T::epsilon() * sigma / (T::one() + k));
    if !(residual < accept) {
        return Err(Error::NotConverged(format!(
            "n = {n}, sigma = {sigma}: residual {residual} above {accept}"
        )));
    }

    Ok(Frequency {
        n,
        sigma,
        k,
        offset,
        complement,
        residual,
        parity,
    })
}

/// Newton's method kept inside a sign-change bracket, falling back to bisection
/// whenever a step would leave it. `fdf` returns the function and its derivative.
fn safeguarded_newton<T: Real, F: Fn(T) -> (T, T)>(fdf: F, a: T, b: T) -> Result<T> {
    let two = T::lit(2.0);
    let (fa, _) = fdf(a);
    let (fb, _) = fdf(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if (fa < T::zero()) == (fb < T::zero()) {
        return Err(Error::Internal(format!(
            "bracket [{a}, {b}] has no sign change ({fa}, {fb})"
        )));
    }
    // `neg` is the end where f < 0.
    let (mut neg, mut pos) = if fa < T::zero() { (a, b) } else { (b, a) };

    for _ in 0..BISECTION_WARMUP {
        let mid = split(neg, pos);
        let (fm, _) = fdf(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm < T::zero() {
            neg = mid;
        } else {
            pos = mid;
        }
    }

    let mut x = split(neg, pos);
    for _ in 0..MAX_ITERATIONS {
        let (fx, dfx) = fdf(x);
        if fx == T::zero() {
            return Ok(x);
        }
        if fx < T::zero() {
            neg = x;
        } else {
            pos = x;
        }
        let (lo, hi) = if neg < pos { (neg, pos) } else { (pos, neg) };
        let mut next = x - fx / dfx;
        if !(next > lo && next < hi) {
            next = split(lo, hi);
        }
        let width = hi - lo;
        if (next - x).abs() <= two * T::epsilon() * x.abs() || width <= two * T::epsilon() * hi {
            // Return whichever nearby point has the smaller defect.
            let (fn_, _) = fdf(next);
            return Ok(if fn_.abs() <= fx.abs() { next } else { x });
        }
        x = next;
    }
    Err(Error::NotConverged(format!(
        "no convergence on bracket [{a}, {b}]"
    )))
}

/// Bracket midpoint; geometric when the bracket spans orders of magnitude.
fn split<T: Real>(a: T, b: T) -> T {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if lo > T::zero() && hi > T::lit(4.0) * lo {
        lo.sqrt() * hi.sqrt()
    } else {
        (lo + hi) / T::lit(2.0)
    }
}

/// `lim_{σ→∞} k_n(σ) = (n+1)π`, the Dirichlet frequency.
pub fn dirichlet_limit<T: Real>(n: u32) -> T {
    T::from_index(n as u64 + 1) * T::PI()
}

/// `k_n'(0) = 2/(πn)` for `n ≥ 1`.
pub fn k_derivative_at_zero<T: Real>(n: u32) -> Result<T> {
    if n == 0 {
        return Err(invalid("k_0 is not analytic at sigma = 0"));
    }
    Ok(T::lit(2.0) / (T::PI() * T::from_index(n as u64)))
}

/// `dk_n/dσ` by implicit differentiation of the parity form.
pub fn k_derivative<T: Real>(n: u32, sigma: T) -> Result<T> {
    let f = solve_k(n, sigma)?;
    if n == 0 && f.sigma == T::zero() {
        return Err(invalid("k_0 is not analytic at sigma = 0"));
    }
    let t = f.tan_half();
    let slope = t + f.k / T::lit(2.0) * (T::one() + t * t);
    Ok(slope.recip())
}

/// `k_0(σ)` for small `σ ∈ (0, π/2)`, where `k_0(σ)² = 2σ + O(σ²)` and `k_0(σ) > σ`.
pub fn k0_small_sigma<T: Real>(sigma: T) -> Result<T> {
    if !(sigma > T::zero() && sigma < T::FRAC_PI_2()) {
        return Err(invalid(format!(
            "small-sigma branch needs 0 < sigma < pi/2, got {sigma}"
        )));
    }
    Ok(solve_k(0, sigma)?.k)
}

/// Frequency on an interval of length `length`.
pub fn solve_k_scaled<T: Real>(length: T, n: u32, sigma: T) -> Result<ScaledFrequency<T>> {
    if !(length.is_finite() && length > T::zero()) {
        return Err(invalid(format!("length must be positive and finite, got {length}")));
    }
    let sigma = RobinParameter::new(sigma)?.value();
    let unit = solve_k(n, sigma * length)?;
    Ok(ScaledFrequency {
        length,
        n,
        sigma,
        k: unit.k / length,
        unit,
    })
}

/// Empirical constants `(c0, C0)` with `c0 σ ≤ k_n(σ)² - (nπ)² ≤ C0 σ`
/// over `n ≤ n_max` and the supplied σ values.
pub fn shift_envelope<T: Real>(n_max: u32, sigmas: &[T]) -> Result<(T, T)> {
    let mut lo = T::infinity();
    let mut hi = T::zero();
    for &sigma in sigmas {
        if !(sigma > T::zero()) {
            return Err(invalid("envelope needs positive sigma values"));
        }
        for n in 0..=n_max {
            let ratio = solve_k(n, sigma)?.shift() / sigma;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    Ok((lo, hi))
}
