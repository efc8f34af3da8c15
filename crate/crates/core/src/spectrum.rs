//! Robin spectrum of the rectangle `[0,1] × [0,L]`.
//!
//! Levels are `Λ_{L;n,m}(σ) = k_n(σ)² + k_m(σL)² / L²`. The Neumann case is
//! evaluated as `π² (n² + m²/L²)` so that arithmetic coincidences (for
//! instance on the square) are exact ties in floating point as well.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::real::Real;
use crate::secular::{solve_k, Frequency, RobinParameter};

/// Default cap on the number of records a single enumeration may produce.
pub const DEFAULT_RECORD_BUDGET: u64 = 100_000_000;

/// The rectangle `R_L = [0,1] × [0,L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rectangle<T> {
    length: T,
}

impl<T: Real> Rectangle<T> {
    pub fn new(length: T) -> Result<Self> {
        if !(length.is_finite() && length > T::zero()) {
            return Err(invalid(format!(
                "aspect ratio must be positive and finite, got {length}"
            )));
        }
        Ok(Self { length })
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn area(&self) -> T {
        self.length
    }

    pub fn perimeter(&self) -> T {
        T::lit(2.0) * (T::one() + self.length)
    }

    pub fn is_square(&self) -> bool {
        self.length == T::one()
    }

    /// Leading Weyl term `Area · λ / 4π`.
    pub fn weyl(&self, lambda: T) -> T {
        self.area() * lambda / (T::lit(4.0) * T::PI())
    }
}

/// One level `Λ_{L;n,m}(σ)` tagged by its lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenRecord<T> {
    pub n: u32,
    pub m: u32,
    pub lambda: T,
    pub sigma: T,
}

/// Levels in `[floor, cutoff]`, sorted by `lambda` then `(n, m)`.
///
/// A spectrum with `floor == 0` holds the complete bottom of the spectrum and
/// supports counting; a band (`floor > 0`) is only good for local questions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SortedSpectrum<T> {
    pub length: T,
    pub sigma: T,
    pub floor: T,
    pub cutoff: T,
    pub records: Vec<EigenRecord<T>>,
}

impl<T: Real> SortedSpectrum<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_band(&self) -> bool {
        self.floor > T::zero()
    }

    pub fn lambdas(&self) -> Vec<T> {
        self.records.iter().map(|r| r.lambda).collect()
    }
}

/// `N(λ)` against the Weyl prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylReport<T> {
    pub lambda: T,
    pub count: u64,
    pub weyl_prediction: T,
    pub relative_error: T,
}

/// A group of numerically coincident levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicityCluster<T> {
    pub members: Vec<(u32, u32)>,
    pub lambda_mean: T,
    pub spread: T,
}

/// Threshold below which two adjacent levels count as one multiple level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum MultTolerance<T> {
    Absolute(T),
    /// `r · (1 + λ)`.
    Relative(T),
}

impl<T: Real> MultTolerance<T> {
    pub fn threshold(&self, lambda: T) -> T {
        match *self {
            MultTolerance::Absolute(t) => t,
            MultTolerance::Relative(r) => r * (T::one() + lambda.abs()),
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        match *self {
            MultTolerance::Absolute(t) => MultTolerance::Absolute(t * factor),
            MultTolerance::Relative(r) => MultTolerance::Relative(r * factor),
        }
    }

    fn validate(&self) -> Result<()> {
        let v = match *self {
            MultTolerance::Absolute(t) | MultTolerance::Relative(t) => t,
        };
        if !(v.is_finite() && v > T::zero()) {
            return Err(invalid(format!("tol_mult must be positive, got {v}")));
        }
        Ok(())
    }
}

impl<T: Real> Default for MultTolerance<T> {
    fn default() -> Self {
        MultTolerance::Relative(T::lit(1e-9))
    }
}

/// Per-axis contributions before the final scale: `λ = (x_n + y_m) · scale`.
struct Axes<T> {
    x: Vec<T>,
    y: Vec<T>,
    scale: T,
}

#[inline]
fn combine<T: Real>(x: T, y: T, scale: T) -> T {
    (x + y) * scale
}

fn x_term<T: Real>(n: u32, sigma: T) -> Result<T> {
    if sigma == T::zero() {
        let n = T::from_index(n as u64);
        Ok(n * n)
    } else {
        Ok(solve_k(n, sigma)?.k_squared())
    }
}

fn y_term<T: Real>(length: T, m: u32, sigma: T) -> Result<T> {
    let l2 = length * length;
    if sigma == T::zero() {
        let m = T::from_index(m as u64);
        Ok(m * m / l2)
    } else {
        Ok(solve_k(m, sigma * length)?.k_squared() / l2)
    }
}

fn scale_for<T: Real>(sigma: T) -> T {
    if sigma == T::zero() {
        T::PI() * T::PI()
    } else {
        T::one()
    }
}

/// The single level `Λ_{L;n,m}(σ)`.
pub fn eigenvalue<T: Real>(length: T, sigma: T, n: u32, m: u32) -> Result<EigenRecord<T>> {
    let rect = Rectangle::new(length)?;
    let sigma = RobinParameter::new(sigma)?.value();
    let lambda = combine(
        x_term(n, sigma)?,
        y_term(rect.length(), m, sigma)?,
        scale_for(sigma),
    );
    Ok(EigenRecord {
        n,
        m,
        lambda,
        sigma,
    })
}

fn index_bound<T: Real>(extent: T) -> Result<u32> {
    // extent = sqrt(cutoff)/π (times L on the y axis); k_n ≥ nπ bounds the index
    let bound = extent.floor() + T::one();
    let b = bound.to_u64().unwrap_or(u64::MAX);
    if b > u32::MAX as u64 - 1 {
        return Err(Error::PrecisionExhausted {
            n: b,
            cap: T::MAX_INDEX as u64,
        });
    }
    Ok(b as u32)
}

fn build_axes<T: Real>(rect: &Rectangle<T>, sigma: T, cutoff: T) -> Result<Axes<T>> {
    let root = cutoff.sqrt() / T::PI();
    let n_max = index_bound(root)?;
    let m_max = index_bound(root * rect.length())?;
    let length = rect.length();
    let x = (0..=n_max)
        .into_par_iter()
        .map(|n| x_term(n, sigma))
        .collect::<Result<Vec<_>>>()?;
    let y = (0..=m_max)
        .into_par_iter()
        .map(|m| y_term(length, m, sigma))
        .collect::<Result<Vec<_>>>()?;
    Ok(Axes {
        x,
        y,
        scale: scale_for(sigma),
    })
}

/// Full spectrum `{Λ ≤ cutoff}` with the default record budget.
pub fn enumerate_spectrum<T: Real>(length: T, sigma: T, cutoff: T) -> Result<SortedSpectrum<T>> {
    enumerate_band(length, sigma, T::zero(), cutoff, DEFAULT_RECORD_BUDGET)
}

/// All levels with `floor ≤ Λ ≤ cutoff`.
pub fn enumerate_band<T: Real>(
    length: T,
    sigma: T,
    floor: T,
    cutoff: T,
    record_budget: u64,
) -> Result<SortedSpectrum<T>> {
    let rect = Rectangle::new(length)?;
    let sigma = RobinParameter::new(sigma)?.value();
    if !(cutoff.is_finite() && cutoff > T::zero()) {
        return Err(invalid(format!("cutoff must be positive and finite, got {cutoff}")));
    }
    if !(floor.is_finite() && floor >= T::zero() && floor <= cutoff) {
        return Err(invalid(format!("floor must lie in [0, cutoff], got {floor}")));
    }
    let four_pi = T::lit(4.0) * T::PI();
    let estimated = rect.weyl(cutoff - floor)
        + rect.perimeter() * cutoff.sqrt() / four_pi
        + T::lit(2.0);
    let estimated = estimated.to_u64().unwrap_or(u64::MAX);
    if estimated > record_budget {
        return Err(Error::Capacity {
            estimated,
            budget: record_budget,
        });
    }

    let axes = build_axes(&rect, sigma, cutoff)?;
    let mut records = Vec::with_capacity(estimated as usize);
    for (n, &x) in axes.x.iter().enumerate() {
        if combine(x, axes.y[0], axes.scale) > cutoff {
            break;
        }
        let lo = axes
            .y
            .partition_point(|&y| combine(x, y, axes.scale) < floor);
        let hi = axes
            .y
            .partition_point(|&y| combine(x, y, axes.scale) <= cutoff);
        for (m, &y) in axes.y[lo..hi].iter().enumerate() {
            records.push(EigenRecord {
                n: n as u32,
                m: (lo + m) as u32,
                lambda: combine(x, y, axes.scale),
                sigma,
            });
        }
    }
    records.par_sort_unstable_by(|a, b| {
        a.lambda
            .partial_cmp(&b.lambda)
            .expect("levels are finite")
            .then((a.n, a.m).cmp(&(b.n, b.m)))
    });
    Ok(SortedSpectrum {
        length,
        sigma,
        floor,
        cutoff,
        records,
    })
}

/// Smallest complete spectrum holding at least `count` levels; the cutoff
/// starts from Weyl's law with an `O(√N)` margin and doubles on shortfall.
pub fn spectrum_with_rank<T: Real>(length: T, sigma: T, count: usize) -> Result<SortedSpectrum<T>> {
    if count == 0 {
        return Err(invalid("rank count must be at least 1"));
    }
    let rect = Rectangle::new(length)?;
    let nn = T::from_index(count as u64);
    let mut cutoff =
        T::lit(4.0) * T::PI() / rect.length() * (nn + T::lit(8.0) * nn.sqrt() + T::lit(64.0));
    for _ in 0..=3 {
        let spec = enumerate_spectrum(length, sigma, cutoff)?;
        if spec.len() >= count {
            return Ok(spec);
        }
        cutoff = cutoff * T::lit(2.0);
    }
    Err(Error::Internal(format!(
        "adaptive cutoff failed to reach {count} levels"
    )))
}

/// `N(λ)` by binary search, compared with `Area·λ/4π`.
pub fn counting_function<T: Real>(spec: &SortedSpectrum<T>, lambda: T) -> Result<WeylReport<T>> {
    if spec.is_band() {
        return Err(invalid("counting needs a spectrum enumerated from zero"));
    }
    if !(lambda <= spec.cutoff) {
        return Err(Error::OutOfRange {
            lambda: lambda.as_f64(),
            cutoff: spec.cutoff.as_f64(),
        });
    }
    let count = spec.records.partition_point(|r| r.lambda <= lambda) as u64;
    let rect = Rectangle::new(spec.length)?;
    let prediction = rect.weyl(lambda.max(T::zero()));
    let c = T::from_index(count);
    let relative_error = if prediction > T::zero() {
        (c - prediction).abs() / prediction
    } else if count == 0 {
        T::zero()
    } else {
        T::infinity()
    };
    Ok(WeylReport {
        lambda,
        count,
        weyl_prediction: prediction,
        relative_error,
    })
}

/// Groups adjacent levels closer than the tolerance.
///
/// Clusters chain: a run of levels with every successive difference within
/// tolerance forms one cluster, so `spread` is bounded by `(len - 1) · tol`.
/// With `quotient_symmetry` (square only) the mirror pairs `(n,m)`, `(m,n)`
/// are merged first and members are reported as `(min, max)` representatives.
pub fn multiplicity_scan<T: Real>(
    spec: &SortedSpectrum<T>,
    tol: MultTolerance<T>,
    quotient_symmetry: bool,
) -> Result<Vec<MultiplicityCluster<T>>> {
    let levels = quotient_levels(spec, tol, quotient_symmetry)?;
    Ok(cluster_runs(&levels, tol)
        .into_iter()
        .map(|run| {
            let run = &levels[run];
            let mean = run.iter().map(|r| r.lambda).sum::<T>() / T::from_index(run.len() as u64);
            MultiplicityCluster {
                members: run.iter().map(|r| (r.n, r.m)).collect(),
                lambda_mean: mean,
                spread: run[run.len() - 1].lambda - run[0].lambda,
            }
        })
        .collect())
}

fn quotient_levels<T: Real>(
    spec: &SortedSpectrum<T>,
    tol: MultTolerance<T>,
    quotient_symmetry: bool,
) -> Result<Vec<&EigenRecord<T>>> {
    tol.validate()?;
    if quotient_symmetry && spec.length != T::one() {
        return Err(invalid(
            "quotient_symmetry needs the square; the (n,m) <-> (m,n) symmetry is absent for L != 1",
        ));
    }
    Ok(spec
        .records
        .iter()
        .filter(|r| !quotient_symmetry || r.n <= r.m)
        .collect())
}

/// Index ranges of maximal runs (length ≥ 2) with successive gaps within tolerance.
fn cluster_runs<T: Real>(levels: &[&EigenRecord<T>], tol: MultTolerance<T>) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=levels.len() {
        let split = i == levels.len()
            || levels[i].lambda - levels[i - 1].lambda > tol.threshold(levels[i - 1].lambda);
        if split {
            if i - start >= 2 {
                runs.push(start..i);
            }
            start = i;
        }
    }
    runs
}

/// `N^mult(λ)`: levels up to `lambda` that sit in a cluster, counted with
/// multiplicity. Under `quotient_symmetry` each mirror class counts once.
pub fn n_mult<T: Real>(
    spec: &SortedSpectrum<T>,
    lambda: T,
    tol: MultTolerance<T>,
    quotient_symmetry: bool,
) -> Result<u64> {
    if !(lambda <= spec.cutoff) {
        return Err(Error::OutOfRange {
            lambda: lambda.as_f64(),
            cutoff: spec.cutoff.as_f64(),
        });
    }
    let levels = quotient_levels(spec, tol, quotient_symmetry)?;
    Ok(cluster_runs(&levels, tol)
        .into_iter()
        .flat_map(|run| levels[run].iter())
        .filter(|r| r.lambda <= lambda)
        .count() as u64)
}

/// `k_a² - k_b²` for two frequencies solved at the same σ, without cancellation.
fn square_difference<T: Real>(a: &Frequency<T>, b: &Frequency<T>) -> T {
    let steps = T::from_index(a.n as u64) - T::from_index(b.n as u64);
    let diff = steps * T::PI() + (a.offset - b.offset);
    diff * (a.k + b.k)
}

/// `Λ_{L;a}(σ) - Λ_{L;b}(σ)` computed from the frequency offsets, so the
/// difference keeps its absolute accuracy even for very high levels.
pub fn level_difference<T: Real>(
    length: T,
    sigma: T,
    a: (u32, u32),
    b: (u32, u32),
) -> Result<T> {
    let rect = Rectangle::new(length)?;
    let sigma = RobinParameter::new(sigma)?.value();
    let l = rect.length();
    let dx = square_difference(&solve_k(a.0, sigma)?, &solve_k(b.0, sigma)?);
    let dy = square_difference(&solve_k(a.1, sigma * l)?, &solve_k(b.1, sigma * l)?);
    Ok(dx + dy / (l * l))
}
