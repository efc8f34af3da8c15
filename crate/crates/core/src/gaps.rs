//! Robin–Neumann gaps `d_j(σ) = λ_j(σ) - λ_j(0)`, paired by sorted rank.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numeric::compensated_sum;
use crate::real::Real;
use crate::secular::{solve_k, RobinParameter};
use crate::spectrum::{enumerate_spectrum, Rectangle, SortedSpectrum};

/// Centered window used for the moving-average column of gap plots.
pub const MOVING_AVERAGE_WINDOW: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRecord<T> {
    /// 1-based rank.
    pub j: u64,
    pub lambda_sigma: T,
    pub lambda_neumann: T,
    pub d: T,
}

/// Limiting mean gap `2 |∂R| / |R| · σ = 4 (1 + L) σ / L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanGapLaw<T> {
    pub length: T,
    pub sigma: T,
    pub dbar: T,
}

/// Gap of a single lattice point, `Λ_{L;n,m}(σ) - Λ_{L;n,m}(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointGap<T> {
    pub n: u32,
    pub m: u32,
    pub d_nm: T,
}

/// Extremes of `d_j / d̄` over the first `N` ranks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapBounds<T> {
    pub min_ratio: T,
    pub max_ratio: T,
    pub dbar: T,
}

fn require_positive_sigma<T: Real>(sigma: T) -> Result<T> {
    let sigma = RobinParameter::new(sigma)?.value();
    if sigma == T::zero() {
        return Err(invalid("gap ratios need sigma > 0"));
    }
    Ok(sigma)
}

pub fn mean_gap<T: Real>(length: T, sigma: T) -> Result<MeanGapLaw<T>> {
    let rect = Rectangle::new(length)?;
    let sigma = RobinParameter::new(sigma)?.value();
    Ok(MeanGapLaw {
        length,
        sigma,
        dbar: T::lit(2.0) * rect.perimeter() / rect.area() * sigma,
    })
}

/// Robin and Neumann spectra sharing one cutoff, both holding at least `count` levels.
pub fn paired_spectra<T: Real>(
    length: T,
    sigma: T,
    count: usize,
) -> Result<(SortedSpectrum<T>, SortedSpectrum<T>)> {
    let rect = Rectangle::new(length)?;
    if count == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let nn = T::from_index(count as u64);
    let mut cutoff =
        T::lit(4.0) * T::PI() / rect.length() * (nn + T::lit(8.0) * nn.sqrt() + T::lit(64.0));
    for _ in 0..=3 {
        let robin = enumerate_spectrum(length, sigma, cutoff)?;
        if robin.len() >= count {
            let neumann = enumerate_spectrum(length, T::zero(), cutoff)?;
            if neumann.len() >= count {
                return Ok((robin, neumann));
            }
        }
        cutoff = cutoff * T::lit(2.0);
    }
    Err(Error::Internal(format!(
        "adaptive cutoff failed to reach rank {count} after 3 doublings"
    )))
}

/// The first `count` Robin–Neumann gaps.
pub fn rn_gaps<T: Real>(length: T, sigma: T, count: usize) -> Result<Vec<GapRecord<T>>> {
    let sigma = require_positive_sigma(sigma)?;
    let (robin, neumann) = paired_spectra(length, sigma, count)?;
    Ok(robin
        .records
        .iter()
        .zip(&neumann.records)
        .take(count)
        .enumerate()
        .map(|(i, (r, z))| GapRecord {
            j: i as u64 + 1,
            lambda_sigma: r.lambda,
            lambda_neumann: z.lambda,
            d: r.lambda - z.lambda,
        })
        .collect())
}

/// `(1/N) Σ d_j`, compensated.
pub fn mean_of_gaps<T: Real>(gaps: &[GapRecord<T>]) -> T {
    if gaps.is_empty() {
        return T::nan();
    }
    compensated_sum(gaps.iter().map(|g| g.d)) / T::from_index(gaps.len() as u64)
}

pub fn bounds_of<T: Real>(gaps: &[GapRecord<T>], dbar: T) -> GapBounds<T> {
    let (lo, hi) = gaps
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), g| {
            (lo.min(g.d), hi.max(g.d))
        });
    GapBounds {
        min_ratio: lo / dbar,
        max_ratio: hi / dbar,
        dbar,
    }
}

/// `min_j d_j / d̄` and `max_j d_j / d̄` over `j ≤ count`.
pub fn gap_bound_report<T: Real>(length: T, sigma: T, count: usize) -> Result<GapBounds<T>> {
    let sigma = require_positive_sigma(sigma)?;
    let dbar = mean_gap(length, sigma)?.dbar;
    let gaps = rn_gaps(length, sigma, count)?;
    Ok(bounds_of(&gaps, dbar))
}

pub fn point_gap<T: Real>(length: T, sigma: T, n: u32, m: u32) -> Result<PointGap<T>> {
    let rect = Rectangle::new(length)?;
    let sigma = RobinParameter::new(sigma)?.value();
    let l = rect.length();
    let dx = solve_k(n, sigma)?.shift();
    let dy = solve_k(m, sigma * l)?.shift() / (l * l);
    Ok(PointGap { n, m, d_nm: dx + dy })
}

/// Limit of `d_{n,m}(σ)` along the row `n` as `m → ∞`:
/// `k_n(σ)² - (nπ)² + 4σ/L`.
pub fn point_gap_asymptote<T: Real>(length: T, sigma: T, n: u32) -> Result<T> {
    let rect = Rectangle::new(length)?;
    let sigma = require_positive_sigma(sigma)?;
    Ok(solve_k(n, sigma)?.shift() + T::lit(4.0) * sigma / rect.length())
}

/// Smallest `C₁` with `|d_{n,m} - 4σ(1 + 1/L)| ≤ C₁ (1/(1+n²) + 1/(1+m²))`
/// on the grid `n ≤ n_max`, `m ≤ m_max`.
pub fn fit_point_gap_constant<T: Real>(length: T, sigma: T, n_max: u32, m_max: u32) -> Result<T> {
    let rect = Rectangle::new(length)?;
    let sigma = require_positive_sigma(sigma)?;
    let l = rect.length();
    let main = T::lit(4.0) * sigma * (T::one() + l.recip());
    let xs = (0..=n_max)
        .map(|n| solve_k(n, sigma).map(|f| f.shift()))
        .collect::<Result<Vec<_>>>()?;
    let ys = (0..=m_max)
        .map(|m| solve_k(m, sigma * l).map(|f| f.shift() / (l * l)))
        .collect::<Result<Vec<_>>>()?;
    let weight = |i: usize| {
        let i = T::from_index(i as u64);
        (T::one() + i * i).recip()
    };
    let mut c1 = T::zero();
    for (n, &x) in xs.iter().enumerate() {
        for (m, &y) in ys.iter().enumerate() {
            let ratio = (x + y - main).abs() / (weight(n) + weight(m));
            c1 = c1.max(ratio);
        }
    }
    Ok(c1)
}

/// Centered moving average; the window shrinks symmetrically near the ends.
pub fn moving_average<T: Real>(values: &[T], window: usize) -> Vec<T> {
    let half = window / 2;
    let len = values.len();
    (0..len)
        .map(|i| {
            let reach = half.min(i).min(len - 1 - i);
            let slice = &values[i - reach..=i + reach];
            compensated_sum(slice.iter().copied()) / T::from_index(slice.len() as u64)
        })
        .collect()
}
