//! Pair correlation of the unfolded spectrum and nearest-neighbour spacings.
//!
//! `R₂(f, N) = (1/N) Σ_{k ≠ k'} f((λ_k - λ_k') / s̄)` with the fixed mean
//! spacing `s̄ = 4π / Area`. The sum runs over a sliding window of half-width
//! `ρ s̄` on the sorted levels; each unordered pair is visited once and doubled.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::numeric::{adaptive_simpson, tree_sum, CompensatedSum};
use crate::real::Real;
use crate::spectrum::{enumerate_spectrum, spectrum_with_rank, Rectangle};

/// Rows per reduction block; partial sums are combined in a fixed tree.
const BLOCK: usize = 2048;

const QUADRATURE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelShape {
    /// `exp(-1 / (1 - (x/ρ)²))` on `|x| < ρ`.
    Bump,
    /// Triangle of half-width `ρ/2` mollified by a bump of half-width `ρ/2`.
    TriangleSmooth,
}

impl KernelShape {
    pub fn name(&self) -> &'static str {
        match self {
            KernelShape::Bump => "bump",
            KernelShape::TriangleSmooth => "triangle_smooth",
        }
    }
}

impl fmt::Display for KernelShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelShape {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bump" => Ok(KernelShape::Bump),
            "triangle_smooth" => Ok(KernelShape::TriangleSmooth),
            other => Err(invalid(format!(
                "unknown kernel '{other}' (expected bump or triangle_smooth)"
            ))),
        }
    }
}

/// Even, compactly supported test function with its integral precomputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kernel<T> {
    pub shape: KernelShape,
    pub support_radius: T,
    pub integral: T,
    /// `∫ bump` on `[-1, 1]`, the mollifier's normalization.
    #[serde(skip)]
    unit_bump_mass: T,
}

#[inline]
fn unit_bump<T: Real>(t: T) -> T {
    let s = T::one() - t * t;
    if s > T::zero() {
        (-s.recip()).exp()
    } else {
        T::zero()
    }
}

impl<T: Real> Kernel<T> {
    pub fn evaluate(&self, x: T) -> T {
        let x = x.abs();
        let rho = self.support_radius;
        if x >= rho {
            return T::zero();
        }
        match self.shape {
            KernelShape::Bump => unit_bump(x / rho),
            KernelShape::TriangleSmooth => self.mollified_triangle(x),
        }
    }

    fn mollified_triangle(&self, x: T) -> T {
        let half = self.support_radius / T::lit(2.0);
        let norm = half * self.unit_bump_mass;
        let integrand = |y: T| {
            let tri = (T::one() - (x - y).abs() / half).max(T::zero());
            unit_bump(y / half) / norm * tri
        };
        // split at the triangle's kinks so every piece is smooth
        let mut cuts = vec![-half, half];
        for c in [x - half, x, x + half] {
            if c > -half && c < half {
                cuts.push(c);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        cuts.windows(2)
            .map(|w| adaptive_simpson(&integrand, w[0], w[1], T::lit(QUADRATURE_TOL)))
            .fold(T::zero(), |a, b| a + b)
    }
}

/// A named kernel with support `[-ρ, ρ]`.
pub fn builtin_kernel<T: Real>(shape: KernelShape, rho: T) -> Result<Kernel<T>> {
    if !(rho.is_finite() && rho > T::zero()) {
        return Err(invalid(format!("support radius must be positive, got {rho}")));
    }
    let one = T::one();
    let unit_bump_mass = adaptive_simpson(&unit_bump, -one, one, T::lit(QUADRATURE_TOL));
    let mut kernel = Kernel {
        shape,
        support_radius: rho,
        integral: T::zero(),
        unit_bump_mass,
    };
    kernel.integral = match shape {
        KernelShape::Bump => rho * unit_bump_mass,
        KernelShape::TriangleSmooth => {
            let f = |x: T| kernel.evaluate(x);
            T::lit(2.0) * adaptive_simpson(&f, T::zero(), rho, T::lit(1e-12))
        }
    };
    Ok(kernel)
}

pub fn kernel_by_name<T: Real>(name: &str, rho: T) -> Result<Kernel<T>> {
    builtin_kernel(name.parse()?, rho)
}

/// Mean spacing `s̄ = 4π / Area(R_L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSpacing<T> {
    pub length: T,
    pub sbar: T,
}

pub fn mean_spacing<T: Real>(length: T) -> Result<MeanSpacing<T>> {
    let rect = Rectangle::new(length)?;
    Ok(MeanSpacing {
        length,
        sbar: T::lit(4.0) * T::PI() / rect.area(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCorrResult<T> {
    #[serde(rename = "L")]
    pub length: T,
    pub sigma: T,
    #[serde(rename = "N")]
    pub n: u64,
    pub kernel: KernelShape,
    pub rho: T,
    #[serde(rename = "r2")]
    pub value: T,
    pub poisson_reference: T,
    pub deviation: T,
}

/// `R₂` of an ascending list of levels at mean spacing `sbar`.
///
/// Blocks of rows are summed independently and merged in a fixed tree, so the
/// result is bit-identical for any thread count.
pub fn r2_sorted<T: Real>(levels: &[T], sbar: T, kernel: &Kernel<T>) -> Result<T> {
    let n = levels.len();
    if n < 2 {
        return Err(invalid("pair correlation needs at least two levels"));
    }
    if !(sbar > T::zero()) {
        return Err(invalid("mean spacing must be positive"));
    }
    let reach = kernel.support_radius * sbar;
    let blocks = n.div_ceil(BLOCK);
    let partial: Vec<T> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = CompensatedSum::new();
            for i in b * BLOCK..((b + 1) * BLOCK).min(n) {
                let li = levels[i];
                for &lj in &levels[i + 1..] {
                    let gap = lj - li;
                    if gap >= reach {
                        break;
                    }
                    acc.add(kernel.evaluate(gap / sbar));
                }
            }
            acc.value()
        })
        .collect();
    Ok(T::lit(2.0) * tree_sum(&partial) / T::from_index(n as u64))
}

fn result_for<T: Real>(length: T, sigma: T, levels: &[T], kernel: &Kernel<T>) -> Result<PairCorrResult<T>> {
    let sbar = mean_spacing(length)?.sbar;
    let value = r2_sorted(levels, sbar, kernel)?;
    Ok(PairCorrResult {
        length,
        sigma,
        n: levels.len() as u64,
        kernel: kernel.shape,
        rho: kernel.support_radius,
        value,
        poisson_reference: kernel.integral,
        deviation: (value - kernel.integral).abs(),
    })
}

/// `R₂^σ(f, N)` over the first `count` levels.
pub fn r2<T: Real>(length: T, sigma: T, count: usize, kernel: &Kernel<T>) -> Result<PairCorrResult<T>> {
    if count < 2 {
        return Err(invalid("pair correlation needs N >= 2"));
    }
    let spec = spectrum_with_rank(length, sigma, count)?;
    let levels: Vec<T> = spec.records[..count].iter().map(|r| r.lambda).collect();
    result_for(length, sigma, &levels, kernel)
}

/// `R₂` over all levels `≤ cutoff`, i.e. with `N = #{λ_k ≤ cutoff}`.
pub fn r2_below<T: Real>(length: T, sigma: T, cutoff: T, kernel: &Kernel<T>) -> Result<PairCorrResult<T>> {
    let spec = enumerate_spectrum(length, sigma, cutoff)?;
    result_for(length, sigma, &spec.lambdas(), kernel)
}

/// `|R₂^σ(f, N) - R₂^0(f, N)|`.
pub fn r2_comparison<T: Real>(length: T, sigma: T, count: usize, kernel: &Kernel<T>) -> Result<T> {
    let robin = r2(length, sigma, count, kernel)?;
    if sigma == T::zero() {
        return Ok(T::zero());
    }
    let neumann = r2(length, T::zero(), count, kernel)?;
    Ok((robin.value - neumann.value).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin<T> {
    pub bin_left: T,
    pub bin_right: T,
    pub count: u64,
    pub density: T,
    /// Bin average of `e^{-s}`.
    pub poisson_density: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingHistogram<T> {
    pub bins: Vec<HistogramBin<T>>,
    /// Number of spacings `N - 1`.
    pub total: u64,
    /// Spacings at or beyond the last bin edge.
    pub overflow: u64,
}

/// Histogram of unfolded nearest-neighbour spacings `(λ_{k+1} - λ_k)/s̄` over
/// the first `count` levels, bins of equal width on `[0, s_max)`.
pub fn nn_spacings<T: Real>(
    length: T,
    sigma: T,
    count: usize,
    bins: usize,
    s_max: T,
) -> Result<SpacingHistogram<T>> {
    if count < 2 {
        return Err(invalid("spacings need N >= 2"));
    }
    if bins == 0 || !(s_max > T::zero()) {
        return Err(invalid("histogram needs at least one bin and s_max > 0"));
    }
    let sbar = mean_spacing(length)?.sbar;
    let spec = spectrum_with_rank(length, sigma, count)?;
    let levels = &spec.records[..count];
    let width = s_max / T::from_index(bins as u64);
    let mut counts = vec![0u64; bins];
    let mut overflow = 0;
    for w in levels.windows(2) {
        let s = (w[1].lambda - w[0].lambda) / sbar;
        let idx = (s / width).floor().to_usize().unwrap_or(usize::MAX);
        if idx < bins {
            counts[idx] += 1;
        } else {
            overflow += 1;
        }
    }
    let total = (count - 1) as u64;
    let bins = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let left = width * T::from_index(i as u64);
            let right = left + width;
            HistogramBin {
                bin_left: left,
                bin_right: right,
                count: c,
                density: T::from_index(c) / (T::from_index(total) * width),
                poisson_density: ((-left).exp() - (-right).exp()) / width,
            }
        })
        .collect();
    Ok(SpacingHistogram {
        bins,
        total,
        overflow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape_and_integral() {
        let k = builtin_kernel(KernelShape::Bump, 1.0f64).unwrap();
        assert!((k.evaluate(0.0) - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(k.evaluate(1.0), 0.0);
        assert_eq!(k.evaluate(-1.0), 0.0);
        assert_eq!(k.evaluate(0.3), k.evaluate(-0.3));
        // 40-digit quadrature: 0.44399381616807943782...
        assert!((k.integral - 0.443_993_816_168_079_4).abs() < 1e-12);
        let k2 = builtin_kernel(KernelShape::Bump, 2.5f64).unwrap();
        assert!((k2.integral - 2.5 * k.integral).abs() < 1e-14);
    }

    #[test]
    fn mollified_triangle_is_even_and_has_area_half_rho() {
        let k = builtin_kernel(KernelShape::TriangleSmooth, 1.0f64).unwrap();
        assert!((k.integral - 0.5).abs() < 1e-10, "{}", k.integral);
        for &x in &[0.0, 0.1, 0.37, 0.8, 0.999] {
            assert_eq!(k.evaluate(x), k.evaluate(-x));
            assert!(k.evaluate(x) >= 0.0);
        }
        assert_eq!(k.evaluate(1.0), 0.0);
        assert!(k.evaluate(0.0) > k.evaluate(0.5));
    }

    #[test]
    fn unknown_kernel_and_bad_rho() {
        assert!(kernel_by_name::<f64>("gauss", 1.0).is_err());
        assert!(builtin_kernel(KernelShape::Bump, 0.0f64).is_err());
    }

    #[test]
    fn two_levels_by_hand() {
        let k = builtin_kernel(KernelShape::Bump, 1.0f64).unwrap();
        let sbar = 4.0 * std::f64::consts::PI;
        let levels = [1.0, 4.0];
        let v = r2_sorted(&levels, sbar, &k).unwrap();
        let expected = 2.0 / 2.0 * k.evaluate(3.0 / sbar);
        assert!((v - expected).abs() < 1e-16);
        assert!(r2_sorted(&levels[..1], sbar, &k).is_err());
    }

    #[test]
    fn comparison_vanishes_at_zero_sigma() {
        let k = builtin_kernel(KernelShape::Bump, 1.0f64).unwrap();
        assert_eq!(r2_comparison(1.2f64, 0.0, 300, &k).unwrap(), 0.0);
        assert!(r2_comparison(1.2f64, 1.0, 2, &k).unwrap().is_finite());
    }

    #[test]
    fn neumann_square_spacings_pile_up_at_zero() {
        let h = nn_spacings(1.0f64, 0.0, 5000, 20, 4.0).unwrap();
        let first = h.bins[0].count;
        assert!(h.bins.iter().all(|b| b.count <= first));
        assert!(h.bins[0].density > 2.0 * h.bins[0].poisson_density);
        let placed: u64 = h.bins.iter().map(|b| b.count).sum::<u64>() + h.overflow;
        assert_eq!(placed, h.total);
    }
}
