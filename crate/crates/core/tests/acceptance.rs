//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use robin_rect::diophantine::{cluster_at_crossing, find_crossing, triple_crossing, TOL_CROSSING};
use robin_rect::gaps::{bounds_of, mean_gap, mean_of_gaps, point_gap_asymptote, rn_gaps};
use robin_rect::paircorr::{builtin_kernel, mean_spacing, r2, r2_comparison, r2_sorted, KernelShape};
use robin_rect::secular::{solve_k, Parity};
use robin_rect::spectrum::{
    eigenvalue, enumerate_spectrum, level_difference, multiplicity_scan, MultTolerance,
};

const PI2: f64 = PI * PI;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(
        elapsed < limit,
        format!("runtime {elapsed:.2?} exceeds {limit:?}"),
    )
}

/// Parity-form defect at `k`, normalized by `1 + k`.
///
/// The half angle is reduced as `s = k/2 - nπ/2` with `π/2` in double-double,
/// so the evaluation does not add its own ulp-of-`k` error. Then
/// `tan(k/2) = tan(s)` for even `n` and `cot(k/2) = -tan(s)` for odd `n`.
fn parity_residual(n: u32, sigma: f64, k: f64) -> f64 {
    const HALF_PI_LO: f64 = 6.123_233_995_736_766e-17;
    let nn = n as f64;
    let p = nn * FRAC_PI_2;
    let e = nn.mul_add(FRAC_PI_2, -p);
    let s = (k / 2.0 - p) - e - nn * HALF_PI_LO;
    let defect = match Parity::of(n) {
        Parity::Even => k * s.tan() - sigma,
        Parity::Odd => -k * (-s.tan()) - sigma,
    };
    defect.abs() / (1.0 + k)
}

fn secular_residuals() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_at = (0, 0.0);
    for &sigma in &[0.01, 1.0, 10.0, 100.0] {
        for n in 0..=10_000u32 {
            let f = solve_k(n, sigma).map_err(|e| format!("n = {n}, sigma = {sigma}: {e}"))?;
            let lo = n as f64 * PI;
            let hi = (n + 1) as f64 * PI;
            check(
                lo <= f.k && f.k <= hi,
                format!("k_{n}({sigma}) = {} outside [{lo}, {hi}]", f.k),
            )?;
            let r = parity_residual(n, sigma, f.k);
            if r > worst {
                worst = r;
                worst_at = (n, sigma);
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        worst < 1e-12,
        format!("residual {worst:.3e} at n = {}, sigma = {}", worst_at.0, worst_at.1),
    )?;
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("max residual {worst:.2e} over 40004 roots in {elapsed:.2?}"))
}

/// Root of `(nπ + δ) tan(δ/2) = σ` for small negative σ, by bisection on
/// `δ ∈ (-π/2, 0]`. Valid for `n ≥ 1`, where both parity forms reduce to this.
fn negative_sigma_offset(n: u32, sigma: f64) -> f64 {
    let f = |d: f64| (n as f64 * PI + d) * (d / 2.0).tan() - sigma;
    let (mut lo, mut hi) = (-PI / 2.0, 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn derivative_law() -> Outcome {
    let h = 1e-7;
    let mut worst = 0.0f64;
    for n in 1..=100u32 {
        let plus = solve_k(n, h).map_err(|e| e.to_string())?.offset;
        let minus = negative_sigma_offset(n, -h);
        let fd = (plus - minus) / (2.0 * h);
        let exact = 2.0 / (PI * n as f64);
        worst = worst.max((fd / exact - 1.0).abs());
    }
    check(worst < 1e-6, format!("max relative error {worst:.3e}"))?;
    Ok(format!("max relative error {worst:.2e} for n = 1..100"))
}

fn k0_asymptotic() -> Outcome {
    let sigma = 1e-4f64;
    let k0 = solve_k(0, sigma).map_err(|e| e.to_string())?;
    let dev = (k0.k_squared() / (2.0 * sigma) - 1.0).abs();
    check(dev < 1e-3, format!("|k0^2/(2 sigma) - 1| = {dev:.3e}"))?;
    Ok(format!("|k0^2/(2 sigma) - 1| = {dev:.2e}"))
}

fn trend_values() -> Outcome {
    let start = Instant::now();
    let t0 = point_gap_asymptote(1.0f64, 1.0, 0).map_err(|e| e.to_string())?;
    let t1 = point_gap_asymptote(1.0f64, 1.0, 1).map_err(|e| e.to_string())?;
    check((t0 - 5.707).abs() < 1e-3, format!("n = 0 trend {t0}"))?;
    check((t1 - 7.62275).abs() < 1e-4, format!("n = 1 trend {t1}"))?;
    within(start.elapsed(), Duration::from_millis(100))?;
    Ok(format!("trend(0) = {t0:.6}, trend(1) = {t1:.6}"))
}

struct GapRun {
    mean: f64,
    min: f64,
    max_ratio: f64,
    elapsed: Duration,
}

fn gap_run() -> Result<GapRun, String> {
    let start = Instant::now();
    let gaps = rn_gaps(1.0, 1.0, 100_000).map_err(|e| e.to_string())?;
    check(gaps.len() == 100_000, format!("only {} gaps", gaps.len()))?;
    let dbar = mean_gap(1.0, 1.0).map_err(|e| e.to_string())?.dbar;
    let bounds = bounds_of(&gaps, dbar);
    Ok(GapRun {
        mean: mean_of_gaps(&gaps),
        min: gaps.iter().map(|g| g.d).fold(f64::INFINITY, f64::min),
        max_ratio: bounds.max_ratio,
        elapsed: start.elapsed(),
    })
}

fn mean_gap_criterion(run: &GapRun) -> Outcome {
    let rel = (run.mean - 8.0).abs() / 8.0;
    check(rel < 0.02, format!("mean {} (relative deviation {rel:.3e})", run.mean))?;
    within(run.elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "mean of 1e5 gaps = {:.6} (relative deviation {rel:.2e}) in {:.2?}",
        run.mean, run.elapsed
    ))
}

fn uniform_bounds(run: &GapRun) -> Outcome {
    check(run.min > 0.0, format!("non-positive gap {}", run.min))?;
    check(run.max_ratio <= 2.0, format!("max d/8 = {}", run.max_ratio))?;
    Ok(format!(
        "min d = {:.6}, envelope d/8 in [{:.4}, {:.6}]",
        run.min,
        run.min / 8.0,
        run.max_ratio
    ))
}

fn square_simplicity() -> Outcome {
    let spec = enumerate_spectrum(1.0, 0.01, 2000.0).map_err(|e| e.to_string())?;
    let classes: Vec<_> = spec.records.iter().filter(|r| r.n <= r.m).collect();
    let (min_gap, at) = classes
        .windows(2)
        .map(|w| (w[1].lambda - w[0].lambda, (w[0].n, w[0].m, w[1].n, w[1].m)))
        .fold((f64::INFINITY, (0, 0, 0, 0)), |a, b| if b.0 < a.0 { b } else { a });
    check(
        min_gap > 1e-6,
        format!("inter-class gap {min_gap:.3e} between {at:?}"),
    )?;
    let absolute = multiplicity_scan(&spec, MultTolerance::Absolute(1e-6), true)
        .map_err(|e| e.to_string())?;
    check(
        absolute.is_empty(),
        format!("{} clusters at absolute tolerance 1e-6", absolute.len()),
    )?;
    let relative = multiplicity_scan(&spec, MultTolerance::Relative(1e-9), true)
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "{} classes, min inter-class gap {min_gap:.4e} between ({},{}) and ({},{}); \
         clusters at 1e-6 absolute: 0, at 1e-9 relative: {}",
        classes.len(),
        at.0,
        at.1,
        at.2,
        at.3,
        relative.len()
    ))
}

fn degeneracy_existence() -> Outcome {
    let e = |s: f64, n, m| eigenvalue(1.0, s, n, m).map(|r| r.lambda).map_err(|e| e.to_string());
    check(e(0.0, 3, 4)? == 25.0 * PI2, "Lambda_{3,4}(0) != 25 pi^2")?;
    check(e(0.0, 1, 5)? == 26.0 * PI2, "Lambda_{1,5}(0) != 26 pi^2")?;
    let big = 1e7;
    let (a_inf, b_inf) = (e(big, 3, 4)? / PI2, e(big, 1, 5)? / PI2);
    check(
        (a_inf - 41.0).abs() < 1e-4 && (b_inf - 40.0).abs() < 1e-4,
        format!("large-sigma limits {a_inf}, {b_inf}"),
    )?;
    let c = find_crossing(1.0, (3, 4), (1, 5), 1.0, None).map_err(|e| e.to_string())?;
    let (lo, hi) = c.bracket;
    let g = |s| level_difference(1.0, s, (3, 4), (1, 5)).map_err(|e| e.to_string());
    check(
        g(lo)? <= 0.0 && g(hi)? >= 0.0,
        format!("bracket [{lo}, {hi}] does not change sign"),
    )?;
    let gap = (e(c.sigma_star, 3, 4)? - e(c.sigma_star, 1, 5)?).abs();
    check(c.residual < 1e-10, format!("residual {:.3e}", c.residual))?;
    check(gap < 1e-10, format!("direct level gap {gap:.3e}"))?;
    Ok(format!(
        "sigma* = {:.12}, |g| = {:.2e}, limits {a_inf:.5}/{b_inf:.5} pi^2 at sigma = 1e7",
        c.sigma_star, c.residual
    ))
}

/// Sign of `θn² + m² - m'²` with θ taken as its exact binary value.
fn exact_sign(theta: f64, n: u64, m: u64, mp: u64) -> i32 {
    let bits = theta.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32 - 1075;
    let mant = ((bits & ((1u64 << 52) - 1)) | (1u64 << 52)) as i128;
    // θ = mant · 2^exp with exp < 0 for θ in [1, 2)
    assert!((-60..0).contains(&exp));
    let lhs = mant * (n * n) as i128;
    let rhs = ((mp * mp - m * m) as i128) << (-exp);
    (lhs - rhs).signum() as i32
}

fn multiplicity_construction() -> Outcome {
    let start = Instant::now();
    let theta = 2f64.sqrt();
    let tc = triple_crossing(theta, 0.01, 1000).map_err(|e| e.to_string())?;
    let w = &tc.witness;
    check(w.is_valid(), format!("witness {w:?} fails its recheck"))?;
    check(
        exact_sign(theta, w.n, w.m, w.m_prime) < 0,
        "exact integer evaluation is not negative",
    )?;
    let direct = w.direct_value();
    check(
        direct.signum() == w.q_value.signum() && direct > -0.01,
        format!("direct {direct} vs compensated {}", w.q_value),
    )?;
    let c = &tc.crossing;
    check(
        c.sigma_star > 0.0 && c.sigma_star < 0.1,
        format!("sigma* = {}", c.sigma_star),
    )?;
    check(c.residual < TOL_CROSSING, format!("residual {:.3e}", c.residual))?;
    let cluster = cluster_at_crossing(c, MultTolerance::Relative(1e-9)).map_err(|e| e.to_string())?;
    let cluster = cluster.ok_or("no cluster contains both pairs at sigma*")?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "(n,m,m') = ({},{},{}), q = {:.6e}, sigma* = {:.9}, cluster {:?} at lambda = {:.6e} in {elapsed:.2?}",
        w.n, w.m, w.m_prime, w.q_value, c.sigma_star, cluster.members, cluster.lambda_mean
    ))
}

fn weyl_law() -> Outcome {
    let mut parts = Vec::new();
    for &l in &[1.0, 2f64.powf(0.25), 2.0] {
        let spec = enumerate_spectrum(l, 1.0, 1e5).map_err(|e| e.to_string())?;
        let ratio = spec.len() as f64 * 4.0 * PI / (l * 1e5);
        check(
            (0.98..=1.02).contains(&ratio),
            format!("L = {l}: ratio {ratio}"),
        )?;
        parts.push(format!("L = {l:.4}: {ratio:.5}"));
    }
    Ok(parts.join(", "))
}

fn pair_correlation() -> Outcome {
    let start = Instant::now();
    let l = 2f64.powf(0.25);
    let kernel = builtin_kernel(KernelShape::Bump, 1.0).map_err(|e| e.to_string())?;
    let res = r2(l, 1.0, 200_000, &kernel).map_err(|e| e.to_string())?;
    let rel = res.deviation / res.poisson_reference;
    check(rel < 0.05, format!("R2 = {}, integral {}, rel {rel}", res.value, res.poisson_reference))?;
    let mut cmp = Vec::new();
    for n in [10_000, 40_000, 160_000] {
        cmp.push(r2_comparison(l, 1.0, n, &kernel).map_err(|e| e.to_string())?);
    }
    check(
        cmp[0] > cmp[1] && cmp[1] > cmp[2],
        format!("comparison not decreasing: {cmp:?}"),
    )?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(300))?;
    Ok(format!(
        "R2 = {:.6} vs {:.6} (rel {rel:.3e}); |R2(1) - R2(0)| = {:.3e}, {:.3e}, {:.3e} in {elapsed:.2?}",
        res.value, res.poisson_reference, cmp[0], cmp[1], cmp[2]
    ))
}

fn naive_r2(levels: &[f64], sbar: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    for (i, &a) in levels.iter().enumerate() {
        for (j, &b) in levels.iter().enumerate() {
            if i != j {
                total += f((a - b) / sbar);
            }
        }
    }
    total / levels.len() as f64
}

fn brute_force(l: f64, sigma: f64, cutoff: f64) -> Result<Vec<(u32, u32, f64)>, String> {
    let mut out = Vec::new();
    let mut n = 0u32;
    while (n as f64 * PI).powi(2) <= cutoff {
        let mut m = 0u32;
        while (n as f64 * PI).powi(2) + (m as f64 * PI / l).powi(2) <= cutoff {
            let r = eigenvalue(l, sigma, n, m).map_err(|e| e.to_string())?;
            if r.lambda <= cutoff {
                out.push((n, m, r.lambda));
            }
            m += 1;
        }
        n += 1;
    }
    out.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    Ok(out)
}

fn oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    for &(l, sigma, count) in &[(1.0, 1.0, 2000usize), (2f64.powf(0.25), 0.5, 1500), (1.7, 0.0, 800)] {
        for shape in [KernelShape::Bump, KernelShape::TriangleSmooth] {
            let kernel = builtin_kernel(shape, 1.5).map_err(|e| e.to_string())?;
            let spec = robin_rect::spectrum::spectrum_with_rank(l, sigma, count).map_err(|e| e.to_string())?;
            let levels: Vec<f64> = spec.records[..count].iter().map(|r| r.lambda).collect();
            let sbar = mean_spacing(l).map_err(|e| e.to_string())?.sbar;
            let fast = r2_sorted(&levels, sbar, &kernel).map_err(|e| e.to_string())?;
            let slow = naive_r2(&levels, sbar, |x| kernel.evaluate(x));
            worst = worst.max((fast - slow).abs() / slow.abs());
        }
    }
    check(worst < 1e-12, format!("window vs naive relative error {worst:.3e}"))?;
    let mut compared = 0;
    for &(l, sigma, cutoff) in &[(1.0, 0.0, 1e4), (1.0, 1.0, 1e4), (2f64.powf(0.25), 0.3, 1e4), (0.6, 5.0, 5e3)] {
        let spec = enumerate_spectrum(l, sigma, cutoff).map_err(|e| e.to_string())?;
        let got: Vec<(u32, u32, f64)> = spec.records.iter().map(|r| (r.n, r.m, r.lambda)).collect();
        let want = brute_force(l, sigma, cutoff)?;
        check(got == want, format!("enumeration differs from brute force at L = {l}, sigma = {sigma}"))?;
        compared += got.len();
    }
    Ok(format!(
        "window vs naive max relative error {worst:.2e}; {compared} records identical to brute force"
    ))
}

fn main() -> ExitCode {
    let gap = gap_run();
    let gap_result = |f: fn(&GapRun) -> Outcome| match &gap {
        Ok(run) => f(run),
        Err(e) => Err(e.clone()),
    };
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 secular residuals", Box::new(secular_residuals)),
        ("2 derivative law at sigma = 0", Box::new(derivative_law)),
        ("3 k0 small-sigma asymptotic", Box::new(k0_asymptotic)),
        ("4 point-gap trend values", Box::new(trend_values)),
        ("5 mean Robin-Neumann gap", Box::new(move || gap_result(mean_gap_criterion))),
        ("6 uniform gap bounds", Box::new(move || gap_result(uniform_bounds))),
        ("7 square simplicity", Box::new(square_simplicity)),
        ("8 degeneracy existence", Box::new(degeneracy_existence)),
        ("9 multiplicity construction", Box::new(multiplicity_construction)),
        ("10 Weyl law", Box::new(weyl_law)),
        ("11 pair correlation", Box::new(pair_correlation)),
        ("12 oracle equivalence", Box::new(oracle_equivalence)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let start = Instant::now();
        let outcome = run();
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail} [{t:.2?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail} [{t:.2?}]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
