use std::time::Instant;

use robin_rect::diophantine::{
    cluster_at_crossing, crossing_search_with_tolerance, find_crossing_with_tolerance, hl_triple,
    hl_triples, CrossingResult, TripleWitness,
};
use robin_rect::gaps::{bounds_of, mean_gap, mean_of_gaps, moving_average, point_gap_asymptote, rn_gaps};
use robin_rect::paircorr::{builtin_kernel, nn_spacings, r2, r2_below, r2_comparison};
use robin_rect::secular::solve_k;
use robin_rect::spectrum::{
    enumerate_spectrum, multiplicity_scan, n_mult, spectrum_with_rank, MultiplicityCluster,
    MultTolerance, SortedSpectrum,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{parse_constant, Format, RunConfig, Task};
use crate::error::Failure;
use crate::output::{num, Outputs};

pub fn execute(config: &RunConfig) -> Result<(), Failure> {
    config.tolerances.validate()?;
    let start = Instant::now();
    if let Task::Secular { n, sigma } = config.task {
        return secular(config, n, sigma);
    }
    let mut out = Outputs::new(&config.out_dir)?;
    match &config.task {
        Task::Secular { .. } => unreachable!(),
        Task::Spectrum { geometry, sigma, extent } => {
            let l = geometry.length()?;
            let spec = match (extent.cutoff, extent.count) {
                (Some(c), _) => enumerate_spectrum(l, *sigma, c)?,
                (None, Some(n)) => truncated(spectrum_with_rank(l, *sigma, n)?, n),
                (None, None) => return Err(Failure::usage("give --cutoff or --N")),
            };
            write_spectrum(&mut out, config.format, &spec)?;
            println!("{} levels, largest {}", spec.len(), spec.records.last().map_or(0.0, |r| r.lambda));
        }
        Task::Gaps { geometry, sigma, count, trend_lines, window } => {
            gaps(&mut out, config.format, geometry.length()?, *sigma, *count, *trend_lines, *window)?;
        }
        Task::Paircorr { geometry, sigma, extent, kernel, rho, compare, bins, s_max } => {
            let l = geometry.length()?;
            let k = builtin_kernel((*kernel).into(), *rho)?;
            let res = match (extent.cutoff, extent.count) {
                (Some(c), _) => r2_below(l, *sigma, c, &k)?,
                (None, Some(n)) => r2(l, *sigma, n, &k)?,
                (None, None) => return Err(Failure::usage("give --cutoff or --N")),
            };
            let mut value = serde_json::to_value(&res).expect("serializable");
            if *compare {
                let cmp = r2_comparison(l, *sigma, res.n as usize, &k)?;
                value["comparison"] = json!(cmp);
            }
            out.json("paircorr.json", &value)?;
            if *bins > 0 {
                let h = nn_spacings(l, *sigma, res.n as usize, *bins, *s_max)?;
                out.csv(
                    "histogram.csv",
                    &["bin_left", "bin_right", "count", "density", "poisson_density"],
                    h.bins.iter().map(|b| {
                        vec![
                            num(b.bin_left),
                            num(b.bin_right),
                            b.count.to_string(),
                            num(b.density),
                            num(b.poisson_density),
                        ]
                    }),
                )?;
            }
            println!(
                "R2 = {} (Poisson {}), deviation {}, N = {}",
                res.value, res.poisson_reference, res.deviation, res.n
            );
        }
        Task::Triples { theta, epsilon, n_max, count, crossing } => {
            triples(&mut out, config, theta, *epsilon, *n_max, *count, *crossing)?;
        }
        Task::Crossing { geometry, a, b, sigma_lo, sigma_hi } => {
            let l = geometry.length()?;
            let tol = config.tolerances.tol_crossing;
            let c = match sigma_hi {
                Some(hi) => crossing_search_with_tolerance(l, *a, *b, *hi, *sigma_lo, tol)?,
                None => find_crossing_with_tolerance(l, *a, *b, 1.0, *sigma_lo, tol)?,
            };
            out.json("crossing.json", &c)?;
            println!("sigma* = {} (|g| = {:e})", c.sigma_star, c.residual);
        }
        Task::Multiplicity { geometry, sigma, cutoff, quotient_symmetry } => {
            multiplicity(&mut out, config.tolerances.mult(), geometry.length()?, *sigma, *cutoff, *quotient_symmetry)?;
        }
    }
    out.finish(config, start.elapsed())?;
    Ok(())
}

fn secular(config: &RunConfig, n: u32, sigma: f64) -> Result<(), Failure> {
    let f = solve_k(n, sigma)?;
    if !(f.residual < config.tolerances.tol_secular) {
        return Err(Failure::numerical(format!(
            "residual {} exceeds --tol-secular {}",
            f.residual, config.tolerances.tol_secular
        )));
    }
    match config.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&f).expect("serializable")),
        Format::Csv => {
            println!("n = {}", f.n);
            println!("sigma = {}", f.sigma);
            println!("k = {}", f.k);
            println!("k^2 = {}", f.k_squared());
            println!("offset = {}", f.offset);
            println!("residual = {:e}", f.residual);
            println!("parity = {:?}", f.parity);
        }
    }
    Ok(())
}

fn truncated(mut spec: SortedSpectrum<f64>, n: usize) -> SortedSpectrum<f64> {
    spec.records.truncate(n);
    spec
}

fn write_spectrum(out: &mut Outputs, format: Format, spec: &SortedSpectrum<f64>) -> Result<(), Failure> {
    #[derive(Serialize)]
    struct Row {
        rank: usize,
        n: u32,
        m: u32,
        lambda: f64,
    }
    let rows = spec.records.iter().enumerate().map(|(i, r)| Row {
        rank: i + 1,
        n: r.n,
        m: r.m,
        lambda: r.lambda,
    });
    match format {
        Format::Csv => out.csv(
            "spectrum.csv",
            &["rank", "n", "m", "lambda"],
            rows.map(|r| vec![r.rank.to_string(), r.n.to_string(), r.m.to_string(), num(r.lambda)]),
        )?,
        Format::Json => out.json("spectrum.json", &rows.collect::<Vec<_>>())?,
    };
    Ok(())
}

fn gaps(
    out: &mut Outputs,
    format: Format,
    l: f64,
    sigma: f64,
    count: usize,
    trend_lines: u32,
    window: usize,
) -> Result<(), Failure> {
    if window == 0 {
        return Err(Failure::usage("--window must be at least 1"));
    }
    let gaps = rn_gaps(l, sigma, count)?;
    let dbar = mean_gap(l, sigma)?.dbar;
    match format {
        Format::Csv => out.csv(
            "gaps.csv",
            &["j", "lambda_sigma", "lambda_0", "d"],
            gaps.iter().map(|g| {
                vec![g.j.to_string(), num(g.lambda_sigma), num(g.lambda_neumann), num(g.d)]
            }),
        )?,
        Format::Json => out.json("gaps.json", &gaps)?,
    };
    let d: Vec<f64> = gaps.iter().map(|g| g.d).collect();
    let avg = moving_average(&d, window);
    out.csv(
        "moving_average.csv",
        &["j", "moving_average"],
        avg.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), num(*v)]),
    )?;
    if trend_lines > 0 {
        let trend = (0..trend_lines)
            .map(|n| point_gap_asymptote(l, sigma, n).map(|t| vec![n.to_string(), num(t)]))
            .collect::<Result<Vec<_>, _>>()?;
        out.csv("trend.csv", &["n", "asymptote"], trend)?;
    }
    let bounds = bounds_of(&gaps, dbar);
    let mean = mean_of_gaps(&gaps);
    out.json(
        "gap_summary.json",
        &json!({
            "L": l,
            "sigma": sigma,
            "N": count,
            "dbar": dbar,
            "mean": mean,
            "min_ratio": bounds.min_ratio,
            "max_ratio": bounds.max_ratio,
            "window": window,
        }),
    )?;
    println!(
        "mean gap {mean} (law {dbar}); d/dbar in [{}, {}]",
        bounds.min_ratio, bounds.max_ratio
    );
    Ok(())
}

fn triples(
    out: &mut Outputs,
    config: &RunConfig,
    theta: &str,
    epsilon: f64,
    n_max: u64,
    count: usize,
    with_crossing: bool,
) -> Result<(), Failure> {
    let theta = parse_constant(theta)?;
    let witnesses = hl_triples(theta, epsilon, n_max, count.max(1))?;
    if witnesses.is_empty() {
        // re-run the single scan for its near-miss report
        hl_triple(theta, epsilon, n_max)?;
    }
    out.json("triples.json", &witnesses)?;
    for w in &witnesses {
        println!("(n, m, m') = ({}, {}, {}), q = {:e}", w.n, w.m, w.m_prime, w.q_value);
    }
    if with_crossing {
        #[derive(Serialize)]
        struct Entry<'a> {
            witness: &'a TripleWitness<f64>,
            crossing: CrossingResult<f64>,
            cluster: Option<MultiplicityCluster<f64>>,
        }
        let index = |v: u64| u32::try_from(v).map_err(|_| Failure::numerical("index exceeds u32"));
        let mut entries = Vec::new();
        for w in &witnesses {
            let a = (index(w.n)?, index(w.m)?);
            let b = (0, index(w.m_prime)?);
            let crossing = find_crossing_with_tolerance(
                theta.sqrt(),
                a,
                b,
                epsilon,
                None,
                config.tolerances.tol_crossing,
            )?;
            let cluster = cluster_at_crossing(&crossing, config.tolerances.mult())?;
            println!(
                "sigma* = {} for {:?} ~ {:?}; cluster {}",
                crossing.sigma_star,
                a,
                b,
                cluster.as_ref().map_or("not found".to_string(), |c| format!("{:?}", c.members))
            );
            entries.push(Entry { witness: w, crossing, cluster });
        }
        out.json("crossings.json", &entries)?;
    }
    Ok(())
}

fn multiplicity(
    out: &mut Outputs,
    tol: MultTolerance<f64>,
    l: f64,
    sigma: f64,
    cutoff: f64,
    quotient: bool,
) -> Result<(), Failure> {
    let spec = enumerate_spectrum(l, sigma, cutoff)?;
    let clusters = multiplicity_scan(&spec, tol, quotient)?;
    let mut sensitivity = Vec::new();
    for factor in [0.1, 1.0, 10.0] {
        let t = tol.scaled(factor);
        sensitivity.push(json!({
            "factor": factor,
            "tolerance": t,
            "clusters": multiplicity_scan(&spec, t, quotient)?.len(),
            "n_mult": n_mult(&spec, cutoff, t, quotient)?,
        }));
    }
    let count = n_mult(&spec, cutoff, tol, quotient)?;
    out.json(
        "multiplicity.json",
        &json!({
            "L": l,
            "sigma": sigma,
            "cutoff": cutoff,
            "levels": spec.len(),
            "tolerance": tol,
            "quotient_symmetry": quotient,
            "n_mult": count,
            "clusters": clusters,
            "sensitivity": sensitivity,
        }),
    )?;
    println!("{} clusters, N_mult = {count} over {} levels", clusters.len(), spec.len());
    Ok(())
}
