//! Run configuration: the parsed command line, serializable so a run can be
//! replayed from its `meta.json` or from a config file.

use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use robin_rect::paircorr::KernelShape;
use robin_rect::spectrum::MultTolerance;
use serde::{Deserialize, Serialize};

use crate::error::Failure;

/// `L` either directly or through `L²`; `--L2` takes a number, `sqrt2` or `golden`.
#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[group(multiple = false)]
pub struct Geometry {
    /// Side length L of the rectangle [0,1] x [0,L] (dimensionless; default 1)
    #[arg(long = "L", value_name = "L", allow_negative_numbers = true)]
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    /// L² instead of L: a positive number, `sqrt2` (L² = √2) or `golden` (L² = (1+√5)/2)
    #[arg(long = "L2", value_name = "L2")]
    #[serde(rename = "L2", default, skip_serializing_if = "Option::is_none")]
    pub length_squared: Option<String>,
}

/// Named constant or decimal number.
pub fn parse_constant(s: &str) -> Result<f64, Failure> {
    match s {
        "sqrt2" => Ok(std::f64::consts::SQRT_2),
        "golden" => Ok((1.0 + 5f64.sqrt()) / 2.0),
        _ => s
            .parse::<f64>()
            .map_err(|_| Failure::usage(format!("'{s}' is not a number, sqrt2 or golden"))),
    }
}

impl Geometry {
    pub fn length(&self) -> Result<f64, Failure> {
        match (&self.length, &self.length_squared) {
            (Some(l), None) => Ok(*l),
            (None, Some(l2)) => {
                let v = parse_constant(l2)?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Failure::usage(format!("L2 must be positive, got {v}")));
                }
                Ok(v.sqrt())
            }
            (None, None) => Ok(1.0),
            (Some(_), Some(_)) => Err(Failure::usage("give either --L or --L2, not both")),
        }
    }
}

/// Exactly one of a λ cutoff or a rank count.
#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[group(required = true, multiple = false)]
pub struct Extent {
    /// Eigenvalue cutoff: keep all levels λ ≤ CUTOFF
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    /// Number of lowest levels N
    #[arg(long = "N", value_name = "N")]
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    Bump,
    TriangleSmooth,
}

impl From<KernelName> for KernelShape {
    fn from(k: KernelName) -> Self {
        match k {
            KernelName::Bump => KernelShape::Bump,
            KernelName::TriangleSmooth => KernelShape::TriangleSmooth,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Largest accepted normalized secular residual |F(k) - σ|/(1+k)
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol_secular: f64,
    /// Clustering tolerance; relative means TOL·(1+λ)
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_mult: f64,
    /// Treat --tol-mult as an absolute eigenvalue difference
    #[arg(long, global = true)]
    pub tol_mult_absolute: bool,
    /// Target |Λ_a - Λ_b| for crossing bisection
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_crossing: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_secular: 1e-12,
            tol_mult: 1e-9,
            tol_mult_absolute: false,
            tol_crossing: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), Failure> {
        for (name, v) in [
            ("tol-secular", self.tol_secular),
            ("tol-mult", self.tol_mult),
            ("tol-crossing", self.tol_crossing),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::usage(format!("--{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn mult(&self) -> MultTolerance<f64> {
        if self.tol_mult_absolute {
            MultTolerance::Absolute(self.tol_mult)
        } else {
            MultTolerance::Relative(self.tol_mult)
        }
    }
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Task {
    /// Solve for the frequency k_n(σ) on the unit interval and print it
    Secular {
        /// Bracket index n ≥ 0
        #[arg(long)]
        n: u32,
        /// Robin parameter σ ≥ 0
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
    },
    /// Sorted Robin spectrum of the rectangle (spectrum.csv: rank,n,m,lambda)
    Spectrum {
        #[command(flatten)]
        #[serde(flatten)]
        geometry: Geometry,
        /// Robin parameter σ ≥ 0
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        #[command(flatten)]
        #[serde(flatten)]
        extent: Extent,
    },
    /// Robin-Neumann gaps d_j = λ_j(σ) - λ_j(0) with moving average and trend lines
    Gaps {
        #[command(flatten)]
        #[serde(flatten)]
        geometry: Geometry,
        /// Robin parameter σ > 0
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        /// Number of gaps N
        #[arg(long = "N", value_name = "N")]
        #[serde(rename = "N")]
        count: usize,
        /// Number of trend asymptotes k_n(σ)² - (nπ)² + 4σ/L, n = 0..K-1
        #[arg(long, default_value_t = 0)]
        trend_lines: u32,
        /// Centered moving-average window, in ranks
        #[arg(long, default_value_t = robin_rect::gaps::MOVING_AVERAGE_WINDOW)]
        window: usize,
    },
    /// Pair correlation R₂ of the unfolded spectrum, plus a spacing histogram
    Paircorr {
        #[command(flatten)]
        #[serde(flatten)]
        geometry: Geometry,
        /// Robin parameter σ ≥ 0
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        #[command(flatten)]
        #[serde(flatten)]
        extent: Extent,
        /// Test function
        #[arg(long, value_enum, default_value_t = KernelName::Bump)]
        kernel: KernelName,
        /// Support radius ρ of the test function, in units of the mean spacing
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        /// Also report |R₂(σ) - R₂(0)| at the same N
        #[arg(long)]
        compare: bool,
        /// Histogram bins for nearest-neighbour spacings (0 disables histogram.csv)
        #[arg(long, default_value_t = 40)]
        bins: usize,
        /// Upper edge of the spacing histogram, in units of the mean spacing
        #[arg(long, default_value_t = 4.0)]
        s_max: f64,
    },
    /// Triples -ε < θn² + m² - m'² < 0, optionally with the level crossing each yields
    Triples {
        /// θ = L²: a positive number, sqrt2 or golden
        #[arg(long, default_value = "sqrt2")]
        theta: String,
        /// Width ε of the target window (-ε, 0)
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Largest n₁ scanned (n = 2n₁)
        #[arg(long, default_value_t = 1000)]
        n_max: u64,
        /// Number of witnesses to report, in ascending n₁
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Also locate σ* where Λ_(n,m) = Λ_(0,m') on L = √θ and check the cluster there
        #[arg(long)]
        crossing: bool,
    },
    /// Locate σ* where two levels Λ_a(σ), Λ_b(σ) coincide
    Crossing {
        #[command(flatten)]
        #[serde(flatten)]
        geometry: Geometry,
        /// First pair n,m
        #[arg(long, value_parser = parse_pair)]
        a: (u32, u32),
        /// Second pair n,m
        #[arg(long, value_parser = parse_pair)]
        b: (u32, u32),
        /// Lower end of the σ bracket (default 0)
        #[arg(long, allow_negative_numbers = true)]
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma_lo: Option<f64>,
        /// Upper end of the σ bracket; without it the bracket doubles from 1 up to 1000
        #[arg(long, allow_negative_numbers = true)]
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma_hi: Option<f64>,
    },
    /// Clusters of (numerically) multiple eigenvalues, with tolerance sensitivity
    Multiplicity {
        #[command(flatten)]
        #[serde(flatten)]
        geometry: Geometry,
        /// Robin parameter σ ≥ 0
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        /// Eigenvalue cutoff
        #[arg(long, allow_negative_numbers = true)]
        cutoff: f64,
        /// Merge the mirror pairs (n,m), (m,n) first (square only)
        #[arg(long)]
        quotient_symmetry: bool,
    },
}

fn parse_pair(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected n,m, got '{s}'"))?;
    let p = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("'{v}': {e}"));
    Ok((p(a)?, p(b)?))
}

/// Everything that determines a run's output files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: Task,
    pub tolerances: Tolerances,
    pub format: Format,
    pub out_dir: PathBuf,
    /// Worker threads; results do not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| Failure::usage(format!("bad config: {e}")))
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
