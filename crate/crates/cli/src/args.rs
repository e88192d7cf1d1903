use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "poledyn",
    version,
    about = "Orbits, hitting sets and pole-approach statistics for maps x - Σ αᵢ/(x - βᵢ)",
    long_about = "Orbits, hitting sets and pole-approach statistics for maps f(x) = x - Σ αᵢ/(x - βᵢ) with αᵢ > 0.\n\n\
                  Maps are read from JSON files such as {\"alphas\": [\"1\"], \"betas\": [\"0\"]}. All numbers on the \
                  command line and in files are decimal strings, parsed exactly.\n\n\
                  Exit codes: 0 success, 2 invalid input, 3 precision exhausted, 4 budget exceeded, 1 other failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bigfloat,
    Rational,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Directory receiving the data files and manifest.json.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Working precision in bits (big-float mode).
    #[arg(long, env = "POLEDYN_DEFAULT_BITS")]
    pub bits: Option<u32>,

    #[arg(long, value_enum, default_value = "bigfloat")]
    pub mode: Mode,

    /// Extra bits of the verification (shadow) orbit.
    #[arg(long, default_value_t = 128)]
    pub shadow_margin: u32,

    /// Largest base/shadow difference still counted as agreement.
    #[arg(long, default_value_t = 1e-30)]
    pub shadow_tol: f64,

    /// Skip shadow verification.
    #[arg(long)]
    pub no_shadow: bool,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Cap on worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MapArg {
    /// Map definition file.
    #[arg(long)]
    pub map: PathBuf,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Iterate the map from a seed, with shadow verification.
    ///
    /// Exercises the recursion x_{n+1} = f(x_n); for x - 1/x the orbit is chaotic (conjugate to
    /// angle doubling), so the verified prefix is reported alongside the values.
    Orbit {
        #[command(flatten)]
        map: MapArg,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// First step n ≥ 1 at which the orbit comes within eps of a pole.
    ///
    /// The hitting predicate of the positive-density theorem: min over 1 ≤ n ≤ N of the distance
    /// from f⁽ⁿ⁾(x) to the nearest pole.
    Hit {
        #[command(flatten)]
        map: MapArg,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        n_max: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Hitting sets I_k = f⁻ᵏ(I₀) for I₀ the eps-neighbourhood of the poles.
    ///
    /// Checks the measure-preservation lemma (|I_k| = |I₀| = 2mε), the interval count m(m+1)^k
    /// and the √k containment radius.
    Pullback {
        #[command(flatten)]
        map: MapArg,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        k: usize,
        /// Refuse runs whose last level would exceed this many intervals.
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Measure preservation |f⁻¹(S)| = |S| on interval sets (Glasser's master theorem).
    Glasser {
        #[command(flatten)]
        map: MapArg,
        /// Interval "a,b"; repeat for a union. Without any, random sets are drawn.
        #[arg(long = "set", allow_hyphen_values = true)]
        sets: Vec<String>,
        /// Number of random sets when --set is absent.
        #[arg(long, default_value_t = 20)]
        random_sets: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo density of points that come within 1/|x| of a pole in ⌊c₁x²⌋ steps.
    ///
    /// Estimates |X ∩ [-y, y]| / 2y for the positive-density theorem, with Wilson intervals.
    Density {
        #[command(flatten)]
        map: MapArg,
        #[arg(long = "y", required = true)]
        y: Vec<String>,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value = "2")]
        c1: String,
        /// Largest precision tried by adaptive retries.
        #[arg(long, default_value_t = 1 << 15)]
        max_bits: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Steps needed by far starts to reach the pole region, and the fitted exponent in steps ≈ A·x₀^p.
    ///
    /// Exercises the quadratic descent heuristic (x² drops by about 2Σα per step).
    Scaling {
        #[command(flatten)]
        map: MapArg,
        #[arg(long = "x0", required = true, allow_hyphen_values = true)]
        x0: Vec<String>,
        #[arg(long, default_value_t = 1 << 15)]
        max_bits: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Disjointness windows of the hitting sets across several eps.
    ///
    /// Exercises the separation lemma: I_k and I_l are disjoint whenever |k - l| is small relative to ε⁻².
    Disjoint {
        #[command(flatten)]
        map: MapArg,
        #[arg(long = "eps", required = true)]
        eps: Vec<String>,
        #[arg(long)]
        k_max: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Itinerary checks for x - 1/x: shift commutation, angle doubling and monobit frequency.
    ///
    /// Observable consequences of the topological conjugacy of x - 1/x with the doubling map.
    Conjugacy {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 30)]
        theta_bits: usize,
        #[arg(long, default_value = "-3", allow_hyphen_values = true)]
        lo: String,
        #[arg(long, default_value = "3", allow_hyphen_values = true)]
        hi: String,
        #[arg(long, default_value_t = 1 << 15)]
        max_bits: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Exploratory: the density predicate with the shorter budget ⌊|x| (ln |x|)²⌋.
    #[command(name = "probe-logsq")]
    ProbeLogsq {
        #[command(flatten)]
        map: MapArg,
        #[arg(long = "y", required = true)]
        y: Vec<String>,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 1 << 15)]
        max_bits: u32,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Orbit { .. } => "orbit",
            Command::Hit { .. } => "hit",
            Command::Pullback { .. } => "pullback",
            Command::Glasser { .. } => "glasser",
            Command::Density { .. } => "density",
            Command::Scaling { .. } => "scaling",
            Command::Disjoint { .. } => "disjoint",
            Command::Conjugacy { .. } => "conjugacy",
            Command::ProbeLogsq { .. } => "probe-logsq",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Orbit { common, .. }
            | Command::Hit { common, .. }
            | Command::Pullback { common, .. }
            | Command::Glasser { common, .. }
            | Command::Density { common, .. }
            | Command::Scaling { common, .. }
            | Command::Disjoint { common, .. }
            | Command::Conjugacy { common, .. }
            | Command::ProbeLogsq { common, .. } => common,
        }
    }
}
