//! Seeded Monte Carlo and sweep studies.
//!
//! Sample `i` of cell `c` is drawn from a ChaCha8 stream keyed by
//! `(seed, c)` at word position `2i`, so results do not depend on evaluation
//! order or thread count. Reports echo their full configuration.

use std::collections::BTreeMap;
use std::time::Instant;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{MapDef, MapSpec, PrecisionPolicy};
use crate::orbit::{first_hit, itinerary, scan, theta_from_bits, with_adaptive_precision};
use crate::pullback::{disjointness_window, pairwise_disjoint, pullback};
use crate::scalar::{parse_exact, BigFloat, Real};

/// Default cap for adaptive precision in sampling studies.
pub const DEFAULT_MAX_BITS: u32 = 1 << 15;

/// Parameters shared by the density, probe and scaling studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: MapDef,
    pub seed: u64,
    pub samples: usize,
    /// `y` values (density, probe) or `x₀` values (scaling), as decimal strings.
    pub values: Vec<String>,
    /// Iteration budget coefficient: `⌊c₁ x²⌋` steps for a sample `x`.
    pub c1: String,
    pub policy: PrecisionPolicy,
    #[serde(default = "default_max_bits")]
    pub max_bits: u32,
}

fn default_max_bits() -> u32 {
    DEFAULT_MAX_BITS
}

impl ExperimentConfig {
    pub fn new(map: MapDef, seed: u64, samples: usize, values: &[&str]) -> Self {
        ExperimentConfig {
            map,
            seed,
            samples,
            values: values.iter().map(|v| v.to_string()).collect(),
            c1: "2".into(),
            policy: PrecisionPolicy::big_float(256).expect("256 bits is valid"),
            max_bits: DEFAULT_MAX_BITS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invariant("samples", "must be at least 1"));
        }
        if self.values.is_empty() {
            return Err(Error::invariant("values", "at least one value is required"));
        }
        if parse_exact(&self.c1)? <= 0 {
            return Err(Error::invariant("c1", "must be positive"));
        }
        if self.policy.is_exact() {
            return Err(Error::invariant("policy", "sampling studies run in big_float mode"));
        }
        self.policy.validate()?;
        if self.max_bits < self.policy.bits() {
            return Err(Error::invariant("max_bits", "must be at least the starting precision"));
        }
        Ok(())
    }

    fn parsed_values(&self) -> Result<Vec<rug::Rational>> {
        self.values.iter().map(|v| Ok(parse_exact(v)?)).collect()
    }
}

/// Aggregate output of one study. `wall_time_secs` is excluded from the payload.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport<C, S> {
    pub experiment: String,
    pub config: serde_json::Value,
    /// Derived constants used by the run (thresholds, `ε₀`, rates).
    pub constants: BTreeMap<String, String>,
    pub cells: Vec<C>,
    pub summary: S,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl<C: Serialize, S: Serialize> ExperimentReport<C, S> {
    /// Deterministic JSON: identical configurations give identical bytes.
    pub fn payload_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        value["wall_time_secs"] = serde_json::json!(self.wall_time_secs);
        serde_json::to_string_pretty(&value).expect("report serializes")
    }

    /// One row per cell.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for cell in &self.cells {
            writer
                .serialize(cell)
                .map_err(|e| Error::Malformed(e.to_string()))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::Malformed(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn echo<T: Serialize>(config: &T) -> serde_json::Value {
    serde_json::to_value(config).expect("config serializes")
}

/// Uniform draw in `[0, 1)` for sample `index` of cell `cell`.
pub fn unit_draw(seed: u64, cell: usize, index: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell as u64);
    rng.set_word_pos(2 * index as u128);
    rng.random::<f64>()
}

/// Uniform draw in `[lo, hi]`, returned exactly as a dyadic rational.
pub fn uniform_sample(seed: u64, cell: usize, index: usize, lo: f64, hi: f64) -> rug::Rational {
    let u = unit_draw(seed, cell, index);
    let x = lo + (hi - lo) * u;
    rug::Rational::from_f64(x).expect("finite sample")
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Nearest-rank quantile of an ascending slice.
pub fn quantile(sorted: &[usize], q: f64) -> Option<usize> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

/// Least-squares fit of `ln y = ln A + p ln x`; returns `(p, A)`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, (my - slope * mx).exp()))
}

/// Iteration budget for the membership predicate.
#[derive(Debug, Clone, PartialEq)]
pub enum Budget {
    /// `⌊c₁ x²⌋`, computed exactly.
    Quadratic(rug::Rational),
    /// `⌊|x| (ln |x|)²⌋`.
    LogSquared,
}

impl Budget {
    pub fn steps(&self, x: &rug::Rational) -> usize {
        match self {
            Budget::Quadratic(c1) => {
                let value = rug::Rational::from(x * x) * c1;
                let floor = value.floor().numer().clone();
                floor.to_usize().unwrap_or(usize::MAX)
            }
            Budget::LogSquared => {
                let a = x.to_f64().abs();
                if a == 0.0 {
                    return 0;
                }
                let l = a.ln();
                (a * l * l).floor() as usize
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Member { step: usize, bits: u32 },
    NonMember { bits: u32 },
    PoleSeed,
    PoleHit,
    Precision,
    Other,
}

/// `∃ n ∈ [1, budget]` with `min_i |f⁽ⁿ⁾(x) - βᵢ| ≤ 1/|x|`, at the smallest verified precision.
fn membership(def: &MapDef, x: &rug::Rational, budget: usize, policy: &PrecisionPolicy, max_bits: u32) -> Outcome {
    if *x == 0 {
        return Outcome::PoleSeed;
    }
    let eps = rug::Rational::from(x.abs_ref()).recip();
    let start = policy.bits().max(crate::map::default_bits(0));
    let result = with_adaptive_precision::<BigFloat, _>(def, &policy.with_bits(start), max_bits, |spec, p| {
        let x0 = spec.scalar(x);
        let e = spec.scalar(&eps);
        first_hit(spec, &x0, &e, budget, p)
    });
    match result {
        Ok((record, bits)) => match record.n_hit() {
            Some(step) => Outcome::Member { step, bits },
            None => Outcome::NonMember { bits },
        },
        Err(Error::PoleEvaluation { .. }) if def.betas().contains(x) => Outcome::PoleSeed,
        Err(Error::PoleEvaluation { .. }) => Outcome::PoleHit,
        Err(e) if e.is_precision_exhausted() => Outcome::Precision,
        Err(_) => Outcome::Other,
    }
}

/// Per-`y` statistics of the membership predicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCell {
    pub y: String,
    pub samples: usize,
    pub members: usize,
    pub non_members: usize,
    /// Samples excluded because the seed or an iterate landed exactly on a pole.
    pub excluded_pole: usize,
    /// Samples excluded because verification failed at the largest precision.
    pub excluded_precision: usize,
    pub excluded_other: usize,
    pub fraction: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub hit_step_p10: Option<usize>,
    pub hit_step_p50: Option<usize>,
    pub hit_step_p90: Option<usize>,
    pub max_bits_used: u32,
}

impl DensityCell {
    pub fn excluded(&self) -> usize {
        self.excluded_pole + self.excluded_precision + self.excluded_other
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySummary {
    pub total_samples: usize,
    pub total_excluded: usize,
    pub min_fraction: f64,
}

pub type DensityReport = ExperimentReport<DensityCell, DensitySummary>;

fn sample_cells(config: &ExperimentConfig, budget: &Budget, experiment: &str) -> Result<DensityReport> {
    config.validate()?;
    let started = Instant::now();
    let ys = config.parsed_values()?;
    if let Some(bad) = ys.iter().position(|y| *y <= 0) {
        return Err(Error::invariant("values", format!("y[{bad}] must be positive")));
    }
    let mut cells = Vec::with_capacity(ys.len());
    for (cell, (y, text)) in ys.iter().zip(&config.values).enumerate() {
        let yf = y.to_f64();
        let outcomes: Vec<Outcome> = (0..config.samples)
            .into_par_iter()
            .map(|i| {
                let x = uniform_sample(config.seed, cell, i, -yf, yf);
                membership(&config.map, &x, budget.steps(&x), &config.policy, config.max_bits)
            })
            .collect();
        cells.push(summarize_cell(text, &outcomes));
    }
    let summary = DensitySummary {
        total_samples: cells.iter().map(|c| c.samples).sum(),
        total_excluded: cells.iter().map(DensityCell::excluded).sum(),
        min_fraction: cells.iter().map(|c| c.fraction).fold(f64::INFINITY, f64::min),
    };
    let mut constants = BTreeMap::new();
    match budget {
        Budget::Quadratic(c1) => constants.insert("budget".into(), format!("floor({c1} * x^2)")),
        Budget::LogSquared => constants.insert("budget".into(), "floor(|x| * ln(|x|)^2)".into()),
    };
    constants.insert("target_radius".into(), "1/|x|".into());
    Ok(ExperimentReport {
        experiment: experiment.into(),
        config: echo(config),
        constants,
        cells,
        summary,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

fn summarize_cell(y: &str, outcomes: &[Outcome]) -> DensityCell {
    let mut steps = Vec::new();
    let mut cell = DensityCell {
        y: y.to_string(),
        samples: outcomes.len(),
        members: 0,
        non_members: 0,
        excluded_pole: 0,
        excluded_precision: 0,
        excluded_other: 0,
        fraction: 0.0,
        wilson_lo: 0.0,
        wilson_hi: 1.0,
        hit_step_p10: None,
        hit_step_p50: None,
        hit_step_p90: None,
        max_bits_used: 0,
    };
    for outcome in outcomes {
        match *outcome {
            Outcome::Member { step, bits } => {
                cell.members += 1;
                steps.push(step);
                cell.max_bits_used = cell.max_bits_used.max(bits);
            }
            Outcome::NonMember { bits } => {
                cell.non_members += 1;
                cell.max_bits_used = cell.max_bits_used.max(bits);
            }
            Outcome::PoleSeed | Outcome::PoleHit => cell.excluded_pole += 1,
            Outcome::Precision => cell.excluded_precision += 1,
            Outcome::Other => cell.excluded_other += 1,
        }
    }
    let evaluated = cell.members + cell.non_members;
    if evaluated > 0 {
        cell.fraction = cell.members as f64 / evaluated as f64;
    }
    (cell.wilson_lo, cell.wilson_hi) = wilson_interval(cell.members, evaluated);
    steps.sort_unstable();
    cell.hit_step_p10 = quantile(&steps, 0.1);
    cell.hit_step_p50 = quantile(&steps, 0.5);
    cell.hit_step_p90 = quantile(&steps, 0.9);
    cell
}

/// Fraction of uniform `x ∈ [-y, y]` whose orbit comes within `1/|x|` of a pole within `⌊c₁ x²⌋` steps.
pub fn density_estimate(config: &ExperimentConfig) -> Result<DensityReport> {
    let c1 = parse_exact(&config.c1)?;
    sample_cells(config, &Budget::Quadratic(c1), "density")
}

/// As [`density_estimate`] with the budget `⌊|x| (ln |x|)²⌋`.
pub fn logsq_conjecture_probe(config: &ExperimentConfig) -> Result<DensityReport> {
    sample_cells(config, &Budget::LogSquared, "probe-logsq")
}

/// Descent of one far start to the pole region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingCell {
    pub x0: String,
    /// First step at which the orbit leaves the outer region beyond `β_m + 1` (or below `β_1 - 1`).
    pub steps: usize,
    /// Whether that iterate lies in `[β_1 - 1, β_m + 1]` rather than past it.
    pub entered: bool,
    pub exit_value: f64,
    /// `((x₀ - c)² - (x_exit - c)²) / steps`, `c` the α-weighted pole centre.
    pub descent_rate: f64,
    pub bits_used: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingSummary {
    pub exponent: Option<f64>,
    pub prefactor: Option<f64>,
    pub mean_descent_rate: f64,
    pub predicted_descent_rate: f64,
    /// `mean_descent_rate / predicted_descent_rate`.
    pub rate_ratio: f64,
}

pub type ScalingReport = ExperimentReport<ScalingCell, ScalingSummary>;

/// Steps from each `x₀` to the region `[β_1 - 1, β_m + 1]`, and the fitted exponent `p` in `steps ≈ A x₀^p`.
pub fn hitting_scaling_study(config: &ExperimentConfig) -> Result<ScalingReport> {
    config.validate()?;
    let started = Instant::now();
    let def = &config.map;
    let x0s = config.parsed_values()?;
    let lo_edge = rug::Rational::from(&def.betas()[0] - 1u32);
    let hi_edge = rug::Rational::from(&def.betas()[def.m() - 1] + 1u32);
    let threshold = def.approach_threshold();
    let far_hi = rug::Rational::from(&def.betas()[def.m() - 1] + &threshold);
    let far_lo = rug::Rational::from(&def.betas()[0] - &threshold);
    for (i, x0) in x0s.iter().enumerate() {
        if !(*x0 > far_hi || *x0 < far_lo) {
            return Err(Error::invariant(
                "values",
                format!(
                    "x0[{i}] = {} must lie beyond {} or below {}",
                    config.values[i],
                    far_hi.to_f64(),
                    far_lo.to_f64()
                ),
            ));
        }
    }
    let centre = def.pole_center().to_f64();
    let cells = x0s
        .par_iter()
        .zip(&config.values)
        .map(|(x0, text)| {
            let positive = *x0 > 0;
            let outcome = with_adaptive_precision::<BigFloat, _>(def, &config.policy, config.max_bits, |spec, p| {
                let start = spec.scalar(x0);
                let lo = spec.scalar(&lo_edge);
                let hi = spec.scalar(&hi_edge);
                let (_, d0) = spec.nearest_pole(&start);
                let cap = crate::orbit::descent_step_cap(spec, &d0);
                let (step, tracker) = scan(spec, &start, cap, p, |_, x| if positive { *x <= hi } else { *x >= lo })?;
                let step = step.ok_or(Error::BudgetExceeded {
                    what: "descent steps",
                    requested: cap as u128 + 1,
                    limit: cap as u128,
                })?;
                let exit = tracker.x.clone();
                Ok((step, exit.clone() >= lo && exit <= hi, exit.to_f64()))
            });
            let ((steps, entered, exit_value), bits_used) = outcome?;
            let x0f = x0.to_f64();
            let drop = (x0f - centre).powi(2) - (exit_value - centre).powi(2);
            Ok(ScalingCell {
                x0: text.clone(),
                steps,
                entered,
                exit_value,
                descent_rate: drop / steps as f64,
                bits_used,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = x0s
        .iter()
        .zip(&cells)
        .map(|(x0, c)| ((x0.to_f64() - centre).abs(), c.steps as f64))
        .collect();
    let fit = loglog_fit(&points);
    let predicted = 2.0 * def.alpha_sum().to_f64();
    let mean_rate = cells.iter().map(|c| c.descent_rate).sum::<f64>() / cells.len() as f64;
    let mut constants = BTreeMap::new();
    constants.insert("region".into(), format!("[{}, {}]", lo_edge.to_f64(), hi_edge.to_f64()));
    constants.insert("pole_center".into(), centre.to_string());
    constants.insert("approach_threshold".into(), threshold.to_f64().to_string());
    Ok(ExperimentReport {
        experiment: "scaling".into(),
        config: echo(config),
        constants,
        cells,
        summary: ScalingSummary {
            exponent: fit.map(|f| f.0),
            prefactor: fit.map(|f| f.1),
            mean_descent_rate: mean_rate,
            predicted_descent_rate: predicted,
            rate_ratio: mean_rate / predicted,
        },
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Parameters of a disjointness sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisjointnessConfig {
    pub map: MapDef,
    pub eps: Vec<String>,
    pub k_max: usize,
    pub policy: PrecisionPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisjointnessCell {
    pub eps: String,
    pub k_max: usize,
    /// Largest `w` with `I_k ∩ I_l = ∅` whenever `0 < |k - l| ≤ w`.
    pub window: usize,
    /// `true` when every pair up to `k_max` is disjoint, so the true window may be larger.
    pub saturated: bool,
    pub intervals_at_k_max: usize,
    pub merge_events: usize,
    /// `max_k | |I_k| - |I₀| |`.
    pub max_measure_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisjointnessSummary {
    /// Windows never shrink as `eps` decreases.
    pub monotone: bool,
    /// Disjointness matrices, one per `eps` in input order (`1` = disjoint).
    pub matrices: Vec<Vec<Vec<u8>>>,
}

pub type DisjointnessReport = ExperimentReport<DisjointnessCell, DisjointnessSummary>;

/// Pullbacks to `k_max` for each `eps`, and the resulting disjointness windows.
pub fn disjointness_sweep(config: &DisjointnessConfig) -> Result<DisjointnessReport> {
    if config.policy.is_exact() {
        return Err(Error::invariant("policy", "sweeps run in big_float mode"));
    }
    config.policy.validate()?;
    if config.eps.is_empty() {
        return Err(Error::invariant("eps", "at least one value is required"));
    }
    let started = Instant::now();
    let eps0 = config.map.epsilon0();
    let eps_values: Vec<rug::Rational> = config.eps.iter().map(|e| parse_exact(e)).collect::<std::result::Result<_, _>>()?;
    for e in &eps_values {
        if *e <= 0 || *e >= eps0 {
            return Err(Error::EpsilonTooLarge {
                eps: e.to_f64().to_string(),
                limit: eps0.to_f64().to_string(),
            });
        }
    }
    let spec: MapSpec<BigFloat> = config.map.instantiate(config.policy.bits())?;
    let mut cells = Vec::new();
    let mut matrices = Vec::new();
    for (e, text) in eps_values.iter().zip(&config.eps) {
        let eps = spec.scalar(e);
        let levels = pullback(&spec, &eps, config.k_max, &config.policy)?;
        let matrix = pairwise_disjoint(&levels);
        let window = disjointness_window(&matrix);
        let base = levels[0].measure().clone();
        let drift = levels
            .iter()
            .map(|l| (l.measure().clone() - base.clone()).abs().to_f64())
            .fold(0.0, f64::max);
        cells.push(DisjointnessCell {
            eps: text.clone(),
            k_max: config.k_max,
            window,
            saturated: window == config.k_max,
            intervals_at_k_max: levels[config.k_max].len(),
            merge_events: levels.iter().map(|l| l.merge_events().len()).sum(),
            max_measure_drift: drift,
        });
        matrices.push(matrix.iter().map(|row| row.iter().map(|&d| u8::from(d)).collect()).collect());
    }
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| eps_values[b].cmp(&eps_values[a]));
    let monotone = order.windows(2).all(|w| cells[w[1]].window >= cells[w[0]].window);
    let mut constants = BTreeMap::new();
    constants.insert("epsilon0".into(), eps0.to_f64().to_string());
    Ok(ExperimentReport {
        experiment: "disjoint".into(),
        config: echo(config),
        constants,
        cells,
        summary: DisjointnessSummary { monotone, matrices },
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Parameters of the itinerary checks for the single-pole map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugacyConfig {
    pub seed: u64,
    pub samples: usize,
    pub lo: String,
    pub hi: String,
    /// Verified steps per itinerary.
    pub steps: usize,
    /// Bits in the angle read-out.
    pub theta_bits: usize,
    pub policy: PrecisionPolicy,
    #[serde(default = "default_max_bits")]
    pub max_bits: u32,
}

impl Default for ConjugacyConfig {
    fn default() -> Self {
        ConjugacyConfig {
            seed: 42,
            samples: 100,
            lo: "-3".into(),
            hi: "3".into(),
            steps: 200,
            theta_bits: 30,
            policy: PrecisionPolicy::for_steps(200),
            max_bits: DEFAULT_MAX_BITS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugacyCell {
    pub index: usize,
    pub x0: f64,
    /// `false` when the seed was excluded (pole landing or precision exhausted).
    pub evaluated: bool,
    pub ones_fraction: f64,
    pub monobit_pass: bool,
    /// Itinerary of `f(x₀)` equals the itinerary of `x₀` shifted by one.
    pub shift_commutes: bool,
    /// `θ̂(x₀)` from `theta_bits` itinerary bits.
    pub theta: f64,
    /// `|θ̂(f(x₀)) - (2θ̂(x₀) mod 1)|`.
    pub theta_doubling_error: f64,
    pub bits_used: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugacySummary {
    pub evaluated: usize,
    pub excluded: usize,
    pub shift_commutes_all: bool,
    pub max_theta_doubling_error: f64,
    pub theta_tolerance: f64,
    pub monobit_passes: usize,
}

pub type ConjugacyReport = ExperimentReport<ConjugacyCell, ConjugacySummary>;

/// Observable consequences of the conjugacy of `x - 1/x` with angle doubling.
pub fn conjugacy_check(config: &ConjugacyConfig) -> Result<ConjugacyReport> {
    if config.samples == 0 || config.steps == 0 || config.theta_bits == 0 || config.theta_bits > config.steps {
        return Err(Error::invariant(
            "conjugacy",
            "samples and steps must be positive and theta_bits at most steps",
        ));
    }
    if config.policy.is_exact() {
        return Err(Error::invariant("policy", "itinerary checks run in big_float mode"));
    }
    config.policy.validate()?;
    let started = Instant::now();
    let def = MapDef::graham();
    let lo = parse_exact(&config.lo)?.to_f64();
    let hi = parse_exact(&config.hi)?.to_f64();
    if !(lo < hi) {
        return Err(Error::invariant("range", "lo must be below hi"));
    }
    let n = config.steps;
    let tb = config.theta_bits;
    let cells: Vec<ConjugacyCell> = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let x = uniform_sample(config.seed, 0, i, lo, hi);
            let outcome = with_adaptive_precision::<BigFloat, _>(&def, &config.policy, config.max_bits, |spec, p| {
                let x0 = spec.scalar(&x);
                let bits = itinerary(spec, &x0, n, p)?;
                let fx = spec.eval(&x0)?;
                let shifted = itinerary(spec, &fx, n - 1, p)?;
                Ok((bits, shifted))
            });
            let mut cell = ConjugacyCell {
                index: i,
                x0: x.to_f64(),
                evaluated: false,
                ones_fraction: 0.0,
                monobit_pass: false,
                shift_commutes: false,
                theta: 0.0,
                theta_doubling_error: 0.0,
                bits_used: 0,
            };
            if let Ok(((bits, shifted), used)) = outcome {
                let body = &bits[..n];
                let ones = body.iter().filter(|&&b| b == 1).count() as f64 / n as f64;
                let theta = theta_from_bits(&bits[..tb]);
                let theta_f = theta_from_bits(&shifted[..tb]);
                let doubled = (2.0 * theta).fract();
                cell.evaluated = true;
                cell.ones_fraction = ones;
                cell.monobit_pass = (0.40..=0.60).contains(&ones);
                cell.shift_commutes = shifted[..] == bits[1..];
                cell.theta = theta;
                cell.theta_doubling_error = (theta_f - doubled).abs();
                cell.bits_used = used;
            }
            cell
        })
        .collect();
    let evaluated: Vec<&ConjugacyCell> = cells.iter().filter(|c| c.evaluated).collect();
    let summary = ConjugacySummary {
        evaluated: evaluated.len(),
        excluded: cells.len() - evaluated.len(),
        shift_commutes_all: evaluated.iter().all(|c| c.shift_commutes),
        max_theta_doubling_error: evaluated.iter().map(|c| c.theta_doubling_error).fold(0.0, f64::max),
        theta_tolerance: 0.5f64.powi(tb as i32),
        monobit_passes: evaluated.iter().filter(|c| c.monobit_pass).count(),
    };
    let mut constants = BTreeMap::new();
    constants.insert("itinerary".into(), "b_k = 1 iff x_k < 0".into());
    constants.insert("monobit_band".into(), "[0.40, 0.60]".into());
    Ok(ExperimentReport {
        experiment: "conjugacy".into(),
        config: echo(config),
        constants,
        cells,
        summary,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_order_independent() {
        let a: Vec<f64> = (0..5).map(|i| unit_draw(7, 1, i)).collect();
        let b: Vec<f64> = (0..5).rev().map(|i| unit_draw(7, 1, i)).collect();
        assert_eq!(a, b.into_iter().rev().collect::<Vec<_>>());
        assert_ne!(unit_draw(7, 1, 0), unit_draw(7, 2, 0));
        assert_ne!(unit_draw(7, 1, 0), unit_draw(8, 1, 0));
        assert!((0..100).all(|i| (0.0..1.0).contains(&unit_draw(1, 0, i))));
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.2775).abs() < 1e-3);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    #[test]
    fn quantiles_are_monotone() {
        let v = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
        assert_eq!(quantile(&v, 0.1), Some(1));
        assert_eq!(quantile(&v, 0.5), Some(5));
        assert_eq!(quantile(&v, 0.9), Some(9));
        assert_eq!(quantile(&[], 0.5), None);
    }

    #[test]
    fn loglog_recovers_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 20.0, 40.0].iter().map(|&x: &f64| (x, 3.0 * x.powf(1.5))).collect();
        let (p, a) = loglog_fit(&pts).unwrap();
        assert!((p - 1.5).abs() < 1e-12 && (a - 3.0).abs() < 1e-9);
        assert!(loglog_fit(&pts[..1]).is_none());
    }

    #[test]
    fn budget_formulas() {
        let e = rug::Rational::from_f64(std::f64::consts::E).unwrap();
        assert_eq!(Budget::LogSquared.steps(&e), 2);
        let c1 = parse_exact("2").unwrap();
        assert_eq!(Budget::Quadratic(c1).steps(&rug::Rational::from((3, 2))), 4);
        let tiny = parse_exact("0.001").unwrap();
        assert_eq!(Budget::Quadratic(tiny).steps(&rug::Rational::from(10)), 0);
    }

    #[test]
    fn tiny_c1_gives_zero_fraction() {
        let mut config = ExperimentConfig::new(MapDef::graham(), 1, 50, &["5"]);
        config.c1 = "0.001".into();
        let report = density_estimate(&config).unwrap();
        assert_eq!(report.cells[0].members, 0);
        assert_eq!(report.cells[0].fraction, 0.0);
    }

    #[test]
    fn small_x_usually_hits_quickly() {
        let config = ExperimentConfig::new(MapDef::graham(), 3, 200, &["1"]);
        let report = density_estimate(&config).unwrap();
        let cell = &report.cells[0];
        let eligible = (0..200)
            .filter(|&i| uniform_sample(3, 0, i, -1.0, 1.0).to_f64().abs() > 0.75)
            .count();
        assert!(cell.members as f64 >= 0.9 * eligible as f64, "{cell:?}");
        assert!(cell.hit_step_p90.unwrap() <= 3);
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::new(MapDef::graham(), 1, 0, &["1"]);
        assert!(c.validate().is_err());
        c.samples = 1;
        c.c1 = "-1".into();
        assert!(c.validate().is_err());
        c.c1 = "2".into();
        c.policy = PrecisionPolicy::exact();
        assert!(c.validate().is_err());
        let json = serde_json::to_string(&ExperimentConfig::new(MapDef::graham(), 1, 1, &["1"])).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.values, vec!["1".to_string()]);
    }

    #[test]
    fn graham_scaling_examples() {
        let config = ExperimentConfig::new(MapDef::graham(), 0, 1, &["10", "20", "1.1"]);
        let report = hitting_scaling_study(&config).unwrap();
        let s10 = report.cells[0].steps as f64;
        let s20 = report.cells[1].steps as f64;
        assert!((s10 - 49.5).abs() <= 5.0, "{s10}");
        assert!((s20 - 199.5).abs() <= 10.0, "{s20}");
        assert!(report.cells[2].steps <= 5);
        assert!(report.cells.iter().all(|c| c.entered));
        let bad = ExperimentConfig::new(MapDef::graham(), 0, 1, &["0.5"]);
        assert!(hitting_scaling_study(&bad).is_err());
    }

    #[test]
    fn doubled_alpha_descends_twice_as_fast() {
        let def = MapDef::parse(&["2"], &["0"]).unwrap();
        let config = ExperimentConfig::new(def, 0, 1, &["20"]);
        let report = hitting_scaling_study(&config).unwrap();
        let steps = report.cells[0].steps as f64;
        assert!((steps - 99.75).abs() <= 8.0, "{steps}");
    }

    #[test]
    fn sweep_refuses_large_eps() {
        let config = DisjointnessConfig {
            map: MapDef::graham(),
            eps: vec!["0.3".into()],
            k_max: 3,
            policy: PrecisionPolicy::big_float(256).unwrap(),
        };
        assert!(matches!(disjointness_sweep(&config), Err(Error::EpsilonTooLarge { .. })));
    }

    #[test]
    fn report_serializations() {
        let config = ExperimentConfig::new(MapDef::graham(), 5, 20, &["2"]);
        let report = density_estimate(&config).unwrap();
        let payload = report.payload_json();
        assert!(!payload.contains("wall_time"));
        assert!(report.to_json().contains("wall_time_secs"));
        let csv = report.to_csv().unwrap();
        assert!(csv.starts_with("y,samples,members"));
        assert_eq!(csv.lines().count(), 2);
    }
}
